"""Exact rational Borel probability measures on the Cantor model.

Three families, each exactly evaluable on clopen sets: product measures with
eventually periodic level weights, Dirac measures at eventually periodic
points, and finite convex mixtures of the other two.  No floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .space import Clopen, Point


def _check_weights(sig, rows, where):
    for t, row in enumerate(rows):
        if sum(row) != 1:
            raise ValueError(f"{where} weights at position {t} do not sum to 1")
        if any(w < 0 for w in row):
            raise ValueError(f"negative weight in {where} position {t}")


@dataclass(frozen=True)
class ProductMeasure:
    """Independent digits; weight rows eventually periodic like the signature.

    preweights[t] is the probability vector at level t for t < len(preweights);
    beyond that, cycleweights repeats.  Rows must match the level sizes, which
    forces len(preweights) and len(cycleweights) to be compatible with the
    signature's preperiod and period (checked on construction).
    """

    sig: object
    preweights: tuple = ()
    cycleweights: tuple = None

    @staticmethod
    def uniform(sig):
        pre = tuple(
            tuple(Fraction(1, sig.level(t)) for _ in range(sig.level(t)))
            for t in range(len(sig.preperiod))
        )
        cyc = tuple(
            tuple(
                Fraction(1, sig.level(len(sig.preperiod) + k))
                for _ in range(sig.level(len(sig.preperiod) + k))
            )
            for k in range(len(sig.period))
        )
        return ProductMeasure(sig, pre, cyc)

    @staticmethod
    def make(sig, preweights, cycleweights):
        pre = tuple(tuple(Fraction(x) for x in row) for row in preweights)
        cyc = tuple(tuple(Fraction(x) for x in row) for row in cycleweights)
        m = ProductMeasure(sig, pre, cyc)
        if len(pre) < len(sig.preperiod) or (len(pre) - len(sig.preperiod)) % len(
            sig.period
        ) or len(cyc) % len(sig.period):
            raise ValueError("weight rows misaligned with the signature period")
        horizon = len(pre) + len(cyc)
        for t in range(horizon):
            if len(m.row(t)) != sig.level(t):
                raise ValueError(f"weight row {t} has wrong length")
        _check_weights(sig, [m.row(t) for t in range(horizon)], "product")
        return m

    def row(self, t):
        if t < len(self.preweights):
            return self.preweights[t]
        return self.cycleweights[(t - len(self.preweights)) % len(self.cycleweights)]

    def word_mass(self, w):
        m = Fraction(1)
        for t, d in enumerate(w):
            m *= self.row(t)[d]
        return m

    def clopen_mass(self, A):
        return sum((self.word_mass(w) for w in A.words), Fraction(0))

    def point_mass(self, x):
        # nonzero only when the weight of every digit along the tail is 1
        from math import lcm

        head_len = max(len(x.head), len(self.preweights))
        m = Fraction(1)
        for t in range(head_len):
            m *= self.row(t)[x.digit(t)]
            if m == 0:
                return Fraction(0)
        span = lcm(len(x.cycle), len(self.cycleweights))
        for i in range(span):
            if self.row(head_len + i)[x.digit(head_len + i)] != 1:
                return Fraction(0)
        return m


@dataclass(frozen=True)
class Dirac:
    sig: object
    atom: Point

    def clopen_mass(self, A):
        return Fraction(1) if self.atom.in_clopen(A) else Fraction(0)

    def point_mass(self, x):
        return Fraction(1) if x == self.atom else Fraction(0)


@dataclass(frozen=True)
class Mixture:
    sig: object
    components: tuple  # of (Fraction weight, measure)

    @staticmethod
    def make(sig, components):
        comps = tuple((Fraction(w), m) for w, m in components)
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        if sum(w for w, _ in comps) != 1:
            raise ValueError("mixture weights must sum to 1")
        return Mixture(sig, comps)

    def clopen_mass(self, A):
        return sum((w * m.clopen_mass(A) for w, m in self.components), Fraction(0))

    def point_mass(self, x):
        return sum((w * m.point_mass(x) for w, m in self.components), Fraction(0))


def measure_of(mu, A):
    """Exact measure of a clopen set."""
    if mu.sig != A.sig:
        raise ValueError("signature mismatch")
    return mu.clopen_mass(A)


def point_mass(mu, x):
    if mu.sig != x.sig:
        raise ValueError("signature mismatch")
    return mu.point_mass(x)


def open_diff_mass(mu, E):
    """Measure of an OpenDiffSet: clopen core minus its exceptional points."""
    total = measure_of(mu, E.core)
    for x in E.removed:
        if x.in_clopen(E.core):
            total -= point_mass(mu, x)
    return total


def pushforward_measure_of(mu, S, A):
    """mu(S A), the pushforward of mu under S evaluated at A."""
    return measure_of(mu, S.image(A))
