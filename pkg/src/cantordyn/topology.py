"""Neighborhood predicates, defect functionals, and the weak metric.

Membership in a neighborhood is decided exactly whenever both operands
resolve to exact maps; for set-level tower systems the weak distance is a
certified interval and a ball test straddled by the interval reports
indeterminate-at-depth instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .space import Clopen
from .measure import measure_of, open_diff_mass
from .homeo import (
    PrefixMap,
    TowerSystem,
    as_prefix_map,
    difference_set,
    weak_distance,
)

EXHAUSTIVE_ATOM_LIMIT = 20


@dataclass(frozen=True)
class PNeighborhood:
    base: object
    sets: tuple


@dataclass(frozen=True)
class UniformNeighborhood:
    base: object
    measures: tuple
    epsilon: Fraction


@dataclass(frozen=True)
class BarPNeighborhood:
    base: object
    sets: tuple
    measures: tuple
    epsilon: Fraction


@dataclass(frozen=True)
class WeakBall:
    base: object
    radius: Fraction


@dataclass(frozen=True)
class Membership:
    ok: bool
    certificate: dict


class IndeterminateAtDepth(Exception):
    """Interval comparison straddles the threshold at current resolution."""

    def __init__(self, interval):
        self.interval = interval
        super().__init__(f"indeterminate at depth: interval {interval}")


def weak_distance_interval(S, T):
    """Exact value as a degenerate interval, or a certified enclosure when a
    set-level tower system is involved."""
    towers = [h for h in (S, T) if isinstance(h, TowerSystem)]
    if not towers:
        v = weak_distance(S, T)
        return (v, v)
    return _tower_interval(S, T)


def _tower_interval(S, T):
    if isinstance(S, TowerSystem) and isinstance(T, TowerSystem):
        raise NotImplementedError("interval for two tower systems not supported")
    tower, other = (S, T) if isinstance(S, TowerSystem) else (T, S)
    other = as_prefix_map(other)
    lo = Fraction(0)
    hi = Fraction(0)
    lo_inv = Fraction(0)
    hi_inv = Fraction(0)
    cycle = tower.levels[-1]
    m = len(cycle)
    for i, atom in enumerate(cycle):
        nxt = cycle[(i + 1) % m]
        img = other.image(atom)
        lo = max(lo, img.dist(nxt))
        hi = max(hi, (img | nxt).diameter())
        prv = cycle[(i - 1) % m]
        pre = other.preimage(atom)
        lo_inv = max(lo_inv, pre.dist(prv))
        hi_inv = max(hi_inv, (pre | prv).diameter())
    return (lo + lo_inv, hi + hi_inv)


def in_neighborhood(S, N):
    """Exact membership with a certificate; raises IndeterminateAtDepth when
    only an interval straddling the threshold is available."""
    if isinstance(N, PNeighborhood):
        T = as_prefix_map(N.base)
        Sm = as_prefix_map(S)
        wrong = []
        for F in N.sets:
            if Sm.image(F) != T.image(F):
                wrong.append(F)
        return Membership(not wrong, {"mismatched_sets": wrong})
    if isinstance(N, UniformNeighborhood):
        E = difference_set(S, N.base)
        values = [open_diff_mass(mu, E) for mu in N.measures]
        return Membership(
            all(v < N.epsilon for v in values),
            {"difference_set": E, "measures_of_difference": values},
        )
    if isinstance(N, BarPNeighborhood):
        T = as_prefix_map(N.base)
        Sm = as_prefix_map(S)
        Si, Ti = Sm.inverse(), T.inverse()
        worst = Fraction(0)
        detail = []
        for F in N.sets:
            for mu in N.measures:
                v = measure_of(mu, Sm.image(F) ^ T.image(F)) + measure_of(
                    mu, Si.image(F) ^ Ti.image(F)
                )
                detail.append((F, v))
                worst = max(worst, v)
        return Membership(worst < N.epsilon, {"max_defect": worst, "detail": detail})
    if isinstance(N, WeakBall):
        lo, hi = weak_distance_interval(S, N.base)
        if hi < N.radius:
            return Membership(True, {"weak_distance": (lo, hi)})
        if lo >= N.radius:
            return Membership(False, {"weak_distance": (lo, hi)})
        raise IndeterminateAtDepth((lo, hi))
    raise TypeError(f"unknown neighborhood kind {type(N).__name__}")


def defect_over_partition(kind, S, T, mu, partition, allow_greedy=False):
    """Certified lower bound of the defect sup over unions of the atoms.

    kind "tau_prime" maximizes mu(TF ^ SF); kind "bar_tau" maximizes
    |mu(TF) - mu(SF)|.  Exhaustive up to EXHAUSTIVE_ATOM_LIMIT atoms; beyond
    that a greedy pass must be requested explicitly and the result is only a
    heuristic lower bound.
    """
    if kind not in ("tau_prime", "bar_tau"):
        raise ValueError("kind must be tau_prime or bar_tau")
    Sm, Tm = as_prefix_map(S), as_prefix_map(T)
    atoms = list(partition)
    simgs = [Sm.image(a) for a in atoms]
    timgs = [Tm.image(a) for a in atoms]

    def value(selection):
        sig = atoms[0].sig
        sf = Clopen.empty(sig)
        tf = Clopen.empty(sig)
        for i in selection:
            sf = sf | simgs[i]
            tf = tf | timgs[i]
        if kind == "tau_prime":
            return measure_of(mu, tf ^ sf)
        return abs(measure_of(mu, tf) - measure_of(mu, sf))

    n = len(atoms)
    if n <= EXHAUSTIVE_ATOM_LIMIT:
        best = Fraction(0)
        for mask in range(1 << n):
            sel = [i for i in range(n) if mask >> i & 1]
            best = max(best, value(sel))
        return best
    if not allow_greedy:
        raise ValueError(
            f"partition has more than {EXHAUSTIVE_ATOM_LIMIT} atoms; "
            "pass allow_greedy=True for a heuristic lower bound"
        )
    sel = []
    best = Fraction(0)
    improved = True
    while improved:
        improved = False
        for i in range(n):
            if i in sel:
                continue
            v = value(sel + [i])
            if v > best:
                best = v
                sel.append(i)
                improved = True
    return best


def limsup_check(sequence, F, horizon=None):
    """Whether F equals the union over m of the intersections of T_n F for
    n > m, at the finite horizon of the supplied sequence."""
    maps = [as_prefix_map(T) for T in sequence]
    if horizon is not None:
        maps = maps[:horizon]
    n = len(maps)
    if n < 2:
        raise ValueError("need at least two terms")
    sig = F.sig
    images = [m.image(F) for m in maps]
    acc = Clopen.empty(sig)
    for m in range(n - 1):
        inter = images[m + 1]
        for k in range(m + 2, n):
            inter = inter & images[k]
        acc = acc | inter
    return acc == F


def partition_gap(partition):
    """min over atoms of min(diameter, distance to the other atoms)."""
    vals = []
    for i, a in enumerate(partition):
        vals.append(a.diameter())
        for b in partition[i + 1 :]:
            vals.append(a.dist(b))
    return min(vals)
