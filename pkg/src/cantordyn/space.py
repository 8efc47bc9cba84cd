"""Concrete model of the Cantor set and its clopen algebra.

Points are streams of digits, with the digit at level t drawn from
{0, ..., lambda_t - 1} for an eventually periodic sequence of level sizes
(lambda_t).  Clopen sets are finite unions of cylinders kept in a canonical
form (prefix-free, no complete sibling family, lexicographically sorted), so
set equality is tuple equality.

The metric is fixed once and for all as d(x, y) = 2^-(first differing level)
independent of the level sizes; every metric quantity in the library is
therefore a dyadic rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
import itertools

Word = tuple  # tuple of ints, one digit per level


@dataclass(frozen=True)
class Signature:
    """Eventually periodic sequence of level sizes lambda_t >= 2."""

    preperiod: tuple = ()
    period: tuple = (2,)

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        for x in self.preperiod + self.period:
            if not isinstance(x, int) or x < 2:
                raise ValueError("every level size must be an integer >= 2")

    def level(self, t):
        """lambda_t."""
        if t < len(self.preperiod):
            return self.preperiod[t]
        return self.period[(t - len(self.preperiod)) % len(self.period)]

    def num_words(self, t):
        """Number of depth-t words (the product lambda_0 ... lambda_{t-1})."""
        n = 1
        for s in range(t):
            n *= self.level(s)
        return n

    def shift(self, n=1):
        """The signature seen from depth n."""
        if n == 0:
            return self
        if n <= len(self.preperiod):
            return Signature(self.preperiod[n:], self.period)
        r = (n - len(self.preperiod)) % len(self.period)
        return Signature((), self.period[r:] + self.period[:r])

    def valid_word(self, w):
        return all(0 <= d < self.level(t) for t, d in enumerate(w))

    def words(self, t):
        """All depth-t words in lexicographic order."""
        ranges = [range(self.level(s)) for s in range(t)]
        return [tuple(w) for w in itertools.product(*ranges)]

    def index(self, w):
        """Mixed-radix value of a word, level 0 least significant."""
        n, place = 0, 1
        for t, d in enumerate(w):
            n += d * place
            place *= self.level(t)
        return n

    def word_of_index(self, n, t):
        """Inverse of index at depth t (n taken mod the number of words)."""
        n %= self.num_words(t)
        digits = []
        for s in range(t):
            lam = self.level(s)
            digits.append(n % lam)
            n //= lam
        return tuple(digits)

    def state_period(self):
        """Number of depths after the preperiod before shift() repeats."""
        return len(self.period)


DYADIC = Signature()


def is_prefix(u, w):
    return len(u) <= len(w) and w[: len(u)] == u


def lcp_len(u, w):
    n = 0
    for a, b in zip(u, w):
        if a != b:
            break
        n += 1
    return n


def canonical_words(sig, words):
    """Canonical form of a union of cylinders.

    Drops words shadowed by a prefix, then merges complete sibling families
    until none remain.
    """
    ws = sorted(set(map(tuple, words)), key=lambda w: (len(w), w))
    kept = []
    for w in ws:
        if not any(is_prefix(u, w) for u in kept):
            kept.append(w)
    ws = set(kept)
    changed = True
    while changed:
        changed = False
        for w in sorted(ws, key=len, reverse=True):
            if not w or w not in ws:
                continue
            parent = w[:-1]
            lam = sig.level(len(parent))
            family = [parent + (d,) for d in range(lam)]
            if all(f in ws for f in family):
                ws.difference_update(family)
                ws.add(parent)
                changed = True
    return tuple(sorted(ws))


@dataclass(frozen=True)
class Clopen:
    """Canonical clopen subset: a prefix-free, sibling-merged word list."""

    sig: Signature
    words: tuple

    @staticmethod
    def make(sig, words):
        return Clopen(sig, canonical_words(sig, words))

    @staticmethod
    def empty(sig):
        return Clopen(sig, ())

    @staticmethod
    def full(sig):
        return Clopen(sig, ((),))

    @staticmethod
    def cylinder(sig, w):
        if not sig.valid_word(tuple(w)):
            raise ValueError(f"digits out of range for signature: {w}")
        return Clopen(sig, (tuple(w),))

    @property
    def is_empty(self):
        return not self.words

    @property
    def is_full(self):
        return self.words == ((),)

    def _check(self, other):
        if self.sig != other.sig:
            raise ValueError("signature mismatch")

    def restrict(self, d):
        """The part under child d of the root, as a Clopen over shift(1)."""
        sub = []
        for w in self.words:
            if not w:
                return Clopen.full(self.sig.shift())
            if w[0] == d:
                sub.append(w[1:])
        return Clopen(self.sig.shift(), tuple(sorted(sub)))

    def _binary(self, other, f):
        self._check(other)
        return _binop(self.sig, self, other, f)

    def __or__(self, other):
        return self._binary(other, "union")

    def __and__(self, other):
        return self._binary(other, "inter")

    def __sub__(self, other):
        return self._binary(other, "diff")

    def complement(self):
        return Clopen.full(self.sig) - self

    def __xor__(self, other):
        return (self - other) | (other - self)

    def __le__(self, other):
        return (self - other).is_empty

    def __contains__(self, point):
        return point.in_clopen(self)

    def contains_word(self, w):
        """Whether the cylinder of w lies inside this set."""
        return any(is_prefix(u, w) for u in self.words)

    def meets_word(self, w):
        return any(is_prefix(u, w) or is_prefix(w, u) for u in self.words)

    def diameter(self):
        if self.is_empty:
            raise ValueError("diameter of empty set")
        if len(self.words) == 1:
            return Fraction(1, 2 ** len(self.words[0]))
        k = len(self.words[0])
        common = self.words[0]
        for w in self.words[1:]:
            k = min(k, lcp_len(common, w))
            common = common[:k]
        return Fraction(1, 2**k)

    def dist(self, other):
        """inf d(a, b) over points a in self, b in other."""
        self._check(other)
        if self.is_empty or other.is_empty:
            raise ValueError("distance to empty set")
        best = None
        for a in self.words:
            for b in other.words:
                if is_prefix(a, b) or is_prefix(b, a):
                    return Fraction(0)
                v = Fraction(1, 2 ** lcp_len(a, b))
                if best is None or v < best:
                    best = v
        return best

    def at_depth(self, t):
        """All depth-t words whose cylinders lie inside the set.

        Requires every word to have length <= t.
        """
        out = []
        for w in self.words:
            if len(w) > t:
                raise ValueError("set has structure below requested depth")
            tails = self.sig.shift(len(w)).words(t - len(w))
            out.extend(w + tail for tail in tails)
        return sorted(out)

    def split(self, m):
        """Deterministic split into m nonempty disjoint parts with union self.

        Expands the lexicographically last cylinder into its children until at
        least m cylinders exist, then keeps the first m-1 as singleton parts
        and merges the tail into the final part.
        """
        if self.is_empty:
            raise ValueError("cannot split empty set")
        if m < 1:
            raise ValueError("m must be >= 1")
        ws = list(self.words)
        while len(ws) < m:
            ws.sort()
            last = ws.pop()
            lam = self.sig.level(len(last))
            ws.extend(last + (d,) for d in range(lam))
        ws.sort()
        parts = [Clopen(self.sig, (w,)) for w in ws[: m - 1]]
        parts.append(Clopen.make(self.sig, ws[m - 1 :]))
        return parts

    def pretty(self):
        if self.is_empty:
            return "{}"
        return "{" + ", ".join(format_word(self.sig, w) for w in self.words) + "}"

    def __repr__(self):
        return f"Clopen{self.pretty()}"


def _binop(sig, A, B, op):
    a_full, a_empty = A.is_full, A.is_empty
    b_full, b_empty = B.is_full, B.is_empty
    if op == "union":
        if a_full or b_full:
            return Clopen.full(sig)
        if a_empty:
            return B
        if b_empty:
            return A
    elif op == "inter":
        if a_empty or b_empty:
            return Clopen.empty(sig)
        if a_full:
            return B
        if b_full:
            return A
    elif op == "diff":
        if a_empty or b_full:
            return Clopen.empty(sig)
        if b_empty:
            return A
    words = []
    for d in range(sig.level(0)):
        child = _binop(sig.shift(), A.restrict(d), B.restrict(d), op)
        words.extend((d,) + w for w in child.words)
    return Clopen.make(sig, words)


def partition_at_depth(sig, t):
    """The canonical depth-t cylinder partition, in lexicographic order."""
    return [Clopen(sig, (w,)) for w in sig.words(t)]


def cyclic_partition(sig, t):
    """The depth-t partition in mixed-radix (adding-machine) order."""
    n = sig.num_words(t)
    return [Clopen(sig, (sig.word_of_index(i, t),)) for i in range(n)]


def is_partition(sets):
    """Exact check: pairwise disjoint with union the whole space."""
    if not sets:
        return False
    sig = sets[0].sig
    acc = Clopen.empty(sig)
    for s in sets:
        if not (acc & s).is_empty:
            return False
        acc = acc | s
    return acc.is_full


def format_word(sig, w):
    if not w:
        return "e"
    if all(sig.level(t) <= 10 for t in range(len(w))):
        return "".join(str(d) for d in w)
    return ".".join(str(d) for d in w)


@dataclass(frozen=True)
class Point:
    """Eventually periodic digit stream head . (cycle)^infinity."""

    sig: Signature
    head: tuple
    cycle: tuple

    @staticmethod
    def make(sig, head, cycle):
        head, cycle = tuple(head), tuple(cycle)
        if not cycle:
            raise ValueError("cycle must be nonempty")
        # validity: digits in range at every level the stream ever occupies
        horizon = len(head) + lcm(len(cycle), sig.state_period()) + len(sig.preperiod)
        probe = Point(sig, head, cycle)
        for t in range(horizon + 1):
            if not 0 <= probe.digit(t) < sig.level(t):
                raise ValueError(f"digit out of range at level {t}")
        # minimal period
        n = len(cycle)
        for p in range(1, n):
            if n % p == 0 and cycle == cycle[p:] + cycle[:p]:
                cycle = cycle[:p]
                break
        # minimal preperiod: absorb trailing head digits into the cycle when
        # the rotated cycle stays valid at the earlier position
        while head:
            rotated = (cycle[-1],) + cycle[:-1]
            candidate = Point(sig, head[:-1], rotated)
            if head[-1] != cycle[-1]:
                break
            t0 = len(head) - 1
            horizon2 = lcm(len(rotated), sig.state_period()) + len(sig.preperiod)
            ok = all(
                0 <= candidate.digit(t0 + i) < sig.level(t0 + i)
                for i in range(horizon2 + 1)
            )
            if not ok:
                break
            head, cycle = head[:-1], rotated
        return Point(sig, head, cycle)

    def digit(self, t):
        if t < len(self.head):
            return self.head[t]
        return self.cycle[(t - len(self.head)) % len(self.cycle)]

    def digits(self, n):
        return tuple(self.digit(t) for t in range(n))

    def drop(self, n):
        """The tail stream from level n, as a Point over the shifted signature."""
        if n <= len(self.head):
            return Point.make(self.sig.shift(n), self.head[n:], self.cycle)
        k = (n - len(self.head)) % len(self.cycle)
        return Point.make(self.sig.shift(n), (), self.cycle[k:] + self.cycle[:k])

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        if self.sig != other.sig:
            return False
        n = max(len(self.head), len(other.head)) + lcm(
            len(self.cycle), len(other.cycle)
        )
        return self.digits(n) == other.digits(n)

    def __hash__(self):
        # hash via canonical form; make() already minimized head and cycle
        return hash((self.sig, self.head, self.cycle))

    def in_clopen(self, A):
        if A.sig != self.sig:
            raise ValueError("signature mismatch")
        return any(self.digits(len(w)) == w for w in A.words)

    def pretty(self):
        sep = "." if any(
            self.sig.level(t) > 10
            for t in range(len(self.head) + len(self.cycle))
        ) else ""
        h = sep.join(str(d) for d in self.head)
        c = sep.join(str(d) for d in self.cycle)
        return f"{h}({c})"

    def __repr__(self):
        return f"Point[{self.pretty()}]"


def point_with_prefix(sig, w, tail):
    """The point w . tail over signature sig (tail lives at depth len(w))."""
    return Point.make(sig, tuple(w) + tail.head, tail.cycle)


def point_distance(x, y):
    if x.sig != y.sig:
        raise ValueError("signature mismatch")
    n = max(len(x.head), len(y.head)) + lcm(len(x.cycle), len(y.cycle))
    for t in range(n):
        if x.digit(t) != y.digit(t):
            return Fraction(1, 2**t)
    return Fraction(0)
