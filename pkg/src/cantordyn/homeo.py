"""Homeomorphisms of the Cantor model with exact cylinder-level evaluation.

The workhorse representation is PrefixMap: a finite list of branches
(u, v, c) acting by  u . y  |->  v . (y + c),  where y + c is adding-machine
addition on the digit tail.  Pure prefix-exchange (tree-pair) maps are the
c = 0 case and the adding machine itself is the single branch (e, e, k).
The class is closed under composition and inversion, so group words in
tree-pair maps and odometers always resolve to an exact PrefixMap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .space import (
    Clopen,
    Point,
    Signature,
    canonical_words,
    is_prefix,
    lcp_len,
    point_with_prefix,
)


def point_add(x, k):
    """x + k in the adic group; exact on eventually periodic streams."""
    if k == 0:
        return x
    sig = x.sig
    out = []
    carry = k
    pos = 0
    seen = {}
    head_anchor = max(len(x.head), len(sig.preperiod))
    while True:
        if pos >= head_anchor:
            key = (
                (pos - len(x.head)) % len(x.cycle),
                (pos - len(sig.preperiod)) % len(sig.period),
                carry,
            )
            if key in seen:
                start = seen[key]
                return Point.make(sig, tuple(out[:start]), tuple(out[start:]))
            seen[key] = pos
        lam = sig.level(pos)
        d = x.digit(pos) + carry
        out.append(d % lam)
        carry = d // lam
        pos += 1


def _sstar(sig, c):
    """Largest s with (lambda_0 ... lambda_{s-1}) | c, for c != 0."""
    s = 0
    n = 1
    while True:
        n *= sig.level(s)
        if c % n:
            return s
        s += 1


@dataclass(frozen=True)
class PrefixMap:
    """Homeomorphism given by branches u . y |-> v . (y + c)."""

    sig: Signature
    branches: tuple  # of (u, v, c)

    @staticmethod
    def make(sig, branches, validate=True):
        brs = tuple(sorted((tuple(u), tuple(v), int(c)) for u, v, c in branches))
        m = PrefixMap(sig, brs)
        if validate:
            m._validate()
        return m.canonical()

    @staticmethod
    def identity(sig):
        return PrefixMap(sig, (((), (), 0),))

    @staticmethod
    def tree_pair(sig, pairs):
        """Pure prefix-exchange map from (domain word, range word) pairs."""
        return PrefixMap.make(sig, [(u, v, 0) for u, v in pairs])

    def _validate(self):
        sig = self.sig
        dom = [u for u, _, _ in self.branches]
        rng = [v for _, v, _ in self.branches]
        for ws, name in ((dom, "domain"), (rng, "range")):
            for i, a in enumerate(ws):
                for b in ws[i + 1 :]:
                    if is_prefix(a, b) or is_prefix(b, a):
                        raise ValueError(f"{name} words overlap: {a}, {b}")
            if canonical_words(sig, ws) != ((),):
                raise ValueError(f"{name} words do not cover the space")
        for u, v, c in self.branches:
            if not sig.valid_word(u) or not sig.valid_word(v):
                raise ValueError("branch word digits out of range")
            if sig.shift(len(u)) != sig.shift(len(v)):
                raise ValueError(
                    f"tail alphabets differ between {u} and {v}"
                )

    @property
    def is_tree_pair(self):
        return all(c == 0 for _, _, c in self.branches)

    def canonical(self):
        brs = set(self.branches)
        changed = True
        while changed:
            changed = False
            for u, v, c in sorted(brs, key=lambda b: (-len(b[0]), b[0])):
                if (u, v, c) not in brs or not u or not v:
                    continue
                if u[-1] != 0:
                    continue
                pu, pv = u[:-1], v[:-1]
                if self.sig.shift(len(pu)) != self.sig.shift(len(pv)):
                    continue
                lam = self.sig.level(len(pv))
                pc = c * lam + v[-1]
                family = [
                    (pu + (d,), pv + (((d + pc) % lam),), (d + pc) // lam)
                    for d in range(lam)
                ]
                if all(f in brs for f in family):
                    brs.difference_update(family)
                    brs.add((pu, pv, pc))
                    changed = True
        return PrefixMap(self.sig, tuple(sorted(brs)))

    # -- branch refinement ------------------------------------------------

    def _branch_for(self, w):
        """Branch whose domain word is comparable with w."""
        for u, v, c in self.branches:
            if is_prefix(u, w) or is_prefix(w, u):
                yield (u, v, c)

    def _refine_branch(self, br, w):
        """Restrict branch (u, v, c) to the deeper domain word w >= u."""
        u, v, c = br
        r = w[len(u) :]
        sub = self.sig.shift(len(u))
        n = sub.num_words(len(r))
        idx = sub.index(r) + c
        r2 = sub.word_of_index(idx, len(r))
        return (w, v + r2, idx // n if n else c)

    def refined_to(self, words):
        """Branches restricted to a finer domain cylinder partition."""
        out = []
        for w in words:
            for u, v, c in self._branch_for(w):
                if is_prefix(u, w):
                    out.append(self._refine_branch((u, v, c), w))
                else:
                    # w above the branch: keep the branch itself
                    out.append((u, v, c))
        return sorted(set(out))

    def max_domain_depth(self):
        return max((len(u) for u, _, _ in self.branches), default=0)

    def table(self, depth):
        """Branches refined so every domain word has the given depth."""
        if depth < self.max_domain_depth():
            raise ValueError("depth above an existing branch")
        return self.refined_to(self.sig.words(depth))

    # -- action ------------------------------------------------------------

    def image_word(self, w):
        """Exact image of the cylinder of w as a single (word) cylinder,
        when some branch domain word is a prefix of w; else None."""
        for u, v, c in self.branches:
            if is_prefix(u, w):
                return self._refine_branch((u, v, c), w)[1]
        return None

    def image(self, A):
        words = []
        for w in A.words:
            hit = False
            for u, v, c in self._branch_for(w):
                if is_prefix(u, w):
                    words.append(self._refine_branch((u, v, c), w)[1])
                    hit = True
                    break
            if not hit:
                for u, v, c in self._branch_for(w):
                    words.append(v)
        return Clopen.make(A.sig, words)

    def preimage(self, A):
        return self.inverse().image(A)

    def apply(self, x):
        for u, v, c in self.branches:
            if x.digits(len(u)) == u:
                tail = point_add(x.drop(len(u)), c)
                return point_with_prefix(self.sig, v, tail)
        raise RuntimeError("branches do not cover the point")

    # -- group structure ----------------------------------------------------

    def inverse(self):
        return PrefixMap(
            self.sig, tuple(sorted((v, u, -c) for u, v, c in self.branches))
        ).canonical()

    def after(self, other):
        """self o other (apply other first)."""
        if self.sig != other.sig:
            raise ValueError("signature mismatch")
        out = []
        for u1, v1, c1 in other.branches:
            for u2, v2, c2 in self.branches:
                if is_prefix(u2, v1):
                    # whole branch lands inside [u2]
                    r = v1[len(u2) :]
                    sub = self.sig.shift(len(u2))
                    n = sub.num_words(len(r))
                    idx = sub.index(r) + c2
                    r2 = sub.word_of_index(idx, len(r))
                    k = idx // n if n else c2
                    out.append((u1, v2 + r2, c1 + k))
                    break
            else:
                for u2, v2, c2 in self.branches:
                    if is_prefix(v1, u2) and len(u2) > len(v1):
                        r = u2[len(v1) :]
                        sub = self.sig.shift(len(v1))
                        n = sub.num_words(len(r))
                        idx0 = (sub.index(r) - c1) % n
                        rt = sub.word_of_index(idx0, len(r))
                        b = (idx0 + c1) // n
                        out.append((u1 + rt, v2, b + c2))
        return PrefixMap(self.sig, tuple(sorted(out))).canonical()

    def __mul__(self, other):
        return self.after(other)

    def power(self, n):
        if n == 0:
            return PrefixMap.identity(self.sig)
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = base.after(out)
        return out

    def __eq__(self, other):
        if not isinstance(other, PrefixMap):
            return NotImplemented
        return self.sig == other.sig and self.canonical().branches == other.canonical().branches

    def __hash__(self):
        return hash((self.sig, self.canonical().branches))

    def is_identity(self):
        return self.canonical().branches == (((), (), 0),)

    def pretty(self):
        from .space import format_word

        parts = []
        for u, v, c in self.branches:
            s = f"{format_word(self.sig, u)}->{format_word(self.sig, v)}"
            if c:
                s += f"{c:+d}"
            parts.append(s)
        return "{" + ", ".join(parts) + "}"

    def __repr__(self):
        return f"PrefixMap{self.pretty()}"


def common_refinement(S, T):
    """Branch pairs of S and T over a common domain cylinder partition.

    Returns a list of (w, (v1, c1), (v2, c2)).
    """
    depth = max(S.max_domain_depth(), T.max_domain_depth())
    ws = S.sig.words(depth)
    sb = {u: (v, c) for u, v, c in S.table(depth)}
    tb = {u: (v, c) for u, v, c in T.table(depth)}
    return [(w, sb[w], tb[w]) for w in ws]


def branch_sup_distance(sig, w, b1, b2):
    """sup over the cylinder of w of d(Sx, Tx) for refined images b1, b2."""
    (v1, c1), (v2, c2) = b1, b2
    if v1 == v2:
        if c1 == c2:
            return Fraction(0)
        sub = sig.shift(len(v1))
        return Fraction(1, 2 ** (len(v1) + _sstar(sub, c1 - c2)))
    k = lcp_len(v1, v2)
    if k < min(len(v1), len(v2)):
        return Fraction(1, 2**k)
    # comparable distinct words: sup attained at the first free digit
    return Fraction(1, 2 ** min(len(v1), len(v2)))


def sup_pointwise_distance(S, T):
    """sup_x d(Sx, Tx), exact, for PrefixMaps."""
    best = Fraction(0)
    for w, b1, b2 in common_refinement(S, T):
        best = max(best, branch_sup_distance(S.sig, w, b1, b2))
    return best


def _solve_agreement_point(sig, w, b1, b2):
    """The unique x in [w] with Sx = Tx when images are comparable distinct.

    Branch images v1.(y+c1) and v1.r.(y+c2) agree at the solution of
    z = r.(z+e); the carry recursion is eventually periodic.
    """
    (v1, c1), (v2, c2) = b1, b2
    if len(v1) > len(v2):
        (v1, c1), (v2, c2) = (v2, c2), (v1, c1)
    r = v2[len(v1) :]
    sub = sig.shift(len(v1))
    e = c2 - c1
    digits = []
    seen = {}
    cur_sub, cur_r, cur_e = sub, r, e
    pos = 0
    while True:
        key = (cur_sub, cur_r, cur_e)
        if key in seen:
            start = seen[key]
            z = Point.make(sub, tuple(digits[:start]), tuple(digits[start:]))
            break
        seen[key] = len(digits)
        n = cur_sub.num_words(len(cur_r))
        idx = cur_sub.index(cur_r) + cur_e
        nxt = cur_sub.word_of_index(idx, len(cur_r))
        digits.extend(cur_r)
        cur_e = idx // n
        cur_sub = cur_sub.shift(len(cur_r))
        cur_r = nxt
    y = point_add(z, -c1)
    return point_with_prefix(sig, w, y)


@dataclass(frozen=True)
class OpenDiffSet:
    """A clopen core minus finitely many eventually periodic points."""

    core: Clopen
    removed: tuple = ()

    @property
    def is_empty(self):
        # removing finitely many points never empties a nonempty clopen set
        return self.core.is_empty

    def contains(self, x):
        return x.in_clopen(self.core) and all(x != p for p in self.removed)

    def __repr__(self):
        if not self.removed:
            return f"OpenDiffSet({self.core.pretty()})"
        pts = ", ".join(p.pretty() for p in self.removed)
        return f"OpenDiffSet({self.core.pretty()} minus [{pts}])"


def _one_sided_difference(S, T):
    """Core and removed points of {x : Sx != Tx} for PrefixMaps."""
    sig = S.sig
    core_words = []
    removed = []
    for w, b1, b2 in common_refinement(S, T):
        (v1, c1), (v2, c2) = b1, b2
        if (v1, c1) == (v2, c2):
            continue
        k = lcp_len(v1, v2)
        if v1 == v2 or k < min(len(v1), len(v2)):
            core_words.append(w)  # maps differ at every point of the branch
        else:
            core_words.append(w)
            removed.append(_solve_agreement_point(sig, w, b1, b2))
    return Clopen.make(sig, core_words), removed


def difference_set(S, T):
    """E(S, T): where the maps differ or their inverses differ."""
    S, T = as_prefix_map(S), as_prefix_map(T)
    fwd_core, fwd_removed = _one_sided_difference(S, T)
    inv_core, inv_removed = _one_sided_difference(S.inverse(), T.inverse())
    core = fwd_core | inv_core
    removed = []
    for x in {*fwd_removed, *inv_removed}:
        in_fwd = x.in_clopen(fwd_core) and all(x != p for p in fwd_removed)
        in_inv = x.in_clopen(inv_core) and all(x != p for p in inv_removed)
        if not in_fwd and not in_inv and x.in_clopen(core):
            removed.append(x)
    return OpenDiffSet(core, tuple(sorted(removed, key=lambda p: (p.head, p.cycle))))


def weak_distance(S, T):
    """d_w(S, T) = sup d(Sx, Tx) + sup d(S~x, T~x), exact for PrefixMaps."""
    S, T = as_prefix_map(S), as_prefix_map(T)
    return sup_pointwise_distance(S, T) + sup_pointwise_distance(
        S.inverse(), T.inverse()
    )


# -- named variants ----------------------------------------------------------


@dataclass(frozen=True)
class Odometer:
    """The adding machine x |-> x + k on the mixed-radix digit group."""

    sig: Signature
    shift: int = 1

    def as_map(self):
        return PrefixMap(self.sig, (((), (), self.shift),))

    def power(self, n):
        return Odometer(self.sig, self.shift * n)

    def inverse(self):
        return Odometer(self.sig, -self.shift)


@dataclass
class Composite:
    """Formal word in other homeomorphisms; resolves lazily and exactly."""

    factors: tuple  # applied right to left

    def as_map(self):
        if not hasattr(self, "_resolved"):
            maps = [as_prefix_map(f) for f in self.factors]
            out = maps[-1]
            for m in reversed(maps[:-1]):
                out = m.after(out)
            self._resolved = out
        return self._resolved


def as_prefix_map(h):
    if isinstance(h, PrefixMap):
        return h
    if isinstance(h, (Odometer, Composite)):
        return h.as_map()
    if hasattr(h, "as_map"):
        return h.as_map()
    raise TypeError(f"cannot resolve {type(h).__name__} to an exact map")


def compose(S, T):
    """S o T.  Exact PrefixMap unless a set-level tower system is involved."""
    if isinstance(S, Odometer) and isinstance(T, Odometer) and S.sig == T.sig:
        return Odometer(S.sig, S.shift + T.shift)
    return as_prefix_map(S).after(as_prefix_map(T))


def inverse(T):
    if isinstance(T, Odometer):
        return T.inverse()
    return as_prefix_map(T).inverse()


def power(T, n):
    if isinstance(T, Odometer):
        return T.power(n)
    return as_prefix_map(T).power(n)


def tabulate(T, depth):
    """Depth-t domain cylinders with their exact image clopen sets."""
    m = as_prefix_map(T)
    out = []
    for u, v, c in m.table(depth):
        out.append((Clopen(m.sig, (u,)), Clopen(m.sig, (v,))))
    return out


# -- fixed and periodic structure ---------------------------------------------


def fixed_points(T):
    """Clopen fixed part and isolated fixed points of an exact map."""
    m = as_prefix_map(T)
    ident = PrefixMap.identity(m.sig)
    fixed_words = []
    isolated = []
    for w, b1, b2 in common_refinement(m, ident):
        (v1, c1), (v2, c2) = b1, b2
        if (v1, c1) == (v2, c2):
            fixed_words.append(w)
            continue
        k = lcp_len(v1, v2)
        if v1 != v2 and k == min(len(v1), len(v2)):
            isolated.append(_solve_agreement_point(m.sig, w, b1, b2))
    return Clopen.make(m.sig, fixed_words), sorted(
        isolated, key=lambda p: (p.head, p.cycle)
    )


def period_structure(T, max_power):
    """Exact-period clopen parts and isolated periodic points up to a bound."""
    m = as_prefix_map(T)
    sig = m.sig
    fix = {}
    iso = {}
    powers_equal_id = {}
    cur = PrefixMap.identity(sig)
    for p in range(1, max_power + 1):
        cur = m.after(cur)
        fix[p], iso[p] = fixed_points(cur)
        powers_equal_id[p] = cur.is_identity()
    exact = {}
    iso_exact = {}
    for p in range(1, max_power + 1):
        lower = Clopen.empty(sig)
        lower_pts = []
        for q in range(1, p):
            if p % q == 0:
                lower = lower | fix[q]
                lower_pts.extend(iso[q])
        exact[p] = fix[p] - lower
        iso_exact[p] = [
            x
            for x in iso[p]
            if not x.in_clopen(lower) and all(x != y for y in lower_pts)
        ]
    covered = Clopen.empty(sig)
    for p in exact:
        covered = covered | exact[p]
    residual = Clopen.full(sig) - covered
    aperiodic = all(exact[p].is_empty for p in exact) and all(
        not iso_exact[p] for p in iso_exact
    )
    return {
        "exact_period_parts": exact,
        "isolated_periodic_points": iso_exact,
        "power_is_identity": powers_equal_id,
        "residual": residual,
        "aperiodic_up_to_bound": aperiodic,
    }


def full_group_membership(S, T, bound):
    """Clopen sets E_i = {x : Sx = T^i x} for |i| <= bound, or a refusal.

    Full-branch agreement only; each branch is assigned to the exponent of
    smallest absolute value (positive first on ties).
    """
    S = as_prefix_map(S)
    sig = S.sig
    order = sorted(range(-bound, bound + 1), key=lambda i: (abs(i), -i))
    powers = {i: as_prefix_map(power(T, i)) for i in order}
    depth = max(
        [S.max_domain_depth()] + [powers[i].max_domain_depth() for i in order]
    )
    ws = sig.words(depth)
    sb = {u: (v, c) for u, v, c in S.table(depth)}
    assignment = {}
    for i in order:
        pb = {u: (v, c) for u, v, c in powers[i].table(depth)}
        for w in ws:
            if w not in assignment and sb[w] == pb[w]:
                assignment[w] = i
    if len(assignment) < len(ws):
        missing = [w for w in ws if w not in assignment]
        return None, Clopen.make(sig, missing)
    parts = {}
    for w, i in assignment.items():
        parts.setdefault(i, []).append(w)
    return {i: Clopen.make(sig, ws_) for i, ws_ in parts.items()}, None


def centralizer_index_sequence(R, S, depth):
    """Indices (i_0, ..., i_t) with R acting on the depth-(s+1) cylinder
    cycle exactly as S^{i_s} does, and i_{s+1} = i_s mod p_s.

    On failure, reports the first level where R does not act as any power of
    the odometer S.
    """
    R = as_prefix_map(R)
    sig = S.sig
    indices = []
    moduli = []
    for s in range(depth + 1):
        p = sig.num_words(s + 1)
        shifts = set()
        ok = True
        for idx in range(p):
            w = sig.word_of_index(idx, s + 1)
            img = R.image(Clopen(sig, (w,)))
            if len(img.words) != 1 or len(img.words[0]) != s + 1:
                ok = False
                break
            shifts.add((sig.index(img.words[0]) - idx) % p)
        found = None
        if ok and len(shifts) == 1:
            shift0 = shifts.pop()
            for i in range(p):
                if (i * S.shift - shift0) % p == 0:
                    found = i
                    break
        if found is None:
            return {
                "ok": False,
                "failure_level": s,
                "indices": tuple(indices),
                "moduli": tuple(moduli),
            }
        if indices and found % moduli[-1] != indices[-1] % moduli[-1]:
            return {
                "ok": False,
                "failure_level": s,
                "indices": tuple(indices),
                "moduli": tuple(moduli),
            }
        indices.append(found)
        moduli.append(p)
    return {"ok": True, "indices": tuple(indices), "moduli": tuple(moduli)}


# -- tower systems -------------------------------------------------------------


@dataclass
class TowerSystem:
    """Nested cyclic clopen partitions; the set-level witness of rank one.

    Level t is a cyclic tuple of disjoint nonempty clopen sets covering the
    space; level t+1 refines it with height multiplied by a level size of the
    signature, atom i of the finer cycle projecting into atom i mod m of the
    coarser one.
    """

    sig: Signature
    levels: list

    @staticmethod
    def from_cycle(cycle):
        sig = cycle[0].sig
        for a in cycle:
            if a.is_empty:
                raise ValueError("empty atom in cycle")
        return TowerSystem(sig, [tuple(cycle)])

    def ensure_levels(self, k):
        """Materialize at least k levels via the canonical refinement rule."""
        while len(self.levels) < k:
            t = len(self.levels) - 1
            cycle = self.levels[-1]
            lam = self.sig.level(t)
            split_parts = [a.split(lam) for a in cycle]
            new = []
            for q in range(lam):
                for j in range(len(cycle)):
                    new.append(split_parts[j][q])
            self.levels.append(tuple(new))
        return self

    def level(self, t):
        self.ensure_levels(t + 1)
        return self.levels[t]

    def heights(self):
        return [len(c) for c in self.levels]

    def image(self, A):
        """Best clopen upper approximation of the image at deepest level."""
        cycle = self.levels[-1]
        out = Clopen.empty(self.sig)
        m = len(cycle)
        for i, atom in enumerate(cycle):
            if not (A & atom).is_empty:
                out = out | cycle[(i + 1) % m]
        return out

    def tail_bound(self):
        """Weak-metric ambiguity of the deepest materialized level."""
        return 2 * max(a.diameter() for a in self.levels[-1])
