"""Constructive approximation: fundamental domains, Euler-circuit odometer
and periodic synthesis, Rokhlin castles, rank-1 and periodic approximants.

Every synthesis returns a machine-checkable certificate or a structural
witness of impossibility (a proper clopen union of partition atoms mapped
into or out of itself).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .space import Clopen, is_prefix, is_partition, lcp_len, partition_at_depth
from .measure import measure_of, open_diff_mass
from .homeo import (
    Odometer,
    PrefixMap,
    TowerSystem,
    as_prefix_map,
    common_refinement,
    difference_set,
    period_structure,
    weak_distance,
    _sstar,
)


# -- clopen-to-clopen canonical bijections ------------------------------------


def _equalize(A, B):
    a, b = list(A.words), list(B.words)
    while len(a) != len(b):
        small = a if len(a) < len(b) else b
        sig = A.sig
        small.sort()
        last = small.pop()
        lam = sig.level(len(last))
        small.extend(last + (d,) for d in range(lam))
    return sorted(a), sorted(b)


def canonical_clopen_homeo(A, B):
    """Deterministic prefix-exchange bijection from A onto B.

    Equalizes cylinder counts by splitting the lexicographically last
    cylinder of the smaller side, then pairs cylinders in lexicographic
    order.  Returned as a branch fragment (list of (u, v, 0) triples).
    """
    if A.is_empty or B.is_empty:
        raise ValueError("cannot map to or from the empty set")
    if A.sig != B.sig:
        raise ValueError("signature mismatch")
    a, b = _equalize(A, B)
    sig = A.sig
    branches = []
    for u, v in zip(a, b):
        if sig.shift(len(u)) != sig.shift(len(v)):
            raise ValueError(
                "tail alphabets differ between paired cylinders "
                f"{u} and {v}; no canonical pairing for this signature"
            )
        branches.append((u, v, 0))
    return branches


def compose_fragments(sig, second, first):
    """Branches of (second o first) for partial branch lists."""
    out = []
    for u1, v1, c1 in first:
        for u2, v2, c2 in second:
            if is_prefix(u2, v1):
                r = v1[len(u2) :]
                sub = sig.shift(len(u2))
                n = sub.num_words(len(r))
                idx = sub.index(r) + c2
                r2 = sub.word_of_index(idx, len(r))
                k = idx // n if n else c2
                out.append((u1, v2 + r2, c1 + k))
            elif is_prefix(v1, u2):
                r = u2[len(v1) :]
                sub = sig.shift(len(v1))
                n = sub.num_words(len(r))
                idx0 = (sub.index(r) - c1) % n
                rt = sub.word_of_index(idx0, len(r))
                bcar = (idx0 + c1) // n
                out.append((u1 + rt, v2, bcar + c2))
    return sorted(set(out))


def invert_fragment(branches):
    return sorted((v, u, -c) for u, v, c in branches)


def restrict_fragment(sig, branches, A):
    """Branches of the fragment restricted to domain pieces inside A."""
    out = []
    m = PrefixMap(sig, tuple(branches))
    for u, v, c in branches:
        part = Clopen(sig, (u,)) & A
        for w in part.words:
            out.append(m._refine_branch((u, v, c), w))
    return sorted(out)


# -- overlap graphs and circulations ------------------------------------------


@dataclass
class OverlapGraph:
    n: int
    atoms: list
    cells: dict  # (i, j) -> nonempty Clopen, T(F_i) & F_j
    arcs: list  # sorted (i, j) with nonempty cell
    multiplicities: dict = None  # (i, j) -> m_ij >= 1, balanced
    balance_feasible: bool = True

    def adjacency(self):
        return [
            [1 if (i, j) in self.cells else 0 for j in range(self.n)]
            for i in range(self.n)
        ]

    def to_dot(self):
        lines = ["digraph overlap {"]
        for i in range(self.n):
            lines.append(f'  v{i} [label="F{i + 1}"];')
        for i, j in self.arcs:
            m = self.multiplicities.get((i, j)) if self.multiplicities else None
            label = f' [label="{m}"]' if m is not None else ""
            lines.append(f"  v{i} -> v{j}{label};")
        lines.append("}")
        return "\n".join(lines)


def _scc(n, arcs):
    """Strongly connected components, Tarjan, deterministic order."""
    adj = [[] for _ in range(n)]
    for i, j in sorted(arcs):
        adj[i].append(j)
    index = [None] * n
    low = [0] * n
    on = [False] * n
    stack = []
    comps = []
    counter = [0]

    def strong(v):
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on[node] = True
            advanced = False
            for k in range(pi, len(adj[node])):
                w = adj[node][k]
                if index[w] is None:
                    work[-1] = (node, k + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on[w]:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == node:
                        break
                comps.append(sorted(comp))
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    for v in range(n):
        if index[v] is None:
            strong(v)
    return comps


def _weak_components(n, arcs):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in arcs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    comps = {}
    for v in range(n):
        comps.setdefault(find(v), []).append(v)
    return [sorted(c) for c in comps.values()]


def minimal_circulation(n, arcs):
    """Minimal-total integer circulation with m >= 1 on every arc.

    Successive shortest augmenting paths on the residual graph with unit
    costs; edge relaxation in lexicographic order makes the result
    deterministic.  Requires every weak component to be strongly connected.
    """
    arcs = sorted(arcs)
    flow = {a: 0 for a in arcs}
    excess = [0] * n  # indeg - outdeg under the all-ones baseline
    for i, j in arcs:
        excess[j] += 1
        excess[i] -= 1
    # vertices with positive excess need extra outflow
    while True:
        sources = [v for v in range(n) if excess[v] > 0]
        if not sources:
            break
        s = sources[0]
        # Bellman-Ford on the residual graph from s
        INF = float("inf")
        dist = [INF] * n
        prev = [None] * n
        dist[s] = 0
        edges = []
        for a in arcs:
            edges.append((a, a[0], a[1], 1))  # forward, cost 1
        for a in arcs:
            if flow[a] > 0:
                edges.append((a, a[1], a[0], -1))  # residual reverse
        for _ in range(n):
            changed = False
            for a, u, v, c in edges:
                if dist[u] + c < dist[v]:
                    dist[v] = dist[u] + c
                    prev[v] = (u, a, c)
                    changed = True
            if not changed:
                break
        sinks = [v for v in range(n) if excess[v] < 0 and dist[v] < INF]
        if not sinks:
            return None
        t = min(sinks, key=lambda v: (dist[v], v))
        v = t
        while v != s:
            u, a, c = prev[v]
            if c == 1:
                flow[a] += 1
            else:
                flow[a] -= 1
            v = u
        excess[s] -= 1
        excess[t] += 1
    return {a: 1 + flow[a] for a in arcs}


def overlap_graph(T, partition):
    """Arc structure T(F_i) & F_j with minimal balanced multiplicities."""
    Tm = as_prefix_map(T)
    atoms = list(partition)
    if not is_partition(atoms):
        raise ValueError("input sets do not partition the space")
    n = len(atoms)
    cells = {}
    for i in range(n):
        img = Tm.image(atoms[i])
        for j in range(n):
            cell = img & atoms[j]
            if not cell.is_empty:
                cells[(i, j)] = cell
    arcs = sorted(cells)
    g = OverlapGraph(n=n, atoms=atoms, cells=cells, arcs=arcs)
    feasible = all(
        sorted(c) in [sorted(s) for s in _scc(n, arcs)]
        for c in _weak_components(n, arcs)
    )
    g.balance_feasible = feasible
    if feasible:
        mult = {}
        for comp in _weak_components(n, arcs):
            comp_set = set(comp)
            sub = [a for a in arcs if a[0] in comp_set]
            local = minimal_circulation(n, sub)
            if local is None:
                g.balance_feasible = False
                g.multiplicities = None
                return g
            mult.update(local)
        g.multiplicities = mult
    return g


def _witness_from_graph(g):
    """A proper clopen union of atoms with T F inside F (forward-closed)."""
    comps = _scc(g.n, g.arcs)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    terminal = []
    for ci, comp in enumerate(comps):
        if all(comp_of[j] == ci for i, j in g.arcs if i in comp):
            terminal.append(comp)
    terminal.sort(key=lambda c: c[0])
    for comp in terminal:
        if len(comp) < g.n:
            sig = g.atoms[0].sig
            F = Clopen.empty(sig)
            for v in comp:
                F = F | g.atoms[v]
            return F
    return None


def euler_circuit(vertices, arc_multiset, start):
    """Deterministic Hierholzer circuit; smallest unused arc first."""
    out = {v: [] for v in vertices}
    for (i, j), m in sorted(arc_multiset.items()):
        for k in range(m):
            out[i].append((j, k))
    for v in out:
        out[v].sort()
    ptr = {v: 0 for v in vertices}
    stack = [start]
    arc_stack = []
    circuit = []
    while stack:
        v = stack[-1]
        if ptr[v] < len(out[v]):
            j, k = out[v][ptr[v]]
            ptr[v] += 1
            stack.append(j)
            arc_stack.append((v, j, k))
        else:
            stack.pop()
            if arc_stack:
                circuit.append(arc_stack.pop())
    circuit.reverse()
    return circuit


@dataclass
class SynthesisResult:
    ok: bool
    homeo: object = None  # exact PrefixMap realization, when one is built
    tower: TowerSystem = None
    pieces: list = None
    graph: OverlapGraph = None
    certificate: dict = None
    witness: Clopen = None


def _circuit_pieces(g, comp=None):
    """Pieces along the Euler circuit, one clopen set per traversed arc."""
    arcs = g.arcs if comp is None else [a for a in g.arcs if a[0] in comp]
    mult = {a: g.multiplicities[a] for a in arcs}
    vertices = sorted({v for a in arcs for v in a})
    splits = {a: g.cells[a].split(mult[a]) for a in arcs}
    circuit = euler_circuit(vertices, mult, vertices[0])
    return [splits[(i, j)][k] for i, j, k in circuit]


def _glue_cycle(sig, pieces, close_exactly=False):
    """Branch fragments mapping piece l onto piece l+1 around the cycle.

    With close_exactly, the last map is the inverse of the composed path, so
    the glued map has finite order.
    """
    r = len(pieces)
    frags = []
    if r == 1:
        return canonical_clopen_homeo(pieces[0], pieces[0]) if not close_exactly else [
            (u, u, 0) for u in pieces[0].words
        ]
    path = None
    for l in range(r - 1):
        f = canonical_clopen_homeo(pieces[l], pieces[(l + 1) % r])
        frags.extend(f)
        path = f if path is None else compose_fragments(sig, f, path)
    if close_exactly:
        frags.extend(invert_fragment(path))
    else:
        frags.extend(canonical_clopen_homeo(pieces[-1], pieces[0]))
    return frags


def odometer_in_weak_neighborhood(T, partition):
    """Odometer-structured S with S F_i = T F_i, or a closed-set witness."""
    g = overlap_graph(T, partition)
    comps = _scc(g.n, g.arcs)
    if len(comps) != 1:
        return SynthesisResult(ok=False, graph=g, witness=_witness_from_graph(g))
    pieces = _circuit_pieces(g)
    sig = partition[0].sig
    S = PrefixMap.make(sig, _glue_cycle(sig, pieces), validate=True)
    tower = TowerSystem.from_cycle(pieces)
    Tm = as_prefix_map(T)
    cert = {
        "set_images_match": all(
            S.image(F) == Tm.image(F) for F in partition
        ),
        "cycle_length": len(pieces),
    }
    return SynthesisResult(
        ok=True, homeo=S, tower=tower, pieces=pieces, graph=g, certificate=cert
    )


def periodic_in_weak_neighborhood(T, partition):
    """Pointwise periodic P with P F_i = T F_i, or a closed-set witness."""
    g = overlap_graph(T, partition)
    sccs = [tuple(c) for c in _scc(g.n, g.arcs)]
    for comp in _weak_components(g.n, g.arcs):
        if tuple(comp) not in sccs:
            return SynthesisResult(ok=False, graph=g, witness=_witness_from_graph(g))
    sig = partition[0].sig
    branches = []
    orders = []
    all_pieces = []
    for comp in _weak_components(g.n, g.arcs):
        pieces = _circuit_pieces(g, set(comp))
        all_pieces.append(pieces)
        branches.extend(_glue_cycle(sig, pieces, close_exactly=True))
        orders.append(len(pieces))
    P = PrefixMap.make(sig, branches, validate=True)
    Tm = as_prefix_map(T)
    order = lcm(*orders) if orders else 1
    cert = {
        "set_images_match": all(P.image(F) == Tm.image(F) for F in partition),
        "order": order,
    }
    return SynthesisResult(
        ok=True, homeo=P, pieces=all_pieces, graph=g, certificate=cert
    )


def extend_cyclic_partition_to_odometer(cycle, levels=2):
    """Tower system over a cyclic clopen partition, with canonical refinement."""
    if not is_partition(list(cycle)):
        raise ValueError("cycle is not a clopen partition of the space")
    t = TowerSystem.from_cycle(list(cycle))
    t.ensure_levels(levels)
    return t


# -- fundamental domains and aperiodization ------------------------------------


def _min_displacement(P):
    """inf_x d(x, P x), exact; requires P without fixed points."""
    Pm = as_prefix_map(P)
    best = None
    for w, (v1, c1), (v2, c2) in common_refinement(
        Pm, PrefixMap.identity(Pm.sig)
    ):
        # second operand is the identity: v2 == w, c2 == 0
        if (v1, c1) == (v2, c2):
            raise ValueError("map has a clopen set of fixed points")
        k = lcp_len(v1, v2)
        if v1 == v2:
            val = Fraction(1, 2 ** (len(v1) + _sstar(Pm.sig.shift(len(v1)), c1)))
        elif k < min(len(v1), len(v2)):
            val = Fraction(1, 2**k)
        else:
            raise ValueError("map has an isolated fixed point")
        best = val if best is None else min(best, val)
    return best


def orbit_of(P, F, p):
    Pm = as_prefix_map(P)
    out = Clopen.empty(F.sig)
    cur = F
    for _ in range(p):
        out = out | cur
        cur = Pm.image(cur)
    return out


def fundamental_domain(P, p):
    """Clopen E with (E, P E, ..., P^{p-1} E) an exact partition."""
    Pm = as_prefix_map(P)
    if not Pm.power(p).is_identity():
        raise ValueError(f"map is not exactly {p}-periodic")
    if p == 1:
        return Clopen.full(Pm.sig)
    info = period_structure(Pm, p - 1)
    for q, part in info["exact_period_parts"].items():
        if not part.is_empty or info["isolated_periodic_points"][q]:
            raise ValueError(f"points of period {q} < {p} present")
    c = None
    for i in range(1, p):
        ci = _min_displacement(Pm.power(i))
        c = ci if c is None else min(c, ci)
    depth = 0
    while Fraction(1, 2**depth) > c / 2:
        depth += 1
    atoms = partition_at_depth(Pm.sig, depth)
    E = atoms[0]
    for A in atoms[1:]:
        E = E | (A - orbit_of(Pm, E, p))
    images = [Pm.power(i).image(E) for i in range(p)]
    if not is_partition(images):
        raise RuntimeError("greedy fundamental domain failed the partition check")
    return E


def aperiodize_periodic(P, epsilon, p=None, max_order=64):
    """Aperiodic T close to the p-periodic P in the weak metric.

    Replaces the trivial first-return of the fundamental domain by digit-tail
    adding machines on small cells, so the return map has no finite orbits.
    """
    Pm = as_prefix_map(P)
    epsilon = Fraction(epsilon)
    if p is None:
        cur = PrefixMap.identity(Pm.sig)
        for q in range(1, max_order + 1):
            cur = Pm.after(cur)
            if cur.is_identity():
                p = q
                break
        else:
            raise ValueError("map is not periodic within the order bound")
    E = fundamental_domain(Pm, p)
    # cells of E whose whole P-orbit consists of sets of diameter < eps/2
    cells = list(E.words)
    while True:
        bad = None
        for w in cells:
            cyl = Clopen(Pm.sig, (w,))
            if any(
                Pm.power(i).image(cyl).diameter() >= epsilon / 2 for i in range(p)
            ):
                bad = w
                break
        if bad is None:
            break
        cells.remove(bad)
        lam = Pm.sig.level(len(bad))
        cells.extend(bad + (d,) for d in range(lam))
    sigma = [(w, w, 1) for w in sorted(cells)]
    top = Pm.power(p - 1).image(E)
    rest = Clopen.full(Pm.sig) - top
    branches = restrict_fragment(Pm.sig, list(Pm.branches), rest)
    on_top = restrict_fragment(Pm.sig, list(Pm.branches), top)
    branches += compose_fragments(Pm.sig, sigma, on_top)
    T = PrefixMap.make(Pm.sig, branches, validate=True)
    dw = weak_distance(T, Pm)
    if not dw < epsilon:
        raise RuntimeError("certificate failed: weak distance not below epsilon")
    return T, {"weak_distance": dw, "period": p, "fundamental_domain": E}


# -- Rokhlin castles and rank-1 approximants ------------------------------------


@dataclass
class Castle:
    towers: list  # of (base Clopen, height int, levels list of Clopen)
    base: Clopen  # marked base set B, the union of tower bases
    bound: list = None  # per measure, mu(union_{j<n} T^-j B)

    def all_levels(self):
        return [lvl for _, _, levels in self.towers for lvl in levels]

    def tops(self):
        sig = self.base.sig
        out = Clopen.empty(sig)
        for _, _, levels in self.towers:
            out = out | levels[-1]
        return out


def _separated_base(T, n, depth):
    """Greedy clopen set built from depth-d cylinders, visiting each orbit
    with gaps in [n, 2n-1]."""
    Tm = as_prefix_map(T)
    sig = Tm.sig
    powers = {j: Tm.power(j) for j in range(-(n - 1), n)}
    B = Clopen.empty(sig)
    for w in sig.words(depth):
        U = Clopen(sig, (w,))
        blocked = Clopen.empty(sig)
        for j in range(-(n - 1), n):
            if j == 0:
                continue
            blocked = blocked | powers[j].image(B)
        add = U - blocked - B
        if not add.is_empty:
            B = B | add
    return B


def _first_return_towers(T, B, cap):
    """Towers over B decomposed by first return time, exact."""
    Tm = as_prefix_map(T)
    towers = []
    remaining = B
    h = 0
    while not remaining.is_empty:
        h += 1
        if h > cap:
            return None
        back = Tm.power(-h).image(B)
        ret = remaining & back
        if not ret.is_empty:
            levels = [Tm.power(j).image(ret) for j in range(h)]
            towers.append((ret, h, levels))
            remaining = remaining - ret
    return towers


def _covered_bounds(Tm, B, n, measures):
    covered = Clopen.empty(Tm.sig)
    for j in range(n):
        covered = covered | Tm.power(-j).image(B)
    return [measure_of(mu, covered) for mu in measures]


def _separated_cover_exists(Tm, sep, depth):
    sig = Tm.sig
    return all(
        (Tm.power(j).image(Clopen(sig, (w,))) & Clopen(sig, (w,))).is_empty
        for w in sig.words(depth)
        for j in range(1, sep)
    )


def _shifted_top_castle(Tm, towers0, n, measures):
    """Best castle over T^-K of the tops, K in [0, n), preferring the deepest
    pullback on ties."""
    sig = Tm.sig
    V = Clopen.empty(sig)
    for _, _, levels in towers0:
        V = V | levels[-1]
    best = None
    for K in range(n):
        B = Tm.power(-K).image(V)
        bounds = _covered_bounds(Tm, B, n, measures)
        if best is None or (min(bounds), K) > (min(best[1]), best[2]):
            best = (B, bounds, K)
    B, bounds, _ = best
    return B, bounds


def _sliced_castle(Tm, towers0, n, measures):
    """Slice tall return towers into height-n blocks, one block per tower
    absorbing the height remainder.  The candidate leftover sets for the
    different absorber positions are pairwise disjoint, so when there are
    more than (number of measures)/epsilon candidates one of them must
    leave less than epsilon uncovered.
    """
    sig = Tm.sig
    q = min(h // n for _, h, _ in towers0)
    best = None
    for bstar in range(q):
        towers = []
        for _, h, levels in towers0:
            blocks = h // n
            r = h % n
            absorber = min(bstar, blocks - 1)
            start = 0
            for b in range(blocks):
                blk = n + (r if b == absorber else 0)
                towers.append((levels[start], blk, levels[start : start + blk]))
                start += blk
        B = Clopen.empty(sig)
        for base, _, _ in towers:
            B = B | base
        bounds = _covered_bounds(Tm, B, n, measures)
        if best is None or min(bounds) > min(best[2]):
            best = (towers, B, bounds)
    return best


def rokhlin_castle(T, n, measures, epsilon, period_bound=None, depth_cap=12):
    """Clopen castle of height >= n towers with the marked-base measure bound.

    Searches cover depths upward.  At each depth a first pass builds return
    towers over a base separated by exactly n and shifts the tops; if the
    exact bound falls short, a second pass separates by a multiple of n
    large enough that slicing into height-n blocks provably leaves less
    than epsilon uncovered for some absorber position.  Fails with
    diagnostics at the cap.
    """
    Tm = as_prefix_map(T)
    epsilon = Fraction(epsilon)
    bound_n = period_bound if period_bound is not None else n
    info = period_structure(Tm, bound_n)
    if not info["aperiodic_up_to_bound"]:
        for q, part in info["exact_period_parts"].items():
            if not part.is_empty:
                raise ValueError(f"periodic points of period {q} found: {part}")
        for q, pts in info["isolated_periodic_points"].items():
            if pts:
                raise ValueError(f"periodic point of period {q} found: {pts[0]}")
    slices = max(2, int(len(measures) / epsilon) + 1)
    last_diag = None
    for depth in range(1, depth_cap + 1):
        candidates = []
        if _separated_cover_exists(Tm, n, depth):
            B0 = _separated_base(Tm, n, depth)
            towers0 = _first_return_towers(Tm, B0, cap=2 * n)
            if towers0 is not None:
                B, bounds = _shifted_top_castle(Tm, towers0, n, measures)
                candidates.append((B, bounds))
        sep = slices * n
        if sep > n and _separated_cover_exists(Tm, sep, depth):
            B0 = _separated_base(Tm, sep, depth)
            towers0 = _first_return_towers(Tm, B0, cap=2 * sep)
            if towers0 is not None:
                towers, B, bounds = _sliced_castle(Tm, towers0, n, measures)
                candidates.append((B, bounds))
        if not candidates:
            last_diag = f"no separated cover at depth {depth}"
            continue
        for B, bounds in candidates:
            if all(b > 1 - epsilon for b in bounds):
                towers = _first_return_towers(Tm, B, cap=2 * n)
                castle = Castle(towers=towers, base=B, bound=bounds)
                _verify_castle(castle, n)
                return castle
        best = max(min(bounds) for _, bounds in candidates)
        last_diag = f"best bound {best} at depth {depth} not above {1 - epsilon}"
    raise RuntimeError(f"castle search failed: {last_diag}")


def _verify_castle(castle, n):
    levels = castle.all_levels()
    if not is_partition(levels):
        raise RuntimeError("castle levels do not partition the space")
    for _, h, _ in castle.towers:
        if h < n:
            raise RuntimeError("castle tower below requested height")


def rank1_in_uniform_neighborhood(T, measures, epsilon, period_bound=8, depth_cap=12):
    """Single-cycle approximant agreeing with T off the tower tops.

    The castle height is raised until the exact measure of the difference
    set falls below epsilon; the certificate is re-verified from the
    difference set itself, not from the construction.
    """
    Tm = as_prefix_map(T)
    epsilon = Fraction(epsilon)
    n = 2
    last = None
    while n <= 4096:
        castle = rokhlin_castle(
            Tm, n, measures, Fraction(1, 2), period_bound=max(period_bound, n),
            depth_cap=depth_cap,
        )
        towers = castle.towers
        sig = Tm.sig
        branches = []
        q = len(towers)
        for idx, (base, h, levels) in enumerate(towers):
            body = Clopen.empty(sig)
            for lvl in levels[:-1]:
                body = body | lvl
            branches += restrict_fragment(sig, list(Tm.branches), body)
            nxt_base = towers[(idx + 1) % q][0]
            if Tm.image(levels[-1]) == nxt_base:
                # T already sends this top onto the next base; keep it
                branches += restrict_fragment(sig, list(Tm.branches), levels[-1])
            else:
                branches += canonical_clopen_homeo(levels[-1], nxt_base)
        S = PrefixMap.make(sig, branches, validate=True)
        E = difference_set(S, Tm)
        values = [open_diff_mass(mu, E) for mu in measures]
        if all(v < epsilon for v in values):
            cycle = []
            for base, h, levels in towers:
                cycle.extend(levels)
            tower = TowerSystem.from_cycle(cycle)
            cert = {
                "difference_set": E,
                "measures_of_difference": values,
                "castle_heights": [h for _, h, _ in towers],
            }
            return SynthesisResult(
                ok=True, homeo=S, tower=tower, certificate=cert
            )
        last = values
        n *= 2
    raise RuntimeError(f"rank-1 search exhausted height doubling; last {last}")


# -- periodic approximation of odometers ----------------------------------------


def truncation(sig, t):
    """The depth-t cyclic prefix exchange approximating the adding machine."""
    n = sig.num_words(t)
    return PrefixMap.tree_pair(
        sig,
        [(sig.word_of_index(i, t), sig.word_of_index(i + 1, t)) for i in range(n)],
    )


@dataclass
class PeriodicApproximant:
    ok: bool
    Q: PrefixMap = None
    depth: int = None
    certificate: dict = None
    obstruction: object = None


def periodic_approx_odometer(S, mode, epsilon=None, measures=None, depth_cap=40):
    """Periodic Q near the odometer S: weak mode bounds d_w, uniform mode
    bounds the measure of the difference set.

    Uniform mode fails honestly, reporting the obstructing atom, when a
    point mass rides the carry cylinder at every depth.
    """
    if not isinstance(S, Odometer):
        raise TypeError("periodic approximation targets an odometer")
    epsilon = Fraction(epsilon)
    sig = S.sig
    if mode == "weak":
        t = 1
        while Fraction(2, 2**t) >= epsilon:
            t += 1
            if t > depth_cap:
                raise RuntimeError("depth cap exceeded in weak mode")
        Qs = _shifted_truncation(sig, S.shift, t)
        dw = weak_distance(S, Qs)
        if not dw < epsilon:
            raise RuntimeError("certificate failed: weak distance not below epsilon")
        return PeriodicApproximant(
            ok=True,
            Q=Qs,
            depth=t,
            certificate={"weak_distance": dw, "power_identity": sig.num_words(t)},
        )
    if mode == "uniform":
        if not measures:
            raise ValueError("uniform mode needs measures")
        for t in range(1, depth_cap + 1):
            Qs = _shifted_truncation(sig, S.shift, t)
            E = difference_set(Qs, S)
            values = [open_diff_mass(mu, E) for mu in measures]
            if all(v < epsilon for v in values):
                return PeriodicApproximant(
                    ok=True,
                    Q=Qs,
                    depth=t,
                    certificate={
                        "measures_of_difference": values,
                        "power_identity": sig.num_words(t),
                    },
                )
        # locate the obstructing atom at the cap
        Qs = _shifted_truncation(sig, S.shift, depth_cap)
        E = difference_set(Qs, S)
        atom = _find_atom_in(measures, E.core)
        return PeriodicApproximant(
            ok=False,
            depth=depth_cap,
            obstruction=atom,
            certificate={"difference_core": E.core},
        )
    raise ValueError("mode must be weak or uniform")


def _shifted_truncation(sig, k, t):
    n = sig.num_words(t)
    return PrefixMap.tree_pair(
        sig,
        [(sig.word_of_index(i, t), sig.word_of_index(i + k, t)) for i in range(n)],
    )


def _order_gcd(sig, k, t):
    return gcd(k, sig.num_words(t))


def _find_atom_in(measures, core):
    for mu in measures:
        for atom in _dirac_atoms(mu):
            if atom.in_clopen(core):
                return atom
    return None


def _dirac_atoms(mu):
    from .measure import Dirac, Mixture

    if isinstance(mu, Dirac):
        return [mu.atom]
    if isinstance(mu, Mixture):
        out = []
        for _, m in mu.components:
            out.extend(_dirac_atoms(m))
        return out
    return []
