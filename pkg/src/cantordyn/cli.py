"""Command-line surface: every operation scriptable, outputs reproducible.

Arguments naming objects accept a builtin alias (`id`, `swap`,
`odometer:dyadic[:k]`, `uniform`), a path to a .cdyn file, or an inline
document body.  All quantitative outputs are exact rationals rendered p/q.
Exit codes: 0 success, 2 structured witness or refusal, 1 error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from .space import DYADIC, Clopen, Point, Signature
from .measure import Dirac, Mixture, ProductMeasure
from .homeo import (
    Odometer,
    PrefixMap,
    as_prefix_map,
    centralizer_index_sequence,
    compose,
    difference_set,
    full_group_membership,
    period_structure,
    weak_distance,
)
from .topology import IndeterminateAtDepth, in_neighborhood, defect_over_partition
from .measure import measure_of
from .synth import (
    aperiodize_periodic,
    fundamental_domain,
    odometer_in_weak_neighborhood,
    overlap_graph,
    periodic_in_weak_neighborhood,
    rank1_in_uniform_neighborhood,
    rokhlin_castle,
)
from . import docformat as df


class CliError(Exception):
    pass


# -- reference resolution --------------------------------------------------------


def _parse_sig_token(tok):
    p = df._Parser(tok)
    sig = p.sig()
    if not p.eof():
        raise df.DocumentError("trailing input after signature")
    return sig


def resolve_homeo(text):
    if text == "id":
        return PrefixMap.identity(DYADIC)
    if text.startswith("id:"):
        return PrefixMap.identity(_parse_sig_token(text[3:]))
    if text == "swap":
        return PrefixMap.tree_pair(DYADIC, [((0,), (1,)), ((1,), (0,))])
    if text.startswith("odometer:"):
        rest = text[len("odometer:") :]
        k = 1
        if ":" in rest and not rest.endswith(")"):
            rest, ks = rest.rsplit(":", 1)
            k = int(ks)
        return Odometer(_parse_sig_token(rest), k)
    doc = _load_document(text)
    if doc.kind != "homeo":
        raise CliError(f"expected a homeo document, got {doc.kind}")
    return doc.value


def resolve_measure(text, sig):
    if text == "uniform":
        return ProductMeasure.uniform(sig)
    if os.path.exists(text) or text.startswith(("measure ", "cdyn ")):
        doc = _load_document(text)
        if doc.kind != "measure":
            raise CliError(f"expected a measure document, got {doc.kind}")
        return doc.value
    # inline measure expression over the target signature
    p = df._Parser(text)
    mu = p.measure(sig)
    if not p.eof():
        raise df.DocumentError("trailing input after measure")
    return mu


def resolve_neighborhood(text):
    doc = _load_document(text)
    if doc.kind != "neighborhood":
        raise CliError(f"expected a neighborhood document, got {doc.kind}")
    return doc.value


def resolve_clopen(text, sig):
    p = df._Parser(text)
    A = p.wordset(sig)
    if not p.eof():
        raise df.DocumentError("trailing input after clopen set")
    return A


def _load_document(text):
    if os.path.exists(text):
        with open(text, "r", encoding="utf-8") as f:
            return df.parse(f.read())
    return df.parse(text)


def parse_partition(text, sig):
    p = df._Parser(text)
    atoms = [p.wordset(sig)]
    while p.try_lit(","):
        atoms.append(p.wordset(sig))
    if not p.eof():
        raise df.DocumentError("trailing input after partition")
    return atoms


# -- output helpers --------------------------------------------------------------


class Out:
    def __init__(self, fmt):
        self.fmt = fmt
        self.items = []

    def scalar(self, value):
        self.items.append(("scalar", str(value)))

    def doc(self, document):
        self.items.append(("doc", document))

    def line(self, text):
        self.items.append(("scalar", text))

    def raw(self, text):
        self.items.append(("raw", text))

    def emit(self):
        if self.fmt == "json":
            payload = []
            for kind, item in self.items:
                if kind == "doc":
                    payload.append(df.document_json(item))
                else:
                    payload.append({"value": item})
            sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
            return
        chunks = []
        for kind, item in self.items:
            if kind == "doc":
                chunks.append(df.print_document(item).rstrip("\n"))
            else:
                chunks.append(item)
        sys.stdout.write("\n".join(chunks) + "\n")


def _diff_certificate(sig, E):
    entries = {"core": E.core}
    for i, x in enumerate(E.removed):
        entries[f"removed_{i}"] = x
    return df.doc_certificate(sig, "difference", entries)


# -- commands --------------------------------------------------------------------


def cmd_dist(args, out):
    S = resolve_homeo(args.S)
    T = resolve_homeo(args.T)
    out.scalar(weak_distance(S, T))
    return 0


def cmd_member(args, out):
    S = resolve_homeo(args.S)
    N = resolve_neighborhood(args.N)
    sig = S.sig
    try:
        m = in_neighborhood(S, N)
    except IndeterminateAtDepth as e:
        lo, hi = e.interval
        out.doc(
            df.doc_certificate(
                sig, "indeterminate", {"lower": lo, "upper": hi}
            )
        )
        return 2
    entries = {"member": m.ok}
    cert = m.certificate
    if "mismatched_sets" in cert:
        for i, F in enumerate(cert["mismatched_sets"]):
            entries[f"mismatch_{i}"] = F
    if "measures_of_difference" in cert:
        for i, v in enumerate(cert["measures_of_difference"]):
            entries[f"mass_{i}"] = v
    if "max_defect" in cert:
        entries["max_defect"] = cert["max_defect"]
    if "weak_distance" in cert:
        lo, hi = cert["weak_distance"]
        entries["lower"] = lo
        entries["upper"] = hi
    out.doc(df.doc_certificate(sig, "membership", entries))
    return 0 if m.ok else 2


def cmd_defect(args, out):
    S = resolve_homeo(args.S)
    T = resolve_homeo(args.T)
    sig = S.sig
    mu = resolve_measure(args.measure, sig)
    partition = parse_partition(args.partition, sig)
    kind = {"tau-prime": "tau_prime", "bar-tau": "bar_tau"}[args.kind]
    out.scalar(defect_over_partition(kind, S, T, mu, partition))
    return 0


def cmd_compose(args, out):
    maps = [resolve_homeo(t) for t in args.maps]
    acc = as_prefix_map(maps[0])
    for m in maps[1:]:
        acc = compose(acc, m)
    out.doc(df.doc_homeo(as_prefix_map(acc)))
    return 0


def cmd_tabulate(args, out):
    T = as_prefix_map(resolve_homeo(args.T))
    sig = T.sig
    for u, v, c in sorted(T.table(args.depth)):
        tail = f"+{c}" if c > 0 else (str(c) if c < 0 else "")
        out.line(f"{df.word_text(sig, u)} -> {df.word_text(sig, v)}{tail}")
    return 0


def cmd_diff(args, out):
    S = resolve_homeo(args.S)
    T = resolve_homeo(args.T)
    E = difference_set(S, T)
    out.doc(_diff_certificate(as_prefix_map(S).sig, E))
    return 0


def cmd_periods(args, out):
    T = resolve_homeo(args.T)
    sig = as_prefix_map(T).sig
    info = period_structure(T, args.bound)
    entries = {"aperiodic": info["aperiodic_up_to_bound"]}
    for q, part in sorted(info["exact_period_parts"].items()):
        entries[f"period_{q}"] = part
    for q, pts in sorted(info["isolated_periodic_points"].items()):
        for i, x in enumerate(pts):
            entries[f"isolated_{q}_{i}"] = x
    entries["residual"] = info["residual"]
    out.doc(df.doc_certificate(sig, "periods", entries))
    return 0


def cmd_fullgroup(args, out):
    S = resolve_homeo(args.S)
    T = resolve_homeo(args.T)
    sig = as_prefix_map(S).sig
    pieces, missing = full_group_membership(S, T, args.bound)
    if pieces is None:
        out.doc(df.doc_certificate(sig, "refusal", {"unmatched": missing}))
        return 2
    entries = {f"power_{i}": E for i, E in sorted(pieces.items())}
    out.doc(df.doc_certificate(sig, "fullgroup", entries))
    return 0


def cmd_centralizer(args, out):
    R = resolve_homeo(args.R)
    S = resolve_homeo(args.S)
    if not isinstance(S, Odometer):
        raise CliError("centralizer test needs an odometer as second argument")
    res = centralizer_index_sequence(R, S, args.depth)
    entries = {"ok": res["ok"]}
    for s, (i, p) in enumerate(zip(res["indices"], res["moduli"])):
        entries[f"index_{s}"] = i
        entries[f"modulus_{s}"] = p
    if not res["ok"]:
        entries["failure_level"] = res["failure_level"]
    out.doc(df.doc_certificate(S.sig, "centralizer", entries))
    return 0 if res["ok"] else 2


def cmd_synth(args, out):
    kind = args.kind
    T = resolve_homeo(args.target)
    sig = as_prefix_map(T).sig
    if kind in ("odometer", "periodic"):
        partition = parse_partition(args.partition, sig)
        fn = (
            odometer_in_weak_neighborhood
            if kind == "odometer"
            else periodic_in_weak_neighborhood
        )
        res = fn(T, partition)
        if not res.ok:
            out.doc(
                df.doc_certificate(
                    sig, "witness", {"forward-closed": True, "set": res.witness}
                )
            )
            return 2
        out.doc(df.doc_homeo(res.homeo))
        entries = {
            k: v for k, v in res.certificate.items() if isinstance(v, (bool, int))
        }
        out.doc(df.doc_certificate(sig, f"synth-{kind}", entries))
        return 0
    if kind == "rank1":
        measures = [resolve_measure(m, sig) for m in args.measure]
        res = rank1_in_uniform_neighborhood(T, measures, Fraction(args.epsilon))
        out.doc(df.doc_homeo(res.homeo))
        entries = {"core": res.certificate["difference_set"].core}
        for i, v in enumerate(res.certificate["measures_of_difference"]):
            entries[f"mass_{i}"] = v
        out.doc(df.doc_certificate(sig, "synth-rank1", entries))
        return 0
    if kind == "aperiodize":
        S, cert = aperiodize_periodic(T, Fraction(args.epsilon), p=args.period)
        out.doc(df.doc_homeo(S))
        out.doc(
            df.doc_certificate(
                sig,
                "synth-aperiodize",
                {
                    "fundamental-domain": cert["fundamental_domain"],
                    "period": cert["period"],
                    "weak-distance": cert["weak_distance"],
                },
            )
        )
        return 0
    if kind == "fundamental":
        E = fundamental_domain(T, args.period)
        out.doc(df.doc_clopen(E))
        return 0
    raise CliError(f"unknown synthesis kind {kind!r}")


def cmd_rokhlin(args, out):
    T = resolve_homeo(args.target)
    sig = as_prefix_map(T).sig
    measures = [resolve_measure(m, sig) for m in args.measure]
    eps = Fraction(args.epsilon)
    castle = rokhlin_castle(
        T, args.n, measures, eps, period_bound=args.bound
    )
    towers = [(base, h) for base, h, _ in castle.towers]
    out.doc(df.doc_castle(sig, towers, castle.base, castle.bound))
    out.line(f"bound {min(castle.bound)} > {1 - eps}")
    return 0


def cmd_graph_dot(args, out):
    T = resolve_homeo(args.target)
    sig = as_prefix_map(T).sig
    partition = parse_partition(args.partition, sig)
    g = overlap_graph(T, partition)
    out.raw(g.to_dot())
    return 0


def cmd_measure(args, out):
    doc = None
    # the clopen argument fixes the signature for alias measures
    A_doc = _load_document(args.set) if os.path.exists(args.set) else None
    if A_doc is not None:
        if A_doc.kind != "clopen":
            raise CliError(f"expected a clopen document, got {A_doc.kind}")
        A = A_doc.value
    else:
        body = args.set
        if body.startswith(("clopen ", "cdyn ")):
            doc = df.parse(body)
            if doc.kind != "clopen":
                raise CliError(f"expected a clopen document, got {doc.kind}")
            A = doc.value
        else:
            raise CliError("the set argument must be a clopen document")
    mu = resolve_measure(args.M, A.sig)
    out.scalar(measure_of(mu, A))
    return 0


# -- random canonical documents (test data) ---------------------------------------


def random_signature(rng):
    if rng.random() < 0.5:
        return DYADIC
    pre = tuple(rng.randint(2, 4) for _ in range(rng.randint(0, 2)))
    per = tuple(rng.randint(2, 4) for _ in range(rng.randint(1, 2)))
    return Signature(pre, per)


def random_clopen(rng, sig):
    depth = rng.randint(1, 3)
    words = []
    for _ in range(rng.randint(0, 4)):
        d = rng.randint(1, depth)
        words.append(tuple(rng.randrange(sig.level(t)) for t in range(d)))
    return Clopen.make(sig, words)


def random_point(rng, sig):
    h = rng.randint(0, 2)
    head = tuple(rng.randrange(sig.level(t)) for t in range(h))
    horizon = len(sig.preperiod) + len(sig.period) + h
    lo = min(sig.level(t) for t in range(h, horizon + 1))
    cycle = tuple(rng.randrange(lo) for _ in range(rng.randint(1, 2)))
    return Point.make(sig, head, cycle)


def random_product(rng, sig):
    rows = []
    for t in range(len(sig.preperiod) + len(sig.period)):
        raw = [rng.randint(1, 4) for _ in range(sig.level(t))]
        s = sum(raw)
        rows.append(tuple(Fraction(x, s) for x in raw))
    k = len(sig.preperiod)
    return ProductMeasure.make(sig, rows[:k], rows[k:])


def random_measure(rng, sig):
    c = rng.randrange(4)
    if c == 0:
        return ProductMeasure.uniform(sig)
    if c == 1:
        return random_product(rng, sig)
    if c == 2:
        return Dirac(sig, random_point(rng, sig))
    parts = [ProductMeasure.uniform(sig), Dirac(sig, random_point(rng, sig))]
    w = Fraction(rng.randint(1, 3), 4)
    comps = sorted(
        [(w, parts[0]), (1 - w, parts[1])], key=lambda wm: df.measure_text(wm[1])
    )
    return Mixture.make(sig, comps)


def random_homeo(rng, sig):
    c = rng.randrange(3)
    if c == 0:
        return Odometer(sig, rng.choice([-2, -1, 1, 2, 3]))
    depth = rng.randint(1, 2)
    words = sig.words(depth)
    perm = list(words)
    rng.shuffle(perm)
    tp = PrefixMap.tree_pair(sig, list(zip(words, perm)))
    if c == 1:
        return tp
    return as_prefix_map(Odometer(sig, 1)).after(tp)


def random_document(rng, kind=None):
    if kind is None:
        kind = rng.choice(df.KINDS)
    sig = random_signature(rng)
    if kind == "signature":
        return df.doc_signature(sig)
    if kind == "clopen":
        return df.doc_clopen(random_clopen(rng, sig))
    if kind == "measure":
        return df.doc_measure(random_measure(rng, sig))
    if kind == "homeo":
        return df.doc_homeo(random_homeo(rng, sig))
    if kind == "neighborhood":
        base = random_homeo(rng, sig)
        c = rng.randrange(4)
        eps = Fraction(1, rng.choice([2, 4, 8]))
        if c == 0:
            from .topology import WeakBall

            return df.doc_neighborhood(WeakBall(base, eps))
        if c == 1:
            from .topology import PNeighborhood

            sets = tuple(
                random_clopen(rng, sig) for _ in range(rng.randint(1, 2))
            )
            return df.doc_neighborhood(PNeighborhood(base, sets))
        if c == 2:
            from .topology import UniformNeighborhood

            mus = tuple(random_measure(rng, sig) for _ in range(rng.randint(1, 2)))
            return df.doc_neighborhood(UniformNeighborhood(base, mus, eps))
        from .topology import BarPNeighborhood

        sets = (random_clopen(rng, sig),)
        mus = (random_measure(rng, sig),)
        return df.doc_neighborhood(BarPNeighborhood(base, sets, mus, eps))
    if kind == "castle":
        towers = []
        for _ in range(rng.randint(1, 3)):
            b = random_clopen(rng, sig)
            towers.append((b, rng.randint(1, 5)))
        base = random_clopen(rng, sig)
        bound = tuple(Fraction(rng.randint(0, 8), 8) for _ in range(2))
        return df.doc_castle(sig, towers, base, bound)
    entries = {
        "bound": Fraction(rng.randint(0, 8), 8),
        "ok": rng.random() < 0.5,
        "set": random_clopen(rng, sig),
        "order": rng.randint(1, 16),
    }
    return df.doc_certificate(sig, rng.choice(["check", "witness"]), entries)


def cmd_gen(args, out):
    rng = random.Random(args.seed)
    for i in range(args.count):
        out.doc(random_document(rng, args.kind))
    return 0


# -- entry point -------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="cantordyn")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(fn=fn)
        p.add_argument("--format", choices=["text", "json", "dot"], default="text")
        return p

    p = add("dist", cmd_dist, help="exact weak distance between two maps")
    p.add_argument("S")
    p.add_argument("T")

    p = add("member", cmd_member, help="exact neighborhood membership")
    p.add_argument("S")
    p.add_argument("N")

    p = add("defect", cmd_defect, help="defect sup over unions of atoms")
    p.add_argument("S")
    p.add_argument("T")
    p.add_argument("--measure", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--kind", choices=["tau-prime", "bar-tau"], default="tau-prime")

    p = add("compose", cmd_compose, help="exact composition of maps")
    p.add_argument("maps", nargs="+")

    p = add("tabulate", cmd_tabulate, help="cylinder table of a map")
    p.add_argument("T")
    p.add_argument("--depth", type=int, default=2)

    p = add("diff", cmd_diff, help="exact difference set of two maps")
    p.add_argument("S")
    p.add_argument("T")

    p = add("periods", cmd_periods, help="exact periodic structure report")
    p.add_argument("T")
    p.add_argument("--bound", type=int, default=8)

    p = add("fullgroup", cmd_fullgroup, help="locally constant power test")
    p.add_argument("S")
    p.add_argument("T")
    p.add_argument("--bound", type=int, default=8)

    p = add("centralizer", cmd_centralizer, help="odometer centralizer test")
    p.add_argument("R")
    p.add_argument("S")
    p.add_argument("--depth", type=int, default=5)

    p = add("synth", cmd_synth, help="synthesis procedures with certificates")
    p.add_argument("kind", choices=[
        "odometer", "periodic", "rank1", "aperiodize", "fundamental",
    ])
    p.add_argument("--target", required=True)
    p.add_argument("--partition")
    p.add_argument("--measure", action="append", default=[])
    p.add_argument("--epsilon", default="1/2")
    p.add_argument("--period", type=int, default=None)

    p = add("rokhlin", cmd_rokhlin, help="castle with the marked-base bound")
    p.add_argument("--target", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--measure", action="append", required=True)
    p.add_argument("--epsilon", required=True)
    p.add_argument("--bound", type=int, default=None)

    p = add("graph-dot", cmd_graph_dot, help="overlap graph as DOT text")
    p.add_argument("--target", required=True)
    p.add_argument("--partition", required=True)

    p = add("measure", cmd_measure, help="exact mass of a clopen set")
    p.add_argument("M")
    p.add_argument("set")

    p = add("gen", cmd_gen, help="randomized canonical documents (test data)")
    p.add_argument("kind", nargs="?", default=None, choices=[None, *df.KINDS])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    out = Out(args.format)
    try:
        code = args.fn(args, out)
    except (CliError, df.DocumentError, ValueError, TypeError, RuntimeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
