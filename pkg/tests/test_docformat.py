import random
from fractions import Fraction

import pytest

from cantordyn.space import DYADIC, Clopen, Point, Signature
from cantordyn.measure import Dirac, Mixture, ProductMeasure
from cantordyn.homeo import Odometer, PrefixMap
from cantordyn.topology import (
    BarPNeighborhood,
    PNeighborhood,
    UniformNeighborhood,
    WeakBall,
)
from cantordyn.docformat import (
    Document,
    DocumentError,
    doc_castle,
    doc_certificate,
    doc_clopen,
    doc_homeo,
    doc_measure,
    doc_neighborhood,
    doc_signature,
    document_json,
    parse,
    print_document,
)
from cantordyn.cli import random_document

SIG = DYADIC


def roundtrip(doc):
    text = print_document(doc)
    back = parse(text)
    assert back == doc
    assert print_document(back) == text
    return text


def test_signature_documents():
    assert roundtrip(doc_signature(DYADIC)) == "cdyn 1\nsignature dyadic\n"
    s = Signature((3,), (2, 4))
    assert roundtrip(doc_signature(s)) == "cdyn 1\nsignature base(3;2,4)\n"
    big = Signature((), (12, 2))
    text = roundtrip(doc_clopen(Clopen.cylinder(big, (11, 0))))
    assert "{11.0}" in text  # dotted words once a level exceeds ten


def test_clopen_and_measure_documents():
    A = Clopen.make(SIG, [(0, 1), (1, 0)])
    assert roundtrip(doc_clopen(A)) == "cdyn 1\nclopen dyadic {01, 10}\n"
    roundtrip(doc_clopen(Clopen.empty(SIG)))
    roundtrip(doc_clopen(Clopen.full(SIG)))
    roundtrip(doc_measure(ProductMeasure.uniform(SIG)))
    mu = ProductMeasure.make(SIG, [], [(Fraction(1, 3), Fraction(2, 3))])
    text = roundtrip(doc_measure(mu))
    assert "product[|1/3,2/3]" in text
    d = Dirac(SIG, Point.make(SIG, (0,), (1,)))
    assert roundtrip(doc_measure(d)) == "cdyn 1\nmeasure dyadic dirac 0(1)\n"
    mix = Mixture.make(SIG, [(Fraction(1, 4), d), (Fraction(3, 4), mu)])
    roundtrip(doc_measure(mix))


def test_homeo_documents():
    roundtrip(doc_homeo(Odometer(SIG, 1)))
    roundtrip(doc_homeo(Odometer(Signature((), (2, 3)), -2)))
    swap = PrefixMap.tree_pair(SIG, [((0,), (1,)), ((1,), (0,))])
    assert (
        roundtrip(doc_homeo(swap))
        == "cdyn 1\nhomeo tree-pair dyadic {0->1, 1->0}\n"
    )
    shifted = PrefixMap.make(SIG, [((0,), (1,), 0), ((1,), (0,), 2)])
    text = roundtrip(doc_homeo(shifted))
    assert "shift-pair" in text and "+2" in text


def test_neighborhood_documents():
    od = Odometer(SIG, 1)
    roundtrip(doc_neighborhood(WeakBall(od, Fraction(1, 4))))
    F = Clopen.cylinder(SIG, (0,))
    G = Clopen.cylinder(SIG, (1,))
    # constructor sorts the sets by their rendered text
    n = doc_neighborhood(PNeighborhood(od, (G, F)))
    assert roundtrip(n).count("{0}") == 1
    uni = ProductMeasure.uniform(SIG)
    roundtrip(doc_neighborhood(UniformNeighborhood(od, (uni,), Fraction(1, 8))))
    roundtrip(
        doc_neighborhood(BarPNeighborhood(od, (F, G), (uni,), Fraction(1, 2)))
    )


def test_castle_and_certificate_documents():
    B0 = Clopen.cylinder(SIG, (0, 0))
    text = roundtrip(
        doc_castle(SIG, [(B0, 4)], B0, [Fraction(1)])
    )
    assert text == "cdyn 1\ncastle dyadic towers[({00}, 4)] base {00} bound [1]\n"
    cert = doc_certificate(
        SIG,
        "witness",
        {"forward-closed": True, "set": Clopen.cylinder(SIG, (0,))},
    )
    text = roundtrip(cert)
    assert "witness {forward-closed true, set {0}}" in text
    roundtrip(
        doc_certificate(
            SIG,
            "misc",
            {"atom": Point.make(SIG, (), (1,)), "mass": Fraction(1, 3), "n": 4},
        )
    )


def test_header_is_optional_but_printed():
    d = parse("signature dyadic")
    assert d == doc_signature(DYADIC)
    assert print_document(d).startswith("cdyn 1\n")
    assert parse("clopen dyadic {0}") == parse("cdyn 1\nclopen dyadic {0}")


def test_arrow_variants():
    assert parse("homeo tree-pair dyadic {0→1, 1→0}") == parse(
        "homeo tree-pair dyadic {0->1, 1->0}"
    )


REJECTS = [
    ("clopen dyadic {1, 0}", "not-sorted"),
    ("clopen dyadic {0, 00}", "not-prefix-free"),
    ("clopen dyadic {0, 0}", "duplicate-word"),
    ("clopen dyadic {0, 1}", "sibling-complete"),
    ("clopen dyadic {2}", "digit-out-of-range"),
    ("measure dyadic dirac 0(10)", "point-not-reduced"),
    ("measure dyadic dirac (11)", "point-not-reduced"),
    (
        "measure dyadic mix(1/2 uniform + 1/2 dirac (0))",
        "mix-not-sorted",
    ),
    (
        "homeo tree-pair dyadic {00->00, 01->01, 1->1}",
        "branches-not-canonical",
    ),
    ("homeo shift-pair dyadic {0->1, 1->0}", "shift-pair-degenerate"),
    (
        "neighborhood p (odometer dyadic 1) [{1}, {0}]",
        "list-not-sorted",
    ),
    (
        "certificate dyadic x {b 1, a 2}",
        "certificate-keys-not-sorted",
    ),
]


@pytest.mark.parametrize("text,rule", REJECTS)
def test_rejects_non_canonical_input(text, rule):
    with pytest.raises(DocumentError) as e:
        parse(text)
    assert rule in str(e.value)


def test_reject_malformed_shapes():
    with pytest.raises(DocumentError):
        parse("")
    with pytest.raises(DocumentError):
        parse("cdyn two\nsignature dyadic")
    with pytest.raises(DocumentError):
        parse("cdyn 2\nsignature dyadic")
    with pytest.raises(DocumentError):
        parse("signature dyadic\nsignature dyadic")
    with pytest.raises(DocumentError):
        parse("gadget dyadic")
    with pytest.raises(DocumentError):
        parse("signature dyadic trailing")
    with pytest.raises(DocumentError):
        parse("homeo tree-pair dyadic {0->1}")  # not a bijection


def test_error_carries_position():
    with pytest.raises(DocumentError) as e:
        parse("cdyn 1\nclopen dyadic {1, 0}")
    assert e.value.line == 2
    assert e.value.col is not None


def test_random_documents_roundtrip():
    rng = random.Random(99)
    for _ in range(300):
        doc = random_document(rng)
        text = print_document(doc)
        assert parse(text) == doc
        j = document_json(doc)
        assert j["kind"] == doc.kind and j["version"] == 1


def test_json_mirror_fields():
    j = document_json(doc_clopen(Clopen.make(SIG, [(0, 1)])))
    assert j == {
        "version": 1,
        "kind": "clopen",
        "signature": "dyadic",
        "words": ["01"],
    }
    j = document_json(doc_homeo(Odometer(SIG, 1)))
    assert j["homeo"] == "odometer dyadic 1"
