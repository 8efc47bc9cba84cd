import json

import pytest

from cantordyn.cli import main
from cantordyn.docformat import parse

SWAP_DOC = "homeo tree-pair dyadic {0->1, 1->0}"
DISS_DOC = "homeo tree-pair dyadic {0->00, 10->01, 11->1}"


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_dist(capsys):
    code, out, _ = run(capsys, "dist", "id", "swap")
    assert code == 0 and out == "2\n"
    code, out, _ = run(capsys, "dist", "swap", SWAP_DOC)
    assert code == 0 and out == "0\n"
    code, out, _ = run(capsys, "dist", "odometer:dyadic", "odometer:dyadic:1")
    assert code == 0 and out == "0\n"


def test_dist_from_file(capsys, tmp_path):
    f = tmp_path / "swap.cdyn"
    f.write_text("cdyn 1\n" + SWAP_DOC + "\n")
    code, out, _ = run(capsys, "dist", "id", str(f))
    assert code == 0 and out == "2\n"


def test_member_exit_codes(capsys):
    n = "neighborhood weak 5/2 (tree-pair dyadic {e->e})"
    code, out, _ = run(capsys, "member", "swap", n)
    assert code == 0 and "member true" in out
    n = "neighborhood weak 1/2 (tree-pair dyadic {e->e})"
    code, out, _ = run(capsys, "member", "swap", n)
    assert code == 2 and "member false" in out


def test_compose_and_tabulate(capsys):
    code, out, _ = run(capsys, "compose", "swap", "swap")
    assert code == 0
    assert "tree-pair dyadic {e->e}" in out
    code, out, _ = run(capsys, "tabulate", "odometer:dyadic", "--depth", "2")
    assert code == 0
    assert "00 -> 10" in out and "11 -> 00+1" in out


def test_diff_and_periods(capsys):
    code, out, _ = run(capsys, "diff", "id", "swap")
    assert code == 0 and "certificate dyadic difference {core {e}}" in out
    code, out, _ = run(capsys, "periods", "swap", "--bound", "4")
    assert code == 0
    assert "aperiodic false" in out and "period_2 {e}" in out
    code, out, _ = run(capsys, "periods", "odometer:dyadic")
    assert code == 0 and "aperiodic true" in out


def test_fullgroup(capsys):
    code, out, _ = run(capsys, "fullgroup", "swap", "odometer:dyadic")
    assert code == 0
    assert "power_-1 {1}" in out and "power_1 {0}" in out
    code, out, _ = run(capsys, "fullgroup", DISS_DOC, "odometer:dyadic")
    assert code == 2 and "refusal" in out


def test_centralizer(capsys):
    code, out, _ = run(
        capsys, "centralizer", "odometer:dyadic:3", "odometer:dyadic"
    )
    assert code == 0 and "ok true" in out
    code, out, _ = run(capsys, "centralizer", "swap", "odometer:dyadic")
    assert code == 2 and "failure_level" in out


def test_synth_odometer_and_witness(capsys):
    code, out, _ = run(
        capsys,
        "synth", "odometer",
        "--target", "odometer:dyadic",
        "--partition", "{0},{1}",
    )
    assert code == 0
    assert "homeo" in out and "set_images_match true" in out
    code, out, _ = run(
        capsys,
        "synth", "odometer",
        "--target", DISS_DOC,
        "--partition", "{0},{1}",
    )
    assert code == 2
    assert "witness {forward-closed true, set {0}}" in out


def test_synth_fundamental_and_aperiodize(capsys):
    code, out, _ = run(
        capsys, "synth", "fundamental", "--target", "swap", "--period", "2"
    )
    assert code == 0 and "clopen dyadic {0}" in out
    code, out, _ = run(
        capsys,
        "synth", "aperiodize",
        "--target", "swap",
        "--epsilon", "2",
        "--period", "2",
    )
    assert code == 0 and "synth-aperiodize" in out


def test_synth_rank1(capsys):
    code, out, _ = run(
        capsys,
        "synth", "rank1",
        "--target", "odometer:dyadic",
        "--measure", "uniform",
        "--epsilon", "1/2",
    )
    assert code == 0 and "mass_0 0" in out


def test_rokhlin(capsys):
    code, out, _ = run(
        capsys,
        "rokhlin",
        "--target", "odometer:dyadic",
        "--n", "2",
        "--measure", "uniform",
        "--epsilon", "1/4",
    )
    assert code == 0
    assert "castle dyadic towers[({0}, 2)] base {0} bound [1]" in out
    assert "bound 1 > 3/4" in out


def test_graph_dot(capsys):
    code, out, _ = run(
        capsys,
        "graph-dot",
        "--target", "odometer:dyadic",
        "--partition", "{0},{1}",
    )
    assert code == 0
    assert out.startswith("digraph")
    assert "v0 -> v1" in out and "v1 -> v0" in out


def test_measure_command(capsys):
    code, out, _ = run(capsys, "measure", "uniform", "clopen dyadic {01}")
    assert code == 0 and out == "1/4\n"
    code, out, _ = run(
        capsys, "measure", "dirac (0)", "clopen dyadic {01}"
    )
    assert code == 0 and out == "0\n"


def test_gen_is_seeded_and_canonical(capsys):
    code, out1, _ = run(capsys, "gen", "--seed", "5", "--count", "10")
    assert code == 0
    code, out2, _ = run(capsys, "gen", "--seed", "5", "--count", "10")
    assert out1 == out2
    code, out3, _ = run(capsys, "gen", "--seed", "6", "--count", "10")
    assert out1 != out3
    # every generated document parses back
    lines = [ln for ln in out1.splitlines() if ln and ln != "cdyn 1"]
    for ln in lines:
        parse(ln)


def test_json_format(capsys):
    code, out, _ = run(capsys, "dist", "id", "swap", "--format", "json")
    assert code == 0
    assert json.loads(out) == [{"value": "2"}]
    code, out, _ = run(
        capsys, "compose", "swap", "swap", "--format", "json"
    )
    payload = json.loads(out)
    assert payload[0]["kind"] == "homeo"
    assert payload[0]["homeo"] == "tree-pair dyadic {e->e}"


def test_errors_exit_one(capsys):
    code, out, err = run(capsys, "dist", "id", "nonsense input")
    assert code == 1 and out == "" and "error:" in err
    code, out, err = run(capsys, "member", "swap", "clopen dyadic {0}")
    assert code == 1 and "expected a neighborhood" in err
    code, _, err = run(capsys, "rokhlin", "--target", "swap", "--n", "2",
                       "--measure", "uniform", "--epsilon", "1/4")
    assert code == 1 and "period" in err
