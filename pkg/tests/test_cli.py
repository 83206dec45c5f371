import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given

from conftest import positive_measures, signed_measures, vector_measures
from transfunctions.cli import run
from transfunctions.documents import DocumentError, dump_measure, parse_job, parse_measure, parse_space

JOBS = Path(__file__).resolve().parents[1] / "jobs"


def run_cli(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


# -- documents ----------------------------------------------------------------


@pytest.mark.parametrize("strategy", [positive_measures(), signed_measures(), vector_measures()])
def test_measure_round_trip(strategy):
    @given(strategy)
    def check(mu):
        doc = json.loads(json.dumps(dump_measure(mu)))
        back = parse_measure(doc, parse_space(doc["space"]))
        assert type(back) is type(mu)
        assert back == mu

    check()


def test_measure_kind_inference_and_density():
    space = parse_space({"kind": "grid", "count": 4})
    assert type(parse_measure({"mass": [1, -1, 0, 0]}, space)).__name__ == "SignedMeasure"
    assert type(parse_measure({"mass": [1, 1, 0, 0]}, space)).__name__ == "PositiveMeasure"
    assert type(parse_measure({"kind": "signed", "mass": [1, 1, 0, 0]}, space)).__name__ == "SignedMeasure"
    mu = parse_measure({"density": [4, 0, 0, 0]}, space)
    np.testing.assert_array_equal(mu.mass, [1, 0, 0, 0])


@pytest.mark.parametrize(
    "doc, path",
    [
        ({}, "$"),
        ({"version": "2"}, "$.version"),
        ({"version": "1", "extra": 1}, "$"),
        ({"version": "1", "measures": {"m": {"space": {"kind": "atomic", "count": 2}, "mass": [1, "a"]}}}, "$.measures.m.mass[1]"),
        ({"version": "1", "measures": {"m": {"space": "nowhere", "mass": [1]}}}, "$.measures.m.space"),
        ({"version": "1", "measures": {"m": {"space": {"kind": "atomic", "count": 2}, "mass": [1]}}}, "$.measures.m"),
        ({"version": "1", "measures": {"m": {"space": {"kind": "atomic", "count": 1}, "kind": "positive", "mass": [-1]}}}, "$.measures.m"),
        (
            {"version": "1", "spaces": {"X": {"kind": "atomic", "count": 2}},
             "transfunctions": {"t": {"domain": "X", "codomain": "X", "rule": {"type": "pushforward", "map": [0, 5]}}}},
            "$.transfunctions.t.rule",
        ),
        (
            {"version": "1", "spaces": {"X": {"kind": "atomic", "count": 2}},
             "transfunctions": {"t": {"domain": "X", "codomain": "X", "rule": {"type": "kernel"}}}},
            "$.transfunctions.t.rule",
        ),
        ({"version": "1", "rings": {"r": {"ground_count": 2, "generators": [[0, 3]]}}}, "$.rings.r.generators"),
    ],
)
def test_document_errors_are_path_qualified(doc, path):
    with pytest.raises(DocumentError) as info:
        parse_job(doc)
    assert info.value.path == path


def test_job_files_parse():
    for path in sorted(JOBS.glob("*.json")):
        job = parse_job(json.loads(path.read_text()))
        assert job.command["name"]


# -- CLI ----------------------------------------------------------------------


def test_check_kernel_job(capsys):
    code, report, _ = run_cli(capsys, "check", "--input", JOBS / "kernel.json", "--seed", 7)
    assert code == 0
    assert report["seed"] == 7 and report["status"] == "ok"
    props = report["result"]["properties"]
    assert all(props[p]["verdict"] == "holds_on_sample" for p in report["result"]["declared"])
    assert report["result"]["mismatches"] == []


def test_check_flags_declared_mismatch(tmp_path, capsys):
    doc = {
        "version": "1",
        "spaces": {"G": {"kind": "grid", "count": 2}},
        "transfunctions": {"sq": {"domain": "G", "codomain": "G", "rule": {"type": "square_mass_spread"}, "declared": ["strongly_additive"]}},
        "command": {"name": "check", "transfunction": "sq"},
    }
    path = tmp_path / "sq.json"
    path.write_text(json.dumps(doc))
    code, report, _ = run_cli(capsys, "check", "--input", path, "--trials", 20)
    assert code == 1
    entry = report["result"]["properties"]["strongly_additive"]
    assert entry["verdict"] == "violated"
    assert entry["witness"]["mu1"]["mass"] == [1.0, 0.0]
    assert report["trials"] == 20


def test_counterexample(capsys):
    code, report, _ = run_cli(capsys, "counterexample")
    assert code == 1
    assert (report["result"]["mu_norm"], report["result"]["image_norm"]) == (2.0, 0.0)
    assert report["seed"] == 0


def test_lemma1_job(capsys):
    code, report, _ = run_cli(capsys, "lemma1", "--eps", 0.01, "--input", JOBS / "three-measures.json")
    assert code == 0
    assert report["result"]["kappa_total"] < 0.01
    assert report["result"]["reconstruction_error"] <= 1e-12


def test_lemma1_flag_overrides_document(capsys):
    _, coarse, _ = run_cli(capsys, "lemma1", "--eps", 0.5, "--input", JOBS / "three-measures.json")
    assert coarse["result"]["eps"] == 0.5


def test_extend_signed_job_reports_norm_clause(capsys):
    code, report, _ = run_cli(capsys, "extend-signed", "--input", JOBS / "extend-signed.json", "--trials", 30)
    result = report["result"]
    np.testing.assert_allclose(result["image"]["mass"], np.array([0.5, -1.25, 2.0]) @ np.array([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]]))
    assert result["violated_clauses"] == ["e"]
    assert result["unexpected_findings"] == []
    assert code == 1


def test_extend_vector_job(capsys):
    code, report, _ = run_cli(capsys, "extend-vector", "--input", JOBS / "extend-vector.json", "--trials", 30)
    assert code == 0
    result = report["result"]
    assert result["operator_norm"] == {"method": "exact", "value": 1.0}
    assert result["bound_holds"]
    # a cyclic shift of atoms moves each vector one atom along
    np.testing.assert_allclose(result["image"]["values"], [[0.5, 0.5], [1.0, 0.0], [0.0, -2.0]], atol=1e-12)


def test_extend_vector_refusal(tmp_path, capsys):
    doc = json.loads((JOBS / "extend-vector.json").read_text())
    doc["transfunctions"]["P"]["rule"] = {"type": "clamp_spread"}
    path = tmp_path / "clamp.json"
    path.write_text(json.dumps(doc))
    code, report, _ = run_cli(capsys, "extend-vector", "--input", path, "--trials", 30)
    assert code == 1
    assert report["result"]["refused"]
    assert report["result"]["failed"] == ["strongly_additive", "homogeneous"]


def test_variation_job(capsys):
    code, report, _ = run_cli(capsys, "variation", "--input", JOBS / "variation.json")
    assert code == 0
    assert report["result"]["total"] == pytest.approx(3 + 1.5 + 7)
    assert report["result"]["oracle"]["agrees"]


def test_jordan_job(capsys):
    code, report, _ = run_cli(capsys, "jordan", "--input", JOBS / "jordan.json")
    assert code == 0
    assert report["result"]["plus"]["mass"] == [1.5, 0.0, 0.0, 0.25]
    assert report["result"]["minus"]["mass"] == [0.0, 2.0, 0.0, 0.0]
    assert report["result"]["mutually_singular"]


def test_ring_job(capsys):
    code, report, _ = run_cli(capsys, "ring", "--input", JOBS / "ring.json")
    assert code == 0
    result = report["result"]
    first = result["representations"][0]
    assert first["terms"] == [{"set": [0, 1], "sign": 1}, {"set": [1], "sign": -1}]
    assert first["value"] == [2.0]
    assert result["empty_representations"]["passed"]
    assert result["members"] == [[], [0], [0, 1], [1]]


def test_decompose_job(capsys):
    code, report, _ = run_cli(capsys, "decompose", "--input", JOBS / "decompose.json")
    assert code == 0
    assert report["result"]["terms"] == 3
    assert report["result"]["reconstruction_bound"] <= 1e-9


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--input", "missing.json"],
        ["check"],
        ["jordan", "--input", str(JOBS / "kernel.json")],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    assert code == 2
    assert out.err.startswith("error: ")
    assert json.loads(out.out)["status"] == "error"


def test_malformed_document(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"version": "1", "measures": {"mu": {"space": {"kind": "grid", "count": 3}, "mass": [1, 2, 3]}}}')
    code, report, err = run_cli(capsys, "jordan", "--input", path)
    assert code == 2
    assert report["error"]["path"] == "$.measures.mu.space"
    assert "$.measures.mu.space" in err
    path.write_text("{not json")
    code, report, _ = run_cli(capsys, "jordan", "--input", path)
    assert code == 2 and report["error"]["path"] == "$"


def test_unknown_subcommand_and_bad_flags(capsys):
    with pytest.raises(SystemExit) as info:
        run(["bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run(["counterexample", "--eps", "-1"])
    assert info.value.code == 2


def test_out_file_and_byte_identical_runs(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "transfunctions", "check", "--input", str(JOBS / "kernel.json"), "--seed", "7", "--out", str(out)],
            capture_output=True,
        )
        assert proc.returncode == 0 and proc.stdout == b""
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].endswith(b"\n")
