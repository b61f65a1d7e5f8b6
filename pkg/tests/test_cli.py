import json

import pytest

from app.cli import main

BARNES1 = '{"a": [0.5, 0.7], "b": [0.6, 0.9]}'


def _run(capsys, *argv):
    code = main(["--log-level", "WARNING", *argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_list(capsys):
    code, out, _ = _run(capsys, "list")
    assert code == 0
    for identity in ["g1", "g2", "g3", "g2a", "iw", "tba", "abop", "s1", "s2", "s3", "s4", "s5", "barnes1", "barnes2"]:
        assert f"\n{identity} " in "\n" + out


def test_verify_writes_report_and_cache(capsys, tmp_path):
    out_path = tmp_path / "barnes1.json"
    cache = tmp_path / "cache"
    code, out, _ = _run(
        capsys, "verify", "--identity", "barnes1", "--params", BARNES1, "--out", str(out_path), "--cache-dir", str(cache)
    )
    assert code == 0
    assert "PASS" in out
    report = json.loads(out_path.read_text())
    assert report["status"] == "pass"
    assert report["rel_deviation"] < 1e-8
    assert len(list(cache.glob("*.json"))) == 1


def test_verify_params_from_file(capsys, tmp_path):
    params = tmp_path / "params.json"
    params.write_text(BARNES1)
    code, _, _ = _run(capsys, "verify", "--identity", "barnes1", "--params", str(params), "--cache-dir", str(tmp_path / "c"))
    assert code == 0


def test_seeded_verify_is_deterministic(capsys, tmp_path):
    documents = []
    for name in ("first.json", "second.json"):
        path = tmp_path / name
        code, _, _ = _run(
            capsys, "verify", "--identity", "g1", "--n", "2", "--seed", "7", "--rel-tol", "1e-6",
            "--out", str(path), "--cache-dir", str(tmp_path / "cache"),
        )
        assert code == 0
        document = json.loads(path.read_text())
        document.pop("runtime_s")
        documents.append(document)
    assert documents[0] == documents[1]


def test_constraint_violation_is_a_usage_error(capsys, tmp_path):
    code, _, err = _run(
        capsys, "verify", "--identity", "g3", "--params", '{"alpha": [0.7, 0.7], "beta": [0.05]}',
        "--cache-dir", str(tmp_path),
    )
    assert code == 3
    assert "ConstraintViolated" in err
    assert "alpha pairwise distinct" in err


def test_bad_contour_is_inconclusive(capsys, tmp_path):
    code, out, _ = _run(
        capsys, "verify", "--identity", "barnes1", "--params", BARNES1, "--offsets", "0.8", "--cache-dir", str(tmp_path)
    )
    assert code == 2
    assert "Infeasible" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--identity", "barnes1", "--params", BARNES1, "--seed", "1"],
        ["verify", "--identity", "barnes1"],
        ["verify", "--identity", "nope", "--seed", "1"],
        ["verify", "--identity", "barnes1", "--params", "{broken"],
        ["verify", "--identity", "barnes1", "--n", "2", "--seed", "1"],
        ["sweep", "--identity", "barnes1", "--trials", "0"],
        ["frobnicate"],
        ["halfplane"],
        [],
    ],
)
def test_usage_errors(capsys, tmp_path, argv):
    code, _, err = _run(capsys, *argv, *(["--cache-dir", str(tmp_path)] if argv[:1] in (["verify"], ["sweep"]) else []))
    assert code == 3
    assert "error:" in err


def test_sweep(capsys, tmp_path):
    out_path = tmp_path / "sweep.json"
    code, out, _ = _run(
        capsys, "sweep", "--identity", "barnes1", "--trials", "3", "--seed", "1", "--out", str(out_path), "--cache-dir", str(tmp_path)
    )
    assert code == 0
    assert "3/3 pass" in out
    assert json.loads(out_path.read_text())["counts"]["pass"] == 3


def test_report(capsys, tmp_path):
    cache = str(tmp_path / "cache")
    code, _, err = _run(capsys, "report", "--cache-dir", cache)
    assert code == 3
    assert "EmptyCache" in err

    _run(capsys, "verify", "--identity", "barnes1", "--params", BARNES1, "--cache-dir", cache)
    _run(capsys, "verify", "--identity", "barnes2", "--seed", "0", "--cache-dir", cache)
    code, out, _ = _run(capsys, "report", "--cache-dir", cache)
    assert code == 0
    rows = [line for line in out.splitlines()[1:] if not line.startswith("note:")]
    assert len(rows) == 2
    assert rows[0].startswith("barnes1")


def test_halfplane_transition(capsys, tmp_path):
    out_path = tmp_path / "t.json"
    code, out, _ = _run(capsys, "halfplane", "transition", "--s", "1", "--nu", "0.4", "--p", "2", "--out", str(out_path))
    assert code == 0
    assert json.loads(out_path.read_text())["identity"] == "halfplane-transition"


def test_halfplane_chain_rule(capsys):
    code, _, _ = _run(capsys, "halfplane", "chain-rule", "--s", "1", "--alpha", "1.5", "--beta", "1.5", "--z", "[0, 1]", "--zeta", "[0, 1]")
    assert code == 0


def test_halfplane_rejects_lower_half_plane(capsys):
    code, _, err = _run(capsys, "halfplane", "chain-rule", "--s", "1", "--alpha", "1.5", "--beta", "1.5", "--z", "[0, -1]", "--zeta", "[0, 1]")
    assert code == 3
    assert "upper half-plane" in err


def test_halfplane_domain_violation(capsys):
    code, _, err = _run(capsys, "halfplane", "chain-rule", "--s", "1", "--alpha", "0.9", "--beta", "0.9", "--z", "[0, 1]", "--zeta", "[0, 1]")
    assert code == 3
    assert "DomainViolation" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--identity", "barnes1", "--params", BARNES1, "--rel-tol", "0"],
        ["verify", "--identity", "barnes1", "--params", BARNES1, "--margin", "0"],
        ["verify", "--identity", "barnes1", "--params", BARNES1, "--qmc-points", "0"],
        ["verify", "--identity", "barnes1", "--params", BARNES1, "--jobs", "0"],
        ["sweep", "--identity", "barnes1", "--trials", "1", "--rel-tol", "0"],
        ["sweep", "--identity", "barnes1", "--trials", "1", "--margin", "0"],
        ["sweep", "--identity", "barnes1", "--trials", "1", "--jobs", "0"],
    ],
)
def test_explicit_zero_is_not_replaced_by_the_default(capsys, tmp_path, argv):
    code, out, err = _run(capsys, *argv, "--cache-dir", str(tmp_path))
    assert code == 3
    assert "error: UsageError" in err
    assert "PASS" not in out
    assert not list(tmp_path.glob("*.json"))


@pytest.mark.parametrize("flag", ["--rel-tol", "--jobs"])
def test_halfplane_rejects_zero_settings(capsys, flag):
    code, _, err = _run(capsys, "halfplane", "transition", "--s", "1", "--nu", "0.4", "--p", "2", flag, "0")
    assert code == 3
    assert "error: UsageError" in err


def test_report_files_carry_the_provenance_key(capsys, tmp_path):
    out_path = tmp_path / "barnes1.json"
    cache = tmp_path / "cache"
    code, _, _ = _run(
        capsys, "verify", "--identity", "barnes1", "--params", BARNES1, "--out", str(out_path), "--cache-dir", str(cache)
    )
    assert code == 0
    report = json.loads(out_path.read_text())
    assert "Barnes" in report["paper_anchor"]
    assert "anchor" not in report
    cached = json.loads(next(cache.glob("*.json")).read_text())
    assert "paper_anchor" in json.dumps(cached)


@pytest.mark.parametrize(
    "identity, params",
    [
        ("g1", '{"alpha": [0.1, 0.9], "beta": [-0.3, 0.8]}'),
        ("g3", '{"alpha": [0.3, 0.9], "beta": [0.5]}'),
    ],
)
def test_no_straight_contour_is_inconclusive(capsys, tmp_path, identity, params):
    code, out, err = _run(capsys, "verify", "--identity", identity, "--params", params, "--cache-dir", str(tmp_path))
    assert code == 2
    assert "INCONCLUSIVE" in out
    assert "Infeasible" in out
    assert "ConstraintViolated" not in err


def test_list_shows_provenance(capsys):
    _, out, _ = _run(capsys, "list")
    assert "paper_anchor: Barnes' first lemma (g1 at N=1)" in out
    assert "constraints: none" in out
