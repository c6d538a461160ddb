import json

import numpy as np
import pytest

from sectorsum import CertificateReport, generate, report_diff, run_experiment
from sectorsum.cli import main as cli_main
from sectorsum.errors import ConfigInvalid, IncompatibleReports, InvalidRecipe
from sectorsum.harness import laplacian_eigenvalues, validate_config
from sectorsum.linops import write_matrix


def test_generate_laplacian_eigenvalues():
    m = 3
    op = generate("laplacian-1d", m=m)
    expected = (m + 1) ** 2 * (2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1))
    assert np.allclose(op.matrix, expected)
    eig = np.sort(np.linalg.eigvalsh(op.matrix.real))
    assert np.allclose(eig, laplacian_eigenvalues(m), rtol=1e-12)


def test_generate_diag_rotated_certified_angle():
    op = generate("diag-rotated", psi=np.pi / 4, entries=[1.0, 2.0, 3.0])
    assert np.allclose(op.matrix, np.diag(np.exp(1j * np.pi / 4) * np.arange(1.0, 4.0)))
    assert op.angle() >= np.pi / 2


def test_generate_jordan():
    op = generate("jordan", a=2.0, size=2)
    assert np.array_equal(op.matrix, np.array([[2.0, 1.0], [0.0, 2.0]]))


def test_generate_commuting_pair_commutes():
    A = generate("commuting-pair", role="a", n=4, seed=42)
    B = generate("commuting-pair", role="b", n=4, seed=42)
    assert np.linalg.norm(A.matrix @ B.matrix - B.matrix @ A.matrix) < 1e-10


def test_generate_determinism():
    a1 = generate("commuting-pair", role="a", n=4, seed=7)
    a2 = generate("commuting-pair", role="a", n=4, seed=7)
    assert np.array_equal(a1.matrix, a2.matrix)


def test_generate_rejects_unknown():
    with pytest.raises(InvalidRecipe):
        generate("heptadiagonal")
    with pytest.raises(InvalidRecipe):
        generate("jordan", a=2.0, size=2, bogus=1)


def test_validate_config_strict():
    good = {"schema_version": 1, "pipeline": "certify", "theta": 1.0,
            "recipe": {"kind": "diag-positive"}}
    validate_config(good)
    with pytest.raises(ConfigInvalid):
        validate_config({**good, "schema_version": 2})
    with pytest.raises(ConfigInvalid):
        validate_config({**good, "pipeline": "frobnicate"})
    with pytest.raises(ConfigInvalid):
        validate_config({**good, "unexpected": 1})


def test_run_experiment_certify_and_determinism(tmp_path):
    cfg = {"schema_version": 1, "pipeline": "certify", "theta": 1.0,
           "recipe": {"kind": "diag-positive", "n": 2}, "seed": 5}
    cpath = tmp_path / "cfg.json"
    cpath.write_text(json.dumps(cfg))
    paths1, ok1 = run_experiment(str(cpath), str(tmp_path / "a"))
    paths2, ok2 = run_experiment(str(cpath), str(tmp_path / "b"))
    assert ok1 and ok2
    r1 = CertificateReport.load(paths1[0])
    r2 = CertificateReport.load(paths2[0])
    assert r1.payload_json() == r2.payload_json()  # byte identical sans envelope
    assert r1.equivalent(CertificateReport.from_json(r1.to_json()))


def test_run_experiment_sweep_csv(tmp_path):
    cfg = {"schema_version": 1, "pipeline": "sweep", "kind": "maxreg-laplacian",
           "sizes": [4, 8], "nt": 64}
    cpath = tmp_path / "cfg.json"
    cpath.write_text(json.dumps(cfg))
    paths, ok = run_experiment(str(cpath), str(tmp_path))
    assert ok
    csv = [p for p in paths if p.endswith(".csv")]
    assert csv
    lines = open(csv[0]).read().strip().splitlines()
    assert lines[0] == "m,constant_fprime,constant_Af"
    assert len(lines) == 3


def test_run_experiment_malformed_config(tmp_path):
    cpath = tmp_path / "bad.json"
    cpath.write_text(json.dumps({"schema_version": 1, "pipeline": "certify"}))
    with pytest.raises(ConfigInvalid):
        run_experiment(str(cpath), str(tmp_path))


def test_report_diff_identical_runs():
    rep = CertificateReport("op", {"x": 1}, {}, {"n": 3}, {"val": 1.25}, True)
    diff = report_diff(rep, CertificateReport("op", {"x": 1}, {}, {"n": 3},
                                              {"val": 1.25}, True))
    assert diff["all_within_tol"] and diff["max_abs_diff"] == 0.0


def test_report_diff_grid_refinement_model(tmp_path):
    # with the fixed probe set the constants are smooth functionals of
    # the grid, so N vs 2N differ within an O(dt^2) Richardson allowance
    from sectorsum import TimeGrid, maxreg_constant
    from conftest import certified

    A = certified([[1.0]], 0.8 * np.pi)
    reps = {}
    for N in (128, 256):
        r = maxreg_constant(A, TimeGrid(1.0, N), adversarial=False)
        reps[N] = CertificateReport(
            "maxreg", {"N_t": N}, {}, {"N_t": N},
            {"constant_fprime": r.constant_fprime}, True,
        )
    diff = report_diff(reps[128], reps[256], tol=50.0 * (1.0 / 128) ** 2)
    assert diff["fields"]["outputs.constant_fprime"]["within_tol"]


def test_report_diff_incompatible():
    a = CertificateReport("op-a", {}, {}, {}, {}, True)
    b = CertificateReport("op-b", {}, {}, {}, {}, True)
    with pytest.raises(IncompatibleReports):
        report_diff(a, b)


# ------------------------------------------------------------------- CLI


def test_cli_certify_and_power(tmp_path, capsys):
    mpath = tmp_path / "m.csv"
    write_matrix(mpath, np.diag([1.0, 4.0]).astype(complex))
    rc = cli_main(["--out", str(tmp_path), "certify-sector",
                   "--matrix", str(mpath), "--theta", "1.0"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["outputs"]["K_hat"] >= 1.0

    rc = cli_main(["power", "--matrix", str(mpath), "--re", "-0.5"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["norm"] == pytest.approx(1.0, abs=1e-7)


def test_cli_sum_inverse(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_matrix(a, np.diag([1.0, 2.0]).astype(complex))
    write_matrix(b, np.diag([3.0, 4.0]).astype(complex))
    rc = cli_main(["--out", str(tmp_path), "sum-inverse",
                   "--matrix-a", str(a), "--matrix-b", str(b),
                   "--theta-a", "2.7", "--theta-b", "2.7"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["outputs"]["relative_error_vs_direct"] <= 1e-6


def test_cli_run_config_exit_codes(tmp_path, capsys):
    cpath = tmp_path / "cfg.json"
    cpath.write_text(json.dumps({"schema_version": 1, "pipeline": "certify",
                                 "theta": 1.0,
                                 "recipe": {"kind": "diag-positive", "n": 2}}))
    assert cli_main(["--out", str(tmp_path), "run", "--config", str(cpath)]) == 0
    capsys.readouterr()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "pipeline": "certify"}))
    assert cli_main(["--out", str(tmp_path), "run", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_cli_report_diff(tmp_path, capsys):
    rep = CertificateReport("op", {"x": 1}, {}, {}, {"v": 2.0}, True)
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    rep.save(p1)
    rep.save(p2)
    assert cli_main(["report-diff", str(p1), str(p2)]) == 0
    capsys.readouterr()


def test_cli_hilbert_symbol_unknown(tmp_path, capsys):
    mpath = tmp_path / "m.csv"
    write_matrix(mpath, np.diag([1.0]).astype(complex))
    rc = cli_main(["hinf", "--matrix", str(mpath), "--symbol", "nope"])
    assert rc == 2
    capsys.readouterr()


def test_cli_tsector_and_repcheck_and_maxreg(tmp_path, capsys):
    mpath = tmp_path / "m.csv"
    write_matrix(mpath, np.diag([1.0, 2.0]).astype(complex))
    rc = cli_main(["t-sector", "--matrix", str(mpath), "--n", "1", "--p", "2"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["C_hat"] > 0

    rc = cli_main(["rep-check", "--matrix", str(mpath), "--rho", "1.0",
                   "--theta", "0.5"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["error"] <= 1e-5

    rc = cli_main(["maxreg", "--matrix", str(mpath), "--nt", "64"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert np.isfinite(out["constant_fprime"])


def test_cli_maxreg_refine_writes_csv(tmp_path):
    cfg = {"schema_version": 1, "pipeline": "maxreg", "nt": 64, "refine": True,
           "recipe": {"kind": "diag-positive", "n": 2}}
    cpath = tmp_path / "cfg.json"
    cpath.write_text(json.dumps(cfg))
    paths, ok = run_experiment(str(cpath), str(tmp_path))
    assert ok
    csvs = [p for p in paths if p.endswith(".csv")]
    assert csvs and open(csvs[0]).readline().startswith("N_t,")
