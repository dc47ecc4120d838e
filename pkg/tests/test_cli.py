import csv
import io
import json
import math

import pytest

from resodyn import cli
from resodyn.spin_boson import gamma_star


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_yaml(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestSpinBosonSweep:
    def test_columns_and_regimes(self, capsys):
        code, out, _ = run(["spinboson", "sweep", "gamma", "0.1..10", "log", "21"], capsys)
        assert code == 0
        rows = rows_of(out)
        assert len(rows) == 21
        assert list(rows[0]) == list(cli.COLUMNS["spinboson"])
        gs = gamma_star(4 * math.pi)
        for r in rows:
            g = float(r["gamma"])
            want = "overlapping" if g < gs else "isolated"
            assert r["regime"] == want
            if want == "overlapping":
                assert float(r["re_w3"]) == 0 and float(r["re_w4"]) == 0
            else:
                assert float(r["im_w3"]) == pytest.approx(float(r["im_w4"]), rel=1e-14)

    def test_single_point_uses_config_gamma(self, capsys):
        code, out, _ = run(["spinboson"], capsys)
        rows = rows_of(out)
        assert code == 0 and len(rows) == 1
        assert float(rows[0]["gamma"]) == pytest.approx(0.5)

    def test_missing_range(self, capsys):
        code, _, err = run(["spinboson", "sweep"], capsys)
        assert code == cli.EXIT_CONFIG and "spinboson.range" in err

    def test_wrong_parameter(self, capsys):
        code, _, err = run(["spinboson", "sweep", "sigma", "0.1..1", "linear", "3"], capsys)
        assert code == cli.EXIT_CONFIG and "spinboson.parameter" in err


def test_describe_output_covers_every_column(capsys):
    code, text, _ = run(["--describe-output"], capsys)
    assert code == 0
    for mode, cols in cli.COLUMNS.items():
        assert f"[{mode}]" in text
        for col in cols:
            assert f"  {col}: " in text
    # every column emitted by the spin-boson and resonance modes is documented
    _, out, _ = run(["spinboson", "sweep", "gamma", "1..2", "linear", "2"], capsys)
    assert set(rows_of(out)[0]) <= set(cli.COLUMNS["spinboson"])
    _, out, _ = run(["resonances"], capsys)
    assert set(rows_of(out)[0]) == set(cli.COLUMNS["resonances"])


def test_describe_single_mode(capsys):
    _, text, _ = run(["--describe-output", "sweep"], capsys)
    assert text.startswith("[sweep]") and "[dynamics]" not in text


def test_byte_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "sigma", "1e-4..1e-2", "log", "6"]
    assert run(["--out", str(a)] + args, capsys)[0] == 0
    assert run(["--out", str(b), "--threads", "3"] + args, capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_env(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("RESODYN_THREADS", "2")
    assert cli.resolve_threads(None) == 2
    assert cli.resolve_threads(4) == 4
    monkeypatch.setenv("RESODYN_THREADS", "many")
    code, _, err = run(["spinboson"], capsys)
    assert code == cli.EXIT_CONFIG and "RESODYN_THREADS" in err
    monkeypatch.delenv("RESODYN_THREADS")
    code, _, err = run(["--threads", "0", "spinboson"], capsys)
    assert code == cli.EXIT_CONFIG and "threads" in err


class TestConfigErrors:
    @pytest.mark.parametrize("text,key", [
        ("coupling:\n  lambda: 0\n", "coupling.lambda"),
        ("coupling:\n  sigmaa: 0.1\n", "coupling.sigmaa"),
        ("bath:\n  beta: 0\n", "bath.beta"),
        ("bath:\n  form_factor:\n    decay_a: 0.2\n", "decay_a"),
        ("quadrature:\n  rel_tol: fast\n", "quadrature.rel_tol"),
    ])
    def test_key_named(self, tmp_path, capsys, text, key):
        code, _, err = run(["--config", write_yaml(tmp_path, text), "resonances"], capsys)
        assert code == cli.EXIT_CONFIG
        assert key in err

    def test_unparseable_yaml(self, tmp_path, capsys):
        code, _, err = run(["--config", write_yaml(tmp_path, "a: [1, 2\n"), "resonances"], capsys)
        assert code == cli.EXIT_CONFIG and "config error" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["--config", str(tmp_path / "none.yaml"), "resonances"], capsys)
        assert code == cli.EXIT_CONFIG

    def test_single_point_sweep_rejected(self, capsys):
        code, _, err = run(["sweep", "sigma", "0.1..0.2", "linear", "1"], capsys)
        assert code == cli.EXIT_CONFIG and "sweep.points" in err


def exceptional_sigma(lam=0.1):
    from resodyn.bath import bath_functions
    from resodyn.model import BathParams, FormFactor

    # sigma = gamma_star lambda^2 sits on the exceptional point of the spin-boson operator
    return gamma_star(bath_functions(FormFactor(), BathParams(1.0)).xi0) * lam ** 2


def test_sweep_records_failed_points(capsys):
    sig = exceptional_sigma()
    code, out, _ = run(["sweep", "sigma", f"{sig!r}..{2 * sig!r}", "linear", "2"], capsys)
    rows = rows_of(out)
    assert code == 0
    assert rows[0]["status"] == "DegenerateAtRequestedPoint" and rows[0]["re_eps_0_0"] == "nan"
    assert rows[1]["status"] == "ok"


def test_resonances_compute_error(tmp_path, capsys):
    cfg = write_yaml(tmp_path, f"coupling:\n  sigma: {exceptional_sigma()!r}\n  lambda: 0.1\n")
    code, _, err = run(["--config", cfg, "resonances"], capsys)
    assert code == cli.EXIT_COMPUTE and "DegenerateAtRequestedPoint" in err


def test_meta_sidecar(tmp_path, capsys):
    out = tmp_path / "res.csv"
    assert run(["--out", str(out), "resonances"], capsys)[0] == 0
    meta = json.loads((tmp_path / "res.csv.meta.json").read_text())
    assert meta["software"] == "resodyn" and meta["subcommand"] == "resonances"
    assert meta["config"]["coupling"]["lambda"] == 0.1
    assert meta["tolerances"]["quadrature"]["rel_tol"] == 1e-10
    assert "dropped_remainders" in meta


def test_resonances_output(capsys):
    code, out, _ = run(["resonances"], capsys)
    rows = rows_of(out)
    assert code == 0 and len(rows) == 4
    assert [(r["a"], r["b"]) for r in rows] == [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
    assert all(float(r["im_eps"]) >= -1e-14 for r in rows)


def test_dynamics_output(tmp_path, capsys):
    code, out, _ = run(["dynamics"], capsys)
    rows = rows_of(out)
    assert code == 0 and len(rows) == 30
    assert float(rows[0]["t"]) == 0
    assert float(rows[0]["re_rho_0_0"]) == pytest.approx(0.5 + 0.2, abs=1e-12)
    cfg = write_yaml(tmp_path, "coupling:\n  sigma: 0.0\n  lambda: 0.3\ndynamics:\n"
                               "  t_max: 50\n  points: 5\n  elements: [[0, 1]]\n")
    code, out, _ = run(["--config", cfg, "dynamics"], capsys)
    rows = rows_of(out)
    assert code == 0 and list(rows[0]) == ["t", "re_rho_0_1", "im_rho_0_1", "manifold_distance"]
    # pure dephasing never increases the distance to the diagonal
    d = [float(r["manifold_distance"]) for r in rows]
    assert all(x >= y - 1e-15 for x, y in zip(d, d[1:]))


def test_custom_system_drops_default_rho0(tmp_path, capsys):
    cfg = write_yaml(tmp_path, "system:\n  dim: 3\n  hs: [[0.1, 0], [0.3, 0.1], [0, 0], [0.3, -0.1], "
                               "[-0.2, 0], [0.2, 0], [0, 0], [0.2, 0], [0.4, 0]]\n  g_levels: [-1, 0, 1]\n")
    code, out, _ = run(["--config", cfg, "resonances"], capsys)
    assert code == 0 and len(rows_of(out)) == 9
    code, _, err = run(["--config", cfg, "dynamics"], capsys)
    assert code == cli.EXIT_CONFIG and "dynamics.rho0" in err


def test_sweep_output_and_labels(capsys):
    code, out, _ = run(["sweep", "lambda", "0.05..0.2", "linear", "4"], capsys)
    rows = rows_of(out)
    assert code == 0 and len(rows) == 4
    assert list(rows[0])[:3] == ["lambda", "re_eps_0_0", "im_eps_0_0"]
    assert all(r["status"] == "ok" for r in rows)


def test_sweep_beta(capsys):
    code, out, _ = run(["sweep", "beta", "0.5..2.5", "linear", "3"], capsys)
    rows = rows_of(out)
    assert code == 0
    # Im eps_01 at small sigma scales like xi0 = 4 pi / beta
    assert float(rows[0]["im_eps_0_1"]) > float(rows[1]["im_eps_0_1"])
    # beta = 2.5 violates the decay condition a > beta / 2 and is reported per point
    assert rows[2]["status"] == "ValidationError"


def test_oracle_validate(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["--out", str(out), "oracle-validate"], capsys)
    report = json.loads(out.read_text())
    assert code == 0 and report["passed"]
    assert all(c["max_error"] <= c["tolerance"] for c in report["checks"])


def test_oracle_validate_two_word_form(capsys):
    code, out, _ = run(["oracle", "validate"], capsys)
    assert code == 0 and json.loads(out)["passed"]


def test_no_subcommand(capsys):
    assert run([], capsys)[0] == cli.EXIT_CONFIG
