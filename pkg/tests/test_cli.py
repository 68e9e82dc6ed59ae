import subprocess
import sys

import numpy as np
import pytest

from nhdecay import io
from nhdecay.cli import ExperimentSpec, UsageError, build_parser, main, run_experiment, spec_from_args, sweep
from nhdecay.dynamics import SimConfig


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(*argv):
    return spec_from_args(build_parser().parse_args(["pole", *argv]))


class TestSpecMerging:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("NHDECAY_OUT", raising=False)
        spec = parse()
        assert (spec.kappa1, spec.kappa2) == pytest.approx((0.85, 0.15))
        assert spec.sigma == {0: 0.2} and spec.omega_a == 0.0
        assert str(spec.out_dir) == "nhdecay_out"

    def test_precedence(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[model]\ndelta1 = 1\ndelta2 = 1.2\n[coupling]\nsigma = 0.3\nomega_a = 0.5\n"
                       "[simulation]\nt_final = 40\n[output]\ndir = from_config\n")
        monkeypatch.delenv("NHDECAY_OUT", raising=False)
        spec = parse("--config", str(cfg), "--omega-a", "0.1")
        assert (spec.kappa1, spec.kappa2) == pytest.approx((1.1, -0.1))
        assert spec.sigma == {0: 0.3}
        assert spec.omega_a == 0.1
        assert spec.sim.t_final == 40
        assert str(spec.out_dir) == "from_config"
        monkeypatch.setenv("NHDECAY_OUT", str(tmp_path / "env"))
        assert parse("--config", str(cfg)).out_dir == tmp_path / "env"
        assert parse("--config", str(cfg), "--out", "flag").out_dir.name == "flag"

    def test_dispersion_section(self, tmp_path):
        cfg = tmp_path / "d.ini"
        cfg.write_text("[dispersion]\n1 = 0.8\n-1 = 0.2, 0.1\n")
        spec = parse("--config", str(cfg))
        assert not spec.is_preset and spec.coeffs == {-1: 0.2 + 0.1j, 1: 0.8}

    def test_lone_delta(self):
        spec = parse("--delta2", "1.2")
        assert (spec.kappa1, spec.kappa2) == pytest.approx((1.1, -0.1))

    @pytest.mark.parametrize(
        "argv",
        [
            ("--kappa1", "1", "--delta2", "0.5"),
            ("--kappa1", "1"),
            ("--coeff", "1=0.5", "--kappa1", "1", "--kappa2", "0"),
            ("--coeff", "oops"),
            ("--kappa1", "-1", "--kappa2", "0.5"),
            ("--t-final", "-3"),
        ],
    )
    def test_usage_errors(self, argv):
        with pytest.raises(UsageError):
            parse(*argv)

    def test_missing_config(self, tmp_path):
        with pytest.raises(UsageError):
            parse("--config", str(tmp_path / "absent.ini"))


class TestCommands:
    def test_classify_preset(self, capsys):
        code, out, _ = run(capsys, "classify", "--delta1", "1", "--delta2", "1")
        assert code == 0
        rec = io.parse_summary(out)
        assert rec["regime"] == "rabi_boundary"
        assert rec["boundary_flag"] == "true"
        assert "saddles: none" in out

    def test_classify_csv(self, capsys, tmp_path):
        code, out, err = run(capsys, "classify", "--delta2", "1.2", "--csv", "--out", str(tmp_path))
        assert code == 0
        assert io.parse_summary(out)["verdict"] == "absolute"
        header, rows = io.read_csv(tmp_path / "classify_saddles.csv")
        assert header == ["re_k", "im_k", "re_omega", "im_omega", "order"] and len(rows) == 2

    def test_pole(self, capsys):
        code, out, _ = run(capsys, "pole", "--omega-a", "0.8")
        rec = io.parse_summary(out)
        assert code == 0
        assert complex(rec["pole"]).real == pytest.approx(0.878248, abs=1e-6)

    def test_simulate_files(self, capsys, tmp_path):
        code, out, err = run(capsys, "simulate", "--t-final", "10", "--alpha", "1.5", "--out", str(tmp_path), "--svg")
        assert code == 0
        header, rows = io.read_csv(tmp_path / "simulate_trajectory.csv")
        assert header == ["t", "re_ca", "im_ca", "pa"]
        assert float(rows[0][3]) == 1.0 and float(rows[-1][0]) == pytest.approx(10.0)
        assert io.read_csv(tmp_path / "simulate_snapshots.csv")[0] == ["t", "n", "re_cn", "im_cn"]
        assert (tmp_path / "simulate_trajectory.svg").read_text().startswith("<svg")
        assert (tmp_path / "simulate_growth.csv").exists()
        rec = io.parse_summary((tmp_path / "simulate_summary.txt").read_text())
        assert rec["flags"] == "none" and rec["verdict"] == "convective"

    def test_simulate_deterministic(self, capsys, tmp_path):
        for sub in ("a", "b"):
            assert run(capsys, "simulate", "--t-final", "8", "--out", str(tmp_path / sub))[0] == 0
        for name in ("simulate_trajectory.csv", "simulate_snapshots.csv", "simulate_summary.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_spectral_grid(self, capsys, tmp_path):
        code, _, _ = run(capsys, "spectral", "--re-range", "-1.5", "1.5", "4", "--im-range", "0.1", "0.1", "1",
                         "--out", str(tmp_path))
        assert code == 0
        header, rows = io.read_csv(tmp_path / "spectral_self_energy.csv")
        assert header == ["re_omega", "im_omega", "re_sigma", "im_sigma", "sheet"]
        assert [r[4] for r in rows] == ["I", "I", "II", "I", "II", "I"]

    def test_spectral_bad_grid(self, capsys):
        assert run(capsys, "spectral", "--re-range", "0", "1", "0")[0] == 2

    def test_fig3_panel(self, capsys, tmp_path):
        code, out, _ = run(capsys, "fig3", "--panel", "center", "--t-final", "20", "--out", str(tmp_path), "--svg")
        assert code == 0
        assert (tmp_path / "fig3_center.svg").exists()
        _, rows = io.read_csv(tmp_path / "fig3_center_wa0_trajectory.csv")
        t = np.array([float(r[0]) for r in rows])
        pa = np.array([float(r[3]) for r in rows])
        np.testing.assert_allclose(pa, np.cos(0.2 * t) ** 2, atol=1e-8)

    def test_fig4(self, capsys, tmp_path):
        code, out, _ = run(capsys, "fig4", "--t-final", "20", "--out", str(tmp_path), "--svg")
        assert code == 0
        header, _ = io.read_csv(tmp_path / "fig4_growth.csv")
        assert len(header) == 1 + 2 * 4  # t plus both conventions for four alphas
        assert (tmp_path / "fig4_growth.svg").exists()
        assert io.parse_summary(out)["verdict"] == "absolute"

    def test_bad_flag_exit_code(self, capsys):
        assert run(capsys, "simulate", "--no-such-flag")[0] == 2
        assert run(capsys, "classify", "--kappa1", "1", "--delta1", "1")[0] == 2

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "nhdecay", "classify"], capture_output=True, text=True)
        assert res.returncode == 0
        assert "regime" in res.stdout and "pseudo_hermitian_convective" in res.stdout


class TestSweep:
    def test_empty_range(self, capsys, tmp_path):
        assert run(capsys, "sweep", "--param", "omega_a", "0", "1", "0", "--out", str(tmp_path))[0] == 2

    def test_cap_and_names(self):
        spec = ExperimentSpec(0.85, 0.15, outputs=frozenset())
        with pytest.raises(UsageError):
            sweep(spec, [("omega_a", np.linspace(0, 1, 20))], cap=10)
        with pytest.raises(UsageError):
            sweep(spec, [("hbar", np.linspace(0, 1, 2))])

    def test_verdict_flip(self, capsys, tmp_path):
        code, out, _ = run(capsys, "sweep", "--param", "delta2", "0.2", "1.4", "7", "--no-simulate",
                           "--out", str(tmp_path))
        assert code == 0
        header, rows = io.read_csv(tmp_path / "sweep.csv")
        verdicts = {float(r[0]): r[1] for r in rows}
        assert all(v == "convective" for d2, v in verdicts.items() if d2 <= 1.0)
        assert all(v == "absolute" for d2, v in verdicts.items() if d2 > 1.0)

    def test_plateau_transition(self):
        spec = ExperimentSpec(0.85, 0.15, outputs=frozenset({"trajectory"}), sim=SimConfig(150.0))
        names, rows = sweep(spec, [("omega_a", np.array([0.0, 0.3, 0.9, 1.2]))], workers=2)
        plateaus = [rec["plateau_mean"] for _, rec in rows]
        assert plateaus[0] < 0.01 and plateaus[1] < 0.01
        assert plateaus[2] > 0.05 and plateaus[3] > 0.05

    def test_parallel_matches_serial(self, tmp_path, capsys):
        argv = ["sweep", "--param", "omega_a", "0", "1.5", "3", "--param", "sigma", "0.1", "0.2", "2", "--t-final", "10"]
        assert run(capsys, *argv, "--out", str(tmp_path / "s"))[0] == 0
        assert run(capsys, *argv, "--workers", "3", "--out", str(tmp_path / "p"))[0] == 0
        serial = (tmp_path / "s" / "sweep.csv").read_bytes()
        assert serial == (tmp_path / "p" / "sweep.csv").read_bytes()
        _, rows = io.read_csv(tmp_path / "s" / "sweep.csv")
        # first parameter varies slowest
        assert [(float(r[0]), float(r[1])) for r in rows][:3] == [(0.0, 0.1), (0.0, 0.2), (0.75, 0.1)]


def test_run_experiment_report(tmp_path):
    spec = ExperimentSpec(0.5, 0.5, omega_a=2.0, sim=SimConfig(5.0), out_dir=tmp_path, tag="x")
    report = run_experiment(spec)
    assert report.summary["pole"].imag == pytest.approx(0.0, abs=1e-12)
    assert all(p.exists() for p in report.files)
    assert report.trajectory is not None and not report.warnings
