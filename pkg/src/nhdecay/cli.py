"""Command-line experiment runner.

Subcommands ``simulate``, ``classify``, ``spectral``, ``pole``, ``fig3``,
``fig4`` and ``sweep`` share the model flags.  Settings can come from an
INI-style ``--config`` file; command-line flags win over the file.  The output
directory is ``--out``, else ``$NHDECAY_OUT``, else the config's
``[output] dir``, else ``./nhdecay_out``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import io
from .closedform import AsymmetricModel, regime as asymmetric_regime
from .dynamics import SimConfig, Trajectory, evolve, fit_decay_rate, growth_diagnostic, plateau_estimate
from .exceptions import NHDecayError
from .lattice import Dispersion, asymmetric, dispersion_from_mapping
from .spectral import CouplingProfile, find_pole, self_energy_grid
from .stability import classify

OUT_ENV = "NHDECAY_OUT"
DEFAULT_OUT = "nhdecay_out"
SWEEP_CAP = 10_000
FIG4_ALPHAS = (1.5, 0.5, 0.0, -0.5)
SWEEPABLE = ("omega_a", "sigma", "delta1", "delta2", "kappa1", "kappa2")


class UsageError(ValueError):
    """Invalid experiment description; maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one run.

    The model is either the asymmetric preset (``kappa1``, ``kappa2``) or raw
    Fourier coefficients ``coeffs``, never both.
    """

    kappa1: float | None = None
    kappa2: float | None = None
    coeffs: Mapping[int, complex] | None = None
    sigma: Mapping[int, complex] = field(default_factory=lambda: {0: 0.2})
    omega_a: float = 0.0
    sim: SimConfig = field(default_factory=lambda: SimConfig(150.0))
    outputs: frozenset = frozenset({"trajectory", "classify", "pole"})
    alphas: tuple[float, ...] = ()
    out_dir: Path = Path(DEFAULT_OUT)
    svg: bool = False
    tag: str = "run"
    fit_window: tuple[float, float] = (20.0, 80.0)

    def validate(self) -> "ExperimentSpec":
        preset = self.kappa1 is not None or self.kappa2 is not None
        if preset == (self.coeffs is not None):
            raise UsageError("give exactly one model source: kappas/deltas or raw coefficients")
        if preset and (self.kappa1 is None or self.kappa2 is None):
            raise UsageError("the asymmetric preset needs both hoppings")
        if preset and not self.kappa1 > 0:
            raise UsageError("kappa1 must be positive")
        if "growth" in self.outputs and not self.alphas:
            raise UsageError("growth diagnostics need at least one alpha")
        return self

    @property
    def is_preset(self) -> bool:
        return self.coeffs is None

    def dispersion(self) -> Dispersion:
        return asymmetric(self.kappa1, self.kappa2) if self.is_preset else Dispersion(self.coeffs)

    def coupling(self) -> CouplingProfile:
        return CouplingProfile(self.omega_a, self.sigma)

    def asymmetric_model(self) -> AsymmetricModel | None:
        if not self.is_preset or set(self.sigma) - {0}:
            return None
        return AsymmetricModel(self.kappa1, self.kappa2, self.sigma.get(0, 0.0), self.omega_a)

    def with_parameter(self, name: str, value: float) -> "ExperimentSpec":
        if name == "omega_a":
            return replace(self, omega_a=float(value))
        if name == "sigma":
            return replace(self, sigma={0: complex(value)})
        if not self.is_preset:
            raise UsageError(f"sweeping {name} needs the asymmetric preset")
        k1, k2 = self.kappa1, self.kappa2
        d1, d2 = k1 + k2, k1 - k2
        if name == "kappa1":
            k1 = value
        elif name == "kappa2":
            k2 = value
        elif name == "delta1":
            k1, k2 = 0.5 * (value + d2), 0.5 * (value - d2)
        elif name == "delta2":
            k1, k2 = 0.5 * (d1 + value), 0.5 * (d1 - value)
        else:
            raise UsageError(f"cannot sweep {name!r}; choose from {', '.join(SWEEPABLE)}")
        return replace(self, kappa1=float(k1), kappa2=float(k2))


@dataclass
class Report:
    files: list[Path]
    summary: dict
    warnings: list[str]
    trajectory: Trajectory | None = None


# -- experiment pipeline --------------------------------------------------------

def _model_summary(spec: ExperimentSpec) -> dict:
    rec: dict = {}
    if spec.is_preset:
        rec.update(model="asymmetric", kappa1=spec.kappa1, kappa2=spec.kappa2,
                   delta1=spec.kappa1 + spec.kappa2, delta2=spec.kappa1 - spec.kappa2)
    else:
        rec["model"] = "fourier"
        for l, w in sorted(spec.coeffs.items()):
            rec[f"omega_{l}"] = complex(w)
    for n, s in sorted(spec.sigma.items()):
        rec[f"sigma_{n}"] = complex(s)
    rec["omega_a"] = spec.omega_a
    return rec


def _classification_summary(spec: ExperimentSpec, disp: Dispersion) -> dict:
    rc = classify(disp)
    rec = {"verdict": rc.verdict, "boundary_flag": rc.boundary_flag, "max_im_on_axis": rc.max_im_on_axis}
    model = spec.asymmetric_model() if spec.is_preset else None
    if spec.is_preset:
        rec["asymmetric_regime"] = asymmetric_regime(model or AsymmetricModel(spec.kappa1, spec.kappa2))
    rec["n_saddles"] = len(rc.saddles)
    if rc.critical_saddle is not None:
        rec["critical_k"] = rc.critical_saddle.k_s
        rec["critical_omega"] = rc.critical_saddle.omega_s
        rec["critical_order"] = rc.critical_saddle.order
    if len(rc.co_critical) > 1:
        rec["co_critical"] = len(rc.co_critical)
    return rec


def _pole_summary(disp, coupling) -> dict:
    res = find_pole(disp, coupling)
    rec = {
        "pole": res.pole,
        "residue": res.residue,
        "residue_sq": abs(res.residue) ** 2,
        "pole_location": res.pole_location,
        "pole_residual": res.residual,
        "cut_rate": res.cut_rate,
        "cut_power": res.cut_power,
    }
    for i, b in enumerate(res.branch_points):
        rec[f"branch_point_{i}"] = b.omega
    for i, note in enumerate(res.notes):
        rec[f"pole_note_{i}"] = note
    return rec


def _growth_files(spec, traj, stem, reference=None) -> tuple[list[Path], dict]:
    cols, names = [], []
    for conv, short in (("amplitude", "amp"), ("probability", "prob")):
        for a in spec.alphas:
            t, g = growth_diagnostic(traj, a, convention=conv)
            cols.append(g)
            names.append(f"{short}_alpha_{a:g}")
    path = io.write_csv(spec.out_dir / f"{stem}_growth.csv", ["t", *names], zip(t, *cols))
    rec = {f"growth_final_{n}": c[-1] for n, c in zip(names, cols)}
    rec["growth_convention_note"] = (
        "amplitude form (1/t)log(|c_a| t^alpha) tends to Im(omega_s); "
        "probability form (1/t)log(P_a t^alpha) tends to twice that"
    )
    files = [path]
    if spec.svg:
        n = len(spec.alphas)
        series = [(t, c, name) for c, name in zip(cols[:n], names[:n])]
        hl = [] if reference is None else [(reference, "Im omega_s")]
        files.append(io.write_svg(spec.out_dir / f"{stem}_growth.svg", series, ylabel="(1/t) log(|c_a| t^alpha)", hlines=hl))
    return files, rec


def run_experiment(spec: ExperimentSpec) -> Report:
    """Run the requested analyses and write their files.

    Returns the written paths, a flat summary record and warning lines.
    Numerical failures propagate as :class:`NHDecayError` subclasses.
    """
    spec.validate()
    disp, coupling = spec.dispersion(), spec.coupling()
    files: list[Path] = []
    warnings: list[str] = []
    summary = _model_summary(spec)
    if "classify" in spec.outputs:
        summary.update(_classification_summary(spec, disp))
    if "pole" in spec.outputs:
        try:
            summary.update(_pole_summary(disp, coupling))
        except (NHDecayError, ValueError) as exc:
            warnings.append(f"pole search failed: {exc}")
            summary["pole"] = None

    traj = None
    if {"trajectory", "growth"} & spec.outputs:
        traj = evolve(disp, coupling, spec.sim)
        cfg = traj.config
        summary.update(t_final=cfg.t_final, dt=cfg.dt, half_width=cfg.half_width,
                       representation=cfg.representation, steps=traj.times.size - 1)
        if cfg.representation == "bloch":
            summary["bloch_grid"] = cfg.bloch_grid
            summary["bloch_shift"] = traj.notes["bloch_shift"]
        summary["final_time"] = traj.times[-1]
        summary["final_pa"] = traj.P_a[-1]
        summary["flags"] = ",".join(traj.flags) or "none"
        for flag in traj.flags:
            warnings.append(f"trajectory flagged: {flag}")
        if not traj.flags:
            plat = plateau_estimate(traj)
            summary.update(plateau_mean=plat.mean, plateau_std=plat.std, plateau_converged=plat.converged)
        a, b = spec.fit_window
        if traj.times[-1] >= b and np.all(traj.P_a > 0):
            summary[f"decay_rate_fit_{a:g}_{b:g}"] = fit_decay_rate(traj, a, b)
            if summary.get("pole") is not None:
                summary["decay_rate_pole"] = -2 * summary["pole"].imag
        if "trajectory" in spec.outputs:
            files.append(io.write_trajectory(spec.out_dir / f"{spec.tag}_trajectory.csv", traj))
            snap = io.write_snapshots(spec.out_dir / f"{spec.tag}_snapshots.csv", traj)
            if snap is not None:
                files.append(snap)
            if spec.svg:
                files.append(io.write_svg(spec.out_dir / f"{spec.tag}_trajectory.svg",
                                          [(traj.times, traj.P_a, "P_a")], ylabel="P_a"))
        if "growth" in spec.outputs:
            ref = summary.get("cut_rate")
            if ref is None and "critical_omega" in summary:
                ref = summary["critical_omega"].imag
            g_files, g_rec = _growth_files(spec, traj, spec.tag, ref)
            files += g_files
            summary.update(g_rec)
    if "spectral" in spec.outputs:
        files.append(write_spectral_grid(spec, disp, coupling))
    files.append(io.write_summary(spec.out_dir / f"{spec.tag}_summary.txt", summary))
    return Report(files, summary, warnings, traj)


def write_spectral_grid(spec, disp, coupling, re=(-1.5, 1.5, 61), im=(-1.5, 1.5, 61)) -> Path:
    rows = self_energy_grid(disp, coupling, np.linspace(*re), np.linspace(*im))
    return io.write_csv(spec.out_dir / f"{spec.tag}_self_energy.csv",
                        ["re_omega", "im_omega", "re_sigma", "im_sigma", "sheet"], rows)


# -- sweeps -------------------------------------------------------------------

SWEEP_HEADER = ["verdict", "asymmetric_regime", "re_pole", "im_pole", "residue_sq", "plateau_mean", "plateau_std", "flags"]


def _sweep_point(args):
    spec, names, values = args
    for n, v in zip(names, values):
        spec = spec.with_parameter(n, v)
    rec = {}
    disp, coupling = spec.dispersion(), spec.coupling()
    rc = classify(disp)
    rec["verdict"] = rc.verdict.value
    rec["asymmetric_regime"] = asymmetric_regime(AsymmetricModel(spec.kappa1, spec.kappa2)).value if spec.is_preset else "none"
    try:
        res = find_pole(disp, coupling)
        rec.update(re_pole=res.pole.real, im_pole=res.pole.imag, residue_sq=abs(res.residue) ** 2)
    except (NHDecayError, ValueError):
        rec.update(re_pole=np.nan, im_pole=np.nan, residue_sq=np.nan)
    if "trajectory" in spec.outputs:
        traj = evolve(disp, coupling, replace(spec.sim, snapshot_every=0))
        rec["flags"] = ",".join(traj.flags) or "none"
        if traj.flags:
            rec.update(plateau_mean=np.nan, plateau_std=np.nan)
        else:
            p = plateau_estimate(traj)
            rec.update(plateau_mean=p.mean, plateau_std=p.std)
    else:
        rec.update(plateau_mean=np.nan, plateau_std=np.nan, flags="none")
    return tuple(values), rec


def sweep(
    spec: ExperimentSpec,
    grids: Sequence[tuple[str, np.ndarray]],
    *,
    workers: int = 1,
    cap: int = SWEEP_CAP,
):
    """Summary rows over the Cartesian grid of one or two parameters.

    Rows come back in grid order (first parameter slowest) whatever the
    worker count.
    """
    spec.validate()
    if not 1 <= len(grids) <= 2:
        raise UsageError("sweep one or two parameters")
    names = [g[0] for g in grids]
    for n in names:
        if n not in SWEEPABLE:
            raise UsageError(f"cannot sweep {n!r}; choose from {', '.join(SWEEPABLE)}")
    sizes = [len(g[1]) for g in grids]
    if min(sizes) == 0:
        raise UsageError("empty parameter range")
    if int(np.prod(sizes)) > cap:
        raise UsageError(f"sweep of {int(np.prod(sizes))} points exceeds the cap of {cap}")
    points = [tuple(float(v) for v in p) for p in np.array(np.meshgrid(*[g[1] for g in grids], indexing="ij")).reshape(len(grids), -1).T]
    jobs = [(spec, names, p) for p in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    return names, [(vals, rec) for vals, rec in results]


def write_sweep(path, names, rows) -> Path:
    return io.write_csv(path, [*names, *SWEEP_HEADER], ([*vals, *(rec[h] for h in SWEEP_HEADER)] for vals, rec in rows))


# -- argument handling ------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["asymmetric"], default=None, help="named preset (the only one is asymmetric)")
    g.add_argument("--kappa1", type=float)
    g.add_argument("--kappa2", type=float)
    g.add_argument("--delta1", type=float)
    g.add_argument("--delta2", type=float)
    g.add_argument("--coeff", action="append", metavar="L=RE[,IM]",
                   help="raw Fourier coefficient; repeat per index (write --coeff=-1=... for negative L)")
    g.add_argument("--sigma", type=float, help="coupling to site 0")
    g.add_argument("--omega-a", type=float, dest="omega_a")
    s = p.add_argument_group("simulation")
    s.add_argument("--t-final", type=float, dest="t_final")
    s.add_argument("--dt", type=float)
    s.add_argument("--half-width", type=int, dest="half_width")
    s.add_argument("--representation", choices=["wannier", "bloch"])
    s.add_argument("--bloch-grid", type=int, dest="bloch_grid")
    o = p.add_argument_group("output")
    o.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else config, else ./{DEFAULT_OUT})")
    o.add_argument("--config", help="INI-style settings file; flags override it")
    o.add_argument("--svg", action="store_true", default=None, help="also write SVG line plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhdecay", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate c_a(t) and write the trajectory")
    _common(p)
    p.add_argument("--alpha", type=float, action="append", help="growth-diagnostic exponent; repeatable")

    p = sub.add_parser("classify", help="stable / convective / absolute verdict and saddle points")
    _common(p)
    p.add_argument("--csv", action="store_true", help="write the saddle list as CSV")

    p = sub.add_parser("spectral", help="self-energy on a rectangular omega grid (CSV)")
    _common(p)
    for axis in ("re", "im"):
        p.add_argument(f"--{axis}-range", nargs=3, type=float, metavar=("MIN", "MAX", "N"), default=(-1.5, 1.5, 61))

    p = sub.add_parser("pole", help="pole, residue and branch points")
    _common(p)

    p = sub.add_parser("fig3", help="decay regimes: complete/fractional, Rabi, pseudo-exponential")
    _common(p)
    p.add_argument("--panel", choices=["left", "center", "right", "all"], default="all")

    p = sub.add_parser("fig4", help="growth diagnostics for the absolutely unstable chain")
    _common(p)

    p = sub.add_parser("sweep", help="summary table over one or two parameter ranges")
    _common(p)
    p.add_argument("--param", nargs=4, action="append", metavar=("NAME", "START", "STOP", "POINTS"), required=True,
                   help=f"swept parameter, one of {', '.join(SWEEPABLE)}; give at most twice")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-points", type=int, default=SWEEP_CAP, dest="max_points")
    p.add_argument("--no-simulate", action="store_true", help="skip the time integration (no plateau column)")
    return parser


def _read_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path is not None:
        if not cfg.read(path):
            raise UsageError(f"cannot read config file {path}")
    return cfg


def _sigma_map(cfg) -> dict[int, complex] | None:
    if not cfg.has_section("sigma"):
        return None
    out = {}
    for key, val in cfg.items("sigma"):
        parts = [float(v) for v in val.split(",")]
        out[int(key)] = complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
    return out


def _parse_coeff(items) -> dict[int, complex]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--coeff expects L=RE[,IM], got {item!r}")
        parts = [float(v) for v in val.split(",")]
        if len(parts) > 2:
            raise UsageError(f"--coeff expects L=RE[,IM], got {item!r}")
        out[int(key)] = complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
    return out


def spec_from_args(args, defaults: Mapping | None = None) -> ExperimentSpec:
    """Merge defaults, the config file and the command line (in that order of precedence, lowest first)."""
    defaults = dict(defaults or {})
    cfg = _read_config(getattr(args, "config", None))
    m = cfg["model"] if cfg.has_section("model") else {}

    kap = (args.kappa1, args.kappa2)
    dlt = (args.delta1, args.delta2)
    if any(v is not None for v in kap) and any(v is not None for v in dlt):
        raise UsageError("--kappa1/--kappa2 and --delta1/--delta2 are mutually exclusive")
    coeffs = None
    k1 = k2 = None
    if args.coeff:
        if any(v is not None for v in kap + dlt) or args.model:
            raise UsageError("raw --coeff entries exclude the asymmetric preset flags")
        coeffs = _parse_coeff(args.coeff)
    elif any(v is not None for v in kap):
        if None in kap:
            raise UsageError("give both --kappa1 and --kappa2")
        k1, k2 = kap
    elif any(v is not None for v in dlt):
        # a lone --delta1 or --delta2 keeps the default for the other
        d1 = dlt[0] if dlt[0] is not None else defaults.get("delta1", 1.0)
        d2 = dlt[1] if dlt[1] is not None else defaults.get("delta2", 0.7)
        k1, k2 = 0.5 * (d1 + d2), 0.5 * (d1 - d2)
    elif cfg.has_section("dispersion"):
        if m:
            raise UsageError("config gives both [model] and [dispersion]")
        disp = dispersion_from_mapping(dict(cfg.items("dispersion")))
        coeffs = dict(disp.coeffs)
    elif "preset" in m:
        disp = dispersion_from_mapping({"preset": m["preset"]})
        k1, k2 = disp.coeffs[1].real, disp.coeffs.get(-1, 0j).real
    elif "kappa1" in m or "kappa2" in m:
        k1, k2 = m.getfloat("kappa1"), m.getfloat("kappa2")
    elif "delta1" in m or "delta2" in m:
        d1, d2 = m.getfloat("delta1"), m.getfloat("delta2")
        k1, k2 = 0.5 * (d1 + d2), 0.5 * (d1 - d2)
    else:
        d1, d2 = defaults.get("delta1", 1.0), defaults.get("delta2", 0.7)
        k1, k2 = 0.5 * (d1 + d2), 0.5 * (d1 - d2)

    c = cfg["coupling"] if cfg.has_section("coupling") else {}
    sigma = _sigma_map(cfg)
    if args.sigma is not None:
        sigma = {0: complex(args.sigma)}
    elif sigma is None:
        sigma = {0: complex(float(c.get("sigma", defaults.get("sigma", 0.2))))}
    omega_a = args.omega_a if args.omega_a is not None else float(c.get("omega_a", defaults.get("omega_a", 0.0)))

    s = cfg["simulation"] if cfg.has_section("simulation") else {}

    def pick(name, conv, default=None):
        v = getattr(args, name, None)
        if v is not None:
            return v
        if name in s:
            return conv(s[name])
        return defaults.get(name, default)

    try:
        sim = SimConfig(
            t_final=pick("t_final", float, 150.0),
            dt=pick("dt", float),
            half_width=pick("half_width", int),
            representation=pick("representation", str, "wannier"),
            bloch_grid=pick("bloch_grid", int, 4096),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    out = args.out or os.environ.get(OUT_ENV) or (cfg.get("output", "dir") if cfg.has_option("output", "dir") else DEFAULT_OUT)
    svg = args.svg if args.svg is not None else (cfg.getboolean("output", "svg") if cfg.has_option("output", "svg") else False)
    alphas = tuple(getattr(args, "alpha", None) or ())
    if not alphas and cfg.has_option("growth", "alphas"):
        alphas = tuple(float(a) for a in cfg.get("growth", "alphas").split(","))
    return ExperimentSpec(
        kappa1=k1, kappa2=k2, coeffs=coeffs, sigma=sigma, omega_a=float(omega_a), sim=sim,
        alphas=alphas, out_dir=Path(out), svg=bool(svg),
    ).validate()


# -- commands -------------------------------------------------------------------

def _emit(report: Report, out=None):
    (out or sys.stdout).write(io.format_summary(report.summary))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for f in report.files:
        print(f"wrote {f}", file=sys.stderr)


def cmd_simulate(args) -> int:
    spec = spec_from_args(args)
    outputs = {"trajectory", "classify", "pole"} | ({"growth"} if spec.alphas else set())
    _emit(run_experiment(replace(spec, outputs=frozenset(outputs), tag="simulate")))
    return 0


def cmd_classify(args) -> int:
    spec = spec_from_args(args)
    disp = spec.dispersion()
    rec = _classification_summary(spec, disp)
    if spec.is_preset:
        # the asymmetric regime is the headline verdict for the preset
        rec = {"regime": rec.pop("asymmetric_regime"), **rec}
    sys.stdout.write(io.format_summary(rec))
    rc = classify(disp)
    rows = [(s.k_s.real, s.k_s.imag, s.omega_s.real, s.omega_s.imag, s.order) for s in rc.saddles]
    header = ["re_k", "im_k", "re_omega", "im_omega", "order"]
    if rows:
        print("saddles:")
        print("  " + "".join(f"{h:>14}" for h in header))
        for r in rows:
            print("  " + "".join(f"{v:>14.8g}" for v in r))
    else:
        print("saddles: none")
    if args.csv:
        path = io.write_csv(spec.out_dir / "classify_saddles.csv", header, rows)
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_spectral(args) -> int:
    spec = replace(spec_from_args(args), tag="spectral")
    re, im = args.re_range, args.im_range
    for lo, hi, n in (re, im):
        if int(n) < 1 or n != int(n):
            raise UsageError("grid sizes must be positive integers")
    path = write_spectral_grid(spec, spec.dispersion(), spec.coupling(), (re[0], re[1], int(re[2])), (im[0], im[1], int(im[2])))
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_pole(args) -> int:
    spec = spec_from_args(args)
    rec = _pole_summary(spec.dispersion(), spec.coupling())
    sys.stdout.write(io.format_summary(rec))
    return 0


FIG3_PANELS = {
    "left": (0.7, (0.0, 0.8)),
    "center": (1.0, (0.0,)),
    "right": (1.2, (0.0,)),
}


def cmd_fig3(args) -> int:
    base = spec_from_args(args, defaults={"sigma": 0.2})
    panels = FIG3_PANELS if args.panel == "all" else {args.panel: FIG3_PANELS[args.panel]}
    delta1 = base.kappa1 + base.kappa2 if base.is_preset else 1.0
    for name, (ratio, energies) in panels.items():
        series = []
        for wa in energies:
            spec = replace(
                base.with_parameter("delta1", delta1).with_parameter("delta2", ratio * delta1),
                omega_a=wa * delta1,
                outputs=frozenset({"trajectory", "classify", "pole"}),
                svg=False,
                tag=f"fig3_{name}_wa{wa:g}",
            )
            report = run_experiment(spec)
            print(f"# fig3 {name} panel, omega_a/delta1 = {wa:g}")
            _emit(report)
            series.append((report.trajectory.times, report.trajectory.P_a, f"omega_a={wa * delta1:g}"))
        if base.svg:
            path = io.write_svg(base.out_dir / f"fig3_{name}.svg", series, title=f"{name} panel, delta2/delta1={ratio:g}", ylabel="P_a")
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_fig4(args) -> int:
    base = spec_from_args(args, defaults={"delta2": 1.2, "t_final": 200.0})
    spec = replace(base, alphas=base.alphas or FIG4_ALPHAS, outputs=frozenset({"growth", "classify", "pole"}), tag="fig4")
    _emit(run_experiment(spec))
    return 0


def cmd_sweep(args) -> int:
    spec = spec_from_args(args)
    if not args.no_simulate:
        spec = replace(spec, outputs=frozenset({"trajectory"}))
    else:
        spec = replace(spec, outputs=frozenset())
    grids = []
    for name, start, stop, points in args.param:
        try:
            n = int(points)
            lo, hi = float(start), float(stop)
        except ValueError as exc:
            raise UsageError(f"bad range for {name}: {exc}") from exc
        if n < 1:
            raise UsageError(f"empty range for {name}")
        grids.append((name, np.linspace(lo, hi, n)))
    names, rows = sweep(spec, grids, workers=args.workers, cap=args.max_points)
    path = write_sweep(spec.out_dir / "sweep.csv", names, rows)
    header = [*names, "verdict", "re_pole", "im_pole", "plateau_mean"]
    print("".join(f"{h:>16}" for h in header))
    for vals, rec in rows:
        cells = [*vals, rec["verdict"], rec["re_pole"], rec["im_pole"], rec["plateau_mean"]]
        print("".join(f"{v:>16.8g}" if isinstance(v, float) else f"{v:>16}" for v in cells))
    print(f"wrote {path}", file=sys.stderr)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "spectral": cmd_spectral,
    "pole": cmd_pole,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"nhdecay: error: {exc}", file=sys.stderr)
        return 2
    except (NHDecayError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"nhdecay: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
