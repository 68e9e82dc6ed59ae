"""Resolvent of the discrete state: self-energy, its continuation, pole and cut.

The self-energy ``Sigma(w) = int dk g1(k) g2(k) / (w - omega(k))`` is analytic
off the energy loop and jumps across it.  Continuing the outer branch into the
loop interior gives ``Sigma_II``; the pole of ``1/(w - w_a - Sigma_II)`` and the
interior saddle energies (branch points) control the decay law of ``c_a(t)``.

Continuation convention
-----------------------
``Sigma_II(w)`` at an interior point is obtained along the vertical path that
drops from the nearest loop crossing above ``w``.  Branch cuts therefore hang
vertically downward from every interior branch point; points directly below a
branch point are refused.  The function used for pole searches,
:func:`outer_self_energy`, equals ``Sigma`` outside the loop and ``Sigma_II``
inside, and is continuous across the loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from .exceptions import ConvergenceError, OnCutError, OnLoopError
from .lattice import DEFAULT_GRID, Dispersion, EnergyLoop, Location
from .stability import find_saddle_points

QUAD_TOL = 1e-10
QUAD_START = 256
QUAD_CAP = 2**20


@dataclass(frozen=True)
class CouplingProfile:
    """Discrete level ``omega_a`` and its Hermitian couplings ``sigma_n`` to the sites.

    The reverse couplings are ``rho_n = conj(sigma_n)``.
    """

    omega_a: float
    sigma: Mapping[int, complex]

    def __post_init__(self):
        if np.iscomplexobj(self.omega_a) and np.imag(self.omega_a) != 0:
            raise ValueError("the discrete-state energy must be real")
        object.__setattr__(self, "omega_a", float(np.real(self.omega_a)))
        object.__setattr__(self, "sigma", {int(n): complex(s) for n, s in dict(self.sigma).items()})

    @classmethod
    def single_site(cls, omega_a: float, sigma: complex, site: int = 0) -> "CouplingProfile":
        return cls(omega_a, {site: sigma})

    @cached_property
    def _sites(self) -> np.ndarray:
        return np.array(list(self.sigma), dtype=float)

    @cached_property
    def _amps(self) -> np.ndarray:
        return np.array(list(self.sigma.values()), dtype=complex)

    @property
    def strength(self) -> float:
        """``sum_n |sigma_n|^2``, equal to ``int g1 g2 dk`` over the zone."""
        return float(np.sum(np.abs(self._amps) ** 2))

    def g1(self, k):
        k = np.asarray(k, dtype=complex)
        if not self.sigma:
            return np.zeros_like(k)
        return np.exp(-1j * np.multiply.outer(k, self._sites)) @ self._amps / np.sqrt(2 * np.pi)

    def g2(self, k):
        k = np.asarray(k, dtype=complex)
        if not self.sigma:
            return np.zeros_like(k)
        return np.exp(1j * np.multiply.outer(k, self._sites)) @ np.conj(self._amps) / np.sqrt(2 * np.pi)

    def spectral_weight(self, k):
        """``g1(k) g2(k)``, continued analytically to complex k."""
        return self.g1(k) * self.g2(k)


@dataclass(frozen=True)
class BranchPoint:
    omega: complex
    exponent: float
    k: complex


@dataclass(frozen=True)
class SpectralResult:
    pole: complex
    residue: complex
    pole_location: Location
    branch_points: tuple[BranchPoint, ...]
    cut_rate: float | None
    cut_power: float | None
    residual: float
    notes: tuple[str, ...] = field(default=())


def trapezoid_self_energy(disp, coupling, omega, *, tol=QUAD_TOL, n0=QUAD_START, n_max=QUAD_CAP):
    """Periodic trapezoid value of ``int dk G(k)/(omega - omega(k))`` with grid doubling.

    Returns ``(value, achieved_error, n_points)``.
    """
    def f(k):
        return coupling.spectral_weight(k) / (omega - disp(k))

    n = n0
    k = -np.pi + 2 * np.pi * np.arange(n) / n
    total = np.sum(f(k))
    value = total * 2 * np.pi / n
    while n < n_max:
        mid = -np.pi + 2 * np.pi * (np.arange(n) + 0.5) / n
        total = total + np.sum(f(mid))
        n *= 2
        new = total * 2 * np.pi / n
        err = abs(new - value)
        value = new
        if err < tol * max(1.0, abs(value)):
            return complex(value), float(err), n
    return complex(value), float(err), n


class _Context:
    """Cached loop and branch points for one (dispersion, coupling) pair."""

    def __init__(self, disp: Dispersion, coupling: CouplingProfile, loop: EnergyLoop | None = None):
        self.disp = disp
        self.coupling = coupling
        self.loop = loop if loop is not None else disp.loop(DEFAULT_GRID)

    @cached_property
    def branch_points(self) -> tuple[BranchPoint, ...]:
        out = []
        for s in find_saddle_points(self.disp, 0.0):
            try:
                loc = self.loop.contains(s.omega_s)
            except ValueError:
                continue
            if loc is Location.INSIDE:
                out.append(BranchPoint(s.omega_s, s.exponent, s.k_s))
        out.sort(key=lambda b: -b.omega.imag)
        return tuple(out)

    @property
    def cut_tol(self) -> float:
        return 1e4 * self.loop.on_loop_tol

    def on_cut(self, omega: complex) -> bool:
        return any(
            abs(omega.real - b.omega.real) < self.cut_tol and omega.imag < b.omega.imag + self.cut_tol
            for b in self.branch_points
        )

    def sigma(self, omega: complex, loc: Location | None = None, tol: float = QUAD_TOL) -> complex:
        if loc is None:
            loc = self.loop.contains(omega)
        if loc is Location.ON_LOOP:
            raise OnLoopError(f"self-energy is discontinuous on the loop (omega={omega})")
        value, err, n = trapezoid_self_energy(self.disp, self.coupling, omega, tol=tol)
        if err >= tol * max(1.0, abs(value)):
            raise ConvergenceError(f"self-energy quadrature stalled at {n} points", achieved=err)
        return value

    def continued_wavenumber(self, omega: complex) -> complex:
        """Complex k with ``omega(k) = omega``, continued from the loop crossing above."""
        ks = self.loop.crossings_above(omega)
        if ks.size == 0:
            raise ValueError(f"no loop crossing above omega={omega}; is it inside the loop?")
        k = complex(ks[0])
        start = complex(self.disp(k))
        disp = self.disp
        scale = max(disp.bandwidth_bound, 1.0)
        n_steps = 32
        tau = 0.0
        while tau < 1.0:
            step = min(1.0 / n_steps, 1.0 - tau)
            target = start + (tau + step) * (omega - start)
            kk, ok = k, False
            for _ in range(30):
                kk = kk - (disp(kk) - target) / disp.derivative(kk, 1)
                if abs(disp(kk) - target) < 1e-14 * scale:
                    ok = True
                    break
            # refuse jumps to another preimage: the path must stay short in k
            if ok and abs(kk - k) < 0.5:
                k, tau = complex(kk), tau + step
            else:
                n_steps *= 2
                if n_steps > 2**16:
                    raise ConvergenceError(f"k-continuation stalled near omega={target}")
        return k

    def sigma_continued(self, omega: complex) -> complex:
        loc = self.loop.contains(omega)
        if loc is not Location.INSIDE:
            raise ValueError(f"continued self-energy is defined inside the loop (omega={omega} is {loc.value})")
        if self.on_cut(omega):
            raise OnCutError(f"omega={omega} lies on a branch cut below an interior saddle energy")
        k = self.continued_wavenumber(omega)
        jump = 2j * np.pi * self.coupling.spectral_weight(k) / self.disp.derivative(k, 1)
        return self.sigma(omega, loc) + self.loop.orientation * complex(jump)

    def outer(self, omega: complex) -> complex:
        loc = self.loop.contains(omega)
        if loc is Location.OUTSIDE:
            return self.sigma(omega, loc)
        if loc is Location.ON_LOOP:
            raise OnLoopError(f"omega={omega} on the loop")
        return self.sigma_continued(omega)


def self_energy(disp: Dispersion, coupling: CouplingProfile, omega: complex, *, loop: EnergyLoop | None = None) -> complex:
    """Self-energy by periodic trapezoid quadrature, converged by grid doubling.

    Raises
    ------
    OnLoopError
        ``omega`` lies on the energy loop.
    ConvergenceError
        The quadrature did not converge to 1e-10 within 2**20 points.
    """
    return _Context(disp, coupling, loop).sigma(complex(omega))


def density_of_states(disp: Dispersion, k):
    """``dk/domega = 1/omega'(k)`` at a point of the loop."""
    w1 = disp.derivative(k, 1)
    if np.any(np.abs(w1) < 1e-12 * max(disp.speed_bound, 1e-300)):
        raise ZeroDivisionError("group velocity vanishes: van Hove point on the real k axis")
    return 1.0 / w1


def jump_formula(disp: Dispersion, coupling: CouplingProfile, k0: float) -> complex:
    """``-2 pi i g1(k0) g2(k0) rho(k0)``."""
    return complex(-2j * np.pi * coupling.spectral_weight(k0) * density_of_states(disp, k0))


def self_energy_jump(
    disp: Dispersion,
    coupling: CouplingProfile,
    k0: float,
    *,
    delta0: float | None = None,
    levels: int = 5,
    max_levels: int = 10,
    rtol: float = 1e-7,
    quad_tol: float = 1e-13,
) -> complex:
    """Numerical ``Sigma(w0 + eps) - Sigma(w0 - eps)`` across the loop at ``w0 = omega(k0)``.

    ``eps = i omega'(k0) delta`` with ``delta = delta0 / 2**j``; the sequence is
    extrapolated polynomially to ``delta -> 0``, adding levels (at least
    ``levels``, at most ``max_levels``) until successive estimates agree to
    ``rtol``.  By default ``delta0`` is 0.02, reduced to a twentieth of the
    distance from ``k0`` to the nearest complex saddle.  The extrapolation
    amplifies quadrature error, so ``quad_tol`` is tighter than elsewhere.

    For a simple loop the value equals :func:`jump_formula`; for a doubly
    traced band every preimage of ``w0`` contributes.
    """
    ctx = _Context(disp, coupling)
    w0 = complex(disp(k0))
    w1 = complex(disp.derivative(k0, 1))
    if abs(w1) == 0:
        raise ZeroDivisionError("omega'(k0) = 0")
    if delta0 is None:
        near = min((abs(sp.k_s - k0) for sp in find_saddle_points(disp, 0.0)), default=np.inf)
        delta0 = min(0.02, near / 20)
    deltas, vals, est = [], [], []
    tableau: list[complex] = []
    value, err = 0j, np.inf
    for j in range(max_levels):
        d = delta0 / 2.0**j
        eps = 1j * w1 * d
        deltas.append(d)
        vals.append(ctx.sigma(w0 + eps, tol=quad_tol) - ctx.sigma(w0 - eps, tol=quad_tol))
        # Neville-Aitken: extend the tableau by one row, evaluated at delta = 0
        row = [vals[-1]]
        for m in range(1, j + 1):
            lo = deltas[j - m]
            row.append((d * tableau[m - 1] - lo * row[m - 1]) / (d - lo))
        tableau = row
        est.append(row[-1])
        if len(est) >= 2:
            value, err = complex(est[-1]), abs(est[-1] - est[-2])
            if j + 1 >= levels and err <= rtol * max(abs(value), 1e-300):
                return value
    raise ConvergenceError(f"jump extrapolation did not settle (err={err:.2e})", achieved=err)


def self_energy_continued(disp: Dispersion, coupling: CouplingProfile, omega: complex, *, loop: EnergyLoop | None = None) -> complex:
    """``Sigma_II(w) = Sigma(w) + o 2 pi i g1 g2 rho`` inside the loop.

    ``o`` is the loop orientation (+1 counter-clockwise); with it the continued
    branch joins the outer self-energy continuously at the loop.  ``g1 g2 rho``
    is evaluated at the complex k continued from the loop crossing above ``w``.
    """
    return _Context(disp, coupling, loop).sigma_continued(complex(omega))


def outer_self_energy(disp: Dispersion, coupling: CouplingProfile, omega: complex, *, loop: EnergyLoop | None = None) -> complex:
    return _Context(disp, coupling, loop).outer(complex(omega))


def branch_points(disp: Dispersion, *, loop: EnergyLoop | None = None) -> tuple[BranchPoint, ...]:
    """Interior saddle energies, sorted by decreasing imaginary part."""
    return _Context(disp, CouplingProfile(0.0, {}), loop).branch_points


def cut_asymptote(branch_point) -> tuple[float, float]:
    """``(Im omega_s, 1 + nu)`` for ``|c_cut(t)| ~ t^-(1+nu) exp(Im(omega_s) t)``.

    Accepts a :class:`BranchPoint` or an ``(omega_s, nu)`` pair.
    """
    if isinstance(branch_point, BranchPoint):
        omega_s, nu = branch_point.omega, branch_point.exponent
    else:
        omega_s, nu = branch_point
    if nu <= 0:
        raise ValueError("branch-point exponent must be positive")
    return float(np.imag(omega_s)), 1.0 + float(nu)


def _derivative(fun, omega: complex) -> complex:
    h = 1e-6 * max(1.0, abs(omega))
    return (fun(omega + h) - fun(omega - h)) / (2 * h)


def find_pole(
    disp: Dispersion,
    coupling: CouplingProfile,
    *,
    loop: EnergyLoop | None = None,
    tol: float = 1e-12,
    max_iter: int = 60,
) -> SpectralResult:
    """Pole of the continued resolvent near ``omega_a`` and its residue.

    Newton iteration on ``w - omega_a - Sigma_outer(w) = 0`` seeded with the
    weak-coupling value ``omega_a + Sigma_outer(omega_a)``.  The residue is
    ``1 / (1 - dSigma/dw)`` at the pole.  When ``omega_a`` sits on a branch cut
    the seed is taken just to its right.
    """
    ctx = _Context(disp, coupling, loop)
    wa = complex(coupling.omega_a)
    notes = []
    loc_a = ctx.loop.contains(wa)
    if loc_a is Location.ON_LOOP:
        raise OnLoopError("omega_a lies on the loop")
    scale = max(ctx.loop.diameter, 1.0)
    for b in ctx.branch_points:
        if abs(wa - b.omega) < 1e-6 * scale:
            raise ValueError(f"omega_a is at the branch point {b.omega}")
    probe = wa
    if loc_a is Location.INSIDE and ctx.on_cut(wa):
        probe = wa + 10 * ctx.cut_tol
        notes.append("omega_a on a branch cut; seeded from its right side")
    w = probe + ctx.outer(probe)

    resid = np.inf
    for _ in range(max_iter):
        f = w - wa - ctx.outer(w)
        resid = abs(f)
        if resid < tol:
            break
        df = 1.0 - _derivative(ctx.outer, w)
        w = w - f / df
    else:
        if resid > 1e-10:
            raise ConvergenceError(f"pole search did not converge (|f|={resid:.2e})", achieved=resid)
    if ctx.on_cut(w) and ctx.loop.contains(w) is Location.INSIDE:
        notes.append("pole lies on a branch cut")
    residue = 1.0 / (1.0 - _derivative(ctx.outer, w))
    loc = ctx.loop.contains(w)
    bps = ctx.branch_points
    if bps:
        rate, power = cut_asymptote(bps[0])
    else:
        rate = power = None
    return SpectralResult(complex(w), complex(residue), loc, bps, rate, power, float(resid), tuple(notes))


def self_energy_grid(disp: Dispersion, coupling: CouplingProfile, re_values, im_values):
    """Rows ``(re_w, im_w, re_Sigma, im_Sigma, sheet)`` over a rectangular grid.

    Outside points carry sheet ``I``; inside points give a physical ``I`` row and,
    off the cuts, a continued ``II`` row.  Points on the loop are skipped.
    """
    ctx = _Context(disp, coupling)
    rows = []
    for y in im_values:
        for x in re_values:
            w = complex(x, y)
            loc = ctx.loop.contains(w)
            if loc is Location.ON_LOOP:
                continue
            s = ctx.sigma(w, loc)
            rows.append((w.real, w.imag, s.real, s.imag, "I"))
            if loc is Location.INSIDE and not ctx.on_cut(w):
                s2 = ctx.sigma_continued(w)
                rows.append((w.real, w.imag, s2.real, s2.imag, "II"))
    return rows
