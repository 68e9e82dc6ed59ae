"""Saddle points of a complex band and the convective/absolute instability verdict.

Plane waves on the lattice read ``c_n ~ exp(-i k n - i omega(k) t)`` with the
Fourier convention of :mod:`nhdecay.lattice`, so a packet built around ``k``
drifts with lattice velocity ``-d omega/dk``.  :func:`find_saddle_points`
solves the bare equation ``d omega/dk = slope``; :func:`drift_asymptote` takes a
physical velocity ``V`` (sites per unit time, positive towards larger n).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import SaddleSearchError
from .lattice import Dispersion

ROOT_TOL = 1e-10
DEDUP_TOL = 1e-8
COALESCE_TOL = 1e-6
K_MAX = 5.0
SEED_SHAPE = (64, 32)


class Regime(str, enum.Enum):
    STABLE = "stable"
    CONVECTIVE = "convective"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class SaddlePoint:
    k_s: complex
    omega_s: complex
    order: int

    @property
    def exponent(self) -> float:
        """Branch-point exponent ``nu = 1 - 1/order`` of the density of states."""
        return 1.0 - 1.0 / self.order


@dataclass(frozen=True)
class RegimeClass:
    verdict: Regime
    max_im_on_axis: float
    critical_saddle: SaddlePoint | None
    boundary_flag: bool
    saddles: tuple[SaddlePoint, ...] = field(default=())
    co_critical: tuple[SaddlePoint, ...] = field(default=())


def _wrap(k: np.ndarray) -> np.ndarray:
    re = (k.real + np.pi) % (2 * np.pi) - np.pi
    return re + 1j * k.imag


def _snap(z: complex, scale: float, tol: float = 1e-14) -> complex:
    """Zero out round-off-sized components so symmetric saddles tie exactly."""
    re = 0.0 if abs(z.real) < tol * scale else z.real
    im = 0.0 if abs(z.imag) < tol * scale else z.imag
    return complex(re, im)


def _saddle_order(disp: Dispersion, k: complex, max_order: int = 8) -> int:
    scale = max(disp.bandwidth_bound, 1e-300)
    for n in range(2, max_order + 1):
        if abs(disp.derivative(k, n)) > 1e-8 * scale:
            return n
    return max_order


def find_saddle_points(
    disp: Dispersion,
    slope: complex = 0.0,
    *,
    k_max: float = K_MAX,
    seeds: tuple[int, int] = SEED_SHAPE,
    max_iter: int = 80,
) -> list[SaddlePoint]:
    """All roots of ``d omega/dk = slope`` in the strip ``|Im k| <= k_max``.

    Newton iteration is started from a ``seeds[0] x seeds[1]`` grid over the
    strip; converged roots are polished, wrapped into ``Re k in [-pi, pi)`` and
    deduplicated.  The result is sorted by decreasing ``Im omega(k_s)``, ties
    broken by smaller ``|Re omega(k_s)|`` then smaller ``|Re k_s|``.

    Raises
    ------
    SaddleSearchError
        If no seed converges although the equation has roots.
    """
    orders = np.array([l for l in disp.coeffs if l != 0])
    # d omega/dk - slope is a Laurent polynomial in exp(ik); a single power
    # with slope 0 has no finite root
    n_terms = orders.size + (1 if slope != 0 else 0)
    if n_terms < 2:
        return []

    re = -np.pi + 2 * np.pi * (np.arange(seeds[0]) + 0.5) / seeds[0]
    im = np.linspace(-k_max, k_max, seeds[1])
    k = (re[:, None] + 1j * im[None, :]).ravel()
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            f = disp.derivative(k, 1) - slope
            df = disp.derivative(k, 2)
            step = f / df
            step = np.where(np.isfinite(step), step, 0.0)
            # damp wild jumps; keeps iterates inside a sensible strip
            big = np.abs(step) > 1.0
            step[big] = step[big] / np.abs(step[big])
            k = k - step
            k = np.where(np.abs(k.imag) > 4 * k_max, np.nan, k)
        resid = np.abs(disp.derivative(k, 1) - slope)
    good = np.isfinite(k) & (resid < ROOT_TOL * max(1.0, disp.speed_bound))
    if not np.any(good):
        raise SaddleSearchError(
            f"saddle search did not converge from any seed (k_max={k_max}); "
            "increase k_max or check the dispersion"
        )
    roots = _wrap(k[good])
    roots = roots[np.abs(roots.imag) <= k_max]

    unique: list[complex] = []
    for r in roots:
        for u in unique:
            d = r - u
            d = complex((d.real + np.pi) % (2 * np.pi) - np.pi, d.imag)
            if abs(d) < DEDUP_TOL:
                break
        else:
            unique.append(complex(r))

    scale = max(1.0, disp.bandwidth_bound)
    out = [SaddlePoint(_snap(r, 1.0), _snap(complex(disp(r)), scale), _saddle_order(disp, r)) for r in unique]
    out.sort(key=lambda s: (-s.omega_s.imag, abs(s.omega_s.real), abs(s.k_s.real)))
    return out


def max_im_on_axis(disp: Dispersion, n: int = 4096) -> tuple[float, float]:
    """``max Im omega(k)`` over real k and the maximiser."""
    k = -np.pi + 2 * np.pi * np.arange(n) / n
    im = disp(k).imag
    j = int(np.argmax(im))
    dk = 2 * np.pi / n
    res = minimize_scalar(
        lambda q: -float(np.imag(disp(q))),
        bounds=(k[j] - dk, k[j] + dk),
        method="bounded",
        options={"xatol": 1e-13},
    )
    if -res.fun >= im[j]:
        return float(-res.fun), float(res.x)
    return float(im[j]), float(k[j])


def classify(disp: Dispersion, *, tol: float = 1e-12, k_max: float = K_MAX) -> RegimeClass:
    """Stable, convectively or absolutely unstable continuum.

    Stable when no real-k mode grows.  Otherwise the continuum is absolutely
    unstable if the most critical zero-velocity saddle has ``Im omega > 0`` and
    convectively unstable if not.  ``boundary_flag`` marks coalescing saddles,
    including the unidirectional band whose saddles have gone to ``Im k -> inf``.
    """
    top, _ = max_im_on_axis(disp)
    saddles = find_saddle_points(disp, 0.0, k_max=k_max)
    boundary = not saddles or any(
        abs(a.k_s - b.k_s) < COALESCE_TOL
        for i, a in enumerate(saddles)
        for b in saddles[i + 1:]
    )
    critical = saddles[0] if saddles else None
    co = tuple(s for s in saddles if critical and abs(s.omega_s.imag - critical.omega_s.imag) < 1e-10)
    if top <= tol:
        verdict = Regime.STABLE
    elif critical is not None and critical.omega_s.imag > tol:
        verdict = Regime.ABSOLUTE
    else:
        verdict = Regime.CONVECTIVE
    return RegimeClass(verdict, top, critical, boundary, tuple(saddles), co)


def minimax_growth_rate(disp: Dispersion, velocity: float = 0.0, *, k_max: float = K_MAX, n: int = 1024):
    """Growth rate along ``n = V t`` as ``min_y max_x Im[omega(x+iy) + V (x+iy)]``.

    Shifting the k-integral of the bare propagator to ``Im k = y`` bounds the
    growth rate by the inner maximum for every y; the tightest bound is reached
    at the pinching saddle.  Returns ``(rate, y_opt)``.
    """
    x = -np.pi + 2 * np.pi * np.arange(n) / n

    def upper(y):
        k = x + 1j * y
        return float(np.max(np.imag(disp(k) + velocity * k)))

    ys = np.linspace(-k_max, k_max, 201)
    vals = np.array([upper(y) for y in ys])
    j = int(np.argmin(vals))
    lo, hi = ys[max(j - 1, 0)], ys[min(j + 1, ys.size - 1)]
    res = minimize_scalar(upper, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


def drift_asymptote(disp: Dispersion, velocity: float = 0.0, *, k_max: float = K_MAX):
    """Long-time law of ``|c_{n=Vt}(t)|`` for the bare continuum.

    ``|c| ~ t^power exp(rate t)`` with ``rate = Im[omega(k_s) + V k_s]`` and
    ``power = -1/order`` at the saddle ``d omega/dk = -V`` selected by the
    min-max contour argument.  Returns ``(rate, power, omega_s)``.
    """
    saddles = find_saddle_points(disp, -velocity, k_max=k_max)
    if not saddles:
        raise SaddleSearchError(f"no saddle for velocity {velocity}")
    bound, y_opt = minimax_growth_rate(disp, velocity, k_max=k_max)

    def rate(s):
        return float(np.imag(s.omega_s + velocity * s.k_s))

    best = min(saddles, key=lambda s: (abs(rate(s) - bound), abs(s.k_s.imag - y_opt)))
    return rate(best), -1.0 / best.order, best.omega_s

