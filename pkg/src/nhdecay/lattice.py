"""Single-band complex dispersions and the geometry of their energy loop.

A band is stored through its Fourier coefficients ``omega_l`` with the
convention ``omega(k) = sum_l omega_l exp(i k l)``.  In the Wannier basis the
same coefficients act as hoppings, ``i dc_n/dt = sum_m omega_{n-m} c_m``, so
``omega_{+1}`` carries amplitude from site ``n-1`` to site ``n``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.optimize import brentq
from shapely.geometry import LinearRing

from .exceptions import UnderResolvedError

BALANCE_TOL = 1e-12
DEFAULT_GRID = 4096


class Location(str, enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    ON_LOOP = "on-loop"


@dataclass(frozen=True)
class Dispersion:
    """Complex band ``omega(k)`` given by a finite Fourier series.

    Parameters
    ----------
    coeffs : mapping of int to complex
        Fourier coefficients ``omega_l``.  Zero entries are dropped.
    name : str, optional
        Free-form label, e.g. ``"asymmetric(0.85, 0.15)"``.
    """

    coeffs: Mapping[int, complex]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        clean = {int(l): complex(w) for l, w in dict(self.coeffs).items() if w != 0}
        if not clean:
            raise ValueError("dispersion needs at least one nonzero Fourier coefficient")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @cached_property
    def _orders(self) -> np.ndarray:
        return np.array(list(self.coeffs), dtype=float)

    @cached_property
    def _values(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=complex)

    @property
    def max_order(self) -> int:
        return int(np.max(np.abs(self._orders)))

    @property
    def onsite(self) -> complex:
        return self.coeffs.get(0, 0j)

    @property
    def bandwidth_bound(self) -> float:
        """``sum_l |omega_l|``, an upper bound on ``|omega(k)|`` for real k."""
        return float(np.sum(np.abs(self._values)))

    @property
    def speed_bound(self) -> float:
        """``sum_l |l| |omega_l|``, an upper bound on ``|d omega/dk|`` for real k."""
        return float(np.sum(np.abs(self._orders * self._values)))

    def derivative(self, k, order: int = 1):
        """``d^order omega / dk^order`` at (complex) ``k``; exact for the finite series."""
        k = np.asarray(k, dtype=complex)
        phase = np.exp(1j * np.multiply.outer(k, self._orders))
        return phase @ (self._values * (1j * self._orders) ** order)

    def __call__(self, k):
        return self.derivative(k, 0)

    def shifted(self, energy: complex) -> "Dispersion":
        """Same band with ``energy`` added to ``omega_0``."""
        c = dict(self.coeffs)
        c[0] = c.get(0, 0j) + energy
        return Dispersion(c, name=self.name)

    def loop(self, n: int = DEFAULT_GRID) -> "EnergyLoop":
        return EnergyLoop.from_dispersion(self, n)


def eval_dispersion(disp: Dispersion, k):
    return disp(k)


def eval_group_velocity(disp: Dispersion, k):
    return disp.derivative(k, 1)


def check_balanced(disp: Dispersion) -> bool:
    """True when gain and loss balance over the Brillouin zone (``Im omega_0 = 0``)."""
    return abs(disp.onsite.imag) < BALANCE_TOL


def asymmetric(kappa1: float, kappa2: float) -> Dispersion:
    """Nearest-neighbour chain with asymmetric hoppings.

    ``omega(k) = Delta1 cos k + i Delta2 sin k`` with ``Delta1 = kappa1 + kappa2``
    and ``Delta2 = kappa1 - kappa2``.  ``kappa1`` moves amplitude towards
    increasing site index.
    """
    return Dispersion({1: kappa1, -1: kappa2}, name=f"asymmetric({kappa1!r}, {kappa2!r})")


def asymmetric_from_deltas(delta1: float, delta2: float) -> Dispersion:
    return asymmetric(0.5 * (delta1 + delta2), 0.5 * (delta1 - delta2))


def _segment_distance(p: complex, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    denom = np.where(np.abs(d) > 0, np.abs(d) ** 2, 1.0)
    s = np.clip(np.real((p - a) * np.conj(d)) / denom, 0.0, 1.0)
    return np.abs(p - (a + s * d))


@dataclass(frozen=True)
class EnergyLoop:
    """Closed curve traced by ``omega(k)`` over a uniform grid ``k in [-pi, pi)``."""

    dispersion: Dispersion
    k: np.ndarray
    omega: np.ndarray
    closure_tol: float

    @classmethod
    def from_dispersion(cls, disp: Dispersion, n: int = DEFAULT_GRID) -> "EnergyLoop":
        if n < 8 or n & (n - 1):
            raise ValueError("grid size must be a power of two >= 8")
        k = -np.pi + 2 * np.pi * np.arange(n) / n
        omega = disp(k)
        # chord between the last sample and omega(pi) = omega(-pi)
        closure = float(abs(disp(np.pi) - omega[-1]))
        return cls(disp, k, omega, closure)

    @cached_property
    def diameter(self) -> float:
        """Bounding-box diagonal of the sampled loop."""
        return float(np.hypot(np.ptp(self.omega.real), np.ptp(self.omega.imag)))

    @property
    def on_loop_tol(self) -> float:
        return 1e-9 * max(self.diameter, np.finfo(float).tiny)

    @cached_property
    def is_simple(self) -> bool:
        """No self-intersection (a doubly traced Hermitian band is not simple)."""
        if self.diameter == 0.0:
            return False
        ring = LinearRing(np.column_stack([self.omega.real, self.omega.imag]))
        return bool(ring.is_simple) and abs(self.signed_area) > 1e-12 * self.diameter**2

    @cached_property
    def signed_area(self) -> float:
        x, y = self.omega.real, self.omega.imag
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def orientation(self) -> int:
        """+1 when ``omega(k)`` runs counter-clockwise as k increases, -1 otherwise."""
        return 1 if self.signed_area > 0 else -1

    def winding(self, omega: complex) -> float:
        z = self.omega - omega
        return float(np.sum(np.angle(np.roll(z, -1) / z)) / (2 * np.pi))

    def distance(self, omega: complex) -> tuple[float, float]:
        """Distance from ``omega`` to the polyline and the k of the closest vertex pair."""
        a, b = self.omega, np.roll(self.omega, -1)
        d = _segment_distance(omega, a, b)
        j = int(np.argmin(d))
        return float(d[j]), float(self.k[j])

    def _refine_nearest(self, omega: complex, k0: float) -> float:
        """Newton on ``Re[(omega(k) - omega)^* omega'(k)] = 0`` from a grid guess."""
        disp = self.dispersion
        k = k0
        for _ in range(50):
            w, w1, w2 = disp(k), disp.derivative(k, 1), disp.derivative(k, 2)
            f = np.real(np.conj(w - omega) * w1)
            df = np.real(np.conj(w1) * w1 + np.conj(w - omega) * w2)
            if df == 0:
                break
            step = f / df
            k = float(k - np.clip(step, -0.5, 0.5))
            if abs(step) < 1e-15:
                break
        return k

    def contains(self, omega: complex) -> Location:
        """Classify ``omega`` as inside, outside or on the loop via its winding number."""
        omega = complex(omega)
        dist, k0 = self.distance(omega)
        dk = 2 * np.pi / self.k.size
        chord_err = dk**2 * self.dispersion.speed_bound * self.dispersion.max_order / 8
        if dist > 10 * chord_err + self.on_loop_tol or (
            not self.is_simple and dist > self.on_loop_tol
        ):
            w = self.winding(omega)
            n = round(w)
            if abs(w - n) > 1e-6:
                raise UnderResolvedError(f"non-integer winding {w:.8f} at omega={omega}")
            return Location.INSIDE if abs(n) == 1 else Location.OUTSIDE
        # close to the curve: decide from the true curve, not the chords
        k = self._refine_nearest(omega, k0 + 0.5 * dk)
        w0 = complex(self.dispersion(k))
        if abs(omega - w0) < self.on_loop_tol:
            return Location.ON_LOOP
        left = np.imag((omega - w0) / self.dispersion.derivative(k, 1)) > 0
        return Location.INSIDE if left == (self.orientation > 0) else Location.OUTSIDE

    def crossings_above(self, omega: complex) -> np.ndarray:
        """Real k where the loop crosses the vertical line ``Re w = Re omega`` above ``omega``.

        Sorted by increasing height of the crossing.
        """
        x = self.omega.real - omega.real
        nxt = np.roll(x, -1)
        idx = np.nonzero((np.sign(x) != np.sign(nxt)) | (x == 0))[0]
        disp = self.dispersion
        dk = 2 * np.pi / self.k.size
        out = []
        for j in idx:
            a = self.k[j]
            fa, fb = x[j], nxt[j]
            if fa == 0:
                kc = a
            else:
                kc = brentq(lambda q: disp(q).real - omega.real, a, a + dk, xtol=1e-15)
            if disp(kc).imag > omega.imag:
                out.append(kc)
        out = np.array(sorted(set(out), key=lambda q: disp(q).imag))
        return out


def loop_contains(loop: EnergyLoop, omega: complex) -> Location:
    return loop.contains(omega)


# -- text serialisation -----------------------------------------------------

def dispersion_to_text(disp: Dispersion) -> str:
    lines = ["[dispersion]"]
    if disp.name:
        lines.append(f"# {disp.name}")
    for l, w in disp.coeffs.items():
        lines.append(f"{l} = {w.real!r}, {w.imag!r}")
    return "\n".join(lines) + "\n"


def dispersion_from_mapping(items: Mapping[str, str]) -> Dispersion:
    """Build a dispersion from ``l = re, im`` pairs or a ``preset = asymmetric(k1, k2)`` entry."""
    items = dict(items)
    preset = items.pop("preset", None)
    if preset is not None:
        if items:
            raise ValueError("give either a preset or raw coefficients, not both")
        name, _, args = preset.strip().partition("(")
        if name.strip() != "asymmetric" or not args.endswith(")"):
            raise ValueError(f"unknown preset {preset!r}")
        k1, k2 = (float(a) for a in args[:-1].split(","))
        return asymmetric(k1, k2)
    coeffs = {}
    for key, val in items.items():
        parts = [p.strip() for p in val.split(",")]
        if len(parts) == 1:
            parts.append("0")
        if len(parts) != 2:
            raise ValueError(f"coefficient {key!r} must read 're, im'")
        coeffs[int(key)] = complex(float(parts[0]), float(parts[1]))
    return Dispersion(coeffs)
