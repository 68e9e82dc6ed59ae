"""Exact results for the nearest-neighbour chain with asymmetric hoppings.

The lattice obeys ``i dc_n/dt = kappa1 c_{n-1} + kappa2 c_{n+1} + conj(sigma) c_a delta_{n0}``
and ``i dc_a/dt = omega_a c_a + sigma c_0``.  Its band is an ellipse
``omega(k) = Delta1 cos k + i Delta2 sin k`` with saddle energies ``+-Gamma``,
``Gamma^2 = Delta1^2 - Delta2^2 = 4 kappa1 kappa2``.

Everything here is written from the closed forms, independently of the
quadrature and continuation machinery in :mod:`nhdecay.spectral`, so the two
can be checked against each other.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .exceptions import OnLoopError, RegimeError
from .lattice import Dispersion, asymmetric
from .spectral import CouplingProfile

ROOT_TOL = 1e-8
LOOP_TOL = 1e-9
_EIGHTH = np.exp(0.25j * np.pi)


class AsymmetricRegime(str, enum.Enum):
    PSEUDO_HERMITIAN_CONVECTIVE = "pseudo_hermitian_convective"
    RABI_BOUNDARY = "rabi_boundary"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class AsymmetricModel:
    """Asymmetric-hopping chain with one discrete level side-coupled to site 0.

    Parameters
    ----------
    kappa1 : float
        Hopping towards increasing n, must be positive.
    kappa2 : float
        Hopping towards decreasing n; its sign sets the regime.
    sigma : complex
        Coupling of the discrete state to site 0.
    omega_a : float
        Energy of the discrete state.
    """

    kappa1: float
    kappa2: float
    sigma: complex = 0.2
    omega_a: float = 0.0

    def __post_init__(self):
        if not self.kappa1 > 0:
            raise ValueError(f"kappa1 must be positive, got {self.kappa1}")
        object.__setattr__(self, "kappa1", float(self.kappa1))
        object.__setattr__(self, "kappa2", float(self.kappa2))
        object.__setattr__(self, "sigma", complex(self.sigma))
        object.__setattr__(self, "omega_a", float(self.omega_a))

    @classmethod
    def from_deltas(cls, delta1: float, delta2: float, sigma: complex = 0.2, omega_a: float = 0.0):
        return cls(0.5 * (delta1 + delta2), 0.5 * (delta1 - delta2), sigma, omega_a)

    @property
    def delta1(self) -> float:
        return self.kappa1 + self.kappa2

    @property
    def delta2(self) -> float:
        return self.kappa1 - self.kappa2

    @property
    def gamma(self) -> complex:
        """``sqrt(4 kappa1 kappa2)``, imaginary when ``kappa2 < 0``."""
        return np.sqrt(complex(4.0 * self.kappa1 * self.kappa2))

    @property
    def gauge_field(self) -> float:
        """``h = ln(kappa1/kappa2) / 2``; only defined for ``kappa2 > 0``."""
        if self.kappa2 <= 0:
            raise RegimeError("no real imaginary gauge field for kappa2 <= 0")
        return 0.5 * np.log(self.kappa1 / self.kappa2)

    @property
    def coupling_strength(self) -> float:
        return abs(self.sigma) ** 2

    def dispersion(self) -> Dispersion:
        return asymmetric(self.kappa1, self.kappa2)

    def coupling(self) -> CouplingProfile:
        return CouplingProfile.single_site(self.omega_a, self.sigma)

    def replace(self, **changes) -> "AsymmetricModel":
        fields = dict(kappa1=self.kappa1, kappa2=self.kappa2, sigma=self.sigma, omega_a=self.omega_a)
        fields.update(changes)
        return AsymmetricModel(**fields)


def regime(model: AsymmetricModel) -> AsymmetricRegime:
    if model.kappa2 > 0:
        return AsymmetricRegime.PSEUDO_HERMITIAN_CONVECTIVE
    if model.kappa2 == 0:
        return AsymmetricRegime.RABI_BOUNDARY
    return AsymmetricRegime.ABSOLUTE


# -- self-energy --------------------------------------------------------------

def sqrt_down(z):
    """Square root with its cut along the negative imaginary axis.

    ``sqrt_down(z) ~ sqrt(z)`` for real positive z.  Points exactly on the cut
    take the limit from the right (``Re z -> 0+``).
    """
    w = -1j * np.asarray(z, dtype=complex)
    r = np.sqrt(w)
    on_cut = (w.imag == 0) & (w.real < 0)
    r = np.where(on_cut, -1j * np.sqrt(np.abs(w.real)), r)
    out = _EIGHTH * r
    return out if out.ndim else complex(out)


def _continued_root(model: AsymmetricModel, omega):
    """``sqrt(omega^2 - Gamma^2)`` continued from above with cuts hanging down from ``+-Gamma``."""
    g = model.gamma
    return sqrt_down(np.asarray(omega) - g) * sqrt_down(np.asarray(omega) + g)


def _physical_root(model: AsymmetricModel, omega):
    """``sqrt(omega^2 - Gamma^2)`` with the cut on the straight segment ``[-Gamma, Gamma]``."""
    omega = np.asarray(omega, dtype=complex)
    return omega * np.sqrt(1.0 - model.gamma**2 / omega**2)


def ellipse_location(model: AsymmetricModel, omega: complex, tol: float = LOOP_TOL) -> str:
    """``"inside"``, ``"outside"`` or ``"on-loop"`` for the ellipse of the model."""
    omega = complex(omega)
    d1, d2 = abs(model.delta1), abs(model.delta2)
    if d1 == 0 or d2 == 0:
        # degenerate loop: a doubly traced segment along one axis
        along, across, half = (omega.real, omega.imag, d1) if d2 == 0 else (omega.imag, omega.real, d2)
        return "on-loop" if abs(across) < tol * half and abs(along) <= half * (1 + tol) else "outside"
    q = (omega.real / d1) ** 2 + (omega.imag / d2) ** 2
    if abs(q - 1.0) < tol:
        return "on-loop"
    return "inside" if q < 1 else "outside"


def exact_self_energy(model: AsymmetricModel, omega: complex, sheet: str = "outside") -> complex:
    """Closed-form self-energy of the side-coupled level.

    Parameters
    ----------
    sheet : {"outside", "continued", "outer"}
        ``"outside"`` is the physical function, ``|sigma|^2 / sqrt(omega^2 -
        Gamma^2)`` outside the ellipse and zero inside.  ``"continued"`` is the
        analytic continuation from outside (through the top of the ellipse),
        cut vertically downward from ``+-Gamma``.  ``"outer"`` joins the
        physical branch outside with the continuation inside.
    """
    s2 = model.coupling_strength
    loc = ellipse_location(model, omega)
    if sheet == "continued":
        return complex(s2 / _continued_root(model, omega))
    if loc == "on-loop":
        raise OnLoopError(f"omega={omega} lies on the ellipse")
    if sheet == "outside":
        return 0j if loc == "inside" else complex(s2 / _physical_root(model, omega))
    if sheet == "outer":
        return exact_self_energy(model, omega, "continued" if loc == "inside" else "outside")
    raise ValueError(f"unknown sheet {sheet!r}")


def _self_energy_slope(model: AsymmetricModel, omega: complex, sigma_value: complex) -> complex:
    # d/dw [s2 / sqrt(w^2 - G^2)] = -Sigma * w / (w^2 - G^2)
    return -sigma_value * omega / (omega**2 - model.gamma**2)


# -- poles --------------------------------------------------------------------

def _near_branch_point(model: AsymmetricModel) -> bool:
    return abs(abs(model.omega_a) - abs(model.gamma)) < 5 * abs(model.sigma)


def pole_weak(model: AsymmetricModel) -> complex:
    """Weak-coupling pole ``omega_a + Sigma(omega_a)`` on the appropriate sheet.

    The continued sheet is used when ``omega_a`` lies inside the ellipse,
    the physical one otherwise.  Warns when ``omega_a`` is within ``5|sigma|``
    of a branch point, where the expansion breaks down.
    """
    if _near_branch_point(model):
        warnings.warn(
            f"omega_a={model.omega_a} is within 5|sigma| of the branch point |Gamma|={abs(model.gamma):.6g}; "
            "weak-coupling pole unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    return model.omega_a + exact_self_energy(model, model.omega_a, "outer")


@dataclass(frozen=True)
class PoleSolution:
    pole: complex
    residue: complex
    location: str
    candidates: tuple[complex, ...]
    ambiguous: bool


def pole_exact(model: AsymmetricModel) -> PoleSolution:
    """Pole from the quartic ``(w - w_a)^2 (Gamma^2 - w^2) + |sigma|^4 = 0``.

    Squaring loses the branch, so each of the four roots is checked against the
    unsquared equation on the outer sheet; among those that satisfy it the one
    nearest ``omega_a`` is returned.  The others (weakly bound states just
    beyond the branch points) are kept in ``candidates``.  ``ambiguous`` is set
    when two valid roots are equally near ``omega_a``.  The residue is
    ``1 / (1 - dSigma/dw)`` at the pole.
    """
    wa, g2, s2 = model.omega_a, model.gamma**2, model.coupling_strength
    if s2 == 0:
        return PoleSolution(complex(wa), 1 + 0j, ellipse_location(model, wa), (complex(wa),), False)
    # (w^2 - 2 wa w + wa^2)(G^2 - w^2) + s2^2
    coeffs = np.polymul([1.0, -2 * wa, wa**2], [-1.0, 0.0, g2])
    coeffs[-1] += s2**2
    roots = np.roots(coeffs)
    good = []
    for w in roots:
        try:
            sig = exact_self_energy(model, w, "outer")
        except OnLoopError:
            continue
        resid = abs(w - wa - sig)
        if resid < ROOT_TOL * max(1.0, abs(w)):
            good.append(complex(w))
    if not good:
        raise RegimeError("no root of the quartic satisfies the unsquared pole equation")
    good.sort(key=lambda w: abs(w - wa))
    w = good[0]
    sig = exact_self_energy(model, w, "outer")
    residue = 1.0 / (1.0 - _self_energy_slope(model, w, sig))
    tie = len(good) > 1 and abs(good[1] - wa) - abs(w - wa) < ROOT_TOL * max(1.0, abs(w - wa))
    return PoleSolution(w, complex(residue), ellipse_location(model, w), tuple(good), bool(tie))


# -- time-domain closed forms ---------------------------------------------------

def _require_unidirectional(model: AsymmetricModel):
    if model.kappa2 != 0:
        raise RegimeError(f"requires kappa2 = 0, got {model.kappa2}")


def rabi_frequencies(model: AsymmetricModel) -> tuple[float, float]:
    """``Omega_pm = omega_a/2 +- sqrt((omega_a/2)^2 + |sigma|^2)``."""
    half = 0.5 * model.omega_a
    root = np.sqrt(half**2 + model.coupling_strength)
    return half + root, half - root


def rabi_pair(model: AsymmetricModel, t):
    """``(c_a(t), c_0(t))`` for unidirectional hopping, where site 0 sees no back-flow."""
    _require_unidirectional(model)
    if model.sigma == 0:
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * model.omega_a * t), np.zeros_like(t, dtype=complex)
    wp, wm = rabi_frequencies(model)
    t = np.asarray(t, dtype=float)
    ep, em = np.exp(-1j * wp * t), np.exp(-1j * wm * t)
    ca = (wp * ep - wm * em) / (wp - wm)
    c0 = np.conj(model.sigma) * (ep - em) / (wp - wm)
    return ca, c0


def rabi_solution(model: AsymmetricModel, t):
    """Amplitude of the discrete state for ``kappa2 = 0``."""
    return rabi_pair(model, t)[0]


def degenerate_solution(model: AsymmetricModel, t, n: int):
    """Lattice amplitude ``c_n(t)`` for ``kappa2 = 0`` on a uniform grid starting at 0.

    Sites behind the coupled one stay empty.  Further ahead each amplitude is
    the running integral of its predecessor, ``c_n = -i kappa1 int_0^t c_{n-1}``,
    evaluated by cumulative Simpson quadrature on ``t``.
    """
    _require_unidirectional(model)
    t = np.asarray(t, dtype=float)
    if n < 0:
        return np.zeros_like(t, dtype=complex)
    c = rabi_pair(model, t)[1]
    if n > 0 and (t.ndim != 1 or t.size < 3 or t[0] != 0):
        raise ValueError("iterated integrals need a 1-d time grid starting at t=0")
    for _ in range(n):
        c = -1j * model.kappa1 * _running_integral(c, t)
    return c


def _running_integral(y, t):
    # scipy's cumulative Simpson rule silently drops imaginary parts
    re = cumulative_simpson(y.real, x=t, initial=0.0)
    im = cumulative_simpson(y.imag, x=t, initial=0.0)
    return re + 1j * im


# -- imaginary gauge ------------------------------------------------------------

def gauge_transform(amplitudes, sites, h: float):
    """``b_n = c_n exp(-h n)``: maps the asymmetric chain onto a symmetric one.

    With ``h = ln(kappa1/kappa2)/2`` the hoppings of ``b`` are both
    ``sqrt(kappa1 kappa2)``.  ``c_a`` carries no site index and is unchanged.
    Calling again with ``-h`` inverts the map.
    """
    sites = np.asarray(sites)
    expo = -h * sites.astype(float)
    if expo.size and np.max(np.abs(expo)) > 700:
        raise OverflowError(
            f"|h n| up to {np.max(np.abs(expo)):.1f} overflows; truncate the lattice for h={h}"
        )
    return np.asarray(amplitudes) * np.exp(expo)


def hermitize(model: AsymmetricModel) -> AsymmetricModel:
    """Gauge-equivalent Hermitian chain with symmetric hopping ``Gamma/2``."""
    if model.kappa2 <= 0:
        raise RegimeError(
            "the imaginary gauge transformation cannot be applied for kappa2 <= 0: "
            "the decay problem is not pseudo-Hermitian"
        )
    if model.kappa1 == model.kappa2:
        return model
    half = 0.5 * model.gamma.real
    return model.replace(kappa1=half, kappa2=half)
