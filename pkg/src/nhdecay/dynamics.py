"""Time-domain integration of the discrete state coupled to the lattice.

Two representations are offered.  The Wannier one evolves ``c_a`` and the
site amplitudes ``c_n`` on a truncated chain ``n in [-N, N]`` with open ends.
The Bloch one evolves ``c_a`` and the Bloch amplitudes ``c(k)`` on a uniform
k-grid, coupled through ``g1`` and ``g2``.

Both use classical fixed-step RK4.  For a linear autonomous system one RK4 step
is multiplication by ``1 + A + A^2/2 + A^3/6 + A^4/24`` with ``A = -i H dt``; the
Wannier integrator precomputes that banded matrix once.

The Bloch grid may be shifted off the real axis, ``k -> k + i y``.  The
amplitudes ``c(k, t)`` and the couplings are entire and periodic in k, so the
coupling integral is unchanged by the shift, but round-off no longer grows as
``exp(max Im omega(k) t)``.  With ``bloch_shift=None`` the shift minimising
``max_k Im omega(k + i y)`` is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .lattice import Dispersion
from .spectral import CouplingProfile
from .stability import minimax_growth_rate

CONTAINMENT_TOL = 1e-10
OVERFLOW_GUARD = 1e150
MAX_SNAPSHOTS = 200


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.  ``None`` entries are sized automatically.

    Attributes
    ----------
    t_final : float
    dt : float, optional
        Defaults to the largest step not above ``0.01 / max(|omega_a|,
        sum_l |omega_l|, |sigma|)`` that divides ``t_final``.
    half_width : int, optional
        Lattice sites ``n in [-N, N]``; defaults to
        ``ceil(2 t_final sum_l |l||omega_l|) + 32``.
    representation : {"wannier", "bloch"}
    bloch_grid : int
    bloch_shift : float, optional
        Imaginary offset of the Bloch grid.
    snapshot_every : int, optional
        Store a lattice profile every this many steps (default keeps at most
        ``MAX_SNAPSHOTS``).  ``0`` disables snapshots.
    track : tuple of int
        Sites whose amplitude is recorded at every step (Wannier runs only).
    """

    t_final: float
    dt: float | None = None
    half_width: int | None = None
    representation: str = "wannier"
    bloch_grid: int = 4096
    bloch_shift: float | None = None
    snapshot_every: int | None = None
    track: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.representation not in ("wannier", "bloch"):
            raise ValueError(f"unknown representation {self.representation!r}")

    def resolved(self, disp: Dispersion, coupling: CouplingProfile | None = None) -> "SimConfig":
        """Copy with automatic entries filled in."""
        dt, n = self.dt, self.half_width
        if dt is None:
            scale = disp.bandwidth_bound
            if coupling is not None:
                scale = max(scale, abs(coupling.omega_a), max(map(abs, coupling.sigma.values()), default=0.0))
            # largest step within the bound that lands exactly on t_final
            dt = self.t_final / math.ceil(self.t_final * scale / 0.01)
        if n is None:
            reach = max(map(abs, coupling.sigma), default=0) if coupling is not None else 0
            n = math.ceil(2 * disp.speed_bound * self.t_final) + 32 + reach
        return replace(self, dt=float(dt), half_width=int(n))

    @property
    def n_steps(self) -> int:
        if self.dt is None:
            raise ValueError("resolve the config first")
        return max(1, round(self.t_final / self.dt))


@dataclass
class Trajectory:
    """Result of :func:`evolve`.

    ``times`` and ``c_a`` are recorded every step.  ``snapshots`` holds lattice
    profiles on ``sites`` at ``snapshot_times`` (Wannier runs only).  ``peak``
    is the running maximum of ``|c_n|`` per site.  ``flags`` lists
    ``"containment"`` when the wavefront reached the lattice ends and
    ``"overflow"`` when the run stopped at the overflow guard.  ``tracked``
    maps each site in ``SimConfig.track`` to its full amplitude series.
    """

    times: np.ndarray
    c_a: np.ndarray
    config: SimConfig | None = None
    sites: np.ndarray | None = None
    snapshot_times: np.ndarray | None = None
    snapshots: np.ndarray | None = None
    peak: np.ndarray | None = None
    norm: np.ndarray | None = None
    flags: tuple[str, ...] = ()
    tracked: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def P_a(self) -> np.ndarray:
        return np.abs(self.c_a) ** 2

    @property
    def valid(self) -> bool:
        return not self.flags


# -- Wannier representation -------------------------------------------------------

def _lattice_hamiltonian(disp: Dispersion, half_width: int) -> sp.csr_matrix:
    size = 2 * half_width + 1
    # (H c)_n = sum_l omega_l c_{n-l}: coefficient l sits on diagonal -l
    diags, offsets = [], []
    for l, w in disp.coeffs.items():
        if abs(l) < size:
            diags.append(np.full(size - abs(l), w))
            offsets.append(-l)
    return sp.diags(diags, offsets, shape=(size, size), format="csr", dtype=complex)


def _full_hamiltonian(disp, coupling, half_width) -> sp.csr_matrix:
    """Index 0 is the discrete state, index ``1 + n + N`` is site n."""
    h_lat = _lattice_hamiltonian(disp, half_width)
    size = h_lat.shape[0]
    col = np.zeros(size, dtype=complex)
    for n, s in coupling.sigma.items():
        if abs(n) > half_width:
            raise ValueError(f"coupled site {n} lies outside the truncated lattice")
        col[n + half_width] = s
    corner = sp.csr_matrix([[coupling.omega_a]], dtype=complex)
    row = sp.csr_matrix(col[None, :])
    return sp.bmat([[corner, row], [row.conj().T, h_lat]], format="csr")


def rk4_propagator(h: sp.spmatrix, dt: float) -> sp.csr_matrix:
    """Matrix applied by one classical RK4 step of ``dpsi/dt = -i H psi``."""
    a = (-1j * dt) * h.tocsr()
    eye = sp.identity(h.shape[0], dtype=complex, format="csr")
    out = eye + a / 4
    out = eye + (a @ out) / 3
    out = eye + (a @ out) / 2
    out = eye + a @ out
    out.sum_duplicates()
    out.sort_indices()
    return out


def _snapshot_stride(config: SimConfig) -> int:
    if config.snapshot_every is not None:
        return config.snapshot_every
    return max(1, math.ceil(config.n_steps / MAX_SNAPSHOTS))


def _evolve_wannier(disp, coupling, config: SimConfig, psi0=None) -> Trajectory:
    n_half = config.half_width
    prop = rk4_propagator(_full_hamiltonian(disp, coupling, n_half), config.dt)
    size = prop.shape[0]
    if psi0 is None:
        psi = np.zeros(size, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.array(psi0, dtype=complex)
        if psi.shape != (size,):
            raise ValueError(f"initial state must have length {size}")

    n_steps, dt = config.n_steps, config.dt
    stride = _snapshot_stride(config)
    times = dt * np.arange(n_steps + 1)
    c_a = np.empty(n_steps + 1, dtype=complex)
    norm = np.empty(n_steps + 1)
    c_a[0] = psi[0]
    norm[0] = float(np.vdot(psi, psi).real)
    peak = np.abs(psi[1:])
    track = np.array(config.track, dtype=int)
    if np.any(np.abs(track) > n_half):
        raise ValueError("tracked site outside the truncated lattice")
    track_idx = 1 + n_half + track
    tracked = np.empty((n_steps + 1, track.size), dtype=complex)
    tracked[0] = psi[track_idx]
    snap_t, snaps = [0.0], [psi[1:].copy()] if stride else []
    flags: list[str] = []
    last = n_steps
    for step in range(1, n_steps + 1):
        psi = prop @ psi
        mag = np.abs(psi[1:])
        top = mag.max()
        np.maximum(peak, mag, out=peak)
        c_a[step] = psi[0]
        tracked[step] = psi[track_idx]
        norm[step] = float(np.vdot(psi, psi).real)
        if "containment" not in flags and max(mag[0], mag[-1]) > CONTAINMENT_TOL * max(1.0, top):
            flags.append("containment")
        if stride and step % stride == 0:
            snap_t.append(times[step])
            snaps.append(psi[1:].copy())
        if not np.isfinite(top) or max(top, abs(psi[0])) > OVERFLOW_GUARD:
            flags.append("overflow")
            last = step
            break
    return Trajectory(
        times=times[: last + 1],
        c_a=c_a[: last + 1],
        config=config,
        sites=np.arange(-n_half, n_half + 1),
        snapshot_times=np.array(snap_t) if stride else None,
        snapshots=np.array(snaps) if stride else None,
        peak=peak,
        norm=norm[: last + 1],
        flags=tuple(flags),
        tracked={int(n): tracked[: last + 1, j] for j, n in enumerate(track)},
    )


# -- Bloch representation -------------------------------------------------------

def auto_bloch_shift(disp: Dispersion) -> float:
    """Imaginary k-offset minimising ``max_k Im omega(k + i y)``."""
    return minimax_growth_rate(disp, 0.0)[1]


def _evolve_bloch(disp, coupling, config: SimConfig) -> Trajectory:
    m = config.bloch_grid
    shift = auto_bloch_shift(disp) if config.bloch_shift is None else config.bloch_shift
    k = -np.pi + 2 * np.pi * np.arange(m) / m + 1j * shift
    dk = 2 * np.pi / m
    w = disp(k)
    g1 = coupling.g1(k) * dk
    g2 = coupling.g2(k)
    wa = coupling.omega_a

    def rhs(ca, ck):
        return -1j * (wa * ca + g1 @ ck), -1j * (w * ck + g2 * ca)

    n_steps, dt = config.n_steps, config.dt
    times = dt * np.arange(n_steps + 1)
    c_a = np.empty(n_steps + 1, dtype=complex)
    ca, ck = 1.0 + 0j, np.zeros(m, dtype=complex)
    c_a[0] = ca
    flags: list[str] = []
    last = n_steps
    for step in range(1, n_steps + 1):
        a1, b1 = rhs(ca, ck)
        a2, b2 = rhs(ca + 0.5 * dt * a1, ck + 0.5 * dt * b1)
        a3, b3 = rhs(ca + 0.5 * dt * a2, ck + 0.5 * dt * b2)
        a4, b4 = rhs(ca + dt * a3, ck + dt * b3)
        ca = ca + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        ck = ck + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        c_a[step] = ca
        if not np.isfinite(ca) or abs(ca) > OVERFLOW_GUARD:
            flags.append("overflow")
            last = step
            break
    return Trajectory(
        times=times[: last + 1],
        c_a=c_a[: last + 1],
        config=config,
        flags=tuple(flags),
        notes={"bloch_shift": shift},
    )


def evolve(disp: Dispersion, coupling: CouplingProfile, config: SimConfig, *, initial=None) -> Trajectory:
    """Integrate from ``c_a(0) = 1`` with an empty lattice.

    Parameters
    ----------
    disp, coupling
        Lattice band and discrete-state coupling.
    config : SimConfig
        Automatic entries are resolved here.
    initial : array_like, optional
        Full Wannier state ``[c_a, c_{-N}, ..., c_N]`` to start from instead.

    Returns
    -------
    Trajectory
        Flagged rather than raised on containment loss or overflow.
    """
    config = config.resolved(disp, coupling)
    if config.representation == "bloch":
        if initial is not None:
            raise ValueError("custom initial states are only supported in the Wannier representation")
        return _evolve_bloch(disp, coupling, config)
    return _evolve_wannier(disp, coupling, config, initial)


# -- bare continuum ---------------------------------------------------------

@dataclass
class BareRecord:
    """Bare-lattice propagation from ``c_{n0}(0) = 1``."""

    times: np.ndarray
    at_origin: np.ndarray
    maximum: np.ndarray
    drift: np.ndarray | None
    norm: np.ndarray
    velocity: float | None
    flags: tuple[str, ...] = ()


def evolve_bare_continuum(
    disp: Dispersion,
    n0: int = 0,
    config: SimConfig | None = None,
    *,
    velocity: float | None = None,
    t_final: float = 100.0,
) -> BareRecord:
    """Propagate a single-site excitation without the discrete state.

    Records ``|c_{n0}(t)|``, ``max_n |c_n(t)|``, the total lattice norm and, if
    ``velocity`` is given, ``|c_{n0 + round(V t)}(t)|`` in the drifting frame.
    """
    config = (config or SimConfig(t_final)).resolved(disp)
    n_half = config.half_width
    if abs(n0) > n_half:
        raise ValueError("initial site outside the lattice")
    prop = rk4_propagator(_lattice_hamiltonian(disp, n_half), config.dt)
    psi = np.zeros(2 * n_half + 1, dtype=complex)
    psi[n0 + n_half] = 1.0
    n_steps, dt = config.n_steps, config.dt
    times = dt * np.arange(n_steps + 1)
    origin = np.empty(n_steps + 1)
    top = np.empty(n_steps + 1)
    norm = np.empty(n_steps + 1)
    drift = np.empty(n_steps + 1) if velocity is not None else None
    flags: list[str] = []
    last = n_steps
    for step in range(n_steps + 1):
        if step:
            psi = prop @ psi
        mag = np.abs(psi)
        origin[step] = mag[n0 + n_half]
        top[step] = mag.max()
        norm[step] = float(np.sum(mag**2))
        if drift is not None:
            n = n0 + int(round(velocity * times[step]))
            drift[step] = mag[n + n_half] if abs(n) <= n_half else np.nan
        if "containment" not in flags and max(mag[0], mag[-1]) > CONTAINMENT_TOL * max(1.0, top[step]):
            flags.append("containment")
        if top[step] > OVERFLOW_GUARD:
            flags.append("overflow")
            last = step
            break
    cut = slice(0, last + 1)
    return BareRecord(
        times[cut], origin[cut], top[cut], None if drift is None else drift[cut], norm[cut], velocity, tuple(flags)
    )


# -- observables ------------------------------------------------------------

def growth_diagnostic(traj: Trajectory, alpha: float, *, convention: str = "amplitude", t_min: float = 5.0):
    """``(1/t) log[X(t) t^alpha]`` with ``X = |c_a|`` or ``X = P_a``.

    Returns ``(t, series)`` restricted to ``t >= t_min``.
    """
    if convention == "amplitude":
        x = np.abs(traj.c_a)
    elif convention == "probability":
        x = traj.P_a
    else:
        raise ValueError(f"unknown convention {convention!r}")
    sel = traj.times >= t_min
    t, x = traj.times[sel], x[sel]
    if t.size == 0:
        raise ValueError(f"no samples with t >= {t_min}")
    if np.any(x <= 0):
        raise ValueError("growth diagnostic needs a strictly positive observable")
    return t, (np.log(x) + alpha * np.log(t)) / t


@dataclass(frozen=True)
class Plateau:
    mean: float
    std: float
    converged: bool


def plateau_estimate(traj: Trajectory, tail_fraction: float = 0.2) -> Plateau:
    """Mean and spread of ``P_a`` over the trailing ``tail_fraction`` of the run.

    ``converged`` is false when the spread exceeds the mean.
    """
    if traj.flags:
        raise ValueError(f"trajectory is flagged {traj.flags}; no plateau estimate")
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    t0 = traj.times[-1] * (1 - tail_fraction)
    tail = traj.P_a[traj.times >= t0]
    mean, std = float(np.mean(tail)), float(np.std(tail))
    return Plateau(mean, std, std <= mean)


def fit_decay_rate(traj: Trajectory, t_start: float, t_stop: float) -> float:
    """Least-squares slope ``-d log P_a / dt`` over ``[t_start, t_stop]``."""
    sel = (traj.times >= t_start) & (traj.times <= t_stop)
    if np.count_nonzero(sel) < 2:
        raise ValueError("fit window holds fewer than two samples")
    slope = np.polyfit(traj.times[sel], np.log(traj.P_a[sel]), 1)[0]
    return float(-slope)


def zero_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Linearly interpolated sign changes of ``y``."""
    s = np.signbit(y)
    idx = np.nonzero(s[1:] != s[:-1])[0]
    return t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
