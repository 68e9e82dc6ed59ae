"""Reference computations that share no code path with the package.

Each oracle solves the same problem a different way: adaptive quadrature
instead of the periodic trapezoid rule, polynomial roots instead of seeded
Newton, a dense matrix exponential instead of RK4.
"""
import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm


def laurent_coeffs(coeffs):
    """``omega(k) = sum_l w_l z^l`` as numpy polynomial coefficients of ``z^L omega``."""
    lo = min(coeffs)
    shift = -lo if lo < 0 else 0
    hi = max(coeffs) + shift
    poly = np.zeros(hi + 1, dtype=complex)
    for l, w in coeffs.items():
        poly[hi - (l + shift)] += w
    return poly, shift


def omega_of(coeffs, k):
    k = np.asarray(k, dtype=complex)
    return sum(w * np.exp(1j * l * k) for l, w in coeffs.items())


def saddles_polyroots(coeffs, slope=0.0):
    """Roots of ``omega'(k) = slope`` via the polynomial in ``z = exp(ik)``."""
    d = {l: 1j * l * w for l, w in coeffs.items() if l != 0}
    if slope:
        d[0] = d.get(0, 0) - slope
    poly, _ = laurent_coeffs(d)
    poly = np.trim_zeros(poly, "f")
    z = np.roots(poly)
    z = z[np.abs(z) > 0]
    k = -1j * np.log(z)
    return (k.real + np.pi) % (2 * np.pi) - np.pi + 1j * k.imag


def quad_self_energy(coeffs, sigma, omega):
    """``int dk G(k) / (omega - omega(k))`` by adaptive Gauss-Kronrod quadrature."""
    sites = np.array(list(sigma), float)
    amps = np.array(list(sigma.values()), complex)

    def weight(k):
        g1 = np.sum(amps * np.exp(-1j * k * sites)) / np.sqrt(2 * np.pi)
        g2 = np.sum(np.conj(amps) * np.exp(1j * k * sites)) / np.sqrt(2 * np.pi)
        return g1 * g2

    def f(k):
        return weight(k) / (omega - omega_of(coeffs, k))

    re = quad(lambda k: f(k).real, -np.pi, np.pi, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    im = quad(lambda k: f(k).imag, -np.pi, np.pi, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return complex(re, im)


def dense_hamiltonian(coeffs, sigma, omega_a, half_width):
    size = 2 * half_width + 1
    h = np.zeros((size + 1, size + 1), dtype=complex)
    h[0, 0] = omega_a
    for l, w in coeffs.items():
        for n in range(-half_width, half_width + 1):
            m = n - l
            if -half_width <= m <= half_width:
                h[1 + n + half_width, 1 + m + half_width] += w
    for n, s in sigma.items():
        h[0, 1 + n + half_width] = s
        h[1 + n + half_width, 0] = np.conj(s)
    return h


def expm_amplitude(coeffs, sigma, omega_a, half_width, times):
    """``c_a(t)`` by dense matrix exponentials on the truncated lattice."""
    h = dense_hamiltonian(coeffs, sigma, omega_a, half_width)
    psi0 = np.zeros(h.shape[0], dtype=complex)
    psi0[0] = 1
    return np.array([(expm(-1j * h * t) @ psi0)[0] for t in times])


def bare_verdict(record, t_early=50.0):
    """Instability class from a bare-lattice run, following the textbook definitions.

    Absolute when the amplitude at the launch site grows between ``t_early``
    and the end; convective when it does not but the peak amplitude grows;
    stable otherwise.
    """
    i = np.searchsorted(record.times, t_early)
    grows_here = record.at_origin[-1] > record.at_origin[i] * (1 + 1e-9)
    grows_somewhere = record.maximum[-1] > record.maximum[i] * (1 + 1e-9)
    if grows_here:
        return "absolute"
    return "convective" if grows_somewhere else "stable"


def fd_derivative(f, x, h=1e-4):
    return (f(x + h) - f(x - h)) / (2 * h)


def rabi_c1_exact(kappa1, sigma, omega_a, t):
    """``c_1(t) = -i kappa1 int_0^t c_0`` in closed form for unidirectional hopping."""
    half = 0.5 * omega_a
    root = np.sqrt(half**2 + abs(sigma) ** 2)
    wp, wm = half + root, half - root

    def prim(w):
        # int_0^t exp(-i w s) ds
        return t if w == 0 else (1 - np.exp(-1j * w * t)) / (1j * w)

    return -1j * kappa1 * np.conj(sigma) * (prim(wp) - prim(wm)) / (wp - wm)
