"""Physical and continued self-energy along a horizontal line through the ellipse.

Inside the loop the physical self-energy vanishes; the continued branch
-i |sigma|^2 / sqrt(Gamma^2 - omega^2) takes over and is what the pole
equation sees.  Quadrature and closed form agree to ~1e-10.
"""
import numpy as np

from nhdecay import AsymmetricModel, exact_self_energy, outer_self_energy, self_energy

from _plot import line_plot

m = AsymmetricModel.from_deltas(1.0, 0.7, sigma=0.2)
d, c = m.dispersion(), m.coupling()
y = 0.05
xs = np.linspace(-1.6, 1.6, 161)
xs = xs[np.abs(xs**2 + (y / 0.7) ** 2 - 1) > 1e-3]

phys = np.array([self_energy(d, c, x + 1j * y) for x in xs])
outer = np.array([outer_self_energy(d, c, x + 1j * y) for x in xs])
closed = np.array([exact_self_energy(m, x + 1j * y, "outer") for x in xs])
print(f"max |quadrature - closed form| on the outer sheet: {np.max(np.abs(outer - closed)):.1e}")

line_plot(
    "self_energy_sheets",
    [(xs, phys.imag, "Im Sigma (physical)"), (xs, outer.imag, "Im Sigma (outer sheet)"), (xs, outer.real, "Re Sigma (outer sheet)")],
    title=f"self-energy at Im omega = {y}", xlabel="Re omega",
)
