"""Three ways a level can decay into an asymmetric-hopping chain.

Delta2/Delta1 = 0.7 (pseudo-Hermitian, convectively unstable continuum):
  omega_a = 0 sits inside the effective band [-Gamma, Gamma] and decays
  completely; omega_a = 0.8 is inside the ellipse but outside that band and
  decays only partly, to the squared residue of a real pole.
Delta2/Delta1 = 1 (one-way hopping): a plain Rabi oscillation with site 0.
Delta2/Delta1 = 1.2 (absolutely unstable continuum): the survival
  probability eventually grows without bound.
"""
import numpy as np

from nhdecay import AsymmetricModel, SimConfig, evolve, find_pole, plateau_estimate, rabi_frequencies

from _plot import line_plot

series = []
for d2, wa, t_final in [(0.7, 0.0, 150.0), (0.7, 0.8, 150.0), (1.0, 0.0, 60.0), (1.2, 0.0, 40.0)]:
    m = AsymmetricModel.from_deltas(1.0, d2, sigma=0.2, omega_a=wa)
    traj = evolve(m.dispersion(), m.coupling(), SimConfig(t_final, snapshot_every=0))
    if d2 == 1.0:
        # one-way hopping: Sigma = |sigma|^2/omega has two real poles, no single nearest one
        poles = ", ".join(f"{w:+.3f}" for w in rabi_frequencies(m))
        line = f"Delta2={d2:<4} omega_a={wa:<4} Rabi poles {poles}"
    else:
        res = find_pole(m.dispersion(), m.coupling())
        line = f"Delta2={d2:<4} omega_a={wa:<4} pole={res.pole:.5f}  |Z|^2={abs(res.residue) ** 2:.4f}"
    if d2 < 1:
        line += f"  plateau={plateau_estimate(traj).mean:.4f}"
    print(line)
    series.append((traj.times, traj.P_a, f"Delta2={d2:g}, omega_a={wa:g}"))

# the growing curve would flatten the others on a linear axis
line_plot("decay_regimes", series[:3], title="survival probability", ylabel="P_a")
line_plot("absolute_growth", series[3:], title="absolutely unstable chain", ylabel="P_a", logy=True)
print("Rabi check: P_a(t) vs cos^2(0.2 t) =",
      f"{np.max(np.abs(series[2][1] - np.cos(0.2 * series[2][0]) ** 2)):.1e}")
