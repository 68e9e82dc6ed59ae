"""Pseudo-exponential growth of the level in the absolutely unstable chain.

Past the transient |c_a(t)| ~ t^(-3/2) exp(Im(omega_s) t), so the diagnostic
(1/t) log(|c_a| t^alpha) approaches Im(omega_s) = sqrt(Delta2^2 - Delta1^2)
fastest for alpha = 3/2.  Using P_a instead of |c_a| doubles the limit.
"""
import numpy as np

from nhdecay import AsymmetricModel, SimConfig, evolve, growth_diagnostic

from _plot import line_plot

m = AsymmetricModel.from_deltas(1.0, 1.2, sigma=0.2, omega_a=0.0)
traj = evolve(m.dispersion(), m.coupling(), SimConfig(200.0, snapshot_every=0))
limit = np.sqrt(1.2**2 - 1.0)

series = []
for alpha in (1.5, 0.5, 0.0, -0.5):
    t, g = growth_diagnostic(traj, alpha)
    _, gp = growth_diagnostic(traj, alpha, convention="probability")
    print(f"alpha={alpha:+.1f}  amplitude form {g[-1]:.5f}   probability form {gp[-1]:.5f}")
    series.append((t, g, f"alpha={alpha:g}"))
print(f"Im(omega_s) = {limit:.5f}")
line_plot("growth_laws", series, title="(1/t) log(|c_a| t^alpha)", hlines=[(limit, "Im omega_s")])
