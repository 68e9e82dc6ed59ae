"""Stable, convective and absolute continua from saddle points and from simulation.

A unit excitation on an empty chain either stays bounded, grows while it
drifts away (the launch site empties), or grows on the spot.  The saddle
points of omega(k) predict which, without integrating anything.
"""
import numpy as np

from nhdecay import asymmetric_from_deltas, classify, drift_asymptote, evolve_bare_continuum

from _plot import line_plot

series = []
for d2 in (0.0, 0.7, 1.3):
    disp = asymmetric_from_deltas(1.0, d2)
    rc = classify(disp)
    rate, power, _ = drift_asymptote(disp, 0.0)
    rec = evolve_bare_continuum(disp, t_final=80.0)
    print(f"Delta2={d2:<4} verdict={rc.verdict.value:<10} rest-frame rate {rate:+.4f} (t^{power:g}), "
          f"|c_0(80)|={rec.at_origin[-1]:.3e}, max|c_n(80)|={rec.maximum[-1]:.3e}")
    series.append((rec.times, np.log10(rec.at_origin), f"log10|c_0|, Delta2={d2:g}"))
    series.append((rec.times, np.log10(rec.maximum), f"log10 max|c_n|, Delta2={d2:g}"))

line_plot("instability_classes", series, title="bare chain from a single site", ylabel="log10 amplitude")
