"""
Comparing a predicted path with the expert path
===============================================

Index-paired errors (ADE/FDE) versus alignment-based (DTW, discrete
Fréchet) and set-based (Hausdorff, Chamfer) distances.
"""
import numpy as np

from rchain.metrics import METRICS

expert = np.array([[t, 0.02 * t**2] for t in range(1, 7)], dtype=float)

###############################################################################
# A path that is right in shape but one step late, against a path that is on
# time but sits 0.5 m to the side. Index-paired errors prefer the shifted path;
# DTW and Chamfer prefer the late one, since most of its points lie exactly
# on the expert path once the time shift is allowed for.

late = np.vstack([[0.0, 0.0], expert[:-1]])
offset = expert + [0.0, 0.5]

for name, pred in [("one step late", late), ("shifted 0.5 m", offset)]:
    scores = ", ".join(f"{k}={f(pred, expert):.3f}" for k, f in METRICS.items())
    print(f"{name:14s} {scores}")
