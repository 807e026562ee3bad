"""
Three ways to build path targets
================================

A planner sees the current pose plus a short history and predicts ``m``
future points. This script walks through the three target encodings on a
gently curving three-step path and shows why the residual chain differs from
teacher-forced deltas once the model's own predictions drift.
"""
import numpy as np

from rchain import residual_chain_targets, recover_absolute, to_deltas, to_relative
from rchain.trajectory import PathPoint, TrainingSample

###############################################################################
# A single training window
# ------------------------
# Two history points, the current pose at the origin, three future points.

pts = [(-2.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (1.0, 0.1), (2.0, 0.4), (3.0, 0.9)]
points = [PathPoint(t, x, y) for t, (x, y) in enumerate(pts)]
sample = TrainingSample(tuple(points[:3]), tuple(points[3:]))

print("future points:\n", sample.future_xy)
print("relative targets (offset from current):\n", to_relative(sample))
print("delta targets (step over previous truth):\n", to_deltas(sample))

###############################################################################
# Predictions that drift
# ----------------------
# Suppose the model under-steers: each predicted step has too little lateral
# motion. Teacher-forced deltas keep asking for the same increments, even
# though the chain of predictions has already fallen behind. The residual
# chain re-anchors each target on where the predictions have actually led.

predicted = np.array([[1.0, 0.05], [1.0, 0.15], [1.0, 0.3]])
chain = residual_chain_targets(sample, predicted)
print("predicted steps:\n", predicted)
print("residual chain targets:\n", chain)

recovered = recover_absolute(sample.current, predicted)
print("points recovered from predictions:\n", recovered)

###############################################################################
# The residual target for step t is exactly the gap between the truth at t
# and the recovered point at t-1, so following it closes the accumulated
# error instead of reproducing a step that ignores it.

gap = sample.future_xy[1:] - recovered[:-1]
print("gap to truth from previous recovered point:\n", gap)
assert np.allclose(gap, chain[1:])
