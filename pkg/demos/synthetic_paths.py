"""
Synthetic driving paths
=======================

Generate each kinematic family, window it, and round-trip it through the
trajectory CSV format.
"""
import tempfile
from pathlib import Path

from rchain.datagen import (
    DatasetSpec,
    GeneratorSpec,
    build_dataset,
    generate_trajectory,
    read_trajectory_csv,
    write_trajectory_csv,
)
from rchain.trajectory import extract_windows

###############################################################################
# One path per family
# -------------------

families = {
    "straight": GeneratorSpec(kind="straight", num_points=30, speed=1.0),
    "arc": GeneratorSpec(kind="arc", num_points=30, speed=1.0, curvature=0.05),
    "lane_change": GeneratorSpec(kind="lane_change", num_points=30, lateral_amplitude=3.5),
    "mixed": GeneratorSpec(kind="mixed", num_points=30, curvature=-0.04,
                           lateral_amplitude=3.5, noise_std=0.05, seed=1),
}
trajs = {name: generate_trajectory(spec) for name, spec in families.items()}
for name, traj in trajs.items():
    end = traj.points[-1]
    print(f"{name:12s} ends at ({end.x:7.3f}, {end.y:7.3f}) heading {end.yaw:6.3f} rad")

###############################################################################
# Windows
# -------
# With 4 history points and 6 future points, a 30-point path has
# 30 - 4 - 6 = 20 windows at stride 1.

windows = extract_windows(trajs["arc"], n=4, m=6)
print(len(windows), "windows; first current tick:", windows[0].current.t)

###############################################################################
# CSV round trip
# --------------

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "paths.csv"
    write_trajectory_csv(trajs.values(), path)
    print(path.read_text().splitlines()[:3])
    print("read back", len(read_trajectory_csv(path)), "trajectories")

###############################################################################
# The default experiment dataset
# ------------------------------
# 200 mixed curved paths split 80/20 by trajectory.

train, val = build_dataset(DatasetSpec())
print(f"train windows: {len(train)}, validation windows: {len(val)}")
