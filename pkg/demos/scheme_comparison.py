"""
Relative targets versus residual-chain targets
==============================================

Train the same network twice on the same synthetic data, once with targets
relative to the current pose and once with residual-chain increments, and
compare validation loss measured on recovered absolute points.

The full default experiment (200 paths, 200 epochs) takes under a minute;
``EPOCHS`` below keeps this script short.
"""
import sys
from dataclasses import replace

from rchain.harness import ExperimentConfig, compare_schemes

EPOCHS = int(sys.argv[1]) if len(sys.argv) > 1 else 40

config = ExperimentConfig()
config = replace(config, sgd=replace(config.sgd, epochs=EPOCHS))

cmp = compare_schemes(replace(config, scheme="relative_eq4"), config, out_dir="demo_runs")

###############################################################################
# Per-epoch validation loss
# -------------------------

print(f"{'epoch':>5s} {'relative':>10s} {'residual':>10s}")
for epoch, base, cand in cmp.table()[:: max(1, EPOCHS // 10)]:
    print(f"{epoch:5d} {base:10.5f} {cand:10.5f}")

print(f"final ratio residual/relative: {cmp.ratio:.4f}")
print("loss curves written to demo_runs/")

###############################################################################
# Optional plot if matplotlib is around.

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    pass
else:
    epochs, base, cand = zip(*cmp.table())
    plt.plot(epochs, base, label="relative")
    plt.plot(epochs, cand, label="residual chain")
    plt.xlabel("epoch")
    plt.ylabel("validation loss (absolute)")
    plt.legend()
    plt.savefig("demo_runs/loss_comparison.png", dpi=120)
