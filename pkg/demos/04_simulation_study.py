"""
A small simulation study
========================

Repeat the fit on fresh samples and summarize the squared canonical
correlations per method. Results depend only on the configuration, so the
same seed reproduces the table exactly, however many workers run it.
"""

from swar.simulation import SimConfig, run_study

config = SimConfig(
    model="model2", n=300, p=6, H=[2, 5], K=2,
    methods=["sir", "swar", "swar_w"], repetitions=40, seed=11,
)
result = run_study(config, workers=1)

for cell in result.cells:
    print(f"{cell.method:>7} H={cell.H} direction {cell.direction:>3}: "
          f"mean {cell.mean:.3f} (sd {cell.sd:.3f})")

# With two slices SIR can find only one direction, so the second canonical
# correlation collapses.
print(result.get("sir", 2, "2"))

print(result.to_csv().splitlines()[0])
