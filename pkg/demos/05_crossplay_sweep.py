"""Cross-play evaluation: sweep the number of unseen seats and watch the
collective reward as the team fills with strangers.

The ego here is the scripted cook itself, so the sweep runs in seconds;
swap in a trained checkpoint directory for the real experiment (see the
eval subcommand of the CLI).

Run: python demos/05_crossplay_sweep.py
"""

from manycooks.evaluate import EvalConfig, emit_report, ratio_sweep
from manycooks.layout import builtin_layout
from manycooks.policy import scripted_policy
from manycooks.population import Checkpoint, Population, assign_tiers

layout = builtin_layout("open_room_5p")

unseen = Population(
    assign_tiers(
        [
            Checkpoint("stationary", scripted_policy("Stationary"), "scripted", 0, 0.0),
            Checkpoint("random", scripted_policy("Random"), "scripted", 0, 1.0),
            Checkpoint("cook", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
        ]
    ),
    layout.name,
    5,
    seed=999,
)

cfg = EvalConfig(
    layout=layout,
    ego=scripted_policy("GreedyCook"),
    unseen=unseen,
    x_values=(0, 1, 3, 4),
    seed=7,
    episodes_per_cell=20,
)

report = ratio_sweep(cfg, threads=2)
print("unseen-to-total sweep on", layout.name)
for row in report.rows:
    bar = "#" * int(row.mean_reward / 4)
    print(
        f"  x={row.num_sampled} ratio {row.ratio:.4f} "
        f"mean {row.mean_reward:7.2f} +- {row.std_reward:6.2f}  {bar}"
    )

print()
print("csv form:")
print(emit_report(report, "csv").decode(), end="")
