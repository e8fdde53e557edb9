"""Train an ego team alongside sampled frozen partners.

Every episode, a random subset of seats runs the one learning policy and
the rest are filled by independent draws from a pretrained population;
with zero sampled seats this is plain self-play.  Here the population is
scripted stand-ins so the demo stays fast.

Run: python demos/04_train_mixed_seats.py   (about a minute)
"""

import numpy as np

from manycooks.layout import builtin_layout
from manycooks.policy import scripted_policy
from manycooks.population import Checkpoint, Population, assign_tiers
from manycooks.training import EgoTrainConfig, train_ego

layout = builtin_layout("narrow_line_2p")

population = Population(
    assign_tiers(
        [
            Checkpoint("stationary", scripted_policy("Stationary"), "scripted", 0, 0.0),
            Checkpoint("random", scripted_policy("Random"), "scripted", 0, 1.0),
            Checkpoint("cook-a", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
            Checkpoint("cook-b", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
        ]
    ),
    layout.name,
     2,
    seed=777,
)

cfg = EgoTrainConfig(
    layout_name=layout.name,
    num_agents=2,
    num_sampled=1,  # one seat per episode comes from the population
    total_episodes=800,
    seed=12,
    shaping=True,
    population_path="<in-memory>",
)

print(f"training on {layout.name}: 1 ego seat + 1 sampled partner per episode")
result = train_ego(
    layout,
    cfg,
    population=population,
    progress=lambda ep, ema, wall: print(
        f"  episode {ep} mean_reward_ema {ema:.2f} wallclock {wall:.0f}s"
    ),
)

rewards = np.array(result.episode_rewards)
print(f"\ncollective reward, first 100 episodes: {rewards[:100].mean():.1f}")
print(f"collective reward, last 100 episodes:  {rewards[-100:].mean():.1f}")
print(f"snapshots taken at episodes {[ck.training_episodes for ck in result.checkpoints]}")
print("partner checkpoints are frozen; only the ego seats ever learn")
