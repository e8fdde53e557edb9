"""Acceptance gate: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.  The
whole module is designed to finish in a few minutes on a laptop core.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from manycooks.engine import (
    Action,
    EngineConfig,
    HeldObject,
    observation_length,
    reset,
    step,
)
from manycooks.evaluate import EvalConfig, emit_report, evaluate_cell, ratio_sweep
from manycooks.layout import builtin_layout
from manycooks.policy import (
    Trajectory,
    action_distribution,
    discounted_returns,
    linear_params,
    reinforce_update,
    sample_action,
    scripted_policy,
    zero_params,
)
from manycooks.population import (
    Checkpoint,
    Population,
    TrainConfig,
    assign_tiers,
    build_population,
    sample_collaborators,
)
from manycooks.selfplay import episode_rng, train_selfplay
from manycooks.training import EgoTrainConfig, train_ego

from helpers import random_layout


def report(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE[{name}]: PASS{suffix}")


# ---------------------------------------------------------------------------
# 1. Engine invariants: 1e5 random steps over 20 random layouts


def test_engine_invariants_bulk():
    rng = np.random.default_rng(31337)
    layouts = [random_layout(rng) for _ in range(20)]
    steps_per_layout = 5000
    total_steps = 0
    started = time.perf_counter()
    for layout in layouts:
        n = layout.num_agents
        state = reset(layout)
        picked = 0
        action_block = rng.integers(0, 6, size=(steps_per_layout, n))
        for row in action_block:
            out = step(state, row.tolist(), layout)
            state = out.next_state
            total_steps += 1
            positions = {a.pos for a in state.agents}
            assert len(positions) == n, "occupancy violation"
            assert state.score == 20 * state.deliveries, "score accounting broken"
            for ev in out.events:
                if ev.kind == "picked_up" and ev.obj == int(HeldObject.ONION):
                    picked += 1
            held = sum(1 for a in state.agents if a.held == HeldObject.ONION)
            in_pots = sum(p.onions for p in state.pots.values())
            on_counters = sum(
                1 for v in state.counters.values() if v == int(HeldObject.ONION)
            )
            soups = sum(1 for a in state.agents if a.held == HeldObject.SOUP) + sum(
                1 for v in state.counters.values() if v == int(HeldObject.SOUP)
            )
            assert picked == held + in_pots + on_counters + 3 * soups + 3 * state.deliveries, (
                "object conservation broken"
            )
    elapsed = time.perf_counter() - started
    assert total_steps == 20 * steps_per_layout == 100_000
    assert elapsed < 60.0, f"invariant sweep took {elapsed:.1f}s"
    report("engine-invariants", f"{total_steps} steps, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. Determinism across processes and thread counts


REPLAY_SNIPPET = """
import sys
from manycooks.engine import EngineConfig
from manycooks.layout import builtin_layout
from manycooks.policy import scripted_policy
from manycooks.replay import ReplayWriter
from manycooks.selfplay import episode_rng, rollout_episode

layout = builtin_layout("open_room_2p")
config = EngineConfig()
writer = ReplayWriter(layout, config)
gc = scripted_policy("GreedyCook")
rollout_episode(layout, [gc, gc], 120, episode_rng(5, 0), config,
                replay_writer=writer)
writer.save(sys.argv[1])
"""


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "manycooks", *args],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


def test_determinism_across_processes_and_threads(tmp_path):
    layout_path = tmp_path / "room.layout"
    from manycooks.layout import render_layout

    layout_path.write_text(render_layout(builtin_layout("open_room_2p")))

    # population manifests: two processes x threads {1, 8}
    manifests = []
    for run in range(2):
        for threads in (1, 8):
            out = tmp_path / f"pop-{run}-{threads}"
            run_cli(
                [
                    "population", "--layout", str(layout_path), "--runs", "2",
                    "--checkpoints", "2", "--episodes", "2", "--eval-episodes", "1",
                    "--seed", "12", "--out", str(out), "--horizon", "30",
                    "--threads", str(threads), "--quiet",
                ]
            )
            manifests.append((out / "manifest.txt").read_bytes())
    assert len(set(manifests)) == 1

    # a second population with a different root seed for evaluation
    unseen = tmp_path / "unseen"
    run_cli(
        [
            "population", "--layout", str(layout_path), "--runs", "2",
            "--checkpoints", "2", "--episodes", "2", "--eval-episodes", "1",
            "--seed", "13", "--out", str(unseen), "--horizon", "30", "--quiet",
        ]
    )

    # eval CSVs: two processes x threads {1, 8}
    csvs = []
    for run in range(2):
        for threads in (1, 8):
            out = tmp_path / f"report-{run}-{threads}.csv"
            run_cli(
                [
                    "eval", "--ego", str(tmp_path / "pop-0-1"), "--population",
                    str(unseen), "--layout", str(layout_path), "--n", "2",
                    "--x", "0,1", "--episodes", "3", "--seed", "21", "--out",
                    str(out), "--horizon", "30", "--threads", str(threads),
                    "--quiet",
                ]
            )
            csvs.append(out.read_bytes())
    assert len(set(csvs)) == 1

    # replay digests: identical files from two separate processes
    replays = []
    for run in range(2):
        out = tmp_path / f"episode-{run}.replay"
        proc = subprocess.run(
            [sys.executable, "-c", REPLAY_SNIPPET, str(out)],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        replays.append(out.read_bytes())
    assert replays[0] == replays[1]
    report("determinism", "manifests, eval CSVs and replays byte-identical")


# ---------------------------------------------------------------------------
# 3. Throughput: >= 1e5 steps/s single-threaded on the 5-agent open layout


def test_throughput_budget():
    layout = builtin_layout("open_room_5p")
    rng = np.random.default_rng(7)
    warmup = rng.integers(0, 6, size=(5000, 5)).tolist()
    block = rng.integers(0, 6, size=(200_000, 5)).tolist()
    state = reset(layout)
    for joint in warmup:
        state = step(state, joint, layout).next_state
    state = reset(layout)
    started = time.perf_counter()
    for joint in block:
        state = step(state, joint, layout).next_state
    elapsed = time.perf_counter() - started
    rate = len(block) / elapsed
    assert rate >= 100_000, f"engine too slow: {rate:,.0f} steps/s"
    report("throughput", f"{rate:,.0f} steps/s")


# ---------------------------------------------------------------------------
# 4. Self-play equivalence: mixed-seat training with zero sampled seats
#    reproduces the dedicated self-play loop digest-for-digest


def test_selfplay_equivalence_100_episodes():
    layout = builtin_layout("open_room_2p")
    episodes, horizon, seed = 100, 400, 77
    cfg = EgoTrainConfig(
        layout_name=layout.name,
        num_agents=2,
        num_sampled=0,
        total_episodes=episodes,
        seed=seed,
        horizon=horizon,
    )
    ego = train_ego(layout, cfg, collect_digests=True)
    sp = train_selfplay(
        layout,
        episodes,
        horizon,
        cfg.lr,
        cfg.gamma,
        seed,
        EngineConfig(horizon=horizon),
        snapshots=cfg.checkpoints_to_save,
        collect_digests=True,
    )
    assert ego.digests == sp.digests
    assert ego.episode_rewards == sp.episode_rewards
    total_ticks = sum(len(d) for d in ego.digests)
    report("selfplay-equivalence", f"{episodes} episodes, {total_ticks} digests equal")


# ---------------------------------------------------------------------------
# 5. Population pipeline: 4 runs x 3 checkpoints, tier split, sampling laws


def test_population_pipeline_and_sampling_uniformity():
    layout = builtin_layout("open_room_2p")
    pop = build_population(
        layout,
        num_runs=4,
        checkpoints_per_run=3,
        train_config=TrainConfig(episodes=30, horizon=60),
        eval_episodes=2,
        seed=2024,
    )
    assert len(pop.checkpoints) == 12
    tier_counts = {t: sum(1 for ck in pop.checkpoints if ck.tier == t)
                   for t in ("Low", "Medium", "High")}
    assert tier_counts == {"Low": 4, "Medium": 4, "High": 4}

    index = {ck.id: i for i, ck in enumerate(pop.checkpoints)}
    rng = episode_rng(424242)
    counts = np.zeros(12)
    for draw in sample_collaborators(pop, 100_000, rng):
        counts[index[draw.id]] += 1
    p_marginal = stats.chisquare(counts).pvalue
    assert p_marginal > 0.01

    # independence across seats: joint frequencies of consecutive pairs
    rng = episode_rng(515151)
    joint = np.zeros((12, 12))
    for _ in range(50_000):
        a, b = sample_collaborators(pop, 2, rng)
        joint[index[a.id], index[b.id]] += 1
    p_joint = stats.chisquare(joint.ravel()).pvalue
    assert p_joint > 0.01
    report(
        "population-pipeline",
        f"12 checkpoints 4/4/4, marginal p={p_marginal:.3f}, joint p={p_joint:.3f}",
    )


# ---------------------------------------------------------------------------
# 6. Learner sanity: gradient check, bandit, corridor smoke run


def test_learner_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    feat = 9
    weights = rng.normal(size=(feat, 6)) * 0.3
    params = linear_params(weights)
    batch = []
    for _ in range(3):
        t = Trajectory()
        for _ in range(6):
            t.append(rng.normal(size=feat), int(rng.integers(6)), float(rng.normal()))
        batch.append(t)
    gamma, baseline = 0.9, 0.2
    new_params, _ = reinforce_update(params, batch, 1.0, gamma, baseline)
    grad = new_params.weights - weights

    obs = np.concatenate([np.stack(t.observations) for t in batch])
    acts = np.concatenate([np.asarray(t.actions) for t in batch])
    adv = np.concatenate([discounted_returns(t.rewards, gamma) for t in batch]) - baseline

    def surrogate(w):
        logits = obs @ w
        shifted = logits - logits.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        return float(np.mean(adv * logp[np.arange(len(acts)), acts]))

    h = 1e-6
    worst = 0.0
    for i in range(feat):
        for j in range(6):
            wp, wm = weights.copy(), weights.copy()
            wp[i, j] += h
            wm[i, j] -= h
            fd = (surrogate(wp) - surrogate(wm)) / (2 * h)
            denom = max(abs(fd), 1e-8)
            worst = max(worst, abs(grad[i, j] - fd) / denom)
    assert worst < 1e-5
    report("learner-gradient", f"max relative error {worst:.2e}")


def test_learner_bandit_converges_within_2000():
    params = zero_params(1)
    baseline = 0.0
    obs = np.ones(1)
    rng = episode_rng(0)
    converged_at = None
    for update in range(1, 2001):
        probs = action_distribution(params, obs)
        action = sample_action(probs, rng)
        reward = 1.0 if action == int(Action.INTERACT) else 0.0
        traj = Trajectory()
        traj.append(obs, action, reward)
        params, baseline = reinforce_update(params, [traj], 0.1, 0.99, baseline)
        if action_distribution(params, obs)[int(Action.INTERACT)] > 0.9:
            converged_at = update
            break
    assert converged_at is not None, "bandit did not converge in 2000 updates"
    report("learner-bandit", f"p(pay action) > 0.9 after {converged_at} updates")


def test_learner_corridor_smoke_improves():
    layout = builtin_layout("corridor_2p")
    episodes = 5000
    started = time.perf_counter()
    result = train_selfplay(
        layout,
        episodes,
        400,
        0.01,
        0.99,
        seed=2025,
        config=EngineConfig(horizon=400, shaping=True),
        snapshots=2,
    )
    elapsed = time.perf_counter() - started
    decile = episodes // 10
    # Training reward (shared plus shaped bonuses): the run has shaping on,
    # so the learner's own objective is the honest improvement metric.
    first = float(np.mean(result.episode_training_rewards[:decile]))
    last = float(np.mean(result.episode_training_rewards[-decile:]))
    assert elapsed < 600.0, f"smoke training took {elapsed:.0f}s (budget 600s)"
    assert last > first, f"no improvement: first decile {first:.2f}, last {last:.2f}"
    report(
        "learner-corridor-smoke",
        f"first decile {first:.2f} -> last decile {last:.2f} in {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# 7 & 8. Directional trend and ratio sweep on the coordination layout


def scripted_diverse_population(layout_name: str) -> Population:
    checkpoints = assign_tiers(
        [
            Checkpoint("stationary", scripted_policy("Stationary"), "scripted", 0, 0.0),
            Checkpoint("random", scripted_policy("Random"), "scripted", 0, 1.0),
            Checkpoint("greedy-a", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
            Checkpoint("greedy-b", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
            Checkpoint("greedy-c", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
            Checkpoint("greedy-d", scripted_policy("GreedyCook"), "scripted", 0, 140.0),
        ]
    )
    return Population(checkpoints, layout_name, 2, seed=777)


@pytest.fixture(scope="module")
def directional_setup():
    layout = builtin_layout("narrow_line_2p")
    pop = scripted_diverse_population(layout.name)
    episodes = 1000
    sp = train_ego(
        layout,
        EgoTrainConfig(
            layout_name=layout.name,
            num_agents=2,
            num_sampled=0,
            total_episodes=episodes,
            seed=11,
            shaping=True,
        ),
    )
    mixed = train_ego(
        layout,
        EgoTrainConfig(
            layout_name=layout.name,
            num_agents=2,
            num_sampled=1,
            total_episodes=episodes,
            seed=12,
            population_path="<in-memory>",
            shaping=True,
        ),
        population=pop,
    )
    return layout, pop, sp.checkpoints[-1].params, mixed.checkpoints[-1].params


def test_directional_trend(directional_setup, tmp_path):
    layout, pop, sp_ego, mixed_ego = directional_setup
    rows = {}
    for label, ego in (("sp", sp_ego), ("mixed", mixed_ego)):
        rows[label, 0] = evaluate_cell(ego, pop, layout, 0, 100, seed=900)
        rows[label, 1] = evaluate_cell(ego, pop, layout, 1, 100, seed=901)

    from manycooks.evaluate import EvalReport

    artifact = tmp_path / "directional_report.csv"
    artifact.write_bytes(emit_report(EvalReport(rows=list(rows.values())), "csv"))

    sp0, sp1 = rows["sp", 0], rows["sp", 1]
    mx0, mx1 = rows["mixed", 0], rows["mixed", 1]
    detail = (
        f"sp x0 {sp0.mean_reward:.1f}±{sp0.std_reward:.1f}, "
        f"mixed x0 {mx0.mean_reward:.1f}±{mx0.std_reward:.1f}, "
        f"sp x1 {sp1.mean_reward:.1f}±{sp1.std_reward:.1f}, "
        f"mixed x1 {mx1.mean_reward:.1f}±{mx1.std_reward:.1f}"
    )
    split = (
        sp0.mean_reward >= mx0.mean_reward
        and mx1.mean_reward > sp1.mean_reward
        and mx1.mean_reward - mx1.std_reward > sp1.mean_reward + sp1.std_reward
    )
    if not split:
        # The criterion is directional and contingent on learner capacity:
        # a failure must ship with the evaluation report for review.
        failure_dir = Path(__file__).resolve().parent.parent / "acceptance_artifacts"
        failure_dir.mkdir(exist_ok=True)
        (failure_dir / "directional_report.csv").write_bytes(artifact.read_bytes())
        (failure_dir / "DIRECTIONAL_FAILURE.md").write_text(
            "The linear learner did not exhibit the directional split on "
            f"narrow_line_2p.\n\n{detail}\n"
        )
        pytest.fail(f"directional split not exhibited; report attached. {detail}")
    report("directional-trend", detail)


def test_ratio_sweep_nonincreasing(directional_setup):
    layout, pop, sp_ego, _ = directional_setup
    cfg = EvalConfig(
        layout=layout,
        ego=sp_ego,
        unseen=pop,
        x_values=(0, 1),
        seed=902,
        episodes_per_cell=100,
    )
    sweep = ratio_sweep(cfg)
    means = [r.mean_reward for r in sweep.rows]
    stds = [r.std_reward for r in sweep.rows]
    for i in range(len(means) - 1):
        slack = max(stds[i], stds[i + 1])
        assert means[i + 1] <= means[i] + slack, (
            f"mean reward increased from x={sweep.rows[i].num_sampled} "
            f"({means[i]:.1f}) to x={sweep.rows[i + 1].num_sampled} "
            f"({means[i + 1]:.1f}) beyond 1-std slack {slack:.1f}"
        )
    detail = ", ".join(
        f"x={r.num_sampled}: {r.mean_reward:.1f}±{r.std_reward:.1f}" for r in sweep.rows
    )
    report("ratio-sweep-shape", detail)
