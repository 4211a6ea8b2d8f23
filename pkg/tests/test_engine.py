from dataclasses import replace

import numpy as np
import pytest

from ltpf.allocators import POLICIES
from ltpf.config import QoSProfile, check_allocation, validate_config
from ltpf.engine import (calibrate_qos_profile, gain_sequence_digest, run_experiment,
                         run_sweep)
from ltpf.errors import BadPartition, BadWindow, InstanceTooLarge
from ltpf.phy import frame_rates

from conftest import small_config

SMALL_POLICIES = POLICIES  # 3 users x 4 subcarriers keeps pf-optimal at 81 candidates


@pytest.mark.parametrize("policy", SMALL_POLICIES)
def test_single_user_owns_everything(policy):
    cfg = small_config(num_users=1, num_subcarriers=5, window_frames=3, num_windows=2)
    res = run_experiment(cfg, policy=policy, seed=4)
    assert np.all(res.allocations == 0)
    for w, rep in enumerate(res.window_reports):
        expected = res.per_frame_rates[0, 3 * w:3 * w + 3].mean()
        assert rep.mean_rate_bps[0] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("policy", SMALL_POLICIES)
def test_determinism(policy):
    cfg = small_config()
    a = run_experiment(cfg, policy=policy, seed=11)
    b = run_experiment(cfg, policy=policy, seed=11)
    assert np.array_equal(a.per_frame_rates, b.per_frame_rates)
    assert np.array_equal(a.allocations, b.allocations)
    assert np.array_equal(a.fallback_frames, b.fallback_frames)
    assert a.summary() == b.summary()


@pytest.mark.parametrize("policy", SMALL_POLICIES)
def test_result_shapes_conservation_and_window_means(policy):
    cfg = small_config(window_frames=4, num_windows=5)
    res = run_experiment(cfg, policy=policy, seed=2, record_gains=True)
    k, n, t = 3, 4, 20
    assert res.per_frame_rates.shape == (k, t)
    assert res.allocations.shape == (t, n)
    assert len(res.window_reports) == 5
    for f in range(t):
        check_allocation(res.allocations[f], k, n)
        np.testing.assert_array_equal(
            res.per_frame_rates[:, f],
            frame_rates(res.gain_trace[f], res.allocations[f], cfg.rate_model))
    for w, rep in enumerate(res.window_reports):
        cols = res.per_frame_rates[:, 4 * w:4 * w + 4]
        np.testing.assert_allclose(rep.mean_rate_bps, cols.mean(axis=1), rtol=1e-9)
        owned = np.bincount(res.allocations[4 * w:4 * w + 4].ravel(), minlength=k)
        assert owned.sum() == n * 4


def test_policies_see_identical_channel():
    cfg = small_config(window_frames=2, num_windows=4)
    traces = [run_experiment(cfg, policy=p, seed=5, record_gains=True).gain_trace
              for p in POLICIES]
    for tr in traces[1:]:
        assert all(np.array_equal(a, b) for a, b in zip(traces[0], tr))
    digest = gain_sequence_digest(cfg, seed=5)
    assert digest == gain_sequence_digest(cfg, seed=5)
    assert digest != gain_sequence_digest(cfg, seed=6)


def test_max_rate_dominates_every_frame():
    cfg = small_config(num_users=4, num_subcarriers=5, window_frames=5, num_windows=4)
    best = run_experiment(cfg, policy="max-rate", seed=9).per_frame_rates.sum(axis=0)
    for p in POLICIES:
        other = run_experiment(cfg, policy=p, seed=9).per_frame_rates.sum(axis=0)
        assert np.all(best >= other * (1 - 1e-12))


def test_ltpf_reports_fallbacks_when_targets_are_tiny():
    cfg = validate_config(small_config().config, QoSProfile([1.0, 1.0, 1.0]))
    res = run_experiment(cfg, policy="ltpf", seed=0)
    # frame 0 is the initial allocation, every later frame sees satisfied users
    assert res.fallback_frames[0] == False  # noqa: E712
    assert res.fallback_frames[1:].all()
    assert res.summary()["fallback_events"] == res.per_frame_rates.shape[1] - 1


def test_pf_optimal_guards():
    with pytest.raises(InstanceTooLarge):
        run_experiment(small_config(num_users=20, num_subcarriers=72), policy="pf-optimal")
    with pytest.raises(BadWindow):
        run_experiment(small_config(pf_window=1), policy="pf-optimal")
    with pytest.raises(ValueError):
        run_experiment(small_config(), policy="nope")


def test_summary_keys():
    s = run_experiment(small_config(), policy="ltpf", seed=1).summary()
    for key in ("policy", "window_frames", "seed", "qos_deviation", "jain_index",
                "log_pf_objective", "fallback_events", "profile_correlation"):
        assert key in s


def test_sweep_degenerate_matches_run():
    cfg = small_config()
    [a] = run_sweep(cfg, policies=["pf-greedy"], m_values=[2], seeds=[3])
    b = run_experiment(cfg, policy="pf-greedy", seed=3)
    assert np.array_equal(a.per_frame_rates, b.per_frame_rates)


def test_sweep_distinct_seeds_and_frame_budget():
    cfg = small_config()
    res = run_sweep(cfg, policies=["ltpf"], m_values=[1, 4, 10], seeds=[1, 2], total_frames=20)
    assert [(r.window_frames, r.seed) for r in res] == [(1, 1), (1, 2), (4, 1), (4, 2), (10, 1), (10, 2)]
    assert all(r.per_frame_rates.shape[1] == 20 for r in res)
    assert [len(r.window_reports) for r in res[::2]] == [20, 5, 2]
    assert not np.array_equal(res[0].per_frame_rates, res[1].per_frame_rates)
    with pytest.raises(BadPartition):
        run_sweep(cfg, m_values=[3], seeds=[1], total_frames=20)


def test_sweep_workers_match_serial():
    cfg = small_config()
    kw = dict(policies=["ltpf", "max-rate"], m_values=[2], seeds=[1, 2])
    serial = run_sweep(cfg, **kw)
    parallel = run_sweep(cfg, workers=2, **kw)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.per_frame_rates, b.per_frame_rates)


def test_calibrated_profile_spacing():
    cfg = small_config(num_users=4)
    q = calibrate_qos_profile(cfg, seed=0, frames=20)
    g = q.as_array()
    assert g[-1] / g[0] == pytest.approx(4.0, rel=1e-12)
    np.testing.assert_allclose(np.diff(g), np.diff(g)[0], rtol=1e-9)
    share = run_experiment(replace(cfg.config, window_frames=1, num_windows=20),
                           QoSProfile([1.0] * 4), "max-rate", 0).per_frame_rates.sum(axis=0).mean() / 4
    assert g.mean() == pytest.approx(1.25 * share, rel=1e-12)


def test_window_size_trend_few_seeds(table1):
    """Deviation shrinks from M=1 to M=10 on the default profile (10 seeds)."""
    res = run_sweep(table1, policies=["ltpf"], m_values=[1, 10], seeds=range(1, 11),
                    total_frames=200)
    dev = {m: np.median([r.mean_qos_deviation() for r in res if r.window_frames == m])
           for m in (1, 10)}
    assert dev[10] < dev[1]
