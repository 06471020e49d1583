import math

import pytest

import dmsgd


def test_mixing_matrix_spectrum():
    w = dmsgd.MixingMatrix.uniform(4)
    assert w.lambda0 <= 1e-12
    ring = dmsgd.MixingMatrix.gossip_ring(4, 0.25)
    assert ring.lambda0 == pytest.approx(0.5)
    assert dmsgd.spectral_gap(ring) == pytest.approx(0.5)
    with pytest.raises(dmsgd.SpectralViolation):
        dmsgd.MixingMatrix.identity(3)


def test_comm_round_count():
    assert dmsgd.count_comm_rounds(1, 10, 3) == 3
    assert dmsgd.count_comm_rounds(4, 9, 3) == 2


def test_schedules():
    s = dmsgd.StepSchedule.power_law(0.1, 0.6)
    assert s.step_at(1000) == pytest.approx(0.1 * 1000 ** -0.6)
    valid, _ = s.robbins_monro_valid()
    assert valid
    bad_valid, _ = dmsgd.StepSchedule.power_law(0.1, 0.5).robbins_monro_valid()
    assert not bad_valid
    assert dmsgd.StepSchedule.constant(0.1).partial_sum(10) == pytest.approx(1.0)


def test_objective_and_run():
    obj = dmsgd.ObjectiveSpec.quadratic_consensus(3, 4, 0.5, 7, 1.0)
    assert obj.workers == 4
    star = obj.theta_star
    assert max(abs(v) for v in obj.grad_mean(star)) <= 1e-8

    rec = dmsgd.run(
        mixing=dmsgd.MixingMatrix.uniform(4),
        period_k=2,
        objective=obj,
        noise_kind="gaussian",
        noise_scale=0.1,
        schedule=dmsgd.StepSchedule.power_law(0.3, 0.6),
        alpha=0.5,
        horizon=2000,
        seed=42,
        record_every=100,
    )
    assert rec["n"][0] == 1
    assert rec["n"][-1] == 2000
    assert rec["grad_norm_sq"][-1] < rec["grad_norm_sq"][0]

    rec2 = dmsgd.run(
        mixing=dmsgd.MixingMatrix.uniform(4),
        period_k=2,
        objective=obj,
        noise_kind="gaussian",
        noise_scale=0.1,
        schedule=dmsgd.StepSchedule.power_law(0.3, 0.6),
        alpha=0.5,
        horizon=2000,
        seed=42,
        record_every=100,
    )
    assert rec["grad_norm_sq"] == rec2["grad_norm_sq"]


def test_exhaustive_expectation():
    obj = dmsgd.ObjectiveSpec.quadratic_consensus(1, 2, 0.5, 3, 1.0)
    exact = dmsgd.exhaustive_expectation(
        mixing=dmsgd.MixingMatrix.uniform(2),
        period_k=1,
        objective=obj,
        noise_scale=0.2,
        schedule=dmsgd.StepSchedule.constant(0.1),
        alpha=0.5,
        horizon=6,
    )
    assert len(exact) == 6
    assert all(math.isfinite(v) and v >= 0 for v in exact)


def test_campaign_json():
    cfg = """{
      "topology": {"kind": "uniform", "m": 3},
      "objective": {"family": "quadratic_consensus", "N": 2, "m": 3,
                    "heterogeneity": 0.5,
                    "noise": {"kind": "gaussian", "scale": 0.1},
                    "dataset_seed": 5},
      "schedule": {"family": "power_law", "c": 0.3, "p": 0.6,
                   "regime": "convergence"},
      "campaign": {"alpha": [0.5], "seeds": 3, "horizon": 2000,
                   "record_every": 50, "master_seed": 11}
    }"""
    rep = dmsgd.validate_campaign_from_json(cfg)
    assert rep["ok"]
    out = dmsgd.run_campaign_from_json(cfg)
    assert any("lims-decay" in line for line in out["report_lines"])
