import json

import pytest

from tightriesz.campaign import C_STAR_FAMILIES, CampaignConfig, CampaignError, evaluate_instance, run_campaign


def test_empty_campaign():
    rep = run_campaign(CampaignConfig("diagonal-in-full", 0))
    assert rep.records == [] and rep.violations == [] and rep.ok
    assert rep.counts["instances"] == 0


def test_invalid_configs():
    with pytest.raises(CampaignError):
        CampaignConfig("nope", 1)
    with pytest.raises(CampaignError):
        CampaignConfig("linf-in-linf", -1)
    with pytest.raises(CampaignError):
        CampaignConfig("linf-in-linf", 1, level=0)
    with pytest.raises(CampaignError):
        CampaignConfig("linf-in-linf", 1, nk=(0, 2))


def test_namioka_phelps_records_the_classic_violation():
    rep = run_campaign(CampaignConfig("namioka-phelps", 8, seed=0))
    assert 0 in rep.violations
    assert rep.records[0].note
    assert rep.ok  # violations are expected for this family


@pytest.mark.parametrize("family", C_STAR_FAMILIES)
def test_c_star_families_small_run(family):
    rep = run_campaign(CampaignConfig(family, 6, seed=3, nk=(2, 3)))
    assert rep.ok and not rep.violations
    assert all(r.expectation_replay for r in rep.records)
    assert all(r.generator_replay for r in rep.records)
    assert rep.counts["ra_infeasible"] == 0


def test_counts_are_consistent():
    rep = run_campaign(CampaignConfig("namioka-phelps", 6, seed=1))
    c = rep.counts
    assert c["violations"] == len(rep.violations) <= c["instances"]
    assert c["small_feasible"] + c["small_infeasible"] <= c["instances"]
    assert set(rep.violations) <= {r.index for r in rep.records}


def test_determinism_and_parallel_order():
    cfg = CampaignConfig("block-diagonal-in-full", 4, seed=42)
    a = run_campaign(cfg).to_json()
    b = run_campaign(cfg).to_json()
    assert a == b
    par = run_campaign(CampaignConfig("block-diagonal-in-full", 4, seed=42, workers=2)).to_json()
    assert json.loads(par) == json.loads(a)
    assert "runtime" not in a


def test_instances_are_independent_of_count():
    cfg5 = CampaignConfig("linf-in-linf", 5, seed=7)
    cfg3 = CampaignConfig("linf-in-linf", 3, seed=7)
    assert evaluate_instance(cfg5, 2) == evaluate_instance(cfg3, 2)


def test_level_two_small_run():
    rep = run_campaign(CampaignConfig("diagonal-in-full", 2, seed=5, level=2, riesz_arveson=False))
    assert rep.ok and not rep.violations
    assert all(r.ambient[0] % 2 == 0 for r in rep.records)
