import json

import numpy as np
import pytest

from curvature2k.campaign import (
    CLAIMS, PLANTED_SEED, THEOREM_CLAIMS, campaign, draw, identity_campaign, run_claim,
    sample_rng, shift_to_boundary,
)
from curvature2k.cones import cone_margins
from curvature2k.curvature_ops import load, random_curvature
from curvature2k.model_spaces import build, cp


def test_sample_rng_is_reproducible():
    a = sample_rng(3, "ricci", 5).standard_normal(4)
    assert np.array_equal(a, sample_rng(3, "ricci", 5).standard_normal(4))
    assert not np.array_equal(a, sample_rng(3, "pic", 5).standard_normal(4))


def test_shift_lands_on_boundary():
    r = random_curvature(5, 0)
    s = shift_to_boundary(r, 3.5, 0.4, jitter=0.0)
    assert cone_margins(s.second_kind.eigenvalues, 3.5, 0.4) == pytest.approx(0.0, abs=1e-12)
    s = shift_to_boundary(r, 3.5, 0.4, jitter=0.02)
    assert cone_margins(s.second_kind.eigenvalues, 3.5, 0.4) == pytest.approx(0.02, abs=1e-12)


@pytest.mark.parametrize("cid", THEOREM_CLAIMS)
def test_theorem_claims_hold_on_small_corpus(cid):
    claim = CLAIMS[cid]
    n = next(n for n in (4, 5, 6) if claim.valid(n))
    st = run_claim(claim, n, 40, seed=1)
    assert st.violations == 0
    assert st.samples == 40


def test_biased_generator_meets_hypothesis():
    st = run_claim(CLAIMS["ricci"], 5, 20, seed=0)
    assert st.hypothesis_met >= 10


def test_planted_claim_found_and_control_clean():
    st = run_claim(CLAIMS["planted-sectional"], 4, 1000, seed=PLANTED_SEED, stop_on_first=True)
    assert st.violations == 1 and st.samples <= 1000
    # control: CP^2 has positive sectional curvature, so it cannot witness the planted claim
    r = build(cp(2))
    claim = CLAIMS["planted-sectional"]
    params = claim.params(4, np.random.default_rng(0))
    assert claim.conclusion(r, params, np.random.default_rng(0)) > 0


def test_campaign_determinism_and_persistence(tmp_path):
    a = campaign(["planted-sectional"], [4], 10, 2, out_dir=tmp_path)
    b = campaign(["planted-sectional"], [4], 10, 2)
    assert a.to_json() == b.to_json()
    files = sorted(tmp_path.glob("*.json"))
    assert files and a.failures == 0
    r = load(files[0])
    meta = json.loads(files[0].read_text())["meta"]
    assert meta["claim"] == "planted-sectional" and r.n == 4


def test_identity_campaign():
    rep = identity_campaign([4, 5], 3, 0)
    assert rep.failures == 0
    assert "kahler-pair" in rep.checks[0]["worst"]


def test_draw_kahler_is_kahler():
    from curvature2k.kahler_tools import ComplexStructure, kahler_residual
    r, _ = draw(CLAIMS["kahler-flat"], 4, np.random.default_rng(0), biased=True)
    assert kahler_residual(r, ComplexStructure.standard(2)) < 1e-10


def test_invalid_dimension_rejected():
    with pytest.raises(ValueError):
        run_claim(CLAIMS["pic"], 5, 1, 0)
