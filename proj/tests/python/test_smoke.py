import math
from pathlib import Path

import numpy as np
import pytest

import csim

CONFIGS = Path(__file__).resolve().parents[2] / "configs"
COARSE = (CONFIGS / "scenario_iv.cfg").read_text().replace("target_dx_in_pi = 1/256", "target_dx_in_pi = 1/32")


def test_anchor_event():
    eta, xi = csim.to_alt(math.pi / 2, 0.0, 0.5)
    assert eta == pytest.approx((math.pi - 1) / 2, abs=1e-12)
    assert xi == pytest.approx(0.0, abs=1e-12)


def test_round_trip():
    for t, x in [(0.3, -1.0), (2.0, 0.5), (math.pi / 2, -math.pi)]:
        back = csim.from_alt(*csim.to_alt(t, x, 0.9), 0.9)
        assert back == pytest.approx((t, x), abs=1e-12)


def test_collapse_sets_detector_block():
    sigma = np.diag([0.9, 0.6, 0.5, 0.5, 0.7, 0.8]).astype(float)
    sigma[0, 4] = sigma[4, 0] = 0.1
    post = csim.collapse(sigma, 1, 2, 0, 2.0)
    assert post[0, 0] == pytest.approx(1.0)
    assert post[1, 1] == pytest.approx(0.25)
    assert np.allclose(post[0, 2:], 0.0) and np.allclose(post[1, 2:], 0.0)


def test_bad_config_raises():
    with pytest.raises(csim.ConfigError, match="unknown key"):
        csim.load_scenario(COARSE.replace("coupling = 0.4", "coupling_strength = 0.4"))


def test_coarse_frame_comparison():
    rep = csim.compare_frames(COARSE)
    assert rep["corr_t"].shape == rep["corr_eta"].shape
    assert len(rep["labels"]) == rep["corr_t"].shape[0]
    assert 0.0 < rep["frobenius_relative"] < 0.2


def test_verify_and_fault():
    assert csim.verify()["all_pass"]
    assert not csim.verify(inject_fault=True)["all_pass"]
