import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pcadrisk.baselines import RprParams
from pcadrisk.evaluation import (
    CalibrationResult, ConstantGroupWarning, EvaluationReport, OptimizerConfig, adjusted_r_square, benchmark,
    calibrate, cross_validate, detection_rate, evaluate, event_value, minmax_scale, objective, peak_value, rmse,
)
from pcadrisk.params import default_params, risk_function
from pcadrisk.pcad import SearchConfig
from pcadrisk.scenarios import (
    EventKind, MergingDesign, ObstacleDesign, merging_events, obstacle_events, replicate, synth_ratings,
)

EXACT = SearchConfig(method="exact")
PCAD_M = default_params("pcad", "merging")
MERGING = EventKind.MERGING_BRAKE
OBSTACLE = EventKind.OBSTACLE_POP


@pytest.mark.parametrize("values, expected", [([0, 5, 10], [0, 5, 10]), ([2, 4], [0, 10]), ([1, 2, 3], [0, 5, 10])])
def test_minmax_examples(values, expected):
    assert np.allclose(minmax_scale(values), expected)


def test_minmax_groups_and_constant_warning():
    out = minmax_scale([1, 3, 10, 20], ["a", "a", "b", "b"])
    assert np.allclose(out, [0, 10, 0, 10])
    with pytest.warns(ConstantGroupWarning):
        assert np.all(minmax_scale([4, 4, 4]) == 0)
    with pytest.raises(ValueError):
        minmax_scale([1, 2], ["a"])


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30))
def test_minmax_preserves_order(values):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConstantGroupWarning)
        out = minmax_scale(values)
    v = np.asarray(values)
    if np.ptp(v) > 0:
        assert out.min() == 0 and out.max() == pytest.approx(10)
        i, j = np.triu_indices(len(v), 1)
        assert np.all((v[i] < v[j]) <= (out[i] <= out[j]))
        assert v[np.argmax(out)] == v.max()


def test_rmse_examples():
    assert rmse([1, 2, 3], [1, 2, 3]) == 0
    assert rmse([1.5, 2.5], [1, 2]) == pytest.approx(0.5)
    assert rmse([0, 0], [3, 4]) == pytest.approx(3.5355, abs=1e-4)
    with pytest.raises(ValueError):
        rmse([1], [1, 2])
    with pytest.raises(ValueError):
        rmse([], [])


@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=20), st.randoms())
def test_rmse_permutation_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    a = rmse(*zip(*pairs))
    b = rmse(*zip(*shuffled))
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_event_value_reductions():
    decaying = [3.0, 2.0, 1.0]
    assert event_value(decaying, OBSTACLE) == 3.0
    assert event_value([0.0, 2.0, 1.0], OBSTACLE) == 0.0
    assert event_value([0.0, 2.0, 1.0], MERGING) == 2.0
    assert event_value([0.0, 0.0], MERGING) == 0.0
    assert peak_value([0.0, 2.0, 1.0]) == 2.0
    with pytest.raises(ValueError):
        event_value([], MERGING)


def test_adjusted_r_square():
    assert adjusted_r_square([1, 2, 3, 4], [3, 5, 7, 9]) == pytest.approx(1.0)
    assert adjusted_r_square([2, 2, 2, 2], [1, 4, 2, 3]) <= 0
    with pytest.raises(ValueError):
        adjusted_r_square([1, 2], [1, 2])


def _rated(events, model="pcad", profile="merging", noise=0.0, seed=0, scale=True):
    oracle = risk_function(model, default_params(model, profile), EXACT)
    return synth_ratings(events, oracle, noise, seed, scale=scale)


def _small_merging(reps=1):
    return merging_events(MergingDesign(gaps=(9, 17, 25), intensities=(-2, -5, -8), repetitions=reps))


def test_self_consistent_evaluation():
    events = _rated(_small_merging())
    report = evaluate("pcad", PCAD_M, events, search=EXACT)
    assert report.rmse_event < 1e-9 and report.rmse_peak < 1e-9
    assert report.adjusted_r_square == pytest.approx(1.0)
    assert report.detection_rate == 1.0 and report.n_events == 9
    assert report.time_per_step is None
    assert "RMSE_event" in report.table("pcad")


def test_report_validation():
    with pytest.raises(ValueError):
        EvaluationReport(0.0, 0.0, None, 1.5, 1)


def test_detection_rates():
    events = obstacle_events()
    pcad = risk_function("pcad", default_params("pcad", "obstacle"), EXACT)
    rpr = risk_function("rpr", default_params("rpr", "obstacle"))
    assert detection_rate(events, pcad) == 1.0
    assert detection_rate(events, rpr) < 0.5
    with pytest.raises(ValueError):
        detection_rate([], pcad)


def test_objective_prefers_generating_params():
    events = _rated(_small_merging())
    doubled = default_params("pcad", "merging")
    from dataclasses import replace
    doubled = replace(doubled, sigma_n_x=2 * doubled.sigma_n_x, sigma_n_y=2 * doubled.sigma_n_y,
                      sigma_s_x=2 * doubled.sigma_s_x, sigma_s_y=2 * doubled.sigma_s_y)
    assert objective("pcad", PCAD_M, events, search=EXACT) <= objective("pcad", doubled, events, search=EXACT)


def test_rpr_recovery_low_noise():
    true = default_params("rpr", "merging")
    events = _rated(replicate(merging_events(), 5), "rpr", noise=0.2, seed=5, scale=False)
    result = calibrate("rpr", events, RprParams(9.0, -2.5, -0.2),
                       OptimizerConfig(restarts=2, seed=0, scale=False))
    for name in ("c0", "c1", "c2"):
        assert getattr(result.params, name) == pytest.approx(getattr(true, name), rel=0.05)
    assert all(a >= b for a, b in zip(result.history, result.history[1:]))
    assert isinstance(result, CalibrationResult) and result.evaluations > 0


def test_calibrate_deterministic_and_validated():
    events = _rated(_small_merging(), "rpr", scale=False)
    cfg = OptimizerConfig(restarts=2, max_evaluations=60, seed=3, scale=False)
    a = calibrate("rpr", events, RprParams(10, -3, 0), cfg)
    b = calibrate("rpr", events, RprParams(10, -3, 0), cfg)
    assert a.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        calibrate("rpr", events, RprParams(), OptimizerConfig(free=("nope",)))
    with pytest.raises(ValueError):
        calibrate("rpr", _small_merging(), RprParams())


def test_cross_validation_patterns():
    train = _rated(_small_merging(), "pcad")
    test = _rated(obstacle_events(ObstacleDesign(distances=(15.0, 45.0))), "pcad", "obstacle")
    cfg = OptimizerConfig(free=("sigma_n_x",), restarts=1, max_evaluations=20)
    result, report = cross_validate("pcad", train, test, PCAD_M, cfg)
    assert report.detection_rate == 1.0
    rpr_train = _rated(_small_merging(), "rpr")
    _, rpr_report = cross_validate("rpr", rpr_train, test, default_params("rpr", "merging"),
                                   OptimizerConfig(restarts=1, max_evaluations=40))
    assert rpr_report.detection_rate < 0.5
    same, in_sample = cross_validate("rpr", rpr_train, rpr_train, default_params("rpr", "merging"),
                                     OptimizerConfig(restarts=1, max_evaluations=40))
    assert in_sample == evaluate("rpr", same.params, rpr_train)


def test_benchmark():
    events = _small_merging()[:3]
    ms = {m: benchmark(m, default_params(m, "merging"), events, 1) for m in ("rpr", "drf", "pcad")}
    assert ms["rpr"] < ms["drf"] and ms["rpr"] < ms["pcad"]
    with pytest.raises(ValueError):
        benchmark("rpr", default_params("rpr"), events, 0)
    timed = evaluate("rpr", default_params("rpr"), _rated(events, "rpr"), timing=True)
    assert timed.time_per_step > 0
