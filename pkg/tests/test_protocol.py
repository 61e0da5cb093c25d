import math

import numpy as np
import pytest

from oracles import binom_3sigma, device_bound_grid, device_success_enumeration
from qscsim.collapse import CollapseModel, CollapseParams
from qscsim.config import parse_config
from qscsim.observer import (
    ObserverParams,
    Percept,
    PerceptionReport,
    PerceptionScenario,
    ScenarioTag,
)
from qscsim.protocol import (
    DecisionRule,
    ExperimentSummary,
    RuleKind,
    classify_batch,
    classify_single,
    device_trial,
    optimal_device_bound,
    run_experiment,
    run_trial,
    trial_rng,
)
from qscsim.states import Branch, InputKind
from qscsim.stats import RateEstimate

QUIET = ObserverParams(t_p=0.001, jitter_sigma=0.0, resolution=0.01)
POST = PerceptionScenario(tag=ScenarioTag.POST_COLLAPSE_ONLY)
FIXED_C1 = PerceptionScenario(tag=ScenarioTag.FIXED_C1)
TIMING = DecisionRule(kind=RuleKind.TIMING_THRESHOLD, threshold_time=0.05)
CHANGE = DecisionRule(kind=RuleKind.CHANGE_DETECTION)


def quiet_report(time, changed=False):
    return PerceptionReport(
        first_percept_time=time,
        first_percept=Percept.C1,
        change_detected=changed,
        change_time=time + 1.0 if changed else None,
        final_percept=Percept.C2 if changed else Percept.C1,
    )


class TestDecisionRule:
    def test_validation(self):
        with pytest.raises(ValueError):
            DecisionRule(kind=RuleKind.TIMING_THRESHOLD)
        with pytest.raises(ValueError):
            DecisionRule(kind=RuleKind.COMBINED, threshold_time=-1.0)
        with pytest.raises(ValueError):
            DecisionRule(kind=RuleKind.CHANGE_DETECTION, batch_n=0)
        assert DecisionRule(kind=RuleKind.CHANGE_DETECTION).threshold_time is None


class TestClassifySingle:
    def test_timing_threshold(self):
        assert classify_single(quiet_report(0.001), TIMING) is InputKind.DEFINITE
        assert classify_single(quiet_report(180.001), TIMING) is InputKind.SUPERPOSITION

    def test_change_detection(self):
        assert classify_single(quiet_report(0.001, changed=True), CHANGE) is InputKind.SUPERPOSITION
        assert classify_single(quiet_report(0.001), CHANGE) is InputKind.DEFINITE

    def test_combined_fires_on_either(self):
        rule = DecisionRule(kind=RuleKind.COMBINED, threshold_time=0.05)
        assert classify_single(quiet_report(0.001, changed=True), rule) is InputKind.SUPERPOSITION
        assert classify_single(quiet_report(0.1), rule) is InputKind.SUPERPOSITION
        assert classify_single(quiet_report(0.001), rule) is InputKind.DEFINITE

    def test_no_change_guess_honored(self):
        rule = DecisionRule(
            kind=RuleKind.CHANGE_DETECTION, no_change_guess=InputKind.SUPERPOSITION
        )
        assert classify_single(quiet_report(0.001), rule) is InputKind.SUPERPOSITION


class TestClassifyBatch:
    def test_batch_of_one_matches_single(self):
        rule = DecisionRule(kind=RuleKind.TIMING_THRESHOLD, threshold_time=0.05, batch_n=1)
        for time in (0.001, 0.2):
            report = quiet_report(time)
            assert classify_batch([report], rule) is classify_single(report, rule)

    def test_any_positive_fires(self):
        rule = DecisionRule(kind=RuleKind.CHANGE_DETECTION, batch_n=3)
        quiet = [quiet_report(0.001)] * 2
        assert classify_batch(quiet + [quiet_report(0.001, changed=True)], rule) is InputKind.SUPERPOSITION
        assert classify_batch(quiet + [quiet_report(0.001)], rule) is InputKind.DEFINITE

    def test_size_validation(self):
        rule = DecisionRule(kind=RuleKind.CHANGE_DETECTION, batch_n=2)
        with pytest.raises(ValueError):
            classify_batch([], rule)
        with pytest.raises(ValueError):
            classify_batch([quiet_report(0.001)], rule)


class TestRunTrial:
    def test_definite_trial_correct(self):
        params = CollapseParams(model=CollapseModel.JUMP_EXPONENTIAL, t_c_mean=180.0)
        record = run_trial(
            InputKind.DEFINITE, 1.0, params, QUIET, POST, TIMING, np.random.default_rng(0)
        )
        assert record.collapse is None
        assert record.guess is InputKind.DEFINITE
        assert record.correct

    def test_superposition_timing_correct(self):
        params = CollapseParams(model=CollapseModel.DETERMINISTIC_TIME, t_c_mean=2.0)
        record = run_trial(
            InputKind.SUPERPOSITION, 0.5, params, QUIET, POST, TIMING, np.random.default_rng(0)
        )
        assert record.collapse.time == 2.0
        assert record.report.first_percept_time == 2.001
        assert record.guess is InputKind.SUPERPOSITION
        assert record.correct

    def test_half_blind_case(self):
        # Fixed pre-percept C1 plus outcome B1: no change, so the change
        # detector guesses definite and is wrong.
        params = CollapseParams(model=CollapseModel.DETERMINISTIC_TIME, t_c_mean=2.0)
        rng = np.random.default_rng(1)
        saw_blind = False
        for _ in range(50):
            record = run_trial(
                InputKind.SUPERPOSITION, 0.5, params, QUIET, FIXED_C1, CHANGE, rng
            )
            if record.collapse.outcome is Branch.B1:
                assert record.guess is InputKind.DEFINITE
                assert not record.correct
                saw_blind = True
            else:
                assert record.guess is InputKind.SUPERPOSITION
                assert record.correct
        assert saw_blind

    def test_definite_requires_unit_p1(self):
        params = CollapseParams(model=CollapseModel.JUMP_EXPONENTIAL, t_c_mean=1.0)
        with pytest.raises(ValueError):
            run_trial(InputKind.DEFINITE, 0.5, params, QUIET, POST, TIMING, np.random.default_rng(0))


class TestDeviceTrial:
    def test_definite_always_b1(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            outcome, guess = device_trial(InputKind.DEFINITE, 1.0, rng)
            assert outcome is Branch.B1
            assert guess is InputKind.DEFINITE

    def test_balanced_success_matches_enumeration(self):
        rng = np.random.default_rng(2)
        n = 20_000
        correct = 0
        for i in range(n):
            definite = i % 2 == 0  # exact equal priors
            kind = InputKind.DEFINITE if definite else InputKind.SUPERPOSITION
            _, guess = device_trial(kind, 1.0 if definite else 0.5, rng)
            correct += guess is kind
        expected = device_success_enumeration(0.5, 0.5)
        assert expected == 0.75
        assert abs(correct / n - expected) <= binom_3sigma(expected, n)

    def test_lopsided_superposition_rarely_detected(self):
        rng = np.random.default_rng(3)
        n = 20_000
        hits = sum(
            device_trial(InputKind.SUPERPOSITION, 0.9, rng)[1] is InputKind.SUPERPOSITION
            for _ in range(n)
        )
        assert abs(hits / n - 0.1) <= binom_3sigma(0.1, n)


class TestOptimalDeviceBound:
    def test_closed_form_values(self):
        assert optimal_device_bound(0.5) == pytest.approx(0.8535533905932737, abs=1e-12)
        assert optimal_device_bound(0.0) == 1.0
        assert optimal_device_bound(1.0) == 0.5

    def test_matches_measurement_grid_search(self):
        for fidelity in (0.0, 0.25, 0.5, 0.75, 0.9):
            assert device_bound_grid(fidelity) == pytest.approx(
                optimal_device_bound(fidelity), abs=1e-9
            )

    def test_range_validated(self):
        with pytest.raises(ValueError):
            optimal_device_bound(1.5)


def experiment_config(**overrides):
    raw = {
        "master_seed": 42,
        "n_trials": 2000,
        "collapse": {"model": "deterministic_time", "t_c_mean": 180.0},
        "observer": {"t_p": 0.001, "jitter_sigma": 0.0, "resolution": 0.01},
        "scenario": {"tag": "post_collapse_only"},
        "rule": {"kind": "timing_threshold", "threshold_time": 0.05, "batch_n": 1},
    }
    raw.update(overrides)
    return parse_config(raw)


class TestRunExperiment:
    def test_deterministic_and_thread_invariant(self):
        config = experiment_config(device_baseline=True)
        s1 = run_experiment(config, threads=1)
        s2 = run_experiment(config, threads=1)
        s4 = run_experiment(config, threads=4)
        assert s1 == s2 == s4

    def test_no_signal_floor_without_jitter(self):
        config = experiment_config(priors=1.0, n_trials=5000)
        summary = run_experiment(config)
        assert summary.definite.estimate == 1.0  # exact: no false positives
        assert summary.superposition.estimate is None
        assert summary.mean_report_time_superposition is None

    def test_scenario_equivalence_with_clean_signals(self):
        timing = run_experiment(experiment_config(n_trials=3000))
        change = run_experiment(
            experiment_config(
                n_trials=3000,
                scenario={"tag": "distinct_percept"},
                rule={"kind": "change_detection"},
            )
        )
        assert timing.overall.estimate == change.overall.estimate == 1.0

    def test_counts_and_intervals_consistent(self):
        summary = run_experiment(experiment_config(device_baseline=True))
        assert summary.definite.trials + summary.superposition.trials == summary.n_trials
        for rate in (summary.definite, summary.superposition, summary.overall, summary.device_success):
            assert 0.0 <= rate.lo <= rate.estimate <= rate.hi <= 1.0
        assert summary.device_bound == pytest.approx(0.8535533905932737, abs=1e-12)
        assert summary.master_seed == 42

    def test_batch_consumes_batch_n_states(self):
        config = experiment_config(
            priors=0.0,
            n_trials=500,
            scenario={"tag": "fixed_c1"},
            rule={"kind": "change_detection", "batch_n": 5},
        )
        summary = run_experiment(config)
        # Mean report time averages over all 5 states per decision; with zero
        # jitter and a fixed pre-collapse percept every report lands at t_p.
        assert summary.mean_report_time_superposition == pytest.approx(0.001, abs=1e-12)
        expected = 1.0 - 0.5**5
        assert abs(summary.superposition.estimate - expected) <= binom_3sigma(expected, 500)

    def test_trial_rng_matches_seedsequence_spawn(self):
        children = np.random.SeedSequence(42).spawn(3)
        for i, child in enumerate(children):
            a = trial_rng(42, i).random(4)
            b = np.random.default_rng(child).random(4)
            assert np.array_equal(a, b)


def test_summary_count_invariant_enforced():
    ten = RateEstimate.from_counts(5, 10)
    with pytest.raises(ValueError):
        ExperimentSummary(
            n_trials=11,
            definite=ten,
            superposition=RateEstimate.from_counts(0, 0),
            overall=ten,
            mean_report_time_definite=None,
            mean_report_time_superposition=None,
            device_success=None,
            device_bound=None,
            master_seed=1,
        )
