import math

import numpy as np
import pytest

from models.reports import FlowResult, FunctionalLedger, VerificationReport, to_plain


def make_report(residuals, resolutions, tolerance=1e-6):
    report = VerificationReport('minkowski', 'euclid', 2, 0, math.pi / 3, tolerance)
    for resolution, residual in zip(resolutions, residuals):
        report.add_level(resolution, residual, {'part': residual})
    return report


def test_converging_residuals_pass():
    report = make_report([1e-4, 6.25e-6, 3.9e-7], [8, 16, 32])
    assert report.judge(2.0, 1e-14) == 'pass'
    assert report.order > 3.5
    assert report.components['part'] == [1e-4, 6.25e-6, 3.9e-7]


def test_stalled_residuals_fail():
    report = make_report([2e-6, 1.9e-6, 1.8e-6], [8, 16, 32])
    assert report.judge(2.0, 1e-14) == 'fail'


def test_residuals_at_roundoff_pass_without_order():
    report = make_report([1e-14, 2e-14], [8, 16])
    assert report.judge(2.0, 1e-14) == 'pass'
    assert report.order is None


def test_within_tolerance_without_order_fails():
    report = make_report([5e-7, 4e-7], [8, 16])
    assert report.judge(2.0, 1e-14) == 'fail'


def test_roundoff_plateau_passes():
    # 1e-14 * 24**4 bounds the finest residual
    report = make_report([3e-10, 4e-10], [16, 24])
    assert report.judge(2.0, 1e-14) == 'pass'


def test_single_level_needs_only_tolerance():
    assert make_report([5e-7], [16]).judge(2.0, 1e-14) == 'pass'
    assert make_report([5e-6], [16]).judge(2.0, 1e-14) == 'fail'


def test_order_slack():
    report = make_report([4e-6, 1.05e-6], [10, 20])
    assert report.judge(2.0, 1e-14) == 'fail'
    assert report.judge(2.0, 1e-14, slack=0.25) == 'pass'


def test_fixed_roundoff_level_for_step_sweeps():
    report = make_report([3e-9, 3e-9], [2, 4])
    assert report.judge(2.0, 1e-14) == 'fail'
    assert report.judge(2.0, 1e-14, roundoff=1e-14 * 32 ** 4) == 'pass'


def test_empty_report_fails():
    assert make_report([], []).judge(2.0, 1e-14) == 'fail'


def test_name_and_dict():
    report = make_report([1e-8], [16])
    report.judge(2.0, 1e-14)
    assert report.name == 'minkowski euclid n=2 r=0 theta=1.0472'
    plain = report.to_dict()
    assert plain['verdict'] == 'pass'
    assert plain['residuals'] == [1e-8]


def test_to_plain_converts_numpy():
    plain = to_plain({'a': np.float64(1.5), 'b': np.arange(2), 'c': (1, 2), 'd': float('inf')})
    assert plain == {'a': 1.5, 'b': [0, 1], 'c': [1, 2], 'd': 'inf'}


def test_flow_result_constant():
    flow = FlowResult(surfaces=[None, None, None], boundary_speeds=[], dt=0.1,
                      deviations={'H': [0.0, 1e-3, 2e-3], 'g': [0.0, 5e-4]})
    assert flow.steps == 2
    assert flow.max_deviation() == {'H': 2e-3, 'g': 5e-4}
    assert flow.consistency_constant() == pytest.approx(0.2)


def test_ledger_sample():
    ledger = FunctionalLedger(times=[0.0], curvature_integrals=[[1.0]], wetting=[[2.0]],
                              quermass=[[3.0]], energies=[[4.0]], volume=[5.0])
    assert ledger.sample(0) == {'t': 0.0, 'A': [1.0], 'W': [2.0], 'Q': [3.0], 'E': [4.0], 'V': 5.0}
