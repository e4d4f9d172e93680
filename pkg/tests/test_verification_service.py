import math

import pytest

from models.reports import VerificationReport
from models.run_config import RunConfig
from services.verification_service import Job, VerificationService, ambient_report, symfun_oracle_report
from utils.errors import PreconditionError


def _service(subcommand, **values):
    return VerificationService(RunConfig.from_mapping(subcommand, values))


def test_symfun_oracle_report(rng):
    report = symfun_oracle_report(rng, count=50)
    assert report.passed
    assert report.components['trace_failures'] == [0.0]


def test_ambient_report(rng):
    report = ambient_report('horoball', 3, rng, count=20)
    assert report.passed
    assert report.model == 'hyperbolic-upper-half-space'


def test_ambient_jobs_skip_the_euclidean_model():
    assert _service('verify-ambient', model='euclid').jobs('verify-ambient') == []
    names = [job.name for job in _service('verify-ambient').jobs('verify-ambient')]
    assert names == ['ambient horoball n=2', 'ambient horoball n=3']


def test_minkowski_job_names():
    service = _service('verify-minkowski', model='euclid', n=2, theta=[1.0], r=[0, 1])
    names = [job.name for job in service.jobs('verify-minkowski')]
    assert names == ['minkowski euclid-cap:n=2,lambda=1,theta=1 r=0',
                     'minkowski euclid-cap:n=2,lambda=1,theta=1 r=1']


def test_boundary_jobs_only_on_the_horoball():
    assert _service('verify-boundary', model='euclid').jobs('verify-boundary') == []
    service = _service('verify-boundary', model='horoball', n=2, theta=[1.0], r=[0])
    names = [job.name.split()[0] for job in service.jobs('verify-boundary')]
    assert names == ['flux_2_r0', 'flux_1', 'flux_2', 'cmc']


def test_rigidity_jobs_include_perturbed_caps():
    service = _service('rigidity-gaps', model='euclid', n=2, theta=[math.pi / 2], r=[0])
    labels = [job.name for job in service.jobs('rigidity-gaps')]
    assert len(labels) == 2
    assert labels[1].startswith('rigidity_gap perturbed:euclid-cap')


def test_complete_scenario_replaces_the_matrix():
    service = _service('verify-jacobi', scenario='horoball-cap:n=2,lambda=3,theta=1', r=[0])
    surfaces = service.surfaces()
    assert len(surfaces) == 1
    assert surfaces[0].curvature == 3.0


def test_all_concatenates_every_subcommand():
    service = _service('all', model='euclid', n=2, theta=[1.0], r=[0])
    total = sum(len(service.jobs(name)) for name in (
        'verify-symfun', 'verify-ambient', 'verify-minkowski', 'verify-boundary',
        'verify-jacobi', 'stability', 'rigidity-gaps', 'first-variation'))
    assert len(service.jobs('all')) == total


def test_run_job_reports_raised_errors():
    service = _service('verify-symfun')

    def broken():
        raise PreconditionError('surface is not a cap')

    success, report, error = service.run_job(Job('broken', broken))
    assert not success and report is None
    assert error == 'PreconditionError: surface is not a cap'

    success, report, error = service.run_job(Job('crash', lambda: 1 / 0))
    assert not success
    assert error.startswith('ZeroDivisionError')


def test_run_keeps_matrix_order():
    service = _service('verify-minkowski', model='euclid', n=2, theta=[1.0], r=[0, 1], res=[12, 16])
    reports, failures = service.run()
    assert failures == []
    assert [report.r for report in reports] == [0, 1]
    assert all(isinstance(report, VerificationReport) and report.passed for report in reports)
    assert reports[0].metadata['job'].startswith('minkowski euclid-cap')


def test_run_job_names_the_job():
    service = _service('verify-symfun')
    success, report, _ = service.run_job(service.jobs('verify-symfun')[0])
    assert success
    assert report.metadata['job'] == 'symfun_oracle'


@pytest.mark.parametrize('subcommand', ['stability', 'first-variation', 'verify-jacobi', 'convergence'])
def test_every_subcommand_has_jobs(subcommand):
    service = _service(subcommand, model='horoball', n=2, theta=[1.0], r=[0])
    assert service.jobs(subcommand)


def test_first_variation_jobs_cover_perturbed_caps():
    service = _service('first-variation', model='horoball', n=2, theta=[math.pi / 2], r=[0])
    names = [job.name for job in service.jobs('first-variation')]
    perturbed = [name for name in names if 'perturbed:horoball-cap' in name]
    assert [name.split()[0] for name in perturbed] == ['evolution_ledger', 'first_variation', 'wetting_rate']
    assert len(names) == 6


def test_rigidity_jobs_skip_the_top_order_on_perturbed_caps():
    service = _service('rigidity-gaps', model='euclid', n=2, theta=[math.pi / 2], r=[0, 1])
    names = [job.name for job in service.jobs('rigidity-gaps')]
    assert len(names) == 3
    assert not any(name.startswith('rigidity_gap perturbed') and name.endswith('r=1') for name in names)


def test_hemisphere_stability_job_doubles_the_basis():
    service = _service('stability', model='euclid', n=2, theta=[math.pi / 2], r=[0], res=[16], basis_size=6)
    results = [service.run_job(job) for job in service.jobs('stability') if job.name.startswith('stability ')]
    success, report, error = results[0]
    assert success, error
    assert 'basis_doubling' in report.components
    assert report.passed, report.components
