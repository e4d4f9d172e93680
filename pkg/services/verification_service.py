"""
Verification Service
Expands a RunConfig into verifier jobs, runs them on a thread pool and
returns (success, report, error) per job
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config import get_config, tolerance
from models.reports import VerificationReport
from models.run_config import RunConfig
from models.surface import DiscreteImmersion
from services import identities, stability, variation
from services.ambient import ambient_property_report, space_for
from services.immersion import build_surface
from services.operators import jacobi_identity_residuals, robin_residuals
from services.symfun import brute_force_symmetric, newton_traces, random_shape_operator, random_spectra, symmetric_stack
from utils.errors import CapillaryError, PreconditionError
from utils.logger import logger
from utils.scenario import Scenario

SYMFUN_SPECTRA = 1000
AMBIENT_POINTS = 100

JobResult = Tuple[bool, Optional[VerificationReport], Optional[str]]


@dataclass(frozen=True)
class Job:
    """One verifier run of the matrix"""
    name: str
    run: Callable[[], VerificationReport]


def symfun_oracle_report(rng: np.random.Generator, count: int = SYMFUN_SPECTRA,
                         overrides: Optional[dict] = None) -> VerificationReport:
    """Recurrence against subset enumeration, and the Newton trace identities, on random data"""
    worst = 0.0
    for spectrum in random_spectra(rng, count):
        stack = symmetric_stack(spectrum.values, spectrum.n)
        for r in range(spectrum.n + 1):
            exact = brute_force_symmetric(spectrum, r)
            worst = max(worst, abs(stack[r] - exact) / max(abs(exact), 1.0))
    trace_failures = 0
    for n in range(1, 7):
        shape = random_shape_operator(rng, n)
        for r in range(n):
            try:
                newton_traces(shape, r)
            except CapillaryError as e:
                logger.warning(f"Newton trace check failed: {e}")
                trace_failures += 1
    report = VerificationReport('symfun_oracle', 'algebra', 6, None, None,
                                tolerance('symfun_oracle', overrides), normalizer='max(|sigma_r|, 1)')
    report.add_level(count, worst, {'recurrence': worst, 'trace_failures': trace_failures})
    report.values['spectra'] = count
    if trace_failures:
        report.residuals[-1] = max(report.residuals[-1], 1.0)
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    return report


def ambient_report(model: str, n: int, rng: np.random.Generator, count: int = AMBIENT_POINTS,
                   overrides: Optional[dict] = None) -> VerificationReport:
    """Killing, conformal and Hessian identities of the ambient model at random points"""
    space = space_for(model, n)
    defects = ambient_property_report(space, rng, count)
    report = VerificationReport('ambient', space.tag, n, None, None, tolerance('ambient', overrides),
                                normalizer='absolute')
    report.add_level(count, max(defects.values()), defects)
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    return report


class VerificationService:
    """Verification matrix for one RunConfig"""

    def __init__(self, run_config: RunConfig):
        self.config = get_config()
        self.run_config = run_config
        self.overrides = dict(run_config.tolerances)
        self.resolutions = list(run_config.resolutions)

    # matrix

    def surfaces(self, perturbed: bool = False) -> List[Scenario]:
        """Surface scenarios of the run; with perturbed=True each cap gains its perturbation"""
        run = self.run_config
        scenario = run.scenario
        if scenario is not None and scenario.complete:
            return [scenario]
        flow = scenario.flow if scenario is not None else None
        result = []
        for model in run.models:
            for n in run.dimensions:
                for theta in run.thetas:
                    cap = Scenario(model, n, run.curvature_for(model), theta, flow=flow)
                    result.append(cap)
                    if perturbed:
                        result.append(replace(cap, amplitude=self.config.PERTURBATION_AMPLITUDE,
                                              mode=self.config.PERTURBATION_MODE))
        return result

    def _builder(self, scenario: Scenario) -> Callable[[int], DiscreteImmersion]:
        def build(resolution: int) -> DiscreteImmersion:
            return build_surface(scenario.model, scenario.n, scenario.curvature, scenario.theta,
                                 resolution, scenario.amplitude, scenario.mode)
        return build

    def _study(self, scenario: Scenario, verifier: Callable[[DiscreteImmersion], VerificationReport]):
        return lambda: identities.convergence_study(self._builder(scenario), verifier, self.resolutions)

    def _at(self, scenario: Scenario, resolution: int,
            verifier: Callable[[DiscreteImmersion], VerificationReport]):
        return lambda: verifier(self._builder(scenario)(resolution))

    def _orders(self, scenario: Scenario) -> List[int]:
        return self.run_config.orders_for(scenario.n)

    @staticmethod
    def _name(identity: str, scenario: Scenario, r: Optional[int] = None) -> str:
        suffix = '' if r is None else f" r={r}"
        return f"{identity} {scenario.label()}{suffix}"

    # jobs per subcommand

    def symfun_jobs(self) -> List[Job]:
        seed = self.config.RANDOM_SEED
        return [Job('symfun_oracle', lambda: symfun_oracle_report(np.random.default_rng(seed),
                                                                  overrides=self.overrides))]

    def ambient_jobs(self) -> List[Job]:
        seed = self.config.RANDOM_SEED
        jobs = []
        # Killing and Hessian identities are statements about the hyperbolic model
        for model in (m for m in self.run_config.models if m == 'horoball'):
            for n in self.run_config.dimensions:
                jobs.append(Job(f"ambient {model} n={n}",
                                lambda m=model, k=n: ambient_report(m, k, np.random.default_rng(seed),
                                                                    overrides=self.overrides)))
        return jobs

    def minkowski_jobs(self) -> List[Job]:
        jobs = []
        for scenario in self.surfaces():
            for r in self._orders(scenario):
                verifier = lambda M, r=r: identities.minkowski(M, r, self.overrides)
                jobs.append(Job(self._name('minkowski', scenario, r), self._study(scenario, verifier)))
        return jobs

    def boundary_jobs(self) -> List[Job]:
        jobs = []
        for scenario in self.surfaces():
            if scenario.model != 'horoball':
                continue
            jobs.append(Job(self._name('flux_2_r0', scenario), self._study(
                scenario, lambda M: identities.boundary_flux_cross_check(M, self.overrides))))
            for r in self._orders(scenario):
                for identity, verifier in (('flux_1', identities.boundary_flux_1),
                                           ('flux_2', identities.boundary_flux_2)):
                    check = lambda M, r=r, verifier=verifier: verifier(M, r, self.overrides)
                    jobs.append(Job(self._name(identity, scenario, r), self._study(scenario, check)))
                if not scenario.perturbed:
                    check = lambda M, r=r: identities.cmc_boundary_identity(M, r, self.overrides)
                    jobs.append(Job(self._name('cmc', scenario, r), self._study(scenario, check)))
        return jobs

    def jacobi_jobs(self) -> List[Job]:
        jobs = []
        for scenario in self.surfaces():
            jobs.append(Job(self._name('robin', scenario), self._study(
                scenario, lambda M: robin_residuals(M, 0, self.overrides))))
            for r in self._orders(scenario):
                check = lambda M, r=r: jacobi_identity_residuals(M, r, self.overrides)
                jobs.append(Job(self._name('jacobi', scenario, r), self._study(scenario, check)))
                if scenario.model == 'horoball' and not scenario.perturbed:
                    check = lambda M, r=r: stability.auxiliary_identity_residuals(M, r, self.overrides)
                    jobs.append(Job(self._name('auxiliary', scenario, r), self._study(scenario, check)))
        return jobs

    def stability_jobs(self) -> List[Job]:
        jobs = []
        finest = self.resolutions[-1]
        basis_size = self.run_config.basis_size
        for scenario in self.surfaces():
            for r in self._orders(scenario):
                doubling = r == 0 and scenario.hemisphere
                check = lambda M, r=r, doubling=doubling: stability.stability_report(
                    M, r, basis_size, self.overrides, doubling)
                jobs.append(Job(self._name('stability', scenario, r), self._at(scenario, finest, check)))
                check = lambda M, r=r: stability.test_function_report(M, r, self.overrides)
                jobs.append(Job(self._name('test_function', scenario, r), self._at(scenario, finest, check)))
                if not scenario.perturbed:
                    check = lambda M, r=r: stability.cap_reduction_report(
                        M, r, basis_size=basis_size, overrides=self.overrides)
                    jobs.append(Job(self._name('cap_reduction', scenario, r), self._at(scenario, finest, check)))
        return jobs

    def rigidity_jobs(self) -> List[Job]:
        jobs = []
        finest = self.resolutions[-1]
        for scenario in self.surfaces(perturbed=True):
            for r in self._orders(scenario):
                if scenario.perturbed and r == scenario.n - 1:
                    # no gap is defined at r = n - 1 without constant H_n
                    continue
                check = lambda M, r=r: stability.rigidity_gap_report(M, r, self.overrides)
                jobs.append(Job(self._name('rigidity_gap', scenario, r), self._at(scenario, finest, check)))
        return jobs

    def _flow_field(self, scenario: Scenario, M: DiscreteImmersion) -> variation.FlowRule:
        name = scenario.flow or 'scale'
        if name != 'from-phi':
            return variation.flow_rule(name)
        phi = stability.random_admissible_fields(M, 1, self.run_config.basis_size)[0]
        return variation.flow_rule(name, M, phi)

    def first_variation_jobs(self) -> List[Job]:
        jobs = []
        coarse = self.resolutions[0]
        for scenario in self.surfaces(perturbed=True):
            def ledger(M, scenario=scenario):
                return variation.ledger_report(M, self._flow_field(scenario, M), overrides=self.overrides)
            jobs.append(Job(self._name('evolution_ledger', scenario), self._at(scenario, coarse, ledger)))
            for r in self._orders(scenario):
                def energy(M, r=r, scenario=scenario):
                    return variation.first_variation_check(M, self._flow_field(scenario, M), r,
                                                           overrides=self.overrides)

                def wetting(M, r=r, scenario=scenario):
                    return variation.wetting_rate_check(M, self._flow_field(scenario, M), r,
                                                        overrides=self.overrides)
                jobs.append(Job(self._name('first_variation', scenario, r), self._at(scenario, coarse, energy)))
                jobs.append(Job(self._name('wetting_rate', scenario, r), self._at(scenario, coarse, wetting)))
        return jobs

    def convergence_jobs(self) -> List[Job]:
        """Every surface identity of the scenario swept over the resolutions"""
        return self.minkowski_jobs() + self.jacobi_jobs() + self.boundary_jobs()

    def jobs(self, subcommand: str) -> List[Job]:
        table: Dict[str, Callable[[], List[Job]]] = {
            'verify-symfun': self.symfun_jobs,
            'verify-ambient': self.ambient_jobs,
            'verify-minkowski': self.minkowski_jobs,
            'verify-boundary': self.boundary_jobs,
            'verify-jacobi': self.jacobi_jobs,
            'stability': self.stability_jobs,
            'rigidity-gaps': self.rigidity_jobs,
            'first-variation': self.first_variation_jobs,
            'convergence': self.convergence_jobs,
        }
        if subcommand == 'all':
            order = ('verify-symfun', 'verify-ambient', 'verify-minkowski', 'verify-boundary',
                     'verify-jacobi', 'stability', 'rigidity-gaps', 'first-variation')
            return [job for key in order for job in table[key]()]
        return table[subcommand]()

    # execution

    def run_job(self, job: Job) -> JobResult:
        """
        Run one verifier

        Returns:
            Tuple of (success, report, error_message)
        """
        try:
            report = job.run()
            report.metadata['job'] = job.name
            logger.info(f"{job.name}: {report.verdict} (residual {report.finest})")
            return True, report, None
        except PreconditionError as e:
            logger.warning(f"{job.name}: precondition failed - {e}")
            return False, None, f"PreconditionError: {e}"
        except CapillaryError as e:
            logger.warning(f"{job.name}: {type(e).__name__} - {e}")
            return False, None, f"{type(e).__name__}: {e}"
        except Exception as e:
            logger.error(f"{job.name}: unexpected error - {e}")
            return False, None, f"{type(e).__name__}: {e}"

    def run(self, subcommand: Optional[str] = None) -> Tuple[List[VerificationReport], List[Dict[str, Any]]]:
        """
        Run the matrix of a subcommand in parallel; results keep matrix order

        Returns:
            (reports, failures) where failures name the jobs that raised
        """
        jobs = self.jobs(subcommand or self.run_config.subcommand)
        logger.info(f"Running {len(jobs)} verifier jobs on {self.config.THREADS} threads")
        with ThreadPoolExecutor(max_workers=max(1, self.config.THREADS)) as pool:
            results = list(pool.map(self.run_job, jobs))
        reports, failures = [], []
        for job, (success, report, error) in zip(jobs, results):
            if success and report is not None:
                reports.append(report)
            else:
                failures.append({'name': job.name, 'error': error})
        return reports, failures
