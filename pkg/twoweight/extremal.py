"""
Seeded hill-climbing over weight systems to measure how sharp the certified bounds are.

Every accepted candidate passes the constant chain check; the search keeps the
best system seen so far (elitist), so the recorded objective never decreases.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import conf
from .constants import compute_constants, scalar_ratio
from .exceptions import ParameterError
from .weights import WeightSystem

logger = logging.getLogger(__name__)

PROFILES = ('uniform', 'lognormal', 'spiky', 'radial')
OBJECTIVES = ('certificate', 'testing-ratio', 'rh-stress')
RH_CAP = 1e6
SPIKE = 1e4


def _draw(grid, rng, profile):
    shape = grid.shape
    if profile == 'uniform':
        return rng.uniform(0.5, 1.5, shape)
    if profile == 'lognormal':
        return rng.lognormal(0.0, 1.0, shape)
    if profile == 'spiky':
        density = rng.uniform(0.5, 1.5, shape)
        # fewer than half the cells, so the median stays on the base level (needs at least 3 cells)
        count = max(1, min(grid.cells // 16, (grid.cells - 1) // 2))
        cells = rng.choice(grid.cells, size=count, replace=False)
        density.flat[cells] = SPIKE
        return density
    if profile == 'radial':
        centre = rng.uniform(0.0, 1.0, grid.d)
        power = rng.uniform(-0.9 * grid.d, 2.0)
        axes = [(np.arange(grid.resolution) + 0.5) / grid.resolution - c for c in centre]
        radius = np.sqrt(sum(a ** 2 for a in np.meshgrid(*axes, indexing='ij')))
        return (radius + 1.0 / grid.resolution) ** power
    raise ParameterError(f"Unknown profile {profile!r}; expected one of {', '.join(PROFILES)}", {'profile': profile})


def random_system(grid, exponents, profile='lognormal', seed=0):
    rng = np.random.default_rng(seed)
    omega = _draw(grid, rng, profile)
    sigmas = [_draw(grid, rng, profile) for _ in range(exponents.m)]
    return WeightSystem.from_arrays(grid, omega, sigmas, exponents.p_i, exponents.declared_p)


@dataclass
class SearchConfig:
    seed: int = 0
    population: int = 8
    iterations: int = 50
    mutation_scale: float = 0.5
    objective: str = 'certificate'
    scope: str = 'dyadic'
    rho: float = 2.0
    D: float | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ParameterError(
                f"Unknown objective {self.objective!r}; expected one of {', '.join(OBJECTIVES)}",
                {'objective': self.objective},
            )
        if self.population < 1 or self.iterations < 0:
            raise ParameterError("population must be positive and iterations nonnegative",
                                 {'population': self.population, 'iterations': self.iterations})


@dataclass
class TracePoint:
    iteration: int
    objective: float
    a_p: float
    s_p: float
    testing: float
    rh: float
    norm: float


@dataclass
class SearchResult:
    best: WeightSystem
    value: float
    report: object
    trace: list = field(default_factory=list)
    config: SearchConfig | None = None

    def to_dict(self):
        return {
            'objective': self.config.objective if self.config else None,
            'value': self.value,
            'constants': self.report.to_dict(),
            'config': asdict(self.config) if self.config else None,
            'best': {
                'omega': self.best.omega.density.ravel().tolist(),
                'sigma': [sigma.density.ravel().tolist() for sigma in self.best.sigmas],
            },
            'iterations': len(self.trace) - 1,
        }

    def trace_table(self):
        header = ['iteration', 'objective', 'A_p', 'S_p', 'testing', 'RH', 'norm_lower']
        rows = [[t.iteration, t.objective, t.a_p, t.s_p, t.testing, t.rh, t.norm] for t in self.trace]
        return header, rows


def objective_value(report, objective):
    if objective == 'certificate':
        certificate = report.certificate
        if not 0 < certificate < math.inf:
            return -math.inf
        return report.norm.value / certificate
    if objective == 'testing-ratio':
        return scalar_ratio(report.s_p.value, report.a_p.value + report.testing.value)
    return min(report.rh.value, RH_CAP)


def evaluate(system, config):
    report = compute_constants(system, config.scope, config.rho, config.D, strategy='indicators')
    report.assert_chain()
    return objective_value(report, config.objective), report


def mutate(system, rng, scale):
    def jitter(density):
        return density * np.exp(scale * rng.standard_normal(density.shape))

    return system.replace(
        omega=jitter(system.omega.density),
        sigmas=[jitter(sigma.density) for sigma in system.sigmas],
    )


def _point(iteration, value, report):
    return TracePoint(
        iteration, value, report.a_p.value, report.s_p.value,
        report.testing.value, report.rh.value, report.norm.value,
    )


def ascend(start, config=None):
    config = config or SearchConfig()
    rng = np.random.default_rng(config.seed)
    value, report = evaluate(start, config)
    if not math.isfinite(value):
        raise ParameterError(f"The objective is not finite at the starting system ({value})",
                             {'objective': config.objective})
    best = start
    trace = [_point(0, value, report)]
    workers = config.workers or conf.get('WEIGHTLAB_WORKERS')

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for iteration in range(1, config.iterations + 1):
            # drawn in the calling thread so the candidates only depend on the seed
            candidates = [mutate(best, rng, config.mutation_scale) for _ in range(config.population)]
            results = list(pool.map(lambda system: evaluate(system, config), candidates))
            winner = max(range(len(results)), key=lambda i: results[i][0])
            if results[winner][0] > value:
                best = candidates[winner]
                value, report = results[winner]
                logger.debug("iteration %d: objective %.6g", iteration, value)
            trace.append(_point(iteration, value, report))

    logger.info("Search finished: %s = %.6g after %d iterations", config.objective, value, config.iterations)
    return SearchResult(best, value, report, trace, config)
