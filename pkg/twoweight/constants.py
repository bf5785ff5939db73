"""
Constants of a weight system (omega; sigma_1, ..., sigma_m) with exponents p_1..p_m:

* A_p: the multilinear Muckenhoupt characteristic,
* S_p: the Sawyer testing characteristic,
* RH: the reverse Hoelder constant of prod sigma_i^{p/p_i},
* the parent-testing constant restricted to eligible cubes,

plus lower estimates of the operator norm from explicit test functions.

Every constant is a supremum over the cubes of a scope: ``dyadic`` (standard grid)
or ``general`` (every lattice cube).  Cube sums are held in cell units, which makes
each ratio below free of the cell volume.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import conf
from .exceptions import ChainViolationError, DegenerateSystemError, ParameterError
from .grid import LATTICE, STANDARD, Cube, enumerate_cubes
from .maximal import (
    check_budget,
    dyadic_maximal,
    general_maximal_bruteforce,
    lattice_products,
    level_products,
    local_lattice_field,
)
from .weights import block_sums, upsample

logger = logging.getLogger(__name__)

SCOPES = {'dyadic': STANDARD, 'general': LATTICE}
STRATEGIES = ('indicators', 'random', 'ascent')
CHAIN_TOL = 1e-9


def grid_scope(scope):
    try:
        return SCOPES[scope]
    except KeyError:
        raise ParameterError(
            f"Unknown scope {scope!r}; expected one of {', '.join(SCOPES)}",
            {'scope': scope},
        ) from None


def default_doubling(d, m, p, nu=2):
    """D = nu^(2 m p d / (m p - 1))."""
    if m * p <= 1:
        raise ParameterError(f"m p = {m * p} must exceed 1", {'m': m, 'p': p})
    return float(nu) ** (2.0 * m * p * d / (m * p - 1.0))


@dataclass
class Supremum:
    value: float
    witness: Cube | None = None

    def to_dict(self):
        return {'value': self.value, 'witness': self.witness.to_dict() if self.witness else None}


@dataclass
class CubeBlock:
    """All cubes of one size in a scope, with their cell sums laid out by grid index."""
    level: int | None
    side: int
    omega: np.ndarray
    sigmas: list
    product: np.ndarray

    def corner(self, index):
        if self.level is None:
            return tuple(int(i) for i in index)
        return tuple(int(i) * self.side for i in index)

    def cube(self, grid, index):
        if self.level is None:
            return grid.lattice_cube(index, self.side)
        return grid.cube(self.level, index)


def cube_blocks(system, scope='dyadic'):
    grid = system.grid
    if grid_scope(scope) == STANDARD:
        omega = system.omega.level_sums(grid)
        sigmas = [sigma.level_sums(grid) for sigma in system.sigmas]
        product = system.product_weight.level_sums(grid)
        return [
            CubeBlock(level, grid.side(level), omega[level], [s[level] for s in sigmas], product[level])
            for level in range(grid.L_max + 1)
        ]
    return [
        CubeBlock(
            None,
            side,
            system.omega.windows(side),
            [sigma.windows(side) for sigma in system.sigmas],
            system.product_weight.windows(side),
        )
        for side in range(grid.resolution, 0, -1)
    ]


def ratio(numerator, denominator):
    """numerator / denominator with 0/0 = 0 and x/0 = inf."""
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    out = np.zeros(np.broadcast_shapes(numerator.shape, denominator.shape))
    positive = denominator > 0
    np.divide(numerator, denominator, out=out, where=positive)
    out[~positive & (numerator > 0)] = np.inf
    return out


def scalar_ratio(numerator, denominator):
    if denominator > 0:
        return numerator / denominator
    return math.inf if numerator > 0 else 0.0


def holder_product(sums, exponents):
    out = 1.0
    for s, e in zip(sums, exponents):
        out = out * np.asarray(s, dtype=float) ** e
    return out


def supremum(grid, blocks, arrays, masks=None):
    best, witness = -1.0, None
    for position, (block, values) in enumerate(zip(blocks, arrays)):
        if masks is not None:
            values = np.where(masks[position], values, -1.0)
        if values.size == 0:
            continue
        flat = int(np.argmax(values))
        value = float(values.flat[flat])
        if value > best:
            best = value
            witness = block.cube(grid, np.unravel_index(flat, values.shape))
    if witness is None:
        return Supremum(0.0, None)
    return Supremum(best, witness)


def ap_ratios(system, blocks):
    d = system.d
    arrays = []
    for block in blocks:
        volume = float(block.side ** d)
        value = block.omega / volume
        for sums, exponent in zip(block.sigmas, system.exponents.dual):
            value = value * (sums / volume) ** exponent
        arrays.append(value)
    return arrays


def rh_ratios(system, blocks):
    return [
        ratio(holder_product(block.sigmas, system.exponents.holder), block.product)
        for block in blocks
    ]


def sp_ratios(system, scope='dyadic', budget=None):
    """Testing ratios int_Q M(sigma 1_Q)^p omega / prod sigma_i(Q)^{p/p_i} for every cube in scope."""
    grid = system.grid
    p = system.p
    blocks = cube_blocks(system, scope)
    omega = system.omega.density

    if grid_scope(scope) == STANDARD:
        # on a level-k cube, M(sigma 1_Q) is the running max of the level products from k down
        products = level_products(grid, system.level_sums())
        numerators = [None] * (grid.L_max + 1)
        suffix = None
        for level in range(grid.L_max, -1, -1):
            spread = upsample(products[level], grid.side(level))
            suffix = spread if suffix is None else np.maximum(suffix, spread)
            numerators[level] = block_sums(suffix ** p * omega, grid.side(level))
    else:
        count = sum((grid.resolution - block.side + 1) ** grid.d for block in blocks)
        check_budget(grid, count, budget)
        products = lattice_products(system)
        numerators = []
        for block in blocks:
            numerator = np.zeros(block.omega.shape)
            for index in np.ndindex(numerator.shape):
                cube = block.cube(grid, index)
                field = local_lattice_field(products, cube)
                numerator[index] = np.sum(field ** p * omega[cube.slices])
            numerators.append(numerator)

    arrays = [
        ratio(numerator, holder_product(block.sigmas, system.exponents.holder))
        for numerator, block in zip(numerators, blocks)
    ]
    return blocks, arrays


def ap_constant(system, scope='dyadic'):
    blocks = cube_blocks(system, scope)
    return supremum(system.grid, blocks, ap_ratios(system, blocks))


def sp_constant(system, scope='dyadic', budget=None):
    blocks, arrays = sp_ratios(system, scope, budget)
    return supremum(system.grid, blocks, arrays)


def rh_constant(system, scope='dyadic'):
    blocks = cube_blocks(system, scope)
    return supremum(system.grid, blocks, rh_ratios(system, blocks))


def parent_side(rho, side):
    """Side in cells of the smallest admissible enlargement of a cube."""
    return math.ceil(rho * side - 1e-9)


@dataclass
class Eligibility:
    rho: float
    D: float
    scope: str
    masks: list
    cubes: list
    outside: int

    def to_dict(self):
        return {
            'rho': self.rho,
            'D': self.D,
            'scope': self.scope,
            'eligible': len(self.cubes),
            'outside': self.outside,
        }


def check_testing_parameters(rho, D):
    if not rho > 1:
        raise ParameterError(f"rho must exceed 1, got {rho}", {'rho': rho})
    if not D >= 1:
        raise ParameterError(f"D must be at least 1, got {D}", {'D': D})


def eligible_cubes(system, rho, D, scope='dyadic'):
    """Cubes Q with an enlargement P (side >= rho * side(Q), inside the unit cube) and some i with sigma_i(P) <= D sigma_i(Q)."""
    check_testing_parameters(rho, D)
    grid = system.grid
    n = grid.resolution
    blocks = cube_blocks(system, scope)
    masks, cubes, outside = [], [], 0
    for block in blocks:
        mask = np.zeros(block.omega.shape, dtype=bool)
        size = parent_side(rho, block.side)
        masks.append(mask)
        if size > n:
            outside += mask.size
            continue
        windows = [sigma.windows(size) for sigma in system.sigmas]
        slack = size - block.side
        for index in np.ndindex(mask.shape):
            # corners of every enlargement that contains Q and stays in the unit cube
            box = tuple(slice(max(0, c - slack), min(c, n - size) + 1) for c in block.corner(index))
            if any(window[box].min() <= D * sums[index] for window, sums in zip(windows, block.sigmas)):
                mask[index] = True
                cubes.append(block.cube(grid, index))
    logger.debug("%d eligible cubes for rho=%s, D=%s", len(cubes), rho, D)
    return Eligibility(rho, D, scope, masks, cubes, outside)


def testing_constant(system, rho=2.0, D=None, scope='dyadic', budget=None):
    if D is None:
        D = default_doubling(system.d, system.m, system.p, system.grid.nu)
    blocks, arrays = sp_ratios(system, scope, budget)
    eligibility = eligible_cubes(system, rho, D, scope)
    return supremum(system.grid, blocks, arrays, eligibility.masks)


def input_norms(system, f):
    """prod_i (sum of f_i^{p_i} sigma_i)^{p/p_i}, in cell units."""
    total = 1.0
    for fi, sigma, pi, exponent in zip(f, system.sigmas, system.exponents.p_i, system.exponents.holder):
        total *= float(np.sum(fi ** pi * sigma.density)) ** exponent
    return total


def maximal_values(system, f, scope='dyadic', budget=None):
    if grid_scope(scope) == STANDARD:
        return dyadic_maximal(system, f, witnesses=False).values
    return general_maximal_bruteforce(system, f, LATTICE, budget, witnesses=False).values


def energy_ratio(system, f, scope='dyadic', budget=None):
    """||M(f sigma)||_{L^p(omega)}^p / prod ||f_i||_{L^{p_i}(sigma_i)}^p."""
    f = system.admissible(f)
    values = maximal_values(system, f, scope, budget)
    energy = float(np.sum(values ** system.p * system.omega.density))
    return scalar_ratio(energy, input_norms(system, f))


def weak_energy(values, omega, p):
    """sup over t of t^p omega({M >= t}), in cell units."""
    order = np.argsort(-values, axis=None, kind='stable')
    levels = values.ravel()[order]
    mass = np.cumsum(omega.ravel()[order])
    return float(np.max(levels ** p * mass)) if levels.size else 0.0


@dataclass
class NormEstimate:
    value: float
    strategy: str
    localized: Supremum
    global_indicator: float
    weak: float
    trials: int
    witness_functions: list | None = None

    def to_dict(self):
        return {
            'value': self.value,
            'strategy': self.strategy,
            'indicator_localized': self.localized.to_dict(),
            'indicator_global': self.global_indicator,
            'weak_type': self.weak,
            'trials': self.trials,
        }


def norm_lower(system, strategy='indicators', scope='dyadic', seed=None, starts=None,
               steps=None, step_factor=None, budget=None):
    """Lower estimate of ||M||^p from indicator trials, optionally refined by random starts and ascent."""
    if strategy not in STRATEGIES:
        raise ParameterError(
            f"Unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}",
            {'strategy': strategy},
        )
    grid = system.grid
    p = system.p
    omega = system.omega.density
    holder = system.exponents.holder

    localized, witness = -1.0, None
    global_best, weak_best, best_f, trials = 0.0, 0.0, None, 0
    for cube in enumerate_cubes(grid, grid_scope(scope)):
        denominator = float(holder_product([s.cell_sum(cube) for s in system.sigmas], holder))
        if denominator <= 0:
            continue
        indicator = np.zeros(grid.shape)
        indicator[cube.slices] = 1.0
        f = [indicator] * system.m
        values = maximal_values(system, f, scope, budget)
        energy = values ** p * omega
        trials += 1
        local = float(np.sum(energy[cube.slices])) / denominator
        if local > localized:
            localized, witness = local, cube
        total = float(np.sum(energy)) / denominator
        if total > global_best:
            global_best, best_f = total, f
        weak_best = max(weak_best, weak_energy(values, omega, p) / denominator)

    if not trials:
        raise DegenerateSystemError(
            "Every cube has a vanishing sigma_i mass; no test function has a positive norm",
            {'strategy': strategy},
        )

    indicator_global = global_best
    value = localized
    if strategy != 'indicators':
        seed = conf.get('WEIGHTLAB_SEED') if seed is None else seed
        starts = conf.get('WEIGHTLAB_SEARCH_STARTS') if starts is None else starts
        steps = conf.get('WEIGHTLAB_SEARCH_STEPS') if steps is None else steps
        step_factor = conf.get('WEIGHTLAB_STEP_FACTOR') if step_factor is None else step_factor
        rng = np.random.default_rng(seed)
        for _ in range(starts):
            f = system.admissible([rng.lognormal(0.0, 1.0, grid.shape) for _ in range(system.m)])
            current = energy_ratio(system, f, scope, budget)
            trials += 1
            if strategy == 'ascent':
                for _ in range(steps):
                    i = int(rng.integers(system.m))
                    cell = int(rng.integers(grid.cells))
                    sign = 1.0 if rng.integers(2) else -1.0
                    candidate = [fi.copy() for fi in f]
                    candidate[i].flat[cell] *= math.exp(sign * step_factor)
                    attempt = energy_ratio(system, candidate, scope, budget)
                    trials += 1
                    if attempt > current:
                        f, current = candidate, attempt
            if current > global_best:
                global_best, best_f = current, f
        value = max(localized, global_best)

    logger.info("norm_lower(%s, %s): %.6g after %d trials", strategy, scope, value, trials)
    return NormEstimate(
        value=value,
        strategy=strategy,
        localized=Supremum(localized, witness),
        global_indicator=indicator_global,
        weak=weak_best,
        trials=trials,
        witness_functions=best_f,
    )


@dataclass
class ConstantsReport:
    scope: str
    rho: float
    D: float
    a_p: Supremum
    s_p: Supremum
    rh: Supremum
    testing: Supremum
    eligibility: Eligibility
    norm: NormEstimate | None = None

    @property
    def certificate(self):
        """(A_p + testing) * RH, the upper bound certified by the parent-testing theorem."""
        if math.isinf(self.rh.value):
            return math.inf
        return (self.a_p.value + self.testing.value) * self.rh.value

    @property
    def sawyer_bound(self):
        if math.isinf(self.rh.value):
            return math.inf
        return self.s_p.value * self.rh.value

    @property
    def certificate_ratio(self):
        if self.norm is None or not 0 < self.certificate < math.inf:
            return None
        return self.norm.value / self.certificate

    def chain(self):
        rows = [
            ('A_p <= S_p', self.a_p.value, self.s_p.value),
            ('testing <= S_p', self.testing.value, self.s_p.value),
        ]
        if self.norm is not None:
            rows.append(('S_p <= norm', self.s_p.value, self.norm.value))
        return [
            {'relation': name, 'lhs': lhs, 'rhs': rhs, 'holds': lhs <= rhs * (1 + CHAIN_TOL)}
            for name, lhs, rhs in rows
        ]

    def assert_chain(self):
        broken = [row for row in self.chain() if not row['holds']]
        if broken:
            raise ChainViolationError(f"Constant chain broken: {broken[0]['relation']}", {'chain': broken})

    def to_dict(self):
        return {
            'scope': self.scope,
            'rho': self.rho,
            'D': self.D,
            'A_p': self.a_p.to_dict(),
            'S_p': self.s_p.to_dict(),
            'RH': self.rh.to_dict(),
            'testing': self.testing.to_dict(),
            'eligibility': self.eligibility.to_dict(),
            'norm_lower': self.norm.to_dict() if self.norm else None,
            'certificate': self.certificate,
            'sawyer_bound': self.sawyer_bound,
            'certificate_ratio': self.certificate_ratio,
            'chain': self.chain(),
        }


def compute_constants(system, scope='dyadic', rho=2.0, D=None, strategy='indicators', seed=None,
                      budget=None, starts=None, steps=None, with_norm=True):
    if D is None:
        D = default_doubling(system.d, system.m, system.p, system.grid.nu)
    blocks, sp_arrays = sp_ratios(system, scope, budget)
    eligibility = eligible_cubes(system, rho, D, scope)
    grid = system.grid
    report = ConstantsReport(
        scope=scope,
        rho=rho,
        D=D,
        a_p=supremum(grid, blocks, ap_ratios(system, blocks)),
        s_p=supremum(grid, blocks, sp_arrays),
        rh=supremum(grid, blocks, rh_ratios(system, blocks)),
        testing=supremum(grid, blocks, sp_arrays, eligibility.masks),
        eligibility=eligibility,
    )
    if with_norm:
        report.norm = norm_lower(system, strategy, scope, seed, starts, steps, budget=budget)
    logger.info(
        "Constants (%s): A_p=%.6g S_p=%.6g RH=%.6g testing=%.6g",
        scope, report.a_p.value, report.s_p.value, report.rh.value, report.testing.value,
    )
    return report
