"""
Sparse (Calderon-Zygmund) families for the dyadic multilinear maximal function.

For g_i = f_i sigma_i let Pi(Q) = prod_i <g_i>_Q.  With a = 2^m nu^(dm) and
lambda_k = Pi(root) / nu^(dm) * a^k, generation k is the set of maximal standard
grid cubes with Pi(Q) > lambda_k; their union is Omega_k = {M_D > lambda_k}.  Each
cube keeps E_Q = Q minus Omega_{k+1}.  All sparsity checks run on integer cell
counts.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CarlesonError, DominationError, ParameterError, SparsityError
from .maximal import dyadic_maximal, level_products
from .weights import block_sums

logger = logging.getLogger(__name__)

RELATIVE_TOL = 1e-10


@dataclass
class SparseCube:
    k: int
    j: int
    cube: object
    e_mask: np.ndarray = field(repr=False)

    @property
    def e_cells(self):
        return int(self.e_mask.sum())

    def to_dict(self):
        return {
            'k': self.k,
            'j': self.j,
            'cube': self.cube.to_dict(),
            'E_cells': [int(i) for i in np.flatnonzero(self.e_mask.ravel())],
        }


@dataclass
class Generation:
    k: int
    threshold: float
    omega: np.ndarray = field(repr=False)
    cubes: list = field(default_factory=list)


@dataclass
class SparseFamily:
    base: float
    anchor: float
    generations: list
    level_products: list = field(repr=False, default_factory=list)

    def __iter__(self):
        for generation in self.generations:
            yield from generation.cubes

    def __len__(self):
        return sum(len(generation.cubes) for generation in self.generations)

    def to_dict(self):
        return {
            'base': self.base,
            'anchor': self.anchor,
            'generations': [
                {
                    'k': generation.k,
                    'threshold': generation.threshold,
                    'omega_cells': int(generation.omega.sum()),
                    'cubes': [cube.to_dict() for cube in generation.cubes],
                }
                for generation in self.generations
            ],
        }


def _maximal_cubes(grid, products, threshold):
    """Maximal standard grid cubes with product above ``threshold``, coarse to fine."""
    taken = np.zeros(grid.shape, dtype=bool)
    cubes = []
    for level, product in enumerate(products):
        for offset in np.argwhere(product > threshold):
            cube = grid.cube(level, offset)
            if taken[cube.corner]:
                continue
            taken[cube.slices] = True
            cubes.append(cube)
    return cubes, taken


def build_sparse(system, f=None, base=None):
    grid = system.grid
    m = system.m
    a = 2.0 ** m * grid.nu ** (grid.d * m) if base is None else float(base)
    if not a > 1:
        raise ParameterError(f"The sparse base must exceed 1, got {a}", {'base': a})

    products = level_products(grid, system.level_sums(f))
    top = products[0].flat[0]
    if top <= 0:
        logger.info("Pi(root) vanishes; the sparse family is empty")
        return SparseFamily(a, 0.0, [], products)

    peak = max(float(product.max()) for product in products)
    anchor = top / grid.nu ** (grid.d * m)
    generations = []
    k = 0
    while anchor * a ** k < peak:
        threshold = anchor * a ** k
        cubes, taken = _maximal_cubes(grid, products, threshold)
        generations.append(Generation(k, threshold, taken, cubes))
        k += 1
    logger.info("Sparse family: base %.6g, %d generations", a, len(generations))

    empty = np.zeros(grid.shape, dtype=bool)
    for k, generation in enumerate(generations):
        following = generations[k + 1].omega if k + 1 < len(generations) else empty
        generation.cubes = [
            SparseCube(k, j, cube, _e_mask(grid, cube, following))
            for j, cube in enumerate(generation.cubes)
        ]
    family = SparseFamily(a, anchor, generations, products)
    check_sparse(grid, family)
    return family


def _e_mask(grid, cube, following):
    mask = np.zeros(grid.shape, dtype=bool)
    mask[cube.slices] = ~following[cube.slices]
    return mask


def check_sparse(grid, family):
    """Disjointness, nesting and the halving property, on cell counts."""
    seen = np.zeros(grid.shape, dtype=int)
    for k, generation in enumerate(family.generations):
        covered = sum(cube.cube.volume for cube in generation.cubes)
        if covered != int(generation.omega.sum()):
            raise SparsityError(
                f"Generation {k} cubes cover {covered} cells but Omega_{k} has {int(generation.omega.sum())}",
                {'k': k},
            )
        following = family.generations[k + 1].omega if k + 1 < len(family.generations) else None
        if following is not None and (following & ~generation.omega).any():
            raise SparsityError(f"Omega_{k + 1} is not inside Omega_{k}", {'k': k + 1})
        for item in generation.cubes:
            inside = int(following[item.cube.slices].sum()) if following is not None else 0
            if 2 * inside > item.cube.volume:
                raise SparsityError(
                    f"Cube ({k},{item.j}) has {inside} of {item.cube.volume} cells in the next generation",
                    {'k': k, 'j': item.j, 'inside': inside, 'cells': item.cube.volume},
                )
            if item.cube.volume > 2 * item.e_cells:
                raise SparsityError(
                    f"Cube ({k},{item.j}) keeps only {item.e_cells} of {item.cube.volume} cells in E",
                    {'k': k, 'j': item.j},
                )
            seen += item.e_mask
    if seen.max(initial=0) > 1:
        raise SparsityError("The sets E_Q overlap", {'cells': int((seen > 1).sum())})


def coefficients(system, family):
    """a_Q = omega(E_Q) * prod_i <sigma_i>_Q^p per family member, in family order."""
    grid = system.grid
    p = system.p
    sums = [sigma.level_sums(grid) for sigma in system.sigmas]
    out = []
    for item in family:
        cube = item.cube
        index = tuple(cube.offset)
        value = float(np.sum(system.omega.density[item.e_mask])) * grid.cell_volume
        for s in sums:
            value *= (s[cube.level][index] / cube.volume) ** p
        out.append(value)
    return out


def coefficient_levels(grid, family, values):
    """Coefficients accumulated per standard grid cube, one array per level."""
    levels = [np.zeros((grid.nu ** level,) * grid.d) for level in range(grid.L_max + 1)]
    for item, value in zip(family, values):
        levels[item.cube.level][tuple(item.cube.offset)] += value
    return levels


def input_ratios(system, family, f=None):
    """prod_i (int_Q f_i sigma_i / sigma_i(Q))^p per family member; 1 when f is omitted."""
    if f is None:
        return [1.0] * len(family)
    inputs = system.level_sums(f)
    totals = system.level_sums()
    out = []
    for item in family:
        level, index = item.cube.level, tuple(item.cube.offset)
        value = 1.0
        for given, total in zip(inputs, totals):
            value *= (given[level][index] / total[level][index]) ** system.p if total[level][index] > 0 else 0.0
        out.append(value)
    return out


@dataclass
class DominationReport:
    lhs: float
    rhs: float
    constant: float

    @property
    def holds(self):
        return self.lhs <= self.rhs * (1 + RELATIVE_TOL)

    def to_dict(self):
        return {'lhs': self.lhs, 'rhs': self.rhs, 'constant': self.constant, 'holds': self.holds}


def domination_check(system, f=None, family=None):
    """int M_D(f sigma)^p omega <= a^p sum_Q a_Q prod_i (sigma_i(Q)^-1 int_Q f_i sigma_i)^p."""
    grid = system.grid
    family = build_sparse(system, f) if family is None else family
    values = dyadic_maximal(system, f, witnesses=False).values
    lhs = float(np.sum(values ** system.p * system.omega.density)) * grid.cell_volume
    weights = coefficients(system, family)
    total = sum(w * r for w, r in zip(weights, input_ratios(system, family, f)))
    constant = family.base ** system.p
    report = DominationReport(lhs, constant * total, constant)
    if not report.holds:
        raise DominationError("Sparse domination failed", report.to_dict())
    return report


@dataclass
class CarlesonReport:
    a_star: float
    lhs: float
    rhs: float
    witness: object = None

    @property
    def vacuous(self):
        return not np.isfinite(self.a_star)

    @property
    def holds(self):
        return self.vacuous or self.lhs <= self.rhs * (1 + RELATIVE_TOL)

    def to_dict(self):
        return {
            'A_star': self.a_star,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'holds': self.holds,
            'vacuous': self.vacuous,
            'witness': self.witness.to_dict() if self.witness else None,
        }


def carleson_check(system, family, f=None):
    """Carleson embedding with A* = max_R sum_{Q in R} a_Q / int_R prod sigma_i^{p/p_i}."""
    grid = system.grid
    weights = coefficients(system, family)
    own = coefficient_levels(grid, family, weights)
    subtree = [None] * (grid.L_max + 1)
    subtree[grid.L_max] = own[grid.L_max]
    for level in range(grid.L_max - 1, -1, -1):
        subtree[level] = own[level] + block_sums(subtree[level + 1], grid.nu)
    product = system.product_weight.level_sums(grid)

    a_star, witness = 0.0, None
    for level in range(grid.L_max + 1):
        mass = product[level] * grid.cell_volume
        ratios = np.zeros(mass.shape)
        np.divide(subtree[level], mass, out=ratios, where=mass > 0)
        ratios[(mass <= 0) & (subtree[level] > 0)] = np.inf
        flat = int(np.argmax(ratios))
        if ratios.flat[flat] > a_star:
            a_star = float(ratios.flat[flat])
            witness = grid.cube(level, np.unravel_index(flat, ratios.shape))

    lhs = sum(w * r for w, r in zip(weights, input_ratios(system, family, f)))
    f_values = system.admissible(f) if f is not None else [np.ones(grid.shape)] * system.m
    norms = 1.0
    for fi, sigma, pi, conjugate in zip(f_values, system.sigmas, system.exponents.p_i, system.exponents.conjugates):
        integral = float(np.sum(fi ** pi * sigma.density)) * grid.cell_volume
        norms *= conjugate ** system.p * integral ** (system.p / pi)
    rhs = a_star * norms if np.isfinite(a_star) else np.inf
    report = CarlesonReport(a_star, lhs, rhs, witness)
    if not report.holds:
        raise CarlesonError("Carleson embedding failed", report.to_dict())
    return report
