"""
The multilinear maximal function M(f_1 sigma_1, ..., f_m sigma_m) on the lattice.

Three engines share one tie rule (on equal values the largest cube wins):

* ``dyadic_maximal``: top-down sweep over the standard grid levels.
* ``grid_maximal``: the same over any one of the shifted grids.
* ``general_maximal_bruteforce``: every lattice cube, guarded by the work budget.
"""
import logging
from dataclasses import dataclass

import numpy as np

from . import conf
from .exceptions import BudgetExceededError
from .grid import COVER_RATIO, STANDARD, enumerate_cubes
from .weights import DiscreteWeight, upsample

logger = logging.getLogger(__name__)

RELATIVE_TOL = 1e-10


@dataclass
class MaximalField:
    values: np.ndarray
    scope: str
    witnesses: list | None = None

    def witness(self, cell):
        if self.witnesses is None:
            return None
        return self.witnesses[int(np.ravel_multi_index(cell, self.values.shape))]

    def energy(self, omega, p):
        """Sum over cells of M^p omega, in cell units."""
        return float(np.sum(self.values ** p * omega.density))

    def table(self):
        d = self.values.ndim
        header = ['cell'] + [f'x{axis + 1}' for axis in range(d)] + ['value', 'witness']
        rows = []
        for flat, index in enumerate(np.ndindex(self.values.shape)):
            cube = self.witnesses[flat] if self.witnesses else None
            rows.append([flat, *index, float(self.values[index]), str(cube) if cube else ''])
        return header, rows

    def write_csv(self, writer):
        header, rows = self.table()
        writer.writerow(header)
        for row in rows:
            writer.writerow(row[:-2] + [repr(row[-2]), row[-1]])


def level_products(grid, level_sums):
    """Per level, prod_i of the averages over every standard grid cube."""
    products = []
    for level in range(grid.L_max + 1):
        volume = grid.side(level) ** grid.d
        value = np.ones((grid.nu ** level,) * grid.d)
        for sums in level_sums:
            value = value * (sums[level] / volume)
        products.append(value)
    return products


def check_budget(grid, count, budget):
    budget = budget or conf.get('WEIGHTLAB_BUDGET')
    work = grid.cells * count
    if work > budget:
        raise BudgetExceededError(
            f"{count} cubes over {grid.cells} cells needs {work} updates, budget is {budget}",
            {'work': work, 'budget': budget, 'cubes': count},
        )


def dyadic_maximal(system, f=None, witnesses=True):
    grid = system.grid
    products = level_products(grid, system.level_sums(f))
    values = np.full(grid.shape, -1.0)
    levels = np.zeros(grid.shape, dtype=int)
    for level, product in enumerate(products):
        spread = upsample(product, grid.side(level))
        better = spread > values
        values = np.where(better, spread, values)
        levels[better] = level

    owners = None
    if witnesses:
        owners = []
        for cell in np.ndindex(grid.shape):
            level = int(levels[cell])
            width = grid.side(level)
            owners.append(grid.cube(level, [c // width for c in cell]))
    return MaximalField(values, STANDARD, owners)


def _cube_products(weights, cubes):
    out = np.ones(len(cubes))
    for weight in weights:
        out *= np.array([weight.cell_sum(cube) / cube.volume for cube in cubes])
    return out


def _sweep(grid, weights, cubes, scope, witnesses, initial):
    values = np.full(grid.shape, initial)
    owner = np.full(grid.shape, -1, dtype=int)
    for index, (cube, value) in enumerate(zip(cubes, _cube_products(weights, cubes))):
        region = values[cube.slices]
        better = value > region
        region[better] = value
        owner[cube.slices][better] = index
    values = np.maximum(values, 0.0)

    owners = None
    if witnesses:
        owners = [cubes[i] if i >= 0 else None for i in owner.ravel()]
    return MaximalField(values, scope, owners)


def grid_maximal(system, f=None, grid_id=STANDARD, witnesses=False):
    """Maximal function over one grid; cells no grid cube reaches get 0."""
    if grid_id == STANDARD:
        return dyadic_maximal(system, f, witnesses)
    grid = system.grid
    cubes = [cube for level in range(grid.L_max + 1) for cube in grid.level_cubes(level, grid_id)]
    weights = [DiscreteWeight(g, f'g_{i}') for i, g in enumerate(system.densities(f), start=1)]
    return _sweep(grid, weights, cubes, grid_id, witnesses, 0.0)


def general_maximal_bruteforce(system, f=None, scope='lattice', budget=None, witnesses=True):
    grid = system.grid
    cubes = enumerate_cubes(grid, scope)
    check_budget(grid, len(cubes), budget)
    logger.debug("Brute-force maximal function over %d %s cubes", len(cubes), scope)
    weights = [DiscreteWeight(g, f'g_{i}') for i, g in enumerate(system.densities(f), start=1)]
    return _sweep(grid, weights, cubes, scope, witnesses, -1.0)


@dataclass
class ShiftedBoundReport:
    ratio: float
    bound: float
    worst_cell: tuple | None

    @property
    def holds(self):
        return self.ratio <= self.bound * (1 + RELATIVE_TOL)

    def to_dict(self):
        return {
            'ratio': self.ratio,
            'bound': self.bound,
            'holds': self.holds,
            'worst_cell': list(self.worst_cell) if self.worst_cell else None,
        }


def shifted_bound_check(system, f=None, budget=None):
    """Compare the general maximal function with the largest of the 2^d grid maximal functions."""
    grid = system.grid
    general = general_maximal_bruteforce(system, f, 'lattice', budget, witnesses=False).values
    best = np.zeros(grid.shape)
    for grid_id in grid.grid_ids():
        best = np.maximum(best, grid_maximal(system, f, grid_id).values)

    ratio = np.zeros(grid.shape)
    np.divide(general, best, out=ratio, where=best > 0)
    ratio[(best == 0) & (general > 0)] = np.inf
    worst = np.unravel_index(int(np.argmax(ratio)), grid.shape) if ratio.size else None
    return ShiftedBoundReport(
        ratio=float(ratio.max()),
        bound=float(COVER_RATIO ** (grid.d * system.m)),
        worst_cell=tuple(int(i) for i in worst) if worst is not None else None,
    )


def lattice_products(system):
    """prod_i of sigma_i averages for every lattice cube, as arrays indexed by corner, keyed by side."""
    grid = system.grid
    out = {}
    for side in range(1, grid.resolution + 1):
        value = np.ones((grid.resolution - side + 1,) * grid.d)
        for sigma in system.sigmas:
            value = value * (sigma.windows(side) / side ** grid.d)
        out[side] = value
    return out


def _dilate(array, width, axis):
    """out[x] = max(array[x - width + 1 .. x]) along ``axis``, grown by width - 1 cells."""
    moved = np.moveaxis(array, axis, 0)
    run = np.zeros((moved.shape[0] + width - 1,) + moved.shape[1:])
    run[:moved.shape[0]] = moved
    span = 1
    while 2 * span <= width:
        shifted = np.zeros_like(run)
        shifted[span:] = run[:-span]
        run = np.maximum(run, shifted)
        span *= 2
    rest = width - span
    if rest:
        shifted = np.zeros_like(run)
        shifted[rest:] = run[:-rest]
        run = np.maximum(run, shifted)
    return np.moveaxis(run, 0, axis)


def local_lattice_field(products, cube):
    """M(sigma 1_Q) on the cells of Q over lattice cubes; only subcubes of Q matter there."""
    field = np.zeros((cube.side,) * cube.d)
    for side in range(1, cube.side + 1):
        window = products[side][tuple(slice(c, c + cube.side - side + 1) for c in cube.corner)]
        for axis in range(cube.d):
            window = _dilate(window, side, axis)
        np.maximum(field, window, out=field)
    return field
