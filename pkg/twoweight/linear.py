"""
Linear (m = 1) constants computed straight from their definitions.

Used to cross-check the multilinear code on systems with m identical sigma
weights and p_i = q: nothing below goes through the multilinear tables.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    compute_constants,
    default_doubling,
    energy_ratio,
    grid_scope,
    rh_constant,
)
from .grid import enumerate_cubes
from .weights import WeightSystem

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9


def _mean(density, cube):
    return float(np.mean(density[cube.slices]))


def _total(density, cube):
    return float(np.sum(density[cube.slices]))


def maximal_linear(density, cubes):
    field = np.zeros(density.shape)
    for cube in cubes:
        region = field[cube.slices]
        np.maximum(region, _mean(density, cube), out=region)
    return field


def ap_linear(omega, sigma, q, cubes):
    """sup <omega>_Q <sigma>_Q^{q-1}."""
    return max(_mean(omega, cube) * _mean(sigma, cube) ** (q - 1) for cube in cubes)


def testing_ratio_linear(omega, sigma, q, cubes, cube):
    mass = _total(sigma, cube)
    if mass <= 0:
        return 0.0
    local = np.zeros(sigma.shape)
    local[cube.slices] = sigma[cube.slices]
    field = maximal_linear(local, cubes)
    return float(np.sum(field[cube.slices] ** q * omega[cube.slices])) / mass


def eligible_linear(sigma, cubes, rho, D, resolution):
    """Cubes with a lattice enlargement P (side >= rho side(Q)) and sigma(P) <= D sigma(Q)."""
    d = sigma.ndim
    out = []
    for cube in cubes:
        least = math.ceil(rho * cube.side - 1e-9)
        mass = _total(sigma, cube)
        found = False
        for side in range(least, resolution + 1):
            ranges = [range(max(0, c + cube.side - side), min(c, resolution - side) + 1) for c in cube.corner]
            for corner in np.ndindex(*[len(r) for r in ranges]):
                lower = tuple(r[i] for r, i in zip(ranges, corner))
                window = tuple(slice(x, x + side) for x in lower)
                if float(np.sum(sigma[window])) <= D * mass:
                    found = True
                    break
            if found:
                break
        if found:
            out.append(cube)
    logger.debug("%d linear-eligible cubes in dimension %d", len(out), d)
    return out


def norm_linear(omega, sigma, q, f, cubes):
    """||M(f sigma)||_{L^q(omega)}^q / ||f||_{L^q(sigma)}^q."""
    field = maximal_linear(f * sigma, cubes)
    denominator = float(np.sum(f ** q * sigma))
    numerator = float(np.sum(field ** q * omega))
    if denominator <= 0:
        return math.inf if numerator > 0 else 0.0
    return numerator / denominator


@dataclass
class Identity:
    name: str
    multilinear: float
    linear: float

    @property
    def difference(self):
        if self.multilinear == self.linear:
            return 0.0
        scale = max(abs(self.multilinear), abs(self.linear))
        return abs(self.multilinear - self.linear) / scale

    @property
    def holds(self):
        return self.difference <= IDENTITY_TOL

    def to_dict(self):
        return {
            'identity': self.name,
            'multilinear': self.multilinear,
            'linear': self.linear,
            'relative_difference': self.difference,
            'holds': self.holds,
        }


def reduce_linear(grid, omega, sigma, q, copies=2, scope='dyadic', rho=2.0, D=None, trials=4, seed=0):
    """Compare the multilinear constants of (omega; sigma, ..., sigma) with their linear forms."""
    system = WeightSystem.from_arrays(grid, omega, [sigma] * copies, [q] * copies)
    if D is None:
        D = default_doubling(grid.d, copies, system.p, grid.nu)
    omega, sigma = system.omega.density, system.sigmas[0].density
    cubes = enumerate_cubes(grid, grid_scope(scope))

    report = compute_constants(system, scope, rho, D, with_norm=False)
    eligible = eligible_linear(sigma, cubes, rho, D, grid.resolution)

    rng = np.random.default_rng(seed)
    functions = []
    for cube in cubes[:trials]:
        indicator = np.zeros(grid.shape)
        indicator[cube.slices] = 1.0
        functions.append(indicator)
    functions.extend(rng.lognormal(0.0, 1.0, grid.shape) for _ in range(trials))
    multilinear_norm = max(energy_ratio(system, [f] * copies, scope) for f in functions)
    linear_norm = max(norm_linear(omega, sigma, q, np.where(sigma > 0, f, 0.0), cubes) for f in functions)

    identities = [
        Identity('RH', rh_constant(system, scope).value, 1.0),
        Identity('A', report.a_p.value, ap_linear(omega, sigma, q, cubes)),
        Identity('testing', report.testing.value,
                 max((testing_ratio_linear(omega, sigma, q, cubes, cube) for cube in eligible), default=0.0)),
        Identity('norm', multilinear_norm, linear_norm),
        Identity('S', report.s_p.value,
                 max(testing_ratio_linear(omega, sigma, q, cubes, cube) for cube in cubes)),
    ]
    for identity in identities:
        logger.info("%s: multilinear %.12g, linear %.12g", identity.name, identity.multilinear, identity.linear)
    return identities
