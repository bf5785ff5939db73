"""
Discrete weights, exponent vectors and weight systems.

A weight is a nonnegative density that is constant on every lattice cell.  Sums
are kept in cell units (plain sums of densities); the Lebesgue measure of a set is
its cell sum times the cell volume.
"""
import csv
import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import AlignmentError
from .grid import GridConfig

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12


def block_sums(array, width):
    """Sum non-overlapping blocks of ``width`` cells along every axis."""
    if width == 1:
        return np.array(array, dtype=float)
    shape = []
    for n in array.shape:
        shape.extend((n // width, width))
    return np.asarray(array, dtype=float).reshape(shape).sum(axis=tuple(range(1, 2 * array.ndim, 2)))


def upsample(array, width):
    for axis in range(array.ndim):
        array = np.repeat(array, width, axis=axis)
    return array


def tree_sums(grid, density):
    """Cell sums of every standard grid cube, one array per level, parents summed from children."""
    sums = [None] * (grid.L_max + 1)
    sums[grid.L_max] = block_sums(density, grid.side(grid.L_max))
    for level in range(grid.L_max - 1, -1, -1):
        sums[level] = block_sums(sums[level + 1], grid.nu)
    return sums


def window_sums(array, side):
    """Sums over every side^d window, indexed by lower corner.

    Separable running sums: windows with no mass come out exactly 0.
    """
    out = np.asarray(array, dtype=float)
    for axis in range(out.ndim):
        moved = np.moveaxis(out, axis, 0)
        running = np.concatenate([np.zeros((1,) + moved.shape[1:]), np.cumsum(moved, axis=0)])
        out = np.moveaxis(running[side:] - running[:-side], 0, axis)
    return out


def summed_area(array):
    table = np.zeros(tuple(n + 1 for n in array.shape), dtype=array.dtype)
    table[(slice(1, None),) * array.ndim] = array
    for axis in range(array.ndim):
        table = np.cumsum(table, axis=axis)
    return table


def _box(table, corner, side):
    d = len(corner)
    total = 0
    for bits in itertools.product((0, 1), repeat=d):
        index = tuple(c + b * side for c, b in zip(corner, bits))
        if (d - sum(bits)) % 2:
            total -= table[index]
        else:
            total += table[index]
    return total


def check_density(values, name):
    values = np.asarray(values, dtype=float)
    flat = values.ravel()
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise ValidationError({name: [f"Density at cell {int(bad[0])} is not finite ({flat[bad[0]]})"]})
    bad = np.flatnonzero(flat < 0)
    if bad.size:
        raise ValidationError({name: [f"Negative density {flat[bad[0]]} at cell {int(bad[0])}"]})


class DiscreteWeight:
    """Nonnegative piecewise-constant density on the finest lattice."""

    def __init__(self, density, name='w'):
        density = np.array(density, dtype=np.float64)
        if density.ndim == 0 or len(set(density.shape)) != 1:
            raise ValidationError({name: [f"Density must be a cube-shaped array, got shape {density.shape}"]})
        check_density(density, name)
        density.setflags(write=False)
        self.name = name
        self.density = density
        self.resolution = density.shape[0]
        self.d = density.ndim
        self.prefix = summed_area(density)
        self._support = summed_area((density > 0).astype(np.int64))
        self._levels = {}
        self._windows = {}

    @classmethod
    def from_flat(cls, values, d, resolution, name='w'):
        values = np.asarray(values, dtype=float)
        if values.size != resolution ** d:
            raise ValidationError({name: [f"Expected {resolution ** d} cells, got {values.size}"]})
        check_density(values, name)
        return cls(values.reshape((resolution,) * d), name)

    @classmethod
    def constant(cls, value, grid, name='w'):
        return cls(np.full(grid.shape, float(value)), name)

    @property
    def cell_volume(self):
        return 1.0 / self.resolution ** self.d

    def total(self):
        return float(self.prefix[(-1,) * self.d]) * self.cell_volume

    def cell_sum(self, cube):
        if cube.d != self.d or any(c < 0 or c + cube.side > self.resolution for c in cube.corner):
            raise AlignmentError(
                f"{cube} is not inside the {self.resolution}-cell lattice of {self.name}",
                {'cube': cube.to_dict(), 'weight': self.name},
            )
        if _box(self._support, cube.corner, cube.side) == 0:
            return 0.0
        return max(float(_box(self.prefix, cube.corner, cube.side)), 0.0)

    def level_sums(self, grid):
        key = (grid.nu, grid.L_max, grid.resolution)
        if key not in self._levels:
            if grid.resolution != self.resolution:
                raise AlignmentError(
                    f"{self.name} has resolution {self.resolution}, grid has {grid.resolution}",
                    {'weight': self.name},
                )
            self._levels[key] = tree_sums(grid, self.density)
        return self._levels[key]

    def windows(self, side):
        if side not in self._windows:
            self._windows[side] = window_sums(self.density, side)
        return self._windows[side]

    def scaled(self, factor):
        return DiscreteWeight(self.density * factor, self.name)

    def write_csv(self, handle):
        writer = csv.writer(handle)
        writer.writerow(['cell'] + [f'x{axis + 1}' for axis in range(self.d)] + ['density'])
        for flat, index in enumerate(np.ndindex(self.density.shape)):
            writer.writerow([flat, *index, repr(float(self.density[index]))])


def measure(weight, cube):
    """w(Q) as a Lebesgue integral over the unit cube."""
    return weight.cell_sum(cube) * weight.cell_volume


def average(weight, cube):
    return weight.cell_sum(cube) / cube.volume


def product_density(sigmas, exponents):
    out = np.ones_like(sigmas[0].density)
    for sigma, exponent in zip(sigmas, exponents):
        out = out * sigma.density ** exponent
    return out


def product_mass(sigmas, exponents, cube):
    """Integral over ``cube`` of prod_i sigma_i^{e_i}."""
    return measure(DiscreteWeight(product_density(sigmas, exponents), 'sigma_product'), cube)


@dataclass(frozen=True)
class ExponentVector:
    p_i: tuple
    declared_p: float | None = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.p_i)
        object.__setattr__(self, 'p_i', values)
        if not values:
            raise ValidationError({'p': ["At least one exponent is required"]})
        for index, value in enumerate(values, start=1):
            if not 1 < value < math.inf:
                raise ValidationError({'p': [f"p_{index} = {value} must lie in (1, inf)"]})

    @property
    def m(self):
        return len(self.p_i)

    @property
    def p(self):
        return 1.0 / sum(1.0 / v for v in self.p_i)

    @property
    def conjugates(self):
        return tuple(v / (v - 1.0) for v in self.p_i)

    @property
    def holder(self):
        """p / p_i, summing to 1."""
        return tuple(self.p / v for v in self.p_i)

    @property
    def dual(self):
        """p / p_i', summing to m p - 1."""
        return tuple(self.p - self.p / v for v in self.p_i)

    def check(self):
        errors = []
        total = sum(1.0 / v for v in self.p_i)
        if self.declared_p is not None and abs(1.0 / self.declared_p - total) > IDENTITY_TOL:
            errors.append(f"Declared p = {self.declared_p} but 1/p_1 + ... + 1/p_m = {total}")
        if self.m * self.p - 1.0 <= IDENTITY_TOL:
            errors.append(f"m p - 1 = {self.m * self.p - 1.0} must be positive")
        if errors:
            raise ValidationError({'p': errors})

    def to_dict(self):
        return {'p_i': list(self.p_i), 'p': self.p, 'm': self.m}


@dataclass(eq=False)
class WeightSystem:
    omega: DiscreteWeight
    sigmas: tuple
    exponents: ExponentVector
    grid: GridConfig

    def __post_init__(self):
        self.sigmas = tuple(self.sigmas)
        errors = {}
        if len(self.sigmas) != self.exponents.m:
            errors['sigma'] = [f"{len(self.sigmas)} sigma weights for {self.exponents.m} exponents"]
        for weight in (self.omega, *self.sigmas):
            if weight.resolution != self.grid.resolution or weight.d != self.grid.d:
                errors.setdefault(weight.name, []).append(
                    f"Shape {weight.density.shape} does not match the grid shape {self.grid.shape}"
                )
        if errors:
            raise ValidationError(errors)

    @classmethod
    def from_arrays(cls, grid, omega, sigmas, p_i, declared_p=None):
        return cls(
            omega=DiscreteWeight(omega, 'omega'),
            sigmas=[DiscreteWeight(s, f'sigma_{i}') for i, s in enumerate(sigmas, start=1)],
            exponents=ExponentVector(tuple(p_i), declared_p),
            grid=grid,
        )

    @classmethod
    def lebesgue(cls, grid, p_i):
        ones = np.ones(grid.shape)
        return cls.from_arrays(grid, ones, [ones] * len(p_i), p_i)

    @property
    def m(self):
        return self.exponents.m

    @property
    def p(self):
        return self.exponents.p

    @property
    def d(self):
        return self.grid.d

    @cached_property
    def product_weight(self):
        return DiscreteWeight(product_density(self.sigmas, self.exponents.holder), 'sigma_product')

    def replace(self, omega=None, sigmas=None):
        return WeightSystem(
            omega=self.omega if omega is None else DiscreteWeight(omega, 'omega'),
            sigmas=self.sigmas if sigmas is None else [
                DiscreteWeight(s, f'sigma_{i}') for i, s in enumerate(sigmas, start=1)
            ],
            exponents=self.exponents,
            grid=self.grid,
        )

    def scaled_omega(self, factor):
        return self.replace(omega=self.omega.density * factor)

    def admissible(self, f):
        """Test functions with f_i forced to zero where sigma_i vanishes."""
        if len(f) != self.m:
            raise ValidationError({'f': [f"Expected {self.m} functions, got {len(f)}"]})
        out = []
        for index, (fi, sigma) in enumerate(zip(f, self.sigmas), start=1):
            fi = np.asarray(fi, dtype=float)
            if fi.shape != self.grid.shape:
                raise ValidationError({'f': [f"f_{index} has shape {fi.shape}, expected {self.grid.shape}"]})
            check_density(fi, f'f_{index}')
            out.append(np.where(sigma.density > 0, fi, 0.0))
        return out

    def densities(self, f=None):
        """The products f_i sigma_i (sigma_i itself when f is omitted)."""
        if f is None:
            return [sigma.density for sigma in self.sigmas]
        return [fi * sigma.density for fi, sigma in zip(self.admissible(f), self.sigmas)]

    def level_sums(self, f=None):
        if f is None:
            return [sigma.level_sums(self.grid) for sigma in self.sigmas]
        return [tree_sums(self.grid, g) for g in self.densities(f)]


@dataclass
class ValidationReport:
    resolution: int
    d: int
    m: int
    p: float
    degenerate: dict
    valid: bool = True

    def to_dict(self):
        return {
            'valid': self.valid,
            'resolution': self.resolution,
            'd': self.d,
            'm': self.m,
            'p': self.p,
            'degenerate_cells': self.degenerate,
        }


def validate(system):
    """Check a weight system; raises ValidationError naming the offending field."""
    errors = {}
    for weight in (system.omega, *system.sigmas):
        try:
            check_density(weight.density, weight.name)
        except ValidationError as exc:
            errors.update(exc.message_dict)
        if weight.resolution != system.grid.resolution:
            errors.setdefault(weight.name, []).append(
                f"Resolution {weight.resolution} differs from the grid resolution {system.grid.resolution}"
            )
    try:
        system.exponents.check()
    except ValidationError as exc:
        errors.update(exc.message_dict)
    if errors:
        raise ValidationError(errors)

    degenerate = {}
    for sigma in system.sigmas:
        zeros = np.flatnonzero(sigma.density.ravel() == 0)
        if zeros.size:
            degenerate[sigma.name] = [int(i) for i in zeros]
            logger.info("%s vanishes on %d cells", sigma.name, zeros.size)
    return ValidationReport(
        resolution=system.grid.resolution,
        d=system.d,
        m=system.m,
        p=system.p,
        degenerate=degenerate,
    )
