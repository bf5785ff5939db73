"""
Cube arithmetic on nu-ary grids truncated to the unit cube.

All geometry is carried in lattice cells: a cube is ``side`` cells wide with its
lower corner at ``corner``.  Grid cubes also remember which grid they belong to,
their level and their offset.  Shifted grids (nu = 2 only) translate level k by
(-1)^k * alpha / 2^k with alpha in {0, 1/3}^d, which lands on the lattice when the
resolution is 3 * 2^L_max.
"""
import itertools
import logging
import math
from dataclasses import dataclass

from .exceptions import AlignmentError, CoverUnavailableError, GridError, OutOfRootError

logger = logging.getLogger(__name__)

STANDARD = 'standard'
LATTICE = 'lattice'
SHIFT_PREFIX = 'shift:'
COVER_RATIO = 6

SCOPES = ('standard', 'shifted', 'lattice')


def shift_id(flags):
    if not any(flags):
        return STANDARD
    return SHIFT_PREFIX + ''.join(str(int(bool(flag))) for flag in flags)


def shift_flags(grid_id, d):
    if grid_id == STANDARD:
        return (0,) * d
    digits = grid_id[len(SHIFT_PREFIX):]
    if not grid_id.startswith(SHIFT_PREFIX) or len(digits) != d or set(digits) - {'0', '1'}:
        raise GridError(f"Unknown grid id {grid_id!r} for dimension {d}", {'grid_id': grid_id})
    return tuple(int(c) for c in digits)


@dataclass(frozen=True)
class Cube:
    grid_id: str
    level: int | None
    offset: tuple
    corner: tuple
    side: int

    @property
    def d(self):
        return len(self.corner)

    @property
    def volume(self):
        """Number of lattice cells."""
        return self.side ** self.d

    @property
    def slices(self):
        return tuple(slice(c, c + self.side) for c in self.corner)

    def contains(self, other):
        return all(
            c <= o and o + other.side <= c + self.side
            for c, o in zip(self.corner, other.corner)
        )

    def contains_cell(self, cell):
        return all(c <= x < c + self.side for c, x in zip(self.corner, cell))

    def sort_key(self):
        return (-self.side, self.corner, self.grid_id)

    def to_dict(self):
        return {
            'grid': self.grid_id,
            'level': self.level,
            'offset': list(self.offset),
            'corner': list(self.corner),
            'side': self.side,
        }

    def __str__(self):
        if self.level is None:
            return f"lattice{list(self.corner)}+{self.side}"
        return f"{self.grid_id}[k={self.level}]{list(self.offset)}"


@dataclass(frozen=True)
class GridConfig:
    d: int
    nu: int = 2
    L_max: int = 3
    shifted: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise GridError(f"Dimension must be at least 1, got {self.d}", {'d': self.d})
        if self.nu < 2:
            raise GridError(f"Grid base must be at least 2, got {self.nu}", {'nu': self.nu})
        if self.L_max < 0:
            raise GridError(f"L_max must be nonnegative, got {self.L_max}", {'L_max': self.L_max})
        if self.shifted and self.nu != 2:
            raise GridError("Shifted grids are only available for nu = 2", {'nu': self.nu})

    @classmethod
    def for_rho(cls, d, rho, L_max, shifted=False):
        """Pick nu = ceil(rho) so that a grid parent is a legal rho-enlargement."""
        if rho <= 1:
            raise GridError(f"rho must exceed 1, got {rho}", {'rho': rho})
        nu = max(2, math.ceil(rho))
        return cls(d=d, nu=nu, L_max=L_max, shifted=shifted)

    @property
    def resolution(self):
        return (3 if self.shifted else 1) * self.nu ** self.L_max

    @property
    def shape(self):
        return (self.resolution,) * self.d

    @property
    def cells(self):
        return self.resolution ** self.d

    @property
    def cell_volume(self):
        return 1.0 / self.cells

    def side(self, level):
        if not 0 <= level <= self.L_max:
            raise GridError(f"Level {level} outside 0..{self.L_max}", {'level': level})
        return self.resolution // self.nu ** level

    def grid_ids(self):
        if not self.shifted:
            return [STANDARD]
        return [shift_id(flags) for flags in itertools.product((0, 1), repeat=self.d)]

    def shift(self, level, flag):
        if not flag:
            return 0
        third = self.side(level) // 3
        return third if level % 2 == 0 else -third

    def _axis_offsets(self, level, flag):
        width = self.side(level)
        shift = self.shift(level, flag)
        return [
            o for o in range(-1, self.nu ** level + 1)
            if 0 <= o * width + shift and o * width + shift + width <= self.resolution
        ]

    def cube(self, level, offset, grid_id=STANDARD):
        offset = tuple(int(o) for o in offset)
        if len(offset) != self.d:
            raise GridError(f"Offset {offset} does not have {self.d} entries", {'offset': list(offset)})
        flags = shift_flags(grid_id, self.d)
        if any(flags) and not self.shifted:
            raise GridError(f"Grid {grid_id} needs shifted grids enabled", {'grid_id': grid_id})
        width = self.side(level)
        corner = tuple(o * width + self.shift(level, f) for o, f in zip(offset, flags))
        if any(c < 0 or c + width > self.resolution for c in corner):
            raise GridError(
                f"Cube {list(offset)} at level {level} of {grid_id} leaves the unit cube",
                {'level': level, 'offset': list(offset), 'grid_id': grid_id},
            )
        return Cube(grid_id, level, offset, corner, width)

    def root(self):
        return self.cube(0, (0,) * self.d)

    def lattice_cube(self, corner, side):
        corner = tuple(int(c) for c in corner)
        side = int(side)
        if len(corner) != self.d or side < 1 or any(c < 0 or c + side > self.resolution for c in corner):
            raise AlignmentError(
                f"Cube at {list(corner)} with side {side} is not inside the {self.resolution}-cell lattice",
                {'corner': list(corner), 'side': side},
            )
        return Cube(LATTICE, None, corner, corner, side)

    def cube_from_bounds(self, lower, sidelength):
        """Lattice cube prod [lower_i, lower_i + sidelength) given in unit-cube coordinates."""
        def cells(x):
            scaled = float(x) * self.resolution
            rounded = round(scaled)
            if abs(scaled - rounded) > 1e-9:
                raise AlignmentError(
                    f"{x} is not a multiple of 1/{self.resolution}",
                    {'value': x, 'resolution': self.resolution},
                )
            return rounded

        return self.lattice_cube([cells(x) for x in lower], cells(sidelength))

    def level_cubes(self, level, grid_id=STANDARD):
        flags = shift_flags(grid_id, self.d)
        axes = [self._axis_offsets(level, flag) for flag in flags]
        return [self.cube(level, offset, grid_id) for offset in itertools.product(*axes)]

    def children(self, cube):
        if cube.level is None:
            raise GridError("Lattice cubes have no grid children", {'cube': cube.to_dict()})
        if cube.level == self.L_max:
            return []
        return [
            child for child in self.level_cubes(cube.level + 1, cube.grid_id)
            if cube.contains(child)
        ]

    def ancestor(self, cube, j):
        """The grid cube j levels above ``cube`` that contains it."""
        if cube.level is None:
            raise GridError("Lattice cubes have no ancestors", {'cube': cube.to_dict()})
        if j < 0 or j > cube.level:
            raise OutOfRootError(
                f"{cube} has no ancestor {j} levels up",
                {'cube': cube.to_dict(), 'j': j},
            )
        if j == 0:
            return cube
        level = cube.level - j
        width = self.side(level)
        flags = shift_flags(cube.grid_id, self.d)
        offset = tuple(
            (c - self.shift(level, f)) // width for c, f in zip(cube.corner, flags)
        )
        try:
            return self.cube(level, offset, cube.grid_id)
        except GridError as exc:
            raise OutOfRootError(
                f"The ancestor of {cube} at level {level} is truncated away",
                {'cube': cube.to_dict(), 'j': j},
            ) from exc


def enumerate_cubes(grid, scope='standard', alpha=None):
    """Every cube of the scope, largest first and lexicographic within a size."""
    if scope == 'standard':
        return [cube for level in range(grid.L_max + 1) for cube in grid.level_cubes(level)]
    if scope == 'shifted':
        if alpha is None:
            raise GridError("The shifted scope needs alpha", {'scope': scope})
        grid_id = alpha if isinstance(alpha, str) else shift_id(alpha)
        return [cube for level in range(grid.L_max + 1) for cube in grid.level_cubes(level, grid_id)]
    if scope == 'lattice':
        n = grid.resolution
        return [
            grid.lattice_cube(corner, side)
            for side in range(n, 0, -1)
            for corner in itertools.product(range(n - side + 1), repeat=grid.d)
        ]
    raise GridError(f"Unknown scope {scope!r}; expected one of {', '.join(SCOPES)}", {'scope': scope})


def shifted_cover(grid, cube):
    """Smallest cube of the 2^d grids containing ``cube``; its side is at most six times larger."""
    if not grid.shifted:
        raise GridError("Shifted grids are disabled; use a resolution of 3 * 2^L_max", {'resolution': grid.resolution})
    n = grid.resolution
    if any(c < 0 or c + cube.side > n for c in cube.corner):
        raise AlignmentError(f"{cube} is not inside the lattice", {'cube': cube.to_dict()})

    for level in range(grid.L_max, -1, -1):
        width = grid.side(level)
        if width < cube.side:
            continue
        flags, offsets = [], []
        for c in cube.corner:
            for flag in (0, 1):
                shift = grid.shift(level, flag)
                start = ((c - shift) // width) * width + shift
                if start >= 0 and start + width <= n and c + cube.side <= start + width:
                    flags.append(flag)
                    offsets.append((start - shift) // width)
                    break
            else:
                break
        if len(flags) < grid.d:
            continue
        if width > COVER_RATIO * cube.side:
            break
        return grid.cube(level, offsets, shift_id(flags))

    raise CoverUnavailableError(
        f"No shifted-grid cube covers {cube} within ratio {COVER_RATIO}",
        {'cube': cube.to_dict()},
    )
