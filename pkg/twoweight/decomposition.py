"""
Parameter choice and the four-way split of a sparse family used by the
parent-testing bound.

Inside a root cube R every sparse cube Q with side nu^-n side(R) lands in
exactly one collection:

    T  below a maximal eligible cube of R's tree (testing part)
    U  not in T and n <= k (a bounded number of scales)
    A  not in T, n > k and A_p(Q) <= [A] / n^q (decaying Muckenhoupt part)
    L  everything else; the parameter choice makes L empty
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .constants import (
    ap_ratios,
    compute_constants,
    cube_blocks,
    default_doubling,
    sp_ratios,
)
from .exceptions import BoundViolationError, GridError, ParameterError, VerificationError
from .grid import STANDARD
from .sparse import build_sparse, carleson_check, coefficients, domination_check
from .weights import upsample

logger = logging.getLogger(__name__)

COLLECTIONS = ('T', 'U', 'A', 'L')
MODES = ('eligibility', 'numeric')
RELATIVE_TOL = 1e-10


def minimal_k(growth, q):
    """Least positive k with growth * n - q * log2(n) > 0 for every n >= k."""
    if growth <= 0:
        raise ParameterError(f"Growth rate {growth} must be positive", {'growth': growth})

    def excess(n):
        return growth * n - q * math.log2(n)

    # excess is increasing from q / (growth ln 2) on
    n = max(1, math.ceil(q / (growth * math.log(2))))
    while excess(n) <= 0:
        n += 1
    while n > 1 and excess(n - 1) > 0:
        n -= 1
    return n


@dataclass(frozen=True)
class ProofParameters:
    d: int
    m: int
    p: float
    nu: int
    rho: float
    q: float
    D: float
    k: int
    growth: float
    t: float | None = None
    diagnostic: bool = False

    @property
    def guaranteed(self):
        """Whether the parameters force the leftover collection to be empty."""
        return self.growth > 0

    def decay(self, n):
        return float(n) ** -self.q

    @property
    def tail(self):
        """sum over s > k of s^-q."""
        return float(zeta(self.q, self.k + 1))

    @property
    def near_count(self):
        return 2 * self.nu ** (self.d * (self.k + 1))

    def to_dict(self):
        return {
            'd': self.d,
            'm': self.m,
            'p': self.p,
            'nu': self.nu,
            'rho': self.rho,
            'q': self.q,
            'D': self.D,
            't': self.t,
            'k': self.k,
            'growth': self.growth,
            'guaranteed': self.guaranteed,
            'diagnostic': self.diagnostic,
            'tail': self.tail,
        }


def choose_parameters(d, exponents, q=2.0, rho=2.0, D=None, t=None, nu=2, diagnostic=False):
    m, p = exponents.m, exponents.p
    if not q > 1:
        raise ParameterError(f"q must exceed 1 for the scale sum to converge, got {q}", {'q': q})
    if not 1 < rho <= nu:
        raise ParameterError(f"rho must lie in (1, {nu}], got {rho}", {'rho': rho})
    if D is not None and t is not None:
        raise ParameterError("Give either D or t, not both", {'D': D, 't': t})
    if m * p <= 1:
        raise ParameterError(f"m p = {m * p} must exceed 1", {'m': m, 'p': p})

    log_nu = math.log2(nu)
    default_growth = d * m * p * log_nu
    if D is None and t is None:
        D = default_doubling(d, m, p, nu)
        growth = default_growth
    elif t is not None:
        D = float(nu) ** (d * t)
        growth = d * log_nu * ((t - 1.0) * (m * p - 1.0) - 1.0)
    else:
        if not D >= 1:
            raise ParameterError(f"D must be at least 1, got {D}", {'D': D})
        growth = (m * p - 1.0) * math.log2(D) - d * m * p * log_nu

    if growth <= 0:
        if not diagnostic:
            raise ParameterError(
                f"D = {D} is too small: (m p - 1) log2 D - d m p log2 nu = {growth} must be positive",
                {'D': D, 't': t, 'growth': growth},
            )
        logger.warning("Diagnostic run with non-positive growth %.6g; the leftover collection may be nonempty", growth)
        k = minimal_k(default_growth, q)
    else:
        k = minimal_k(growth, q)
    return ProofParameters(d=d, m=m, p=p, nu=nu, rho=rho, q=q, D=D, k=k, growth=growth, t=t, diagnostic=diagnostic)


@dataclass
class Member:
    item: object
    depth: int
    collection: str
    a_p: float
    top: object = None

    def to_dict(self):
        return {
            'k': self.item.k,
            'j': self.item.j,
            'cube': self.item.cube.to_dict(),
            'depth': self.depth,
            'collection': self.collection,
            'A_p': self.a_p,
            'top': self.top.to_dict() if self.top else None,
        }


@dataclass
class Partition:
    root: object
    params: ProofParameters
    mode: str
    a_p: float
    members: list
    tops: list = field(default_factory=list)

    def collection(self, name):
        return [member for member in self.members if member.collection == name]

    def counts(self):
        return {name: len(self.collection(name)) for name in COLLECTIONS}

    def to_dict(self):
        return {
            'root': self.root.to_dict(),
            'mode': self.mode,
            'A': self.a_p,
            'counts': self.counts(),
            'tops': [top.to_dict() for top in self.tops],
            'members': [member.to_dict() for member in self.members],
        }


def _eligible_levels(system, params, mode, testing):
    grid = system.grid
    shape = [(grid.nu ** level,) * grid.d for level in range(grid.L_max + 1)]
    if mode == 'eligibility':
        sums = system.level_sums()
        levels = [np.zeros(s, dtype=bool) for s in shape]
        for level in range(1, grid.L_max + 1):
            for s in sums:
                levels[level] |= upsample(s[level - 1], grid.nu) <= params.D * s[level]
        return levels
    if mode == 'numeric':
        _, ratios = sp_ratios(system, 'dyadic')
        return [values <= testing * (1 + RELATIVE_TOL) for values in ratios]
    raise ParameterError(f"Unknown mode {mode!r}; expected one of {', '.join(MODES)}", {'mode': mode})


def _subtree(root, level, nu):
    width = nu ** (level - root.level)
    return tuple(slice(o * width, (o + 1) * width) for o in root.offset)


def _top_above(grid, cube, depth, tops):
    for j in range(depth + 1):
        ancestor = grid.ancestor(cube, j)
        if ancestor in tops:
            return ancestor
    return None


def partition(system, family, params, root=None, mode='eligibility', a_p=None, testing=None):
    grid = system.grid
    root = grid.root() if root is None else root
    if root.level is None or root.grid_id != STANDARD:
        raise GridError(f"{root} is not a standard grid cube", {'root': root.to_dict()})
    if grid.nu != params.nu:
        raise ParameterError("Grid and parameters disagree on nu", {'grid': grid.nu, 'params': params.nu})

    ap_levels = ap_ratios(system, cube_blocks(system, 'dyadic'))
    a_p = max(float(values.max()) for values in ap_levels) if a_p is None else a_p
    if mode == 'numeric' and testing is None:
        raise ParameterError("Numeric mode needs the testing constant", {'mode': mode})
    eligible = _eligible_levels(system, params, mode, testing)

    tops, covered_levels, covered = [], {}, None
    for level in range(root.level, grid.L_max + 1):
        window = _subtree(root, level, grid.nu)
        here = eligible[level][window]
        inherited = np.zeros_like(here) if covered is None else upsample(covered, grid.nu)
        origin = np.array([s.start for s in window])
        for index in np.argwhere(here & ~inherited):
            tops.append(grid.cube(level, origin + index))
        covered = inherited | here
        covered_levels[level] = (origin, covered)
    top_set = set(tops)

    members = []
    for item in family:
        cube = item.cube
        if not root.contains(cube):
            continue
        depth = cube.level - root.level
        origin, covered = covered_levels[cube.level]
        value = float(ap_levels[cube.level][tuple(cube.offset)])
        top = None
        if covered[tuple(np.array(cube.offset) - origin)]:
            collection = 'T'
            top = _top_above(grid, cube, depth, top_set)
        elif depth <= params.k:
            collection = 'U'
        elif value <= a_p * params.decay(depth):
            collection = 'A'
        else:
            collection = 'L'
        members.append(Member(item, depth, collection, value, top))

    result = Partition(root, params, mode, a_p, members, tops)
    logger.info("Partition of %s: %s", root, result.counts())
    return result


@dataclass
class EmptinessReport:
    empty: bool
    certificates: list
    doubling_failures: list

    def to_dict(self):
        return {
            'empty': self.empty,
            'certificates': self.certificates,
            'doubling_failures': self.doubling_failures,
        }


def verify_empty(system, part):
    """Check the doubling chain of every non-T cube and certify each leftover cube."""
    grid = system.grid
    params = part.params
    sums = system.level_sums()
    omega = system.omega.level_sums(grid)
    dual = system.exponents.dual
    root = part.root
    ap_root = float(ap_ratios(system, cube_blocks(system, 'dyadic'))[root.level][tuple(root.offset)])

    failures, certificates = [], []
    for member in part.members:
        if member.collection == 'T':
            continue
        cube = member.item.cube
        chain = [grid.ancestor(cube, j) for j in range(member.depth + 1)]
        ratios = []
        for lower, upper in zip(chain, chain[1:]):
            step = []
            for s in sums:
                below = s[lower.level][tuple(lower.offset)]
                above = s[upper.level][tuple(upper.offset)]
                step.append(above / below if below > 0 else math.inf)
            ratios.append(step)
            if any(r <= params.D for r in step):
                failures.append({'cube': cube.to_dict(), 'ancestor': upper.to_dict(), 'ratios': step})
        if member.collection != 'L':
            continue

        n = member.depth
        index = tuple(cube.offset)
        lower_bound = params.D ** (n * (params.m * params.p - 1)) * omega[cube.level][index] / root.volume
        for s, exponent in zip(sums, dual):
            lower_bound *= (s[cube.level][index] / root.volume) ** exponent
        growth = 2.0 ** (params.growth * n)
        certificates.append({
            'cube': cube.to_dict(),
            'depth': n,
            'ancestors': [c.to_dict() for c in chain],
            'doubling_ratios': ratios,
            'A': part.a_p,
            'A_p_R': ap_root,
            'doubled_lower_bound': lower_bound,
            'rescaled_A_p_Q': growth * member.a_p,
            'decay_bound': growth * part.a_p * params.decay(n),
        })
    return EmptinessReport(not certificates, certificates, failures)


@dataclass
class CollectionBound:
    name: str
    lhs: float
    rhs: float
    count: int
    middle: float | None = None
    limit: int | None = None
    applicable: bool = True

    @property
    def holds(self):
        if not self.applicable:
            # the cube count does not depend on RH
            return self.limit is None or self.count <= self.limit
        ok = self.lhs <= self.rhs * (1 + RELATIVE_TOL)
        if self.middle is not None:
            ok = ok and self.lhs <= self.middle * (1 + RELATIVE_TOL)
        if self.limit is not None:
            ok = ok and self.count <= self.limit
        return ok

    def to_dict(self):
        return {
            'collection': self.name,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'middle': self.middle,
            'count': self.count,
            'count_limit': self.limit,
            'applicable': self.applicable,
            'holds': self.holds,
        }


def verify_collection_bounds(system, family, part, a_p, testing, rh):
    """
    Bounds for T, U and A against the constants, each with the root mass int_R prod sigma_i^{p/p_i}.

    An infinite RH leaves nothing to check: every bound comes back with
    ``applicable=False`` and infinite right-hand sides.
    """
    grid = system.grid
    params = part.params
    product = system.product_weight.level_sums(grid)
    root_mass = product[part.root.level][tuple(part.root.offset)] * grid.cell_volume
    weights = dict(zip((id(item) for item in family), coefficients(system, family)))
    applicable = math.isfinite(rh)
    if not applicable:
        logger.info("RH is infinite; the collection bounds of %s are not applicable", part.root)

    def total(name):
        return sum(weights[id(member.item)] for member in part.collection(name))

    def mass(member):
        cube = member.item.cube
        return product[cube.level][tuple(cube.offset)] * grid.cell_volume

    def scaled(value, factor):
        return factor * value if applicable else math.inf

    scale = a_p * rh
    near = part.collection('U')
    decaying = part.collection('A')
    per_depth = {}
    for member in decaying:
        per_depth.setdefault(member.depth, {})[member.item.cube] = mass(member)
    middle = sum(params.decay(n) * sum(masses.values()) for n, masses in per_depth.items())

    return [
        CollectionBound('T', total('T'), scaled(root_mass, testing * rh), len(part.collection('T')),
                        applicable=applicable),
        CollectionBound('U', total('U'), scaled(params.near_count * root_mass, scale), len(near),
                        middle=scaled(sum(mass(member) for member in near), scale), limit=params.near_count,
                        applicable=applicable),
        CollectionBound('A', total('A'), scaled(params.tail * root_mass, scale), len(decaying),
                        middle=scaled(middle, scale), applicable=applicable),
    ]


def assert_bounds(bounds):
    for bound in bounds:
        if not bound.holds:
            raise BoundViolationError(f"Collection {bound.name} exceeds its bound", bound.to_dict())


@dataclass
class TheoremReport:
    params: ProofParameters
    constants: object
    family_size: int
    partitions: list
    emptiness: list
    bounds: list
    domination: object
    carleson: object
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            'passed': self.passed,
            'failures': self.failures,
            'parameters': self.params.to_dict(),
            'constants': self.constants.to_dict(),
            'family_size': self.family_size,
            'partitions': [
                {
                    **part.to_dict(),
                    'emptiness': empty.to_dict(),
                    'bounds': [bound.to_dict() for bound in bounds],
                }
                for part, empty, bounds in zip(self.partitions, self.emptiness, self.bounds)
            ],
            'domination': self.domination.to_dict() if self.domination else None,
            'carleson': self.carleson.to_dict() if self.carleson else None,
        }


def verify_theorem(system, params, roots=None, mode='eligibility', scope='dyadic', f=None, budget=None):
    """Run every check behind the parent-testing bound and collect failures instead of stopping."""
    constants = compute_constants(system, scope, params.rho, params.D, budget=budget, with_norm=False)
    family = build_sparse(system, f)
    failures = []
    try:
        constants.assert_chain()
    except VerificationError as exc:
        failures.append({'check': 'chain', 'message': exc.message, 'details': exc.details})

    partitions, emptiness, bounds = [], [], []
    for root in roots or [system.grid.root()]:
        part = partition(system, family, params, root, mode, constants.a_p.value, constants.testing.value)
        empty = verify_empty(system, part)
        found = verify_collection_bounds(system, family, part, constants.a_p.value, constants.testing.value,
                                         constants.rh.value)
        if not empty.empty:
            failures.append({'check': 'leftover', 'root': root.to_dict(), 'certificates': empty.certificates})
        if empty.doubling_failures:
            failures.append({'check': 'doubling', 'root': root.to_dict(), 'cubes': empty.doubling_failures})
        try:
            assert_bounds(found)
        except VerificationError as exc:
            failures.append({'check': 'bounds', 'message': exc.message, 'details': exc.details})
        partitions.append(part)
        emptiness.append(empty)
        bounds.append(found)

    domination = carleson = None
    try:
        domination = domination_check(system, f, family)
    except VerificationError as exc:
        failures.append({'check': 'domination', 'message': exc.message, 'details': exc.details})
    try:
        carleson = carleson_check(system, family, f)
    except VerificationError as exc:
        failures.append({'check': 'carleson', 'message': exc.message, 'details': exc.details})

    report = TheoremReport(params, constants, len(family), partitions, emptiness, bounds,
                           domination, carleson, failures)
    if failures:
        logger.error("Verification failed: %s", ', '.join(item['check'] for item in failures))
    else:
        logger.info("Verification passed over %d root cube(s)", len(partitions))
    return report
