"""Toric checks for the resolution of the transverse 1/6(4,5,5) singularity.

Cones are given by their rays, stored as rows.  For a simplicial full-rank
cone with ray matrix R the affine toric variety is C^n / (N / N') where N' is
the row span of R; an element v of N acts on the coordinate of ray i with
weight equal to the i-th coefficient of v in the ray basis, taken mod 1.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .arith import smith_normal_form
from .qlattice import det, inverse
from .reidtai import QuotientSingularity, noncanonical_witness

# the diagonal actions are exactly the objects reidtai works with
TorusWeight = QuotientSingularity

Vector = tuple[int, ...]


class NonCyclicQuotient(ValueError):
    """Raised by quotient_type when N/N' needs more than one generator."""

    def __init__(self, invariant_factors, weights):
        self.invariant_factors = list(invariant_factors)
        self.weights = list(weights)
        super().__init__(f"non-cyclic quotient with invariant factors {self.invariant_factors}")


@dataclass(frozen=True)
class Cone:
    rays: tuple[Vector, ...]

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        if not rays:
            raise ValueError("a cone needs at least one ray")
        dims = {len(r) for r in rays}
        if len(dims) != 1:
            raise ValueError("rays of different lengths")
        for r in rays:
            if math.gcd(*r) != 1:
                raise ValueError(f"ray {r} is not primitive")
        object.__setattr__(self, "rays", rays)

    @property
    def dim(self) -> int:
        return len(self.rays[0])

    def is_simplicial_full(self) -> bool:
        return len(self.rays) == self.dim and det(self.rays) != 0

    def _require_full(self):
        if not self.is_simplicial_full():
            raise ValueError("cone must be simplicial of full rank")

    def coefficients(self, v: Sequence[int]) -> list[Fraction]:
        """Coordinates c of v in the ray basis, v = sum c_i r_i."""
        self._require_full()
        Rinv = inverse(self.rays)
        return [sum(Fraction(v[k]) * Rinv[k][i] for k in range(self.dim)) for i in range(self.dim)]

    def contains(self, v: Sequence[int]) -> bool:
        return all(c >= 0 for c in self.coefficients(v))


def cone_index(c: Cone) -> int:
    """|det| of the ray matrix; the cone is smooth iff this is 1."""
    c._require_full()
    return abs(int(det(c.rays)))


def quotient_type(c: Cone) -> QuotientSingularity:
    """The action of N/N' on the ray coordinates, as 1/m(w_1, ..., w_n).

    With U R V = D the classes of the rows of V^-1 generate N/N', and the i-th
    of them acts with weights (row i of U) / d_i.
    """
    c._require_full()
    U, D, _ = smith_normal_form(c.rays)
    n = c.dim
    gens = [(D[i][i], tuple(U[i][j] % D[i][i] for j in range(n))) for i in range(n) if D[i][i] > 1]
    if not gens:
        return QuotientSingularity(1, (0,) * n)
    if len(gens) > 1:
        raise NonCyclicQuotient([d for d, _ in gens], [QuotientSingularity(d, w) for d, w in gens])
    m, w = gens[0]
    return QuotientSingularity(m, w)


def canonical_form(c: Cone) -> list[Fraction]:
    """m_K as a vector: the linear functional equal to 1 on every ray."""
    c._require_full()
    Rinv = inverse(c.rays)
    return [sum(Rinv[i][j] for j in range(c.dim)) for i in range(c.dim)]


def ray_discrepancy(c: Cone, ray: Sequence[int]) -> Fraction:
    """Coefficient of D_ray in psi^*K_{X(c)} - K_{X(Sigma)}, i.e. 1 - <m_K, ray>.

    This is minus the usual discrepancy: a blow-up ray with coefficient 1/3
    has discrepancy -1/3.  Original rays give 0.
    """
    ray = tuple(int(x) for x in ray)
    if len(ray) != c.dim:
        raise ValueError("dimension mismatch")
    if not c.contains(ray):
        raise ValueError(f"ray {ray} lies outside the cone")
    mk = canonical_form(c)
    return 1 - sum(a * b for a, b in zip(mk, ray))


def box_element(c: Cone, ray: Sequence[int]) -> QuotientSingularity:
    """The group element of N/N' represented by a lattice point, as a weight."""
    coeffs = c.coefficients(ray)
    m = cone_index(c)
    return QuotientSingularity(m, tuple(int(x * m) for x in coeffs))


def induced_weight(w: TorusWeight, chart: Sequence[Sequence[int]]) -> TorusWeight:
    """Weights of the monomials t_j = prod u_i^{chart[j][i]} under w.

    The chart must be invertible and its determinant prime to the order,
    so that the induced action is again faithful of the same order.
    """
    M = [list(map(int, row)) for row in chart]
    n = len(w.exponents)
    if len(M) != n or any(len(row) != n for row in M):
        raise ValueError("chart must be a square matrix matching the weight")
    dt = int(det(M))
    if dt == 0 or math.gcd(dt, w.m) != 1:
        raise ValueError(f"chart determinant {dt} is not invertible mod {w.m}")
    return QuotientSingularity(w.m, tuple(sum(a * e for a, e in zip(row, w.exponents)) for row in M))


def is_canonical(w: TorusWeight, quasi_reflections: str = "exempt") -> bool:
    return noncanonical_witness(w, quasi_reflections) is None


# ---------------------------------------------------------------------------
# fans and section polytopes


@dataclass(frozen=True)
class Fan:
    rays: tuple[Vector, ...]
    cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        cones = tuple(tuple(sorted(c)) for c in self.cones)
        for c in cones:
            if any(i < 0 or i >= len(rays) for i in c):
                raise ValueError(f"cone {c} refers to a missing ray")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "cones", cones)
        for c in self.maximal_cones():
            Cone(c.rays)

    @property
    def dim(self) -> int:
        return len(self.rays[0])

    def maximal_cones(self) -> list[Cone]:
        return [Cone(tuple(self.rays[i] for i in c)) for c in self.cones]

    @classmethod
    def from_json(cls, text: str) -> "Fan":
        data = json.loads(text)
        return cls(tuple(map(tuple, data["rays"])), tuple(map(tuple, data["cones"])))

    def to_json(self) -> str:
        return json.dumps({"rays": [list(r) for r in self.rays], "cones": [list(c) for c in self.cones]})


def fan_walls_ok(fan: Fan) -> bool:
    """Each wall of a simplicial complete fan separates exactly two maximal cones."""
    n = fan.dim
    walls: dict[tuple[int, ...], list[int]] = {}
    for c in fan.cones:
        if len(c) != n or det([fan.rays[i] for i in c]) == 0:
            return False
        for drop in c:
            rest = tuple(i for i in c if i != drop)
            walls.setdefault(rest, []).append(drop)
    for rest, opposite in walls.items():
        if len(opposite) != 2:
            return False
        # the two opposite rays must lie on different sides of the wall
        normal = _normal(fan, rest)
        s = [sum(a * b for a, b in zip(normal, fan.rays[i])) for i in opposite]
        if s[0] * s[1] >= 0:
            return False
    return True


def is_subdivision_of(fan: Fan, cone: Cone) -> bool:
    """Interior walls separate two cones and the remaining walls lie on facets of the cone."""
    n = fan.dim
    if any(not cone.contains(r) for r in fan.rays):
        return False
    coeffs = {i: cone.coefficients(r) for i, r in enumerate(fan.rays)}
    walls: dict[tuple[int, ...], list[int]] = {}
    for c in fan.cones:
        if len(c) != n or det([fan.rays[i] for i in c]) == 0:
            return False
        for drop in c:
            walls.setdefault(tuple(i for i in c if i != drop), []).append(drop)
    for rest, opposite in walls.items():
        on_facet = any(all(coeffs[i][k] == 0 for i in rest) for k in range(n))
        if len(opposite) == 1:
            if not on_facet:
                return False
        elif len(opposite) == 2 and not on_facet:
            normal = _normal(fan, rest)
            s = [sum(a * b for a, b in zip(normal, fan.rays[i])) for i in opposite]
            if s[0] * s[1] >= 0:
                return False
        else:
            return False
    return True


def _normal(fan: Fan, rest: tuple[int, ...]) -> list[Fraction]:
    n = fan.dim
    rows = [fan.rays[i] for i in rest]
    # cofactor expansion gives an integer normal to n - 1 vectors
    out = []
    for k in range(n):
        minor = [[r[j] for j in range(n) if j != k] for r in rows]
        out.append((-1) ** k * det(minor) if minor else Fraction(1))
    return out


def _solve(rows, rhs):
    A = inverse(rows)
    return [sum(A[i][j] * rhs[j] for j in range(len(rhs))) for i in range(len(rhs))]


def _recession_nontrivial(rays: Sequence[Vector]) -> bool:
    n = len(rays[0])
    if n == 1:
        return not (any(r[0] > 0 for r in rays) and any(r[0] < 0 for r in rays))
    M = [list(r) for r in rays]
    U, D, _ = smith_normal_form(M)
    if sum(1 for i in range(min(len(M), n)) if D[i][i]) < n:
        return True
    # a pointed nonzero cone {m : <m, v> >= 0} has an extreme ray cut out by n - 1 tight rays
    for sub in itertools.combinations(range(len(rays)), n - 1):
        normal = _normal(Fan(tuple(rays), ()), sub)
        if not any(normal):
            continue
        for sgn in (1, -1):
            d = [sgn * x for x in normal]
            if all(sum(a * b for a, b in zip(d, r)) >= 0 for r in rays):
                return True
    return False


def polytope_vertices(rays: Sequence[Vector], coeffs: Sequence[int]) -> list[tuple[Fraction, ...]]:
    """Vertices of P = {m : <m, v_i> >= -a_i}, by exact enumeration of n-subsets."""
    n = len(rays[0])
    out = set()
    for sub in itertools.combinations(range(len(rays)), n):
        rows = [rays[i] for i in sub]
        if det(rows) == 0:
            continue
        m = _solve(rows, [-coeffs[i] for i in sub])
        if all(sum(a * b for a, b in zip(m, r)) >= -c for r, c in zip(rays, coeffs)):
            out.add(tuple(m))
    return sorted(out)


def section_points(fan: Fan, coeffs: Mapping[int, int] | Sequence[int]) -> list[Vector]:
    """Lattice points of the section polytope of sum a_v D_v, sorted."""
    rays = fan.rays
    if isinstance(coeffs, Mapping):
        a = [int(coeffs.get(i, 0)) for i in range(len(rays))]
    else:
        a = [int(x) for x in coeffs]
    if len(a) != len(rays):
        raise ValueError("one coefficient per ray is required")
    if _recession_nontrivial(rays):
        raise ValueError("unbounded polyhedron: the rays do not positively span")
    verts = polytope_vertices(rays, a)
    if not verts:
        return []
    n = fan.dim
    lo = [math.floor(min(v[k] for v in verts)) for k in range(n)]
    hi = [math.ceil(max(v[k] for v in verts)) for k in range(n)]
    pts = []
    for m in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        if all(sum(x * y for x, y in zip(m, r)) >= -c for r, c in zip(rays, a)):
            pts.append(m)
    return pts


def section_count(fan: Fan, coeffs: Mapping[int, int] | Sequence[int]) -> int:
    """h^0 of the torus-invariant divisor sum a_v D_v on X(fan)."""
    return len(section_points(fan, coeffs))


# ---------------------------------------------------------------------------
# the configuration used for the transverse singularity along C_1

V0, V1, V2, V3, V4 = (3, -1, 0), (0, 2, -1), (0, 0, 1), (0, 1, 0), (1, 0, 0)
SIGMA = Cone((V0, V1, V2))
SIGMA_SUBDIVISION = Fan((V0, V1, V2, V3, V4), ((0, 1, 4), (0, 2, 4), (1, 3, 4), (2, 3, 4)))

G4 = QuotientSingularity(4, (2, 0, 1, 1))
G6 = QuotientSingularity(6, (0, 4, 5, 5))

# maximal cones of the resolution in Z^4 (first coordinate along C_1)
SIGMA4 = (
    Cone(((1, 0, 0, 0), (0, 3, -1, 0), (0, 0, 2, -1), (0, 1, 0, 0))),
    Cone(((1, 0, 0, 0), (0, 3, -1, 0), (0, 0, 0, 1), (0, 1, 0, 0))),
    Cone(((1, 0, 0, 0), (0, 0, 2, -1), (0, 0, 1, 0), (0, 1, 0, 0))),
    Cone(((1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0))),
)

# monomial charts rho_i as exponent rows in (u_0, u_1, u_2, u_3)
CHARTS = (
    ((1, 0, 0, 0), (0, 3, -1, 0), (0, 0, 2, -1), (0, 1, 0, 0)),
    ((1, 0, 0, 0), (0, 3, -1, 0), (0, 0, 0, 1), (0, 0, 1, 0)),
    ((1, 0, 0, 0), (0, 0, 2, -1), (0, 0, 1, 0), (0, 1, 0, 0)),
    ((1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0)),
)
PRINTED_CHART_WEIGHTS = (
    QuotientSingularity(4, (2, 3, 1, 0)),
    QuotientSingularity(4, (2, 3, 1, 1)),
    QuotientSingularity(4, (2, 1, 1, 0)),
    QuotientSingularity(4, (2, 1, 1, 0)),
)

# the fan of the exceptional divisor, cone labels read as ray indices
LAMBDA = Fan(
    ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 2, -1), (0, 0, 1), (0, 1, 0)),
    ((0, 2, 3), (0, 2, 4), (0, 3, 5), (0, 4, 5), (1, 2, 3), (1, 2, 4), (1, 3, 5), (1, 4, 5)),
)


def movediv_coeffs(a: int) -> tuple[int, ...]:
    """Coefficients of the moved divisor on the rays of LAMBDA."""
    return (-1, -1, 2 - a, -1, -1, -1)
