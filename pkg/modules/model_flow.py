import logging
from dataclasses import dataclass, field
from enum import Enum
from math import factorial
from typing import Any, Dict, List, Optional, Sequence

from modules.exact_linalg import (
    Mat,
    column,
    column_values,
    entry,
    identity,
    is_zero,
    rank,
    hstack,
    scale,
    to_scalar,
    unit,
)
from modules.graded_algebras import (
    GradedAlgebra,
    UnsupportedOperationError,
    bracket,
    grading_projection,
    pair,
    vector_inner_product,
)
from modules.isotropy import (
    C_of,
    IsotropyError,
    NotInTError,
    T_failures,
    geometric_type,
)

logger = logging.getLogger(__name__)


class NotNilpotentError(ValueError):
    pass


class FlowPoleError(ValueError):
    pass


class ChartError(ValueError):
    pass


class PointClass(str, Enum):
    MOVING = "Moving"
    ZERO_OF_FIELD = "ZeroOfField"
    FIXED_SAME_TYPE = "HigherOrderFixedSameType"
    FIXED_OTHER_TYPE = "HigherOrderFixedOtherType"


def _proportional(u: Mat, v: Mat) -> bool:
    if is_zero(u) or is_zero(v):
        return is_zero(u) and is_zero(v)
    return u.shape == v.shape and rank(hstack([u, v])) == 1


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A matrix in G; equal up to a nonzero scalar (projective) or a sign (conformal)."""

    matrix: Mat
    projective: bool = True

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix * other.matrix, self.projective)

    def apply(self, point: "ModelPoint") -> "ModelPoint":
        return ModelPoint(self.matrix * point.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        if self.projective:
            return _proportional(_flatten(self.matrix), _flatten(other.matrix))
        return is_zero(self.matrix - other.matrix) or is_zero(self.matrix + other.matrix)

    __hash__ = None

    def preserves_form(self, S: Mat) -> bool:
        return is_zero(self.matrix.transpose() * S * self.matrix - S)


def _flatten(M: Mat) -> Mat:
    rows, cols = M.shape
    return column([entry(M, i, j) for i in range(rows) for j in range(cols)])


@dataclass(frozen=True, eq=False)
class ModelPoint:
    """A point of G/P given by a homogeneous coordinate column."""

    coords: Mat

    def __post_init__(self):
        if is_zero(self.coords):
            raise ValueError("Homogeneous coordinates must be nonzero")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelPoint):
            return NotImplemented
        return _proportional(self.coords, other.coords)

    __hash__ = None

    def values(self) -> List[Any]:
        return column_values(self.coords)

    def on_quadric(self, S: Mat) -> bool:
        return entry(self.coords.transpose() * S * self.coords, 0, 0) == 0


# ---------------------------------------------------------------------------
# Exponentials, P and the base point
# ---------------------------------------------------------------------------

def exp_nilpotent(M: Mat, projective: bool = True) -> GroupElement:
    """Terminating exponential series of a nilpotent matrix."""
    size = M.shape[0]
    total, power = identity(size), identity(size)
    for k in range(1, size + 1):
        power = power * M
        if is_zero(power):
            return GroupElement(total, projective)
        total = total + scale(power, to_scalar(f"1/{factorial(k)}"))
    raise NotNilpotentError(f"Matrix is not nilpotent: M^{size} != 0")


def exp_in(alg: GradedAlgebra, M: Mat) -> GroupElement:
    return exp_nilpotent(M, alg.family.is_projective)


def base_point(alg: GradedAlgebra) -> ModelPoint:
    return ModelPoint(unit(alg.size, 1, 0, 0))


def in_P(g: GroupElement) -> bool:
    """g fixes the base point: its first column is a multiple of e_0."""
    first = g.matrix.extract(list(range(g.matrix.shape[0])), [0])
    return entry(first, 0, 0) != 0 and all(entry(first, i, 0) == 0 for i in range(1, first.shape[0]))


def normal_point(alg: GradedAlgebra, X: Mat, s: Any = 1) -> ModelPoint:
    return exp_in(alg, scale(alg.inject_vector(X), s)).apply(base_point(alg))


def flow(alg: GradedAlgebra, Z: Mat, t: Any, point: ModelPoint) -> ModelPoint:
    return exp_in(alg, scale(alg.inject_covector(Z), t)).apply(point)


# ---------------------------------------------------------------------------
# Flow laws
# ---------------------------------------------------------------------------

@dataclass
class FlowCheck:
    s: Any
    t: Any
    s_prime: Any
    holds: bool
    asserted: bool

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> Dict[str, Any]:
        return {"s": self.s, "t": self.t, "s_prime": self.s_prime, "holds": self.holds, "asserted": self.asserted}


def _require_in_T(alg: GradedAlgebra, Z: Mat, X: Mat) -> None:
    failed = T_failures(alg, Z, X)
    if failed:
        raise NotInTError(f"X is not in T(Z): {' and '.join(failed)} fails")


def verify_flow_law(alg: GradedAlgebra, Z: Mat, X: Mat, s: Any, t: Any) -> FlowCheck:
    """phi^t(exp(sX) o) = exp(s' X) o with s' = s/(1+st)."""
    s, t = to_scalar(s), to_scalar(t)
    _require_in_T(alg, Z, X)
    denominator = 1 + s * t
    if denominator == 0:
        raise FlowPoleError(f"Flow blows up: 1 + s*t = 0 at s={s}, t={t}")
    s_prime = s / denominator

    iX, iZ = alg.inject_vector(X), alg.inject_covector(Z)
    g = exp_in(alg, scale(iX, -s_prime)) * exp_in(alg, scale(iZ, t)) * exp_in(alg, scale(iX, s))
    return FlowCheck(s, t, s_prime, in_P(g), s * t > 0)


@dataclass
class NullRayCheck:
    t: Any
    pairing: Any
    factor: Any
    holds: bool

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "Z_xi": self.pairing, "factor": self.factor, "holds": self.holds}


def verify_null_ray_flow(alg: GradedAlgebra, Z: Mat, xi: Mat, t: Any) -> NullRayCheck:
    """phi^t(exp(xi) o) = exp(xi / (1 + t Z xi)) o for null xi with Z xi >= 0."""
    if not alg.family.is_conformal:
        raise UnsupportedOperationError("verify_null_ray_flow is only defined for the conformal family")
    if vector_inner_product(alg, xi, xi) != 0:
        raise IsotropyError("xi must be a null vector")
    t = to_scalar(t)
    a = pair(Z, xi)
    if a < 0:
        raise IsotropyError(f"Null-ray flow needs Z xi >= 0, got {a}")
    denominator = 1 + t * a
    if denominator == 0:
        raise FlowPoleError(f"Flow blows up: 1 + t*Z(xi) = 0 at t={t}")
    factor = 1 / denominator

    image = flow(alg, Z, t, normal_point(alg, xi, 1))
    expected = normal_point(alg, scale(xi, factor), 1)
    return NullRayCheck(t, a, factor, image == expected)


# ---------------------------------------------------------------------------
# Classification of points
# ---------------------------------------------------------------------------

def transported_generator(alg: GradedAlgebra, Z: Mat, X: Mat, s: Any) -> Mat:
    """Ad(exp(-s X)) Z, a terminating series."""
    s = to_scalar(s)
    iX, iZ = alg.inject_vector(X), alg.inject_covector(Z)
    first = bracket(iX, iZ)
    second = bracket(iX, first)
    return iZ - scale(first, s) + scale(second, s * s / 2)


def classify_point(alg: GradedAlgebra, Z: Mat, X: Mat, s: Any) -> PointClass:
    W = transported_generator(alg, Z, X, s)
    if not is_zero(grading_projection(alg, W, -1)):
        return PointClass.MOVING
    if not is_zero(grading_projection(alg, W, 0)):
        return PointClass.ZERO_OF_FIELD
    W1 = alg.extract_covector(grading_projection(alg, W, 1))
    if geometric_type(alg, W1) == geometric_type(alg, Z):
        return PointClass.FIXED_SAME_TYPE
    return PointClass.FIXED_OTHER_TYPE


@dataclass
class IsolationWitness:
    isolated: bool
    C_dim: int
    curve: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def curve_confirmed(self) -> bool:
        return all(sample["class"] == PointClass.FIXED_SAME_TYPE for sample in self.curve)

    def __bool__(self) -> bool:
        return self.isolated

    def to_dict(self) -> Dict[str, Any]:
        return {
            "isolated": self.isolated,
            "C_dim": self.C_dim,
            "curve": self.curve,
            "curve_confirmed": self.curve_confirmed,
        }


def smoothly_isolated_witness(
    alg: GradedAlgebra,
    Z: Mat,
    parameters: Sequence[Any] = ("1", "-1", "1/2", "-1/2", "2", "-2"),
) -> IsolationWitness:
    if is_zero(Z):
        raise IsotropyError("smoothly_isolated_witness requires a nonzero covector Z")
    C = C_of(alg, Z)
    witness = IsolationWitness(C.dim == 0, C.dim)
    if witness.isolated:
        return witness

    direction = C.vectors()[0]
    for s in parameters:
        s = to_scalar(s)
        witness.curve.append({
            "s": s,
            "point": normal_point(alg, direction, s).values(),
            "class": classify_point(alg, Z, direction, s),
        })
    logger.debug(f"Fixed curve along C(Z) confirmed: {witness.curve_confirmed}")
    return witness


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

def chart_coordinates(alg: GradedAlgebra, point: ModelPoint) -> Mat:
    """Y with normal_point(Y, 1) = point; requires a nonzero first homogeneous coordinate."""
    values = point.values()
    if values[0] == 0:
        raise ChartError("Point lies outside the chart: first homogeneous coordinate is 0")
    Y = column([v / values[0] for v in values[1:alg.n + 1]])
    if normal_point(alg, Y, 1) != point:
        raise ChartError("Point is not in the image of the exponential chart")
    return Y


@dataclass
class TrajectorySample:
    t: Any
    coordinates: Optional[List[Any]]

    @property
    def in_chart(self) -> bool:
        return self.coordinates is not None

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "in_chart": self.in_chart, "coordinates": self.coordinates}


def chart_trajectory(
    alg: GradedAlgebra,
    Z: Mat,
    X: Mat,
    s: Any,
    t_samples: Sequence[Any],
) -> List[TrajectorySample]:
    start = normal_point(alg, X, s)
    samples = []
    for t in t_samples:
        t = to_scalar(t)
        try:
            Y = chart_coordinates(alg, flow(alg, Z, t, start))
            samples.append(TrajectorySample(t, column_values(Y)))
        except ChartError as e:
            logger.info(f"Trajectory sample t={t} flagged: {e}")
            samples.append(TrajectorySample(t, None))
    return samples
