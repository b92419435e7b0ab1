import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, count
from typing import Any, Dict, List, Optional

from modules.exact_linalg import (
    EigenReport,
    Mat,
    Subspace,
    column_values,
    diagonal,
    eigen_report,
    hstack,
    identity,
    is_zero,
    kernel,
    mat_equal,
    rank,
    row_values,
    scale,
    unit,
    vec,
)
from modules.graded_algebras import (
    GradedAlgebra,
    UnsupportedOperationError,
    adjoint_on_gm1,
    bracket,
    in_component,
    inner_product,
    pair,
    vector_inner_product,
)

logger = logging.getLogger(__name__)


class IsotropyError(ValueError):
    pass


class NotInTError(ValueError):
    pass


class GeometricType(str, Enum):
    PROJECTIVE_NONZERO = "ProjectiveNonzero"
    PROJECTIVE_ZERO = "ProjectiveZero"
    CONFORMAL_POSITIVE = "ConformalPositive"
    CONFORMAL_NULL = "ConformalNull"
    CONFORMAL_NEGATIVE = "ConformalNegative"
    CONFORMAL_ZERO = "ConformalZero"

    @property
    def is_zero(self) -> bool:
        return self in (GeometricType.PROJECTIVE_ZERO, GeometricType.CONFORMAL_ZERO)

    @property
    def is_non_null(self) -> bool:
        return self in (GeometricType.CONFORMAL_POSITIVE, GeometricType.CONFORMAL_NEGATIVE)


T_EQUATION_VECTOR = "[[Z,X],X] = -2X"
T_EQUATION_COVECTOR = "[[Z,X],Z] = 2Z"


def geometric_type(alg: GradedAlgebra, Z: Mat) -> GeometricType:
    if alg.family.is_projective:
        return GeometricType.PROJECTIVE_ZERO if is_zero(Z) else GeometricType.PROJECTIVE_NONZERO
    if is_zero(Z):
        return GeometricType.CONFORMAL_ZERO
    norm = inner_product(alg, Z, Z)
    if norm > 0:
        return GeometricType.CONFORMAL_POSITIVE
    if norm < 0:
        return GeometricType.CONFORMAL_NEGATIVE
    return GeometricType.CONFORMAL_NULL


def _require_nonzero(Z: Mat, op: str) -> None:
    if is_zero(Z):
        raise IsotropyError(f"{op} requires a nonzero covector Z")


def _dual_vector(alg: GradedAlgebra, Z: Mat) -> Mat:
    """I Z^t, the vector metrically dual to Z."""
    return alg.signature_matrix * Z.transpose()


# ---------------------------------------------------------------------------
# C(Z), F(Z), T(Z)
# ---------------------------------------------------------------------------

def C_of(alg: GradedAlgebra, Z: Mat) -> Subspace:
    iZ = alg.inject_covector(Z)
    columns = [vec(bracket(b, iZ)) for b in alg.basis_gm1]
    return kernel(hstack(columns, rows=alg.size * alg.size))


def C_closed_form(alg: GradedAlgebra, Z: Mat) -> Subspace:
    gtype = geometric_type(alg, Z)
    if gtype.is_zero:
        return Subspace.full(alg.n)
    if gtype == GeometricType.CONFORMAL_NULL:
        return Subspace.span(_dual_vector(alg, Z))
    return Subspace.zero(alg.n)


def F_membership(alg: GradedAlgebra, Z: Mat, X: Mat) -> bool:
    iX = alg.inject_vector(X)
    return is_zero(bracket(iX, bracket(iX, alg.inject_covector(Z))))


def F_closed_form(alg: GradedAlgebra, Z: Mat, X: Mat) -> bool:
    _require_nonzero(Z, "F_closed_form")
    if alg.family.is_projective:
        return pair(Z, X) == 0
    return pair(Z, X) == 0 and vector_inner_product(alg, X, X) == 0


def T_failures(alg: GradedAlgebra, Z: Mat, X: Mat) -> List[str]:
    """The defining equations of T(Z) that X violates."""
    iZ, iX = alg.inject_covector(Z), alg.inject_vector(X)
    A = bracket(iZ, iX)
    failed = []
    if not mat_equal(bracket(A, iX), scale(iX, -2)):
        failed.append(T_EQUATION_VECTOR)
    if not mat_equal(bracket(A, iZ), scale(iZ, 2)):
        failed.append(T_EQUATION_COVECTOR)
    return failed


def T_membership(alg: GradedAlgebra, Z: Mat, X: Mat) -> bool:
    _require_nonzero(Z, "T_membership")
    return not T_failures(alg, Z, X)


def T_closed_form(alg: GradedAlgebra, Z: Mat, X: Mat) -> bool:
    _require_nonzero(Z, "T_closed_form")
    return T_description(alg, Z).contains(alg, Z, X)


@dataclass(frozen=True, eq=False)
class TDescription:
    """Closed-form shape of T(Z): an affine hyperplane, a single point or a quadric slice."""

    kind: str
    equations: List[str]
    point: Optional[Mat] = None

    def contains(self, alg: GradedAlgebra, Z: Mat, X: Mat) -> bool:
        if self.kind == "unique_point":
            return mat_equal(X, self.point)
        if pair(Z, X) != 1:
            return False
        return self.kind == "affine_hyperplane" or vector_inner_product(alg, X, X) == 0

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind, "equations": list(self.equations)}
        if self.point is not None:
            data["point"] = column_values(self.point)
        return data


def T_description(alg: GradedAlgebra, Z: Mat) -> TDescription:
    _require_nonzero(Z, "T_description")
    gtype = geometric_type(alg, Z)
    if gtype == GeometricType.PROJECTIVE_NONZERO:
        return TDescription("affine_hyperplane", ["ZX = 1"])
    if gtype.is_non_null:
        point = scale(_dual_vector(alg, Z), 2 / inner_product(alg, Z, Z))
        return TDescription("unique_point", ["X = 2/<Z,Z> I Z^t"], point)
    return TDescription("quadric_slice", ["ZX = 1", "<X,X> = 0"])


def _first_nonzero(Z: Mat) -> int:
    return next(k for k, z in enumerate(row_values(Z)) if z != 0)


def _kernel_of_covector(Z: Mat) -> List[Mat]:
    return kernel(Z).vectors()


def T_spanning_set(alg: GradedAlgebra, Z: Mat) -> List[Mat]:
    """Elements of T(Z) spanning g_{-1}; the singleton T(Z) for non-null Z."""
    _require_nonzero(Z, "T_spanning_set")
    gtype = geometric_type(alg, Z)
    if gtype.is_non_null:
        return [T_description(alg, Z).point]

    k = _first_nonzero(Z)
    base = scale(unit(alg.n, 1, k, 0), 1 / row_values(Z)[k])
    directions = _kernel_of_covector(Z)

    if gtype == GeometricType.PROJECTIVE_NONZERO:
        spanning = [base] + [base + v for v in directions]
    else:
        spanning = _null_spanning_set(alg, Z, base, directions)

    for X in spanning:
        failed = T_failures(alg, Z, X)
        if failed:
            raise IsotropyError(f"Spanning candidate left T(Z): {', '.join(failed)}")
    logger.debug(f"T-spanning set of size {len(spanning)} for {gtype.value} Z")
    return spanning


def _null_spanning_set(alg: GradedAlgebra, Z: Mat, base: Mat, directions: List[Mat]) -> List[Mat]:
    # Y with ZY = 1 maps into the quadric slice by Y - <Y,Y>/2 * I Z^t
    W = _dual_vector(alg, Z)
    spanning: List[Mat] = []

    def lift(Y: Mat) -> Mat:
        return Y - scale(W, vector_inner_product(alg, Y, Y) / 2)

    def offer(Y: Mat) -> None:
        X = lift(Y)
        if rank(hstack(spanning + [X], rows=alg.n)) > len(spanning):
            spanning.append(X)

    offer(base)
    for magnitude in count(1):
        for t in (magnitude, -magnitude):
            for v in directions:
                offer(base + scale(v, t))
                if len(spanning) == alg.n:
                    return spanning
        if magnitude > alg.n + 2:
            raise IsotropyError(f"Could not span g_-1 from T(Z); rank stalled at {len(spanning)}")


def scaled_T_complement(alg: GradedAlgebra, Z: Mat, X: Mat) -> bool:
    """True iff a nonzero multiple of X lies in T(Z), i.e. X is off the hyperplane ker Z."""
    if not alg.family.is_projective:
        raise UnsupportedOperationError("scaled_T_complement is only defined for the projective family")
    return pair(Z, X) != 0


# ---------------------------------------------------------------------------
# A = [Z, X] and its action on g_{-1}
# ---------------------------------------------------------------------------

def A_of(alg: GradedAlgebra, Z: Mat, X: Mat) -> Mat:
    _require_nonzero(Z, "A_of")
    failed = T_failures(alg, Z, X)
    if failed:
        raise NotInTError(f"X is not in T(Z): {' and '.join(failed)} fails")
    A = bracket(alg.inject_covector(Z), alg.inject_vector(X))
    if not in_component(alg, A, 0):
        raise NotInTError("[Z,X] has components outside g_0")
    return A


def eigen_gm1(alg: GradedAlgebra, A: Mat) -> EigenReport:
    return eigen_report(adjoint_on_gm1(alg, A))


# ---------------------------------------------------------------------------
# Symmetries of the signature
# ---------------------------------------------------------------------------

def signature_symmetries(alg: GradedAlgebra) -> List[Mat]:
    """Coordinate sign flips and same-sign transpositions; all preserve I."""
    n = alg.n
    signs = alg.signature if alg.family.is_conformal else (1,) * n
    symmetries = []
    for k in range(n):
        symmetries.append(diagonal([-1 if i == k else 1 for i in range(n)]))
    for i, j in combinations(range(n), 2):
        if signs[i] != signs[j]:
            continue
        swap = identity(n) - unit(n, n, i, i) - unit(n, n, j, j) + unit(n, n, i, j) + unit(n, n, j, i)
        symmetries.append(swap)
    return symmetries


def transport_vector(g: Mat, X: Mat) -> Mat:
    return g * X


def transport_covector(g: Mat, Z: Mat) -> Mat:
    return Z * g.to_dense().inv().to_sparse()


def reflection(alg: GradedAlgebra, v: Mat) -> Mat:
    """The reflection I - 2 v v^t I / <v,v> in the hyperplane orthogonal to a non-null v."""
    norm = vector_inner_product(alg, v, v)
    if norm == 0:
        raise IsotropyError("Cannot reflect in the orthogonal complement of a null vector")
    return identity(alg.n) - scale(v * v.transpose() * alg.signature_matrix, 2 / norm)


# ---------------------------------------------------------------------------
# Aggregate
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class IsotropyData:
    alg: GradedAlgebra
    Z: Mat
    gtype: GeometricType
    C: Subspace
    T: Optional[TDescription] = None
    spanning: List[Mat] = field(default_factory=list)

    def F_oracle(self, X: Mat) -> bool:
        return F_membership(self.alg, self.Z, X)

    def T_oracle(self, X: Mat) -> bool:
        return not T_failures(self.alg, self.Z, X)

    def A_of(self, X: Mat) -> Mat:
        return A_of(self.alg, self.Z, X)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "Z": row_values(self.Z),
            "geometric_type": self.gtype.value,
            "C_basis": [column_values(v) for v in self.C.vectors()],
            "T_description": self.T.to_dict() if self.T is not None else None,
            "T_spanning_set": [column_values(X) for X in self.spanning],
        }


def analyze(alg: GradedAlgebra, Z: Mat) -> IsotropyData:
    gtype = geometric_type(alg, Z)
    data = IsotropyData(alg, Z, gtype, C_of(alg, Z))
    if not gtype.is_zero:
        data.T = T_description(alg, Z)
        data.spanning = T_spanning_set(alg, Z)
    return data
