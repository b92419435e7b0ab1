import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

from modules.exact_linalg import (
    Mat,
    QQ,
    Scalar,
    column,
    column_values,
    commutator,
    diagonal,
    entry,
    from_entries,
    hstack,
    identity,
    is_zero,
    mat_equal,
    nonzero_entries,
    row,
    row_values,
    scale,
    solve_linear_system,
    unit,
    vec,
    vstack,
    zeros,
)
from modules.utils import CheckResult

logger = logging.getLogger(__name__)


class FamilyError(ValueError):
    pass


class UnsupportedOperationError(ValueError):
    pass


class FamilyKind(str, Enum):
    PROJECTIVE = "projective"
    CONFORMAL = "conformal"


@dataclass(frozen=True)
class AlgebraFamily:
    """Projective(n): sl(n+1,R); Conformal(p, q): so(p+1,q+1) with n = p + q."""

    kind: FamilyKind
    n: int
    p: int = 0
    q: int = 0
    allow_definite: bool = False

    @classmethod
    def projective(cls, n: int) -> "AlgebraFamily":
        if n < 2:
            raise FamilyError(f"Projective family needs n >= 2, got n={n}")
        return cls(FamilyKind.PROJECTIVE, n)

    @classmethod
    def conformal(cls, p: int, q: int, allow_definite: bool = False) -> "AlgebraFamily":
        if p < 0 or q < 0:
            raise FamilyError(f"Signature entries must be non-negative, got ({p},{q})")
        if p > q:
            logger.info(f"Normalizing signature ({p},{q}) to ({q},{p})")
            p, q = q, p
        if p + q < 3:
            raise FamilyError(f"Conformal family needs n = p+q >= 3, got n={p + q}")
        if p == 0 and not allow_definite:
            raise FamilyError(
                "Conformal family needs p >= 1; definite signature requires allow_definite"
            )
        return cls(FamilyKind.CONFORMAL, p + q, p, q, allow_definite)

    @property
    def is_projective(self) -> bool:
        return self.kind == FamilyKind.PROJECTIVE

    @property
    def is_conformal(self) -> bool:
        return self.kind == FamilyKind.CONFORMAL

    @property
    def matrix_size(self) -> int:
        return self.n + 1 if self.is_projective else self.n + 2

    @property
    def label(self) -> str:
        if self.is_projective:
            return f"projective(n={self.n})"
        return f"conformal(p={self.p},q={self.q})"

    def descriptor(self) -> Dict[str, Any]:
        if self.is_projective:
            return {"family": self.kind.value, "n": self.n}
        return {
            "family": self.kind.value,
            "p": self.p,
            "q": self.q,
            "allow_definite": self.allow_definite,
        }

    @classmethod
    def from_descriptor(cls, descriptor: Dict[str, Any]) -> "AlgebraFamily":
        kind = descriptor.get("family")
        if kind == FamilyKind.PROJECTIVE.value:
            return cls.projective(int(descriptor["n"]))
        if kind == FamilyKind.CONFORMAL.value:
            return cls.conformal(
                int(descriptor["p"]),
                int(descriptor["q"]),
                bool(descriptor.get("allow_definite", False)),
            )
        raise FamilyError(f"Unknown family: {kind!r}")


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    family: AlgebraFamily
    size: int
    basis_gm1: Tuple[Mat, ...]
    basis_g0: Tuple[Mat, ...]
    basis_g1: Tuple[Mat, ...]
    grading_element: Mat
    signature_matrix: Optional[Mat] = None
    invariant_form: Optional[Mat] = None
    signature: Tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def dims(self) -> Dict[int, int]:
        return {-1: len(self.basis_gm1), 0: len(self.basis_g0), 1: len(self.basis_g1)}

    def basis(self, degree: int) -> Tuple[Mat, ...]:
        return {-1: self.basis_gm1, 0: self.basis_g0, 1: self.basis_g1}[degree]

    def inject_vector(self, X: Mat) -> Mat:
        return _combine(self.basis_gm1, column_values(X), self.size)

    def inject_covector(self, Z: Mat) -> Mat:
        return _combine(self.basis_g1, row_values(Z), self.size)

    def extract_vector(self, M: Mat) -> Mat:
        """g_{-1} coordinates of M (the first column below the corner)."""
        return column([entry(M, i, 0) for i in range(1, self.n + 1)])

    def extract_covector(self, M: Mat) -> Mat:
        return row([entry(M, 0, j) for j in range(1, self.n + 1)])


def _combine(basis: Sequence[Mat], coefficients: Sequence[Scalar], size: int) -> Mat:
    if len(coefficients) != len(basis):
        raise FamilyError(f"Expected {len(basis)} coordinates, got {len(coefficients)}")
    total = zeros(size, size)
    for b, c in zip(basis, coefficients):
        if c:
            total = total + scale(b, c)
    return total


def vector(values: Sequence[Any]) -> Mat:
    return column(values)


def covector(values: Sequence[Any]) -> Mat:
    return row(values)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _projective_bases(n: int) -> Tuple[List[Mat], List[Mat], List[Mat]]:
    N = n + 1
    gm1 = [unit(N, N, i, 0) for i in range(1, N)]
    g1 = [unit(N, N, 0, j) for j in range(1, N)]
    g0 = []
    for i, j in product(range(1, N), repeat=2):
        entries = {(i, j): 1}
        if i == j:
            entries[(0, 0)] = -1
        g0.append(from_entries(entries, (N, N)))
    return gm1, g0, g1


def _conformal_bases(signature: Sequence[int]) -> Tuple[List[Mat], List[Mat], List[Mat]]:
    n = len(signature)
    N = n + 2
    last = n + 1
    gm1 = [from_entries({(i, 0): 1, (last, i): -signature[i - 1]}, (N, N)) for i in range(1, n + 1)]
    g1 = [from_entries({(0, j): 1, (j, last): -signature[j - 1]}, (N, N)) for j in range(1, n + 1)]
    g0 = [from_entries({(0, 0): 1, (last, last): -1}, (N, N))]
    for i, j in combinations(range(1, n + 1), 2):
        g0.append(from_entries({(i, j): signature[i - 1], (j, i): -signature[j - 1]}, (N, N)))
    return gm1, g0, g1


def build(family: AlgebraFamily) -> GradedAlgebra:
    n, N = family.n, family.matrix_size
    if family.is_projective:
        gm1, g0, g1 = _projective_bases(n)
        signature, sig_matrix, form = (), None, None
    else:
        signature = tuple([1] * family.p + [-1] * family.q)
        gm1, g0, g1 = _conformal_bases(signature)
        sig_matrix = diagonal(signature)
        form_entries = {(0, N - 1): 1, (N - 1, 0): 1}
        form_entries.update({(i + 1, i + 1): s for i, s in enumerate(signature)})
        form = from_entries(form_entries, (N, N))

    E = _solve_grading_element(N, gm1, g0, g1)
    algebra = GradedAlgebra(
        family=family,
        size=N,
        basis_gm1=tuple(gm1),
        basis_g0=tuple(g0),
        basis_g1=tuple(g1),
        grading_element=E,
        signature_matrix=sig_matrix,
        invariant_form=form,
        signature=signature,
    )
    logger.debug(f"Built {family.label}: dims {algebra.dims}, ambient {N}x{N}")
    return algebra


def _solve_grading_element(N: int, gm1: Sequence[Mat], g0: Sequence[Mat], g1: Sequence[Mat]) -> Mat:
    # ad(E) = -Id on g_{-1}, solved over the g_0 basis
    columns = [vstack([vec(commutator(h, b)) for b in gm1], cols=1) for h in g0]
    A = hstack(columns, rows=len(gm1) * N * N)
    rhs = vstack([vec(-b) for b in gm1], cols=1)
    solution, homogeneous = solve_linear_system(A, rhs)
    if solution is None:
        raise FamilyError("No grading element: ad(E) = -Id on g_-1 has no solution in g_0")
    if homogeneous.dim != 0:
        raise FamilyError(f"Grading element not unique: {homogeneous.dim}-dimensional ambiguity")

    E = _combine(g0, column_values(solution), N)
    for b in g1:
        if not mat_equal(commutator(E, b), b):
            raise FamilyError("Solved grading element does not act by +1 on g_1")
    return E


def grading_element(alg: GradedAlgebra) -> Mat:
    """Re-derive the grading element by solving its defining linear system."""
    return _solve_grading_element(alg.size, alg.basis_gm1, alg.basis_g0, alg.basis_g1)


# ---------------------------------------------------------------------------
# Brackets, projections, pairings
# ---------------------------------------------------------------------------

def bracket(M1: Mat, M2: Mat) -> Mat:
    return commutator(M1, M2)


def entry_degrees(alg: GradedAlgebra) -> Dict[Tuple[int, int], int]:
    """ad(E)-eigenvalue of each matrix unit, from the diagonal of E."""
    weights = [entry(alg.grading_element, i, i) for i in range(alg.size)]
    degrees = {}
    for i, j in product(range(alg.size), repeat=2):
        d = weights[i] - weights[j]
        degrees[(i, j)] = int(d.numerator) if d.denominator == 1 else None
    return degrees


def grading_projection(alg: GradedAlgebra, M: Mat, degree: int) -> Mat:
    if degree not in (-1, 0, 1):
        raise FamilyError(f"Grading degree must be -1, 0 or 1, got {degree}")
    degrees = entry_degrees(alg)
    kept = {ij: v for ij, v in nonzero_entries(M).items() if degrees[ij] == degree}
    return from_entries(kept, M.shape)


def adjoint_on_gm1(alg: GradedAlgebra, A: Mat) -> Mat:
    """Matrix of ad(A) on g_{-1} in the standard vector coordinates."""
    columns = [alg.extract_vector(bracket(A, b)) for b in alg.basis_gm1]
    return hstack(columns, rows=alg.n)


def adjoint_on_g1(alg: GradedAlgebra, A: Mat) -> Mat:
    """Matrix of ad(A) on g_1; column j holds the covector coordinates of [A, e^j]."""
    columns = [alg.extract_covector(bracket(A, b)).transpose() for b in alg.basis_g1]
    return hstack(columns, rows=alg.n)


def in_component(alg: GradedAlgebra, M: Mat, degree: int) -> bool:
    """True iff M lies in g_degree (out-of-range degrees mean M = 0)."""
    if degree not in (-1, 0, 1):
        return is_zero(M)
    return in_algebra(alg, M) and mat_equal(grading_projection(alg, M, degree), M)


def in_algebra(alg: GradedAlgebra, M: Mat) -> bool:
    if alg.family.is_projective:
        return sum((entry(M, i, i) for i in range(alg.size)), QQ.zero) == 0
    S = alg.invariant_form
    return is_zero(M.transpose() * S + S * M)


def killing_pairing(alg: GradedAlgebra, X: Mat, Z: Mat) -> Scalar:
    """Trace form tr(inj(X) inj(Z)) normalized so that pairing(e_i, e^j) = delta_ij."""
    return _trace(alg.inject_vector(X) * alg.inject_covector(Z)) / _pairing_normalization(alg)


def _trace(M: Mat) -> Scalar:
    return sum((entry(M, i, i) for i in range(M.shape[0])), QQ.zero)


def _pairing_normalization(alg: GradedAlgebra) -> Scalar:
    return _trace(alg.basis_gm1[0] * alg.basis_g1[0])


def pairing_gram(alg: GradedAlgebra) -> Mat:
    c = _pairing_normalization(alg)
    return from_entries(
        {
            (i, j): _trace(b * z) / c
            for i, b in enumerate(alg.basis_gm1)
            for j, z in enumerate(alg.basis_g1)
        },
        (alg.n, alg.n),
    )


def _require_conformal(alg: GradedAlgebra, op: str) -> None:
    if not alg.family.is_conformal:
        raise UnsupportedOperationError(f"{op} is only defined for the conformal family")


def inner_product(alg: GradedAlgebra, Z1: Mat, Z2: Mat) -> Scalar:
    _require_conformal(alg, "inner_product")
    return entry(Z1 * alg.signature_matrix * Z2.transpose(), 0, 0)


def vector_inner_product(alg: GradedAlgebra, X: Mat, Y: Mat) -> Scalar:
    _require_conformal(alg, "vector_inner_product")
    return entry(X.transpose() * alg.signature_matrix * Y, 0, 0)


def pair(Z: Mat, X: Mat) -> Scalar:
    """The row-times-column product ZX."""
    return entry(Z * X, 0, 0)


def closed_form_bracket_z(alg: GradedAlgebra, Z: Mat, X: Mat) -> Mat:
    """[[Z,X],Z] as a covector: 2(ZX)Z, minus <Z,Z> X^t I in the conformal case."""
    result = scale(Z, 2 * pair(Z, X))
    if alg.family.is_conformal:
        result = result - scale(X.transpose() * alg.signature_matrix, inner_product(alg, Z, Z))
    return result


def closed_form_bracket_y(alg: GradedAlgebra, Z: Mat, X: Mat, Y: Mat) -> Mat:
    """[[Z,X],Y] as a vector: -(ZY)X - (ZX)Y, plus <X,Y> I Z^t in the conformal case."""
    result = -scale(X, pair(Z, Y)) - scale(Y, pair(Z, X))
    if alg.family.is_conformal:
        result = result + scale(alg.signature_matrix * Z.transpose(), vector_inner_product(alg, X, Y))
    return result


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_COMPONENT_NAMES = {-1: "g_-1", 0: "g_0", 1: "g_1"}


@dataclass
class ValidationReport:
    family: AlgebraFamily
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, **evidence) -> None:
        self.checks.append(CheckResult(name, passed, evidence))


class AlgebraValidator:

    @staticmethod
    def check_membership(alg: GradedAlgebra, report: ValidationReport) -> None:
        name = "trace_free" if alg.family.is_projective else "invariant_form"
        bad = [
            f"{_COMPONENT_NAMES[d]}[{k}]"
            for d in (-1, 0, 1)
            for k, b in enumerate(alg.basis(d))
            if not in_algebra(alg, b)
        ]
        report.add(name, not bad, offending=bad)

    @staticmethod
    def check_dimensions(alg: GradedAlgebra, report: ValidationReport) -> None:
        n = alg.n
        expected_g0 = n * n if alg.family.is_projective else n * (n - 1) // 2 + 1
        expected = {-1: n, 0: expected_g0, 1: n}
        report.add("dimensions", alg.dims == expected, found=alg.dims, expected=expected)

    @staticmethod
    def check_inclusions(alg: GradedAlgebra, report: ValidationReport) -> None:
        for i, j in product((-1, 0, 1), repeat=2):
            if i > j:
                continue
            target = i + j
            offending = None
            for (a, x), (b, y) in product(enumerate(alg.basis(i)), enumerate(alg.basis(j))):
                if not in_component(alg, bracket(x, y), target):
                    offending = f"[{_COMPONENT_NAMES[i]}[{a}], {_COMPONENT_NAMES[j]}[{b}]]"
                    break
            target_name = _COMPONENT_NAMES.get(target, "0")
            name = f"[{_COMPONENT_NAMES[i]}, {_COMPONENT_NAMES[j]}] in {target_name}"
            report.add(name, offending is None, offending=offending)

    @staticmethod
    def check_grading_element(alg: GradedAlgebra, report: ValidationReport) -> None:
        E = alg.grading_element
        offending = [
            f"{_COMPONENT_NAMES[d]}[{k}]"
            for d in (-1, 0, 1)
            for k, b in enumerate(alg.basis(d))
            if not mat_equal(bracket(E, b), scale(b, d))
        ]
        in_g0 = in_component(alg, E, 0)
        report.add("grading_element_eigenvalues", not offending and in_g0, offending=offending)

        try:
            resolved = grading_element(alg)
            unique = mat_equal(resolved, E)
        except FamilyError as e:
            logger.warning(f"Grading element solve failed: {e}")
            unique = False
        report.add("grading_element_unique", unique)

    @staticmethod
    def check_pairing(alg: GradedAlgebra, report: ValidationReport) -> None:
        gram = pairing_gram(alg)
        report.add("pairing_nondegenerate", mat_equal(gram, identity(alg.n)))

    @staticmethod
    def check_jacobi(alg: GradedAlgebra, report: ValidationReport, limit: Optional[int] = None) -> None:
        """Jacobi identity on basis triples whose degrees sum to -1, 0 or 1.

        Other triples land in a zero component once the inclusions hold. When
        more than limit triples remain, an evenly strided subset is checked.
        """
        graded = [(d, b) for d in (-1, 0, 1) for b in alg.basis(d)]
        triples = [
            t for t in combinations(range(len(graded)), 3)
            if sum(graded[i][0] for i in t) in (-1, 0, 1)
        ]
        total = len(triples)
        if limit and total > limit:
            triples = triples[::-(-total // limit)]
        offending = None
        for a, b, c in triples:
            x, y, z = graded[a][1], graded[b][1], graded[c][1]
            value = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
            if not is_zero(value):
                offending = (a, b, c)
                break
        report.add("jacobi", offending is None, offending=offending, checked=len(triples), compatible=total)

    @staticmethod
    def check_closed_forms(alg: GradedAlgebra, report: ValidationReport, triples: Sequence[Tuple[Mat, Mat, Mat]]) -> None:
        mismatches = 0
        for Z, X, Y in triples:
            iZ, iX, iY = alg.inject_covector(Z), alg.inject_vector(X), alg.inject_vector(Y)
            A = bracket(iZ, iX)
            if not mat_equal(alg.extract_covector(bracket(A, iZ)), closed_form_bracket_z(alg, Z, X)):
                mismatches += 1
            elif not mat_equal(alg.extract_vector(bracket(A, iY)), closed_form_bracket_y(alg, Z, X, Y)):
                mismatches += 1
        report.add("closed_form_brackets", mismatches == 0, samples=len(triples), mismatches=mismatches)


def validate(
    alg: GradedAlgebra,
    jacobi: bool = True,
    jacobi_limit: Optional[int] = None,
    triples: Optional[Sequence[Tuple[Mat, Mat, Mat]]] = None,
) -> ValidationReport:
    report = ValidationReport(alg.family)
    AlgebraValidator.check_dimensions(alg, report)
    AlgebraValidator.check_membership(alg, report)
    AlgebraValidator.check_inclusions(alg, report)
    AlgebraValidator.check_grading_element(alg, report)
    AlgebraValidator.check_pairing(alg, report)
    if jacobi:
        AlgebraValidator.check_jacobi(alg, report, jacobi_limit)
    if triples:
        AlgebraValidator.check_closed_forms(alg, report, triples)

    for failure in report.failures():
        logger.warning(f"{alg.family.label}: check failed: {failure.name} {failure.evidence}")
    return report
