import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy import Poly, Rational, divisors, symbols
from sympy.core.sympify import SympifyError
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)

# Scalars are elements of sympy's QQ domain (gmpy2 mpq or PythonMPQ).
Scalar = Any
Mat = DomainMatrix

LAMBDA = symbols("lambda")


class LinearAlgebraError(ValueError):
    pass


class SpectrumError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

def to_scalar(value: Any) -> Scalar:
    """Convert an int, Fraction, sympy Rational or "p/q" string to an exact QQ element."""
    if isinstance(value, QQ.dtype):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise LinearAlgebraError(f"Refusing inexact or boolean value: {value!r}")
    if isinstance(value, str):
        value = value.strip()
    try:
        return QQ.from_sympy(Rational(value))
    except (TypeError, ValueError, SympifyError) as e:
        raise LinearAlgebraError(f"Not an exact rational: {value!r}") from e


def format_scalar(value: Any) -> str:
    x = to_scalar(value)
    num, den = int(x.numerator), int(x.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


# ---------------------------------------------------------------------------
# Matrices (always stored in sympy's sparse format)
# ---------------------------------------------------------------------------

def from_entries(entries: Dict[Tuple[int, int], Any], shape: Tuple[int, int]) -> Mat:
    rows: Dict[int, Dict[int, Scalar]] = {}
    for (i, j), value in entries.items():
        x = to_scalar(value)
        if x:
            rows.setdefault(i, {})[j] = x
    return DomainMatrix(rows, shape, QQ)


def matrix(rows: Sequence[Sequence[Any]], cols: Optional[int] = None) -> Mat:
    rows = [list(r) for r in rows]
    ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
    entries = {}
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise LinearAlgebraError(f"Row {i} has {len(row)} entries, expected {ncols}")
        for j, value in enumerate(row):
            entries[(i, j)] = value
    return from_entries(entries, (len(rows), ncols))


def column(values: Sequence[Any]) -> Mat:
    return matrix([[v] for v in values], cols=1)


def row(values: Sequence[Any]) -> Mat:
    return matrix([list(values)])


def zeros(m: int, n: int) -> Mat:
    return DomainMatrix({}, (m, n), QQ)


def identity(n: int) -> Mat:
    return DomainMatrix({i: {i: QQ.one} for i in range(n)}, (n, n), QQ)


def diagonal(values: Sequence[Any]) -> Mat:
    return from_entries({(i, i): v for i, v in enumerate(values)}, (len(values), len(values)))


def unit(m: int, n: int, i: int, j: int, value: Any = 1) -> Mat:
    return from_entries({(i, j): value}, (m, n))


def nonzero_entries(M: Mat) -> Dict[Tuple[int, int], Scalar]:
    rep = M.to_sparse().rep
    return {(i, j): v for i, row_ in rep.items() for j, v in row_.items() if v}


def entry(M: Mat, i: int, j: int) -> Scalar:
    return M.to_sparse().rep.get(i, {}).get(j, QQ.zero)


def to_rows(M: Mat) -> List[List[Scalar]]:
    m, n = M.shape
    rep = M.to_sparse().rep
    return [[rep.get(i, {}).get(j, QQ.zero) for j in range(n)] for i in range(m)]


def column_values(v: Mat) -> List[Scalar]:
    return [entry(v, i, 0) for i in range(v.shape[0])]


def row_values(v: Mat) -> List[Scalar]:
    return [entry(v, 0, j) for j in range(v.shape[1])]


def is_zero(M: Mat) -> bool:
    return not nonzero_entries(M)


def mat_equal(A: Mat, B: Mat) -> bool:
    return A.shape == B.shape and is_zero(A - B)


def scale(M: Mat, c: Any) -> Mat:
    c = to_scalar(c)
    if not c:
        return zeros(*M.shape)
    return M.scalarmul(c)


def commutator(A: Mat, B: Mat) -> Mat:
    return A * B - B * A


def hstack(blocks: Sequence[Mat], rows: Optional[int] = None) -> Mat:
    blocks = [b for b in blocks if b.shape[1] > 0]
    if not blocks:
        return zeros(rows or 0, 0)
    return blocks[0].hstack(*blocks[1:]) if len(blocks) > 1 else blocks[0]


def vstack(blocks: Sequence[Mat], cols: Optional[int] = None) -> Mat:
    blocks = [b for b in blocks if b.shape[0] > 0]
    if not blocks:
        return zeros(0, cols or 0)
    return blocks[0].vstack(*blocks[1:]) if len(blocks) > 1 else blocks[0]


def vec(M: Mat) -> Mat:
    """Row-major flattening of M into a column."""
    m, n = M.shape
    return from_entries({(i * n + j, 0): v for (i, j), v in nonzero_entries(M).items()}, (m * n, 1))


def kron(A: Mat, B: Mat) -> Mat:
    (m1, n1), (m2, n2) = A.shape, B.shape
    b_entries = nonzero_entries(B)
    entries = {}
    for (i, j), a in nonzero_entries(A).items():
        for (k, l), b in b_entries.items():
            entries[(i * m2 + k, j * n2 + l)] = a * b
    return from_entries(entries, (m1 * m2, n1 * n2))


def kronecker_sum(A: Mat, B: Mat) -> Mat:
    """A ⊗ I + I ⊗ B: the derivation action on a tensor product."""
    return kron(A, identity(B.shape[0])) + kron(identity(A.shape[0]), B)


def rank(M: Mat) -> int:
    if 0 in M.shape or is_zero(M):
        return 0
    _, pivots = M.rref()
    return len(pivots)


def _require_square(M: Mat, op: str) -> int:
    m, n = M.shape
    if m != n:
        raise LinearAlgebraError(f"{op} needs a square matrix, got {m}x{n}")
    return n


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of QQ^ambient_dim held in reduced column echelon form."""

    ambient_dim: int
    basis: Mat

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, zeros(ambient_dim, 0))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, identity(ambient_dim))

    @classmethod
    def span(cls, vectors: Mat) -> "Subspace":
        ambient, count = vectors.shape
        if count == 0 or ambient == 0 or is_zero(vectors):
            return cls.zero(ambient)
        R, pivots = vectors.transpose().rref()
        basis = R.extract(list(range(len(pivots))), list(range(ambient))).transpose()
        return cls(ambient, basis)

    @classmethod
    def span_of(cls, columns: Sequence[Mat], ambient_dim: int) -> "Subspace":
        return cls.span(hstack(columns, rows=ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def vectors(self) -> List[Mat]:
        return [self.basis.extract(list(range(self.ambient_dim)), [k]) for k in range(self.dim)]

    def contains(self, v: Mat) -> bool:
        if v.shape != (self.ambient_dim, 1):
            raise LinearAlgebraError(f"Vector of shape {v.shape} is not in QQ^{self.ambient_dim}")
        if is_zero(v):
            return True
        return rank(hstack([self.basis, v], rows=self.ambient_dim)) == self.dim

    def is_subspace_of(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        if self.dim == 0:
            return True
        return rank(hstack([other.basis, self.basis], rows=self.ambient_dim)) == other.dim

    def plus(self, other: "Subspace") -> "Subspace":
        _check_ambient(self, other)
        return Subspace.span(hstack([self.basis, other.basis], rows=self.ambient_dim))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and mat_equal(self.basis, other.basis)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _check_ambient(S1: Subspace, S2: Subspace) -> None:
    if S1.ambient_dim != S2.ambient_dim:
        raise LinearAlgebraError(
            f"Ambient dimension mismatch: {S1.ambient_dim} vs {S2.ambient_dim}"
        )


def kernel(M: Mat) -> Subspace:
    m, n = M.shape
    if n == 0:
        return Subspace.zero(0)
    if m == 0 or is_zero(M):
        return Subspace.full(n)

    R, pivots = M.rref()
    rep = R.to_sparse().rep
    pivot_row = {col: r for r, col in enumerate(pivots)}
    free = [j for j in range(n) if j not in pivot_row]

    entries = {}
    for k, f in enumerate(free):
        entries[(f, k)] = QQ.one
        for col, r in pivot_row.items():
            value = rep.get(r, {}).get(f)
            if value:
                entries[(col, k)] = -value
    return Subspace.span(from_entries(entries, (n, len(free))))


def intersect(S1: Subspace, S2: Subspace) -> Subspace:
    _check_ambient(S1, S2)
    if S1.dim == 0 or S2.dim == 0:
        return Subspace.zero(S1.ambient_dim)

    K = kernel(hstack([S1.basis, -S2.basis], rows=S1.ambient_dim))
    if K.dim == 0:
        return Subspace.zero(S1.ambient_dim)
    coefficients = K.basis.extract(list(range(S1.dim)), list(range(K.dim)))
    return Subspace.span(S1.basis * coefficients)


def solve_linear_system(A: Mat, b: Mat) -> Tuple[Optional[Mat], Subspace]:
    """Return a particular solution of A x = b (None if inconsistent) and ker(A)."""
    m, n = A.shape
    homogeneous = kernel(A)
    if m == 0 or is_zero(b):
        return zeros(n, 1), homogeneous

    R, pivots = hstack([A, b], rows=m).rref()
    if n in pivots:
        return None, homogeneous
    rep = R.to_sparse().rep
    solution = {(col, 0): rep.get(r, {}).get(n, QQ.zero) for r, col in enumerate(pivots)}
    return from_entries(solution, (n, 1)), homogeneous


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

def eigenspace(M: Mat, lam: Any) -> Subspace:
    n = _require_square(M, "eigenspace")
    return kernel(M - scale(identity(n), lam))


def characteristic_polynomial(M: Mat) -> List[Scalar]:
    """Coefficients of det(λI - M), leading coefficient first."""
    n = _require_square(M, "characteristic_polynomial")
    if n == 0:
        return [QQ.one]
    return list(M.to_dense().charpoly())


@dataclass(frozen=True)
class RationalSpectrum:
    eigenvalues: Tuple[Tuple[Scalar, int], ...]
    degree: int

    @property
    def is_rational(self) -> bool:
        return sum(m for _, m in self.eigenvalues) == self.degree

    def as_dict(self) -> Dict[Scalar, int]:
        return dict(self.eigenvalues)

    def values(self) -> List[Scalar]:
        return [lam for lam, _ in self.eigenvalues]


def _rational_root_candidates(leading: int, constant: int) -> List[Rational]:
    candidates = {
        Rational(sign * p, q)
        for p in divisors(constant)
        for q in divisors(leading)
        for sign in (1, -1)
    }
    return sorted(candidates, key=lambda r: (abs(r), r))


def rational_eigenvalues(M: Mat) -> RationalSpectrum:
    """All rational roots of the characteristic polynomial with algebraic multiplicity.

    Roots are found by the rational root theorem on the integer-cleared polynomial;
    if the multiplicities fall short of the degree the spectrum is not rational and
    the caller decides what to do (see RationalSpectrum.is_rational).
    """
    coefficients = characteristic_polynomial(M)
    poly = Poly(coefficients, LAMBDA, domain=QQ)
    degree = poly.degree() if coefficients else 0
    roots: List[Tuple[Scalar, int]] = []

    zero_multiplicity = 0
    while poly.degree() > 0 and poly.TC() == 0:
        poly = poly.exquo(Poly([1, 0], LAMBDA, domain=QQ))
        zero_multiplicity += 1
    if zero_multiplicity:
        roots.append((QQ.zero, zero_multiplicity))

    if poly.degree() > 0:
        _, integer_poly = poly.clear_denoms(convert=True)
        leading, constant = abs(int(integer_poly.LC())), abs(int(integer_poly.TC()))
        for candidate in _rational_root_candidates(leading, constant):
            multiplicity = 0
            while poly.degree() > 0 and poly.eval(candidate) == 0:
                poly = poly.exquo(Poly([1, -candidate], LAMBDA, domain=QQ))
                multiplicity += 1
            if multiplicity:
                roots.append((QQ.from_sympy(candidate), multiplicity))
            if poly.degree() == 0:
                break

    roots.sort(key=lambda item: item[0])
    spectrum = RationalSpectrum(tuple(roots), degree)
    if not spectrum.is_rational:
        logger.debug(f"Non-rational spectrum: found {sum(m for _, m in roots)} of {degree} roots")
    return spectrum


@dataclass(frozen=True, eq=False)
class EigenReport:
    """Exact eigenstructure of a square matrix with a diagonalizability certificate."""

    dimension: int
    spectrum: RationalSpectrum
    eigenspaces: Tuple[Tuple[Scalar, Subspace], ...]
    diagonalizable: bool

    def multiplicities(self) -> Dict[Scalar, int]:
        return self.spectrum.as_dict()

    def eigenvalues(self) -> List[Scalar]:
        return self.spectrum.values()

    def eigenspace(self, lam: Any) -> Subspace:
        lam = to_scalar(lam)
        for value, space in self.eigenspaces:
            if value == lam:
                return space
        return Subspace.zero(self.dimension)

    def change_of_basis(self) -> Tuple[Mat, Mat]:
        """P whose columns are the eigenbases, and the diagonal D with M P = P D."""
        if not self.diagonalizable:
            raise SpectrumError("No eigenbasis: matrix is not diagonalizable over QQ")
        columns, diagonal_values = [], []
        for value, space in self.eigenspaces:
            columns.append(space.basis)
            diagonal_values.extend([value] * space.dim)
        return hstack(columns, rows=self.dimension), diagonal(diagonal_values)


def eigen_report(M: Mat) -> EigenReport:
    n = _require_square(M, "eigen_report")
    spectrum = rational_eigenvalues(M)
    spaces = tuple((lam, eigenspace(M, lam)) for lam in spectrum.values())
    diagonalizable = spectrum.is_rational and sum(s.dim for _, s in spaces) == n
    return EigenReport(n, spectrum, spaces, diagonalizable)


def certify_diagonalization(M: Mat, report: EigenReport) -> bool:
    """Exact check that the eigenbases reconstruct the identity and diagonalize M."""
    if not report.diagonalizable:
        return False
    n = report.dimension
    if n == 0:
        return True
    P, D = report.change_of_basis()
    if P.det() == 0:
        return False
    P_inv = P.to_dense().inv().to_sparse()
    return mat_equal(P * P_inv, identity(n)) and mat_equal(P_inv * M * P, D)


def eigen_report_from_candidates(M: Mat, candidates: Sequence[Any]) -> EigenReport:
    """Eigen report built from a finite candidate set of eigenvalues.

    When the candidate eigenspaces already fill the whole space the matrix is
    diagonalizable with exactly those eigenvalues and no characteristic
    polynomial is needed; otherwise fall back to eigen_report.
    """
    n = _require_square(M, "eigen_report_from_candidates")
    values = sorted({to_scalar(c) for c in candidates})
    spaces = []
    for lam in values:
        space = eigenspace(M, lam)
        if space.dim:
            spaces.append((lam, space))
    if sum(space.dim for _, space in spaces) != n:
        logger.debug(f"Candidate eigenvalues cover {sum(s.dim for _, s in spaces)} of {n}; computing charpoly")
        return eigen_report(M)
    spectrum = RationalSpectrum(tuple((lam, space.dim) for lam, space in spaces), n)
    return EigenReport(n, spectrum, tuple(spaces), True)
