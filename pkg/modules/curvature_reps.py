import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from itertools import combinations, product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from modules.exact_linalg import (
    EigenReport,
    Mat,
    QQ,
    Scalar,
    SpectrumError,
    Subspace,
    certify_diagonalization,
    column_values,
    eigen_report_from_candidates,
    entry,
    from_entries,
    hstack,
    intersect,
    is_zero,
    kron,
    kronecker_sum,
    mat_equal,
    nonzero_entries,
    rank,
    scale,
    unit,
)
from modules.graded_algebras import GradedAlgebra, adjoint_on_g1, adjoint_on_gm1
from modules.isotropy import A_of, C_of, IsotropyError, T_spanning_set, eigen_gm1
from modules.utils import CheckResult

logger = logging.getLogger(__name__)


class ShapeError(ValueError):
    pass


class ModuleShape(str, Enum):
    TENSOR_G1 = "Lam2g1_tensor_g1"
    TENSOR_SL = "Lam2g1_tensor_sl_gm1"
    TENSOR_SO = "Lam2g1_tensor_so_gm1"


def default_shape(alg: GradedAlgebra) -> ModuleShape:
    if alg.family.is_projective:
        return ModuleShape.TENSOR_G1 if alg.n == 2 else ModuleShape.TENSOR_SL
    return ModuleShape.TENSOR_G1 if alg.n == 3 else ModuleShape.TENSOR_SO


# ---------------------------------------------------------------------------
# Factors
# ---------------------------------------------------------------------------

def _wedge_pairs(n: int) -> List[Tuple[int, int]]:
    return list(combinations(range(n), 2))


def _sl_basis(n: int) -> List[Mat]:
    basis = [unit(n, n, i, j) for i, j in product(range(n), repeat=2) if i != j]
    basis += [unit(n, n, i, i) - unit(n, n, n - 1, n - 1) for i in range(n - 1)]
    return basis


def _sl_coordinates(m: Mat) -> List[Scalar]:
    n = m.shape[0]
    coords = [entry(m, i, j) for i, j in product(range(n), repeat=2) if i != j]
    coords += [entry(m, i, i) for i in range(n - 1)]
    return coords


def _so_basis(signature: Sequence[int]) -> List[Mat]:
    n = len(signature)
    return [
        from_entries({(i, j): signature[i], (j, i): -signature[j]}, (n, n))
        for i, j in _wedge_pairs(n)
    ]


def _so_coordinates(signature: Sequence[int]) -> Callable[[Mat], List[Scalar]]:
    def coordinates(m: Mat) -> List[Scalar]:
        return [signature[i] * entry(m, i, j) for i, j in _wedge_pairs(len(signature))]
    return coordinates


@dataclass(frozen=True, eq=False)
class TensorModule:
    """Lambda^2 g_1 tensored with g_1, sl(g_{-1}) or so(g_{-1}), as a g_0-module."""

    alg: GradedAlgebra
    shape: ModuleShape
    wedge_pairs: Tuple[Tuple[int, int], ...]
    second_basis: Tuple[Mat, ...] = field(default=())

    @property
    def wedge_dim(self) -> int:
        return len(self.wedge_pairs)

    @property
    def second_dim(self) -> int:
        return self.alg.n if self.shape == ModuleShape.TENSOR_G1 else len(self.second_basis)

    @property
    def dimension(self) -> int:
        return self.wedge_dim * self.second_dim

    def index(self, pair_index: int, second_index: int) -> int:
        return pair_index * self.second_dim + second_index

    def second_coordinates(self, m: Mat) -> List[Scalar]:
        if self.shape == ModuleShape.TENSOR_SL:
            return _sl_coordinates(m)
        return _so_coordinates(self.alg.signature)(m)

    def wedge_action(self, A: Mat) -> Mat:
        """Derivation action on Lambda^2 g_1 induced by ad(A) on g_1."""
        R = adjoint_on_g1(self.alg, A)
        lookup = {p: k for k, p in enumerate(self.wedge_pairs)}
        entries: Dict[Tuple[int, int], Scalar] = defaultdict(lambda: QQ.zero)
        R_entries = nonzero_entries(R)
        for col, (i, j) in enumerate(self.wedge_pairs):
            # R e_i ^ e_j + e_i ^ R e_j
            for (k, src), value in R_entries.items():
                if src == i and k != j:
                    a, b, sign = (k, j, 1) if k < j else (j, k, -1)
                    entries[(lookup[(a, b)], col)] += sign * value
                if src == j and k != i:
                    a, b, sign = (i, k, 1) if i < k else (k, i, -1)
                    entries[(lookup[(a, b)], col)] += sign * value
        return from_entries(dict(entries), (self.wedge_dim, self.wedge_dim))

    def second_action(self, A: Mat) -> Mat:
        if self.shape == ModuleShape.TENSOR_G1:
            return adjoint_on_g1(self.alg, A)
        R = adjoint_on_gm1(self.alg, A)
        columns = {}
        for col, b in enumerate(self.second_basis):
            for r, value in enumerate(self.second_coordinates(R * b - b * R)):
                columns[(r, col)] = value
        return from_entries(columns, (self.second_dim, self.second_dim))

    def factor_actions(self, A: Mat) -> Tuple[Mat, Mat]:
        return self.wedge_action(A), self.second_action(A)

    def action(self, A: Mat) -> Mat:
        return kronecker_sum(*self.factor_actions(A))

    def apply_factors(self, wedge_matrix: Mat, second_matrix: Mat, v: Mat) -> Mat:
        """(W ⊗ I + I ⊗ B) v, computed on the wedge_dim x second_dim reshape of v."""
        V = from_entries(
            {divmod(i, self.second_dim): value for (i, _), value in nonzero_entries(v).items()},
            (self.wedge_dim, self.second_dim),
        )
        image = wedge_matrix * V + V * second_matrix.transpose()
        return from_entries(
            {(self.index(a, b), 0): value for (a, b), value in nonzero_entries(image).items()},
            (self.dimension, 1),
        )

    def grading_spectrum(self) -> Dict[Scalar, int]:
        """Eigenvalues of the grading element on the module, from the factor spectra."""
        E = self.alg.grading_element
        first, second = (eigen_report_from_candidates(M, range(-4, 5)) for M in self.factor_actions(E))
        spectrum: Dict[Scalar, int] = defaultdict(int)
        for (lam, m1), (mu, m2) in product(first.spectrum.eigenvalues, second.spectrum.eigenvalues):
            spectrum[lam + mu] += m1 * m2
        return dict(sorted(spectrum.items()))


def build_module(alg: GradedAlgebra, shape: Optional[ModuleShape] = None) -> TensorModule:
    shape = shape or default_shape(alg)
    pairs = tuple(_wedge_pairs(alg.n))
    if shape == ModuleShape.TENSOR_G1:
        module = TensorModule(alg, shape, pairs)
    elif shape == ModuleShape.TENSOR_SL:
        if not alg.family.is_projective:
            raise ShapeError(f"{shape.value} needs the projective family, got {alg.family.label}")
        module = TensorModule(alg, shape, pairs, tuple(_sl_basis(alg.n)))
    else:
        if not alg.family.is_conformal:
            raise ShapeError(f"{shape.value} needs the conformal family, got {alg.family.label}")
        module = TensorModule(alg, shape, pairs, tuple(_so_basis(alg.signature)))
    logger.debug(f"Built {shape.value} for {alg.family.label}: dim {module.dimension}")
    return module


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ModuleSpectrum:
    module: TensorModule
    A: Mat
    gm1: EigenReport
    wedge: EigenReport
    second: EigenReport
    factors: Tuple[Mat, Mat]
    blocks: List[Tuple[Scalar, Scalar, Mat]]
    verified: bool

    def multiplicities(self) -> Dict[Scalar, int]:
        spectrum: Dict[Scalar, int] = defaultdict(int)
        for (lam, mu, block) in self.blocks:
            spectrum[lam + mu] += block.shape[1]
        return dict(sorted(spectrum.items()))

    def eigenvalues(self) -> List[Scalar]:
        return list(self.multiplicities())

    def span_where(self, predicate: Callable[[Scalar], bool]) -> Subspace:
        chosen = [block for lam, mu, block in self.blocks if predicate(lam + mu)]
        return Subspace.span(hstack(chosen, rows=self.module.dimension))

    @cached_property
    def ss_space(self) -> Subspace:
        return self.span_where(lambda nu: nu < 0)

    @cached_property
    def st_space(self) -> Subspace:
        return self.span_where(lambda nu: nu <= 0)

    def apply(self, v: Mat) -> Mat:
        """Module action of A on a single vector."""
        return self.module.apply_factors(*self.factors, v)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": self.module.shape.value,
            "dimension": self.module.dimension,
            "wedge_spectrum": self.wedge.multiplicities(),
            "second_spectrum": self.second.multiplicities(),
            "module_spectrum": self.multiplicities(),
            "verified_against_action": self.verified,
        }


def _pair_sums(values: Sequence[Scalar]) -> List[Scalar]:
    return [a + b for a, b in product(values, repeat=2)]


def module_spectrum(
    alg: GradedAlgebra,
    Z: Mat,
    X: Mat,
    module: TensorModule,
    verify_limit: int = 256,
) -> ModuleSpectrum:
    A = A_of(alg, Z, X)
    gm1_report = eigen_gm1(alg, A)
    gm1 = gm1_report.eigenvalues()
    g1 = [-lam for lam in gm1]

    wedge_matrix, second_matrix = module.factor_actions(A)
    wedge = eigen_report_from_candidates(wedge_matrix, _pair_sums(g1))
    if module.shape == ModuleShape.TENSOR_G1:
        second = eigen_report_from_candidates(second_matrix, g1)
    else:
        second = eigen_report_from_candidates(second_matrix, [a - b for a, b in product(gm1, repeat=2)])
    for label, report in (("Lambda^2 g_1", wedge), (module.shape.value, second)):
        if not report.diagonalizable:
            raise SpectrumError(f"Induced action on {label} is not diagonalizable over QQ")

    factor_blocks = [
        (lam, mu, S1.basis, S2.basis)
        for (lam, S1), (mu, S2) in product(wedge.eigenspaces, second.eigenspaces)
    ]
    blocks = [(lam, mu, kron(B1, B2)) for lam, mu, B1, B2 in factor_blocks]
    verified = _verify_blocks(module, wedge_matrix, second_matrix, factor_blocks, verify_limit)
    return ModuleSpectrum(module, A, gm1_report, wedge, second, (wedge_matrix, second_matrix), blocks, verified)


def _verify_blocks(
    module: TensorModule,
    wedge_matrix: Mat,
    second_matrix: Mat,
    factor_blocks: Sequence[Tuple[Scalar, Scalar, Mat, Mat]],
    verify_limit: int,
) -> bool:
    """Check product eigenvectors against the module action, factor by factor.

    (W ⊗ I + I ⊗ B)(u ⊗ v) = Wu ⊗ v + u ⊗ Bv, so each block is tested on its
    two factor bases without assembling the module matrix.
    """
    if sum(B1.shape[1] * B2.shape[1] for _, _, B1, B2 in factor_blocks) != module.dimension:
        return False
    for lam, mu, B1, B2 in factor_blocks:
        if module.dimension > verify_limit:
            B1 = B1.extract(list(range(B1.shape[0])), [0])
            B2 = B2.extract(list(range(B2.shape[0])), [0])
        image = kron(wedge_matrix * B1, B2) + kron(B1, second_matrix * B2)
        if not mat_equal(image, scale(kron(B1, B2), lam + mu)):
            return False
    return True


def W_ss(alg: GradedAlgebra, Z: Mat, X: Mat, module: TensorModule) -> Subspace:
    return module_spectrum(alg, Z, X, module).ss_space


def W_st(alg: GradedAlgebra, Z: Mat, X: Mat, module: TensorModule) -> Subspace:
    return module_spectrum(alg, Z, X, module).st_space


def is_invariant(space: Subspace, action: Union[Mat, Callable[[Mat], Mat]]) -> bool:
    """action is a matrix or a function applying the action to one vector."""
    if space.dim == 0:
        return True
    apply = (lambda v: action * v) if isinstance(action, Mat) else action
    images = [apply(v) for v in space.vectors()]
    return rank(hstack([space.basis] + images, rows=space.ambient_dim)) == space.dim


def values_act_trivially(alg: GradedAlgebra, module: TensorModule, A: Mat, space: Subspace) -> bool:
    """Every endomorphism part of every element of space kills the (-2)-eigenline of A."""
    if module.shape == ModuleShape.TENSOR_G1:
        raise ShapeError("values_act_trivially needs an endomorphism-valued module")
    line = eigen_gm1(alg, A).eigenspace(-2).vectors()
    basis_entries = [nonzero_entries(b) for b in module.second_basis]
    n = alg.n
    for w in space.vectors():
        coords = column_values(w)
        for a in range(module.wedge_dim):
            entries: Dict[Tuple[int, int], Scalar] = defaultdict(lambda: QQ.zero)
            for b, element in enumerate(basis_entries):
                c = coords[module.index(a, b)]
                if c:
                    for key, value in element.items():
                        entries[key] += c * value
            m = from_entries(dict(entries), (n, n))
            if not is_zero(m) and any(not is_zero(m * x) for x in line):
                return False
    return True


# ---------------------------------------------------------------------------
# Flatness conditions
# ---------------------------------------------------------------------------

@dataclass
class FlatnessReport:
    Z: Mat
    shape: ModuleShape
    condition1: CheckResult
    condition2: CheckResult
    condition3: CheckResult
    certificates: List[bool] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.condition1.passed and self.condition2.passed and self.condition3.passed

    def checks(self) -> List[CheckResult]:
        return [self.condition1, self.condition2, self.condition3]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": self.shape.value,
            "passed": self.passed,
            "conditions": [c.to_dict() for c in self.checks()],
            "diagonalizability_certificates": self.certificates,
        }


def check_flat_conditions(
    alg: GradedAlgebra,
    Z: Mat,
    shape: Optional[ModuleShape] = None,
    verify_limit: int = 256,
    spectra: Optional[Sequence[ModuleSpectrum]] = None,
) -> FlatnessReport:
    """Conditions (1)-(3) over a spanning set of T(Z).

    spectra, when given, are the module spectra already computed for that
    spanning set (one per X) and are reused as they are.
    """
    if is_zero(Z):
        raise IsotropyError("check_flat_conditions requires a nonzero covector Z")
    if spectra:
        module = spectra[0].module
        if shape is not None and module.shape != shape:
            raise ShapeError(f"Spectra were computed on {module.shape.value}, not {shape.value}")
    else:
        module = build_module(alg, shape)
        spectra = [module_spectrum(alg, Z, X, module, verify_limit) for X in T_spanning_set(alg, Z)]
    C = C_of(alg, Z)

    gm1_spectra, certificates, cond1_ok = [], [], True
    for spectrum in spectra:
        report = spectrum.gm1
        certificates.append(certify_diagonalization(adjoint_on_gm1(alg, spectrum.A), report))
        nonpositive = report.spectrum.is_rational and all(lam <= 0 for lam in report.eigenvalues())
        cond1_ok = cond1_ok and report.diagonalizable and nonpositive and report.eigenspace(0) == C
        gm1_spectra.append(report.multiplicities())
    condition1 = CheckResult(
        "condition1_nonpositive_spectrum",
        cond1_ok and all(certificates),
        {"spectra": gm1_spectra, "C_dim": C.dim},
    )

    ss_dims = [spectrum.ss_space.dim for spectrum in spectra]
    st_spaces = [spectrum.st_space for spectrum in spectra]
    condition2 = CheckResult("condition2_W_ss_zero", all(d == 0 for d in ss_dims), {"W_ss_dims": ss_dims})

    running = st_spaces[0]
    trace = [running.dim]
    for space in st_spaces[1:]:
        if running.dim == 0:
            break
        running = intersect(running, space)
        trace.append(running.dim)
    condition3 = CheckResult(
        "condition3_W_st_intersection",
        running.dim == 0,
        {"W_st_dims": [s.dim for s in st_spaces], "intersection_trace": trace},
    )

    report = FlatnessReport(Z, module.shape, condition1, condition2, condition3, certificates)
    logger.debug(f"Flatness for {alg.family.label}: {report.passed}, trace {trace}")
    return report
