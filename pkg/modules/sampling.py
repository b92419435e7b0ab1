import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import numpy as np

from modules.exact_linalg import (
    Mat,
    Scalar,
    column,
    identity,
    is_zero,
    row,
    row_values,
    scale,
    to_scalar,
    unit,
)
from modules.graded_algebras import GradedAlgebra, pair, vector_inner_product
from modules.isotropy import (
    GeometricType,
    IsotropyError,
    T_description,
    geometric_type,
    reflection,
    transport_covector,
    transport_vector,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CovectorSample:
    """Z = scale * Z0 g^{-1}, with Z0 the canonical covector of its type."""

    Z: Mat
    gtype: GeometricType
    canonical: Mat
    transform: Optional[Mat]
    scale: Scalar


def canonical_covector(alg: GradedAlgebra, gtype: GeometricType) -> Mat:
    n = alg.n
    if gtype in (GeometricType.PROJECTIVE_ZERO, GeometricType.CONFORMAL_ZERO):
        return row([0] * n)
    if gtype in (GeometricType.PROJECTIVE_NONZERO, GeometricType.CONFORMAL_POSITIVE):
        return unit(1, n, 0, 0)
    if gtype == GeometricType.CONFORMAL_NEGATIVE:
        return unit(1, n, 0, n - 1)
    p = alg.family.p
    return unit(1, n, 0, 0) + unit(1, n, 0, p)


def available_types(alg: GradedAlgebra) -> List[GeometricType]:
    """Nonzero geometric types realized by the signature."""
    if alg.family.is_projective:
        return [GeometricType.PROJECTIVE_NONZERO]
    p, q = alg.family.p, alg.family.q
    types = []
    if p >= 1:
        types.append(GeometricType.CONFORMAL_POSITIVE)
    if p >= 1 and q >= 1:
        types.append(GeometricType.CONFORMAL_NULL)
    if q >= 1:
        types.append(GeometricType.CONFORMAL_NEGATIVE)
    return types


def _canonical_F_minus_C(alg: GradedAlgebra, gtype: GeometricType) -> Optional[Mat]:
    n, p, q = alg.n, alg.family.p, alg.family.q
    if gtype == GeometricType.PROJECTIVE_NONZERO:
        return unit(n, 1, 1, 0)
    if gtype == GeometricType.CONFORMAL_NULL and p >= 2:
        return unit(n, 1, 1, 0) + unit(n, 1, p + 1, 0)
    if gtype == GeometricType.CONFORMAL_POSITIVE and p >= 2:
        return unit(n, 1, 1, 0) + unit(n, 1, p, 0)
    if gtype == GeometricType.CONFORMAL_NEGATIVE and p >= 1 and q >= 2:
        return unit(n, 1, 0, 0) + unit(n, 1, p, 0)
    return None


class RationalSampler:
    """Seeded generator of exact rational samples."""

    def __init__(self, seed: int, numerator_bound: int = 5, denominator_bound: int = 4):
        self.seed = seed
        self.numerator_bound = numerator_bound
        self.denominator_bound = denominator_bound
        self.rng = np.random.default_rng(seed)

    def rational(self) -> Scalar:
        num = int(self.rng.integers(-self.numerator_bound, self.numerator_bound + 1))
        den = int(self.rng.integers(1, self.denominator_bound + 1))
        return to_scalar(Fraction(num, den))

    def nonzero_rational(self) -> Scalar:
        while True:
            x = self.rational()
            if x != 0:
                return x

    def positive_rational(self) -> Scalar:
        x = self.nonzero_rational()
        return x if x > 0 else -x

    def vector(self, n: int) -> Mat:
        return column([self.rational() for _ in range(n)])

    def covector(self, n: int) -> Mat:
        return row([self.rational() for _ in range(n)])

    def nonzero_vector(self, n: int) -> Mat:
        while True:
            v = self.vector(n)
            if not is_zero(v):
                return v

    def nonzero_covector(self, n: int) -> Mat:
        return self.nonzero_vector(n).transpose()

    def non_null_vector(self, alg: GradedAlgebra) -> Mat:
        while True:
            v = self.nonzero_vector(alg.n)
            if vector_inner_product(alg, v, v) != 0:
                return v

    def orthogonal_transform(self, alg: GradedAlgebra, reflections: int = 2) -> Mat:
        g = identity(alg.n)
        for _ in range(reflections):
            g = reflection(alg, self.non_null_vector(alg)) * g
        return g

    # -- covectors ---------------------------------------------------------

    def covector_sample(self, alg: GradedAlgebra, gtype: GeometricType) -> CovectorSample:
        if gtype not in available_types(alg):
            raise IsotropyError(f"{gtype.value} does not occur for {alg.family.label}")
        canonical = canonical_covector(alg, gtype)
        if alg.family.is_projective:
            Z = self.nonzero_covector(alg.n)
            return CovectorSample(Z, gtype, canonical, identity(alg.n), to_scalar(1))
        g = self.orthogonal_transform(alg)
        c = self.nonzero_rational()
        Z = scale(transport_covector(g, canonical), c)
        if geometric_type(alg, Z) != gtype:
            raise IsotropyError("Transported covector changed geometric type")
        return CovectorSample(Z, gtype, canonical, g, c)

    def canonical_sample(self, alg: GradedAlgebra, gtype: GeometricType) -> CovectorSample:
        canonical = canonical_covector(alg, gtype)
        return CovectorSample(canonical, gtype, canonical, identity(alg.n), to_scalar(1))

    # -- vectors attached to Z ---------------------------------------------

    def T_element(self, alg: GradedAlgebra, Z: Mat) -> Mat:
        gtype = geometric_type(alg, Z)
        if gtype.is_non_null:
            return T_description(alg, Z).point
        Y = self._on_hyperplane(alg, Z, 1)
        if gtype == GeometricType.CONFORMAL_NULL:
            W = alg.signature_matrix * Z.transpose()
            Y = Y - scale(W, vector_inner_product(alg, Y, Y) / 2)
        return Y

    def _on_hyperplane(self, alg: GradedAlgebra, Z: Mat, level: int) -> Mat:
        """A random Y with ZY = level."""
        values = row_values(Z)
        k = next(i for i, z in enumerate(values) if z != 0)
        Y = self.vector(alg.n)
        return Y + scale(unit(alg.n, 1, k, 0), (level - pair(Z, Y)) / values[k])

    def kernel_element(self, alg: GradedAlgebra, Z: Mat) -> Mat:
        while True:
            Y = self._on_hyperplane(alg, Z, 0)
            if not is_zero(Y):
                return Y

    def C_element(self, alg: GradedAlgebra, Z: Mat, C_basis: List[Mat]) -> Optional[Mat]:
        if not C_basis:
            return None
        total = scale(C_basis[0], self.nonzero_rational())
        for v in C_basis[1:]:
            total = total + scale(v, self.rational())
        return total

    def F_minus_C_element(self, alg: GradedAlgebra, sample: CovectorSample) -> Optional[Mat]:
        """An element of F(Z) outside C(Z), or None when that set is empty."""
        if alg.family.is_projective:
            return self.kernel_element(alg, sample.Z)
        X0 = _canonical_F_minus_C(alg, sample.gtype)
        if X0 is None or sample.transform is None:
            return None
        return scale(transport_vector(sample.transform, X0), self.nonzero_rational())

    def null_ray(self, alg: GradedAlgebra, Z: Mat) -> Mat:
        """A null xi with Z xi > 0."""
        return scale(self.T_element(alg, Z), self.positive_rational())

    def membership_probes(self, alg: GradedAlgebra, sample: CovectorSample, count: int) -> Iterator[Tuple[str, Mat]]:
        """Cycle through generic, kernel, T and F minus C vectors."""
        kinds = ["generic", "kernel", "T", "scaled_T", "F_minus_C"]
        for i in range(count):
            kind = kinds[i % len(kinds)]
            if kind == "generic":
                yield kind, self.vector(alg.n)
            elif kind == "kernel":
                yield kind, self.kernel_element(alg, sample.Z)
            elif kind == "T":
                yield kind, self.T_element(alg, sample.Z)
            elif kind == "scaled_T":
                yield kind, scale(self.T_element(alg, sample.Z), self.nonzero_rational())
            else:
                X = self.F_minus_C_element(alg, sample)
                yield kind, X if X is not None else self.vector(alg.n)

    def bracket_triples(self, alg: GradedAlgebra, count: int) -> List[Tuple[Mat, Mat, Mat]]:
        return [
            (self.covector(alg.n), self.vector(alg.n), self.vector(alg.n))
            for _ in range(count)
        ]
