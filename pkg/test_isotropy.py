"""
Tests for C(Z), F(Z), T(Z) and the spectrum of [Z,X] on g_-1
"""
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.exact_linalg import Subspace, column, is_zero, mat_equal, row, to_scalar
from modules.graded_algebras import AlgebraFamily, UnsupportedOperationError, build
from modules.isotropy import (
    GeometricType,
    IsotropyError,
    NotInTError,
    A_of,
    C_closed_form,
    C_of,
    F_closed_form,
    F_membership,
    T_closed_form,
    T_description,
    T_membership,
    T_spanning_set,
    analyze,
    eigen_gm1,
    geometric_type,
    reflection,
    scaled_T_complement,
    signature_symmetries,
    transport_covector,
    transport_vector,
)

PROJECTIVE_3 = build(AlgebraFamily.projective(3))
CONFORMAL_1_2 = build(AlgebraFamily.conformal(1, 2))
CONFORMAL_2_2 = build(AlgebraFamily.conformal(2, 2))


def spectrum(values):
    return {to_scalar(k): m for k, m in values.items()}


def test_geometric_types():
    assert geometric_type(PROJECTIVE_3, row([0, 1, 0])) == GeometricType.PROJECTIVE_NONZERO
    assert geometric_type(PROJECTIVE_3, row([0, 0, 0])) == GeometricType.PROJECTIVE_ZERO
    assert geometric_type(CONFORMAL_1_2, row([1, 1, 0])) == GeometricType.CONFORMAL_NULL
    assert geometric_type(CONFORMAL_1_2, row([1, 0, 0])) == GeometricType.CONFORMAL_POSITIVE
    assert geometric_type(CONFORMAL_1_2, row([0, 1, 0])) == GeometricType.CONFORMAL_NEGATIVE
    assert geometric_type(CONFORMAL_1_2, row([0, 0, 0])) == GeometricType.CONFORMAL_ZERO


def test_C_of_null_covector():
    C = C_of(CONFORMAL_1_2, row([1, 1, 0]))
    assert C == Subspace.span(column([1, -1, 0]))
    assert C == C_closed_form(CONFORMAL_1_2, row([1, 1, 0]))


def test_C_of_non_null_and_projective():
    assert C_of(CONFORMAL_1_2, row([1, 0, 0])).dim == 0
    assert C_of(PROJECTIVE_3, row([1, 2, 0])).dim == 0
    assert C_of(PROJECTIVE_3, row([0, 0, 0])).dim == 3
    assert C_closed_form(PROJECTIVE_3, row([0, 0, 0])) == Subspace.full(3)


def test_F_membership():
    Z = row([1, 0, 0])
    assert F_membership(PROJECTIVE_3, Z, column([0, 1, 0]))
    assert not F_membership(PROJECTIVE_3, Z, column([1, 1, 0]))

    Z = row([1, 1, 0])
    assert F_membership(CONFORMAL_1_2, Z, column([1, -1, 0]))
    assert not F_membership(CONFORMAL_1_2, Z, column([0, 0, 1]))
    for X in (column([1, -1, 0]), column([0, 0, 1]), column([2, 1, 1])):
        assert F_membership(CONFORMAL_1_2, Z, X) == F_closed_form(CONFORMAL_1_2, Z, X)


def test_T_of_positive_covector_is_a_point():
    Z = row([1, 0, 0])
    description = T_description(CONFORMAL_1_2, Z)
    assert description.kind == "unique_point"
    assert mat_equal(description.point, column([2, 0, 0]))
    assert T_membership(CONFORMAL_1_2, Z, column([2, 0, 0]))
    assert not T_membership(CONFORMAL_1_2, Z, column([1, 0, 0]))


def test_T_of_projective_covector():
    Z = row([1, 0, 0])
    assert T_membership(PROJECTIVE_3, Z, column([1, 5, -2]))
    assert T_closed_form(PROJECTIVE_3, Z, column([1, 5, -2]))
    assert not T_membership(PROJECTIVE_3, Z, column([2, 0, 0]))
    assert T_description(PROJECTIVE_3, Z).kind == "affine_hyperplane"


def test_T_of_null_covector():
    Z = row([1, 1, 0])
    X = column(["1/2", "1/2", 0])
    assert T_membership(CONFORMAL_1_2, Z, X)
    assert T_closed_form(CONFORMAL_1_2, Z, X)
    assert T_description(CONFORMAL_1_2, Z).kind == "quadric_slice"
    # on the hyperplane ZX = 1 but not null
    assert not T_membership(CONFORMAL_1_2, Z, column([1, 0, 0]))


def test_F_and_T_are_disjoint():
    Z = row([1, 0, 0])
    for X in (column([1, 5, -2]), column([0, 1, 0]), column([3, 0, 0])):
        assert not (F_membership(PROJECTIVE_3, Z, X) and T_membership(PROJECTIVE_3, Z, X))


def test_zero_covector_is_rejected():
    try:
        T_description(PROJECTIVE_3, row([0, 0, 0]))
    except IsotropyError:
        pass
    else:
        raise AssertionError("T(0) should raise")
    data = analyze(PROJECTIVE_3, row([0, 0, 0]))
    assert data.gtype == GeometricType.PROJECTIVE_ZERO
    assert data.T is None and data.spanning == []


def test_A_of_requires_T():
    try:
        A_of(PROJECTIVE_3, row([1, 0, 0]), column([2, 0, 0]))
    except NotInTError as e:
        assert "[[Z,X],X] = -2X" in str(e)
        assert "[[Z,X],Z] = 2Z" in str(e)
        return
    raise AssertionError("X outside T(Z) should raise NotInTError")


def test_spectra_on_gm1():
    A = A_of(PROJECTIVE_3, row([1, 0, 0]), column([1, 5, -2]))
    assert eigen_gm1(PROJECTIVE_3, A).multiplicities() == spectrum({-2: 1, -1: 2})

    A = A_of(CONFORMAL_1_2, row([1, 0, 0]), column([2, 0, 0]))
    assert mat_equal(A, CONFORMAL_1_2.grading_element.scalarmul(to_scalar(2)))
    assert eigen_gm1(CONFORMAL_1_2, A).multiplicities() == spectrum({-2: 3})

    A = A_of(CONFORMAL_1_2, row([1, 1, 0]), column(["1/2", "1/2", 0]))
    report = eigen_gm1(CONFORMAL_1_2, A)
    assert report.multiplicities() == spectrum({-2: 1, -1: 1, 0: 1})
    assert report.eigenspace(0) == C_of(CONFORMAL_1_2, row([1, 1, 0]))


def test_T_spanning_sets():
    cases = [
        (PROJECTIVE_3, row([1, 2, 0]), 3),
        (CONFORMAL_1_2, row([1, 1, 0]), 3),
        (CONFORMAL_2_2, row([1, 0, 1, 0]), 4),
        (CONFORMAL_1_2, row([0, 1, 0]), 1),
    ]
    for alg, Z, expected_rank in cases:
        spanning = T_spanning_set(alg, Z)
        assert all(T_membership(alg, Z, X) for X in spanning)
        assert Subspace.span_of(spanning, alg.n).dim == expected_rank


def test_scaled_T_complement():
    Z = row([1, 0, 0])
    assert scaled_T_complement(PROJECTIVE_3, Z, column([3, 1, 1]))
    assert not scaled_T_complement(PROJECTIVE_3, Z, column([0, 1, 1]))
    try:
        scaled_T_complement(CONFORMAL_1_2, Z, column([1, 0, 0]))
    except UnsupportedOperationError:
        return
    raise AssertionError("scaled_T_complement is projective only")


def test_signature_symmetries_preserve_the_form():
    for alg in (CONFORMAL_1_2, CONFORMAL_2_2):
        I = alg.signature_matrix
        for g in signature_symmetries(alg):
            assert mat_equal(g.transpose() * I * g, I)


def test_equivariance_under_reflections():
    Z = row([1, 1, 0])
    g = reflection(CONFORMAL_1_2, column([0, 1, 1]))
    gZ = transport_covector(g, Z)
    assert geometric_type(CONFORMAL_1_2, gZ) == GeometricType.CONFORMAL_NULL
    C = C_of(CONFORMAL_1_2, Z)
    transported = Subspace.span_of([transport_vector(g, v) for v in C.vectors()], 3)
    assert C_of(CONFORMAL_1_2, gZ) == transported
    X = column(["1/2", "1/2", 0])
    assert T_membership(CONFORMAL_1_2, gZ, transport_vector(g, X))


def test_reflection_needs_non_null_vector():
    try:
        reflection(CONFORMAL_1_2, column([1, 1, 0]))
    except IsotropyError:
        return
    raise AssertionError("reflection in a null vector should raise")


def test_analyze_summary():
    data = analyze(CONFORMAL_1_2, row([1, 1, 0]))
    summary = data.to_dict()
    assert summary["geometric_type"] == "ConformalNull"
    assert len(summary["C_basis"]) == 1
    assert summary["T_description"]["kind"] == "quadric_slice"
    assert data.T_oracle(column(["1/2", "1/2", 0]))
    assert data.F_oracle(column([1, -1, 0]))
    assert not is_zero(data.A_of(column(["1/2", "1/2", 0])))


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]

    print("="*70)
    print("ISOTROPY TESTS")
    print("="*70)

    failed = 0
    for name, fn in tests:
        try:
            fn()
            print(f"✓ {name}")
        except Exception as e:
            failed += 1
            print(f"✗ {name}: {e!r}")

    print("="*70)
    print(f"{len(tests) - failed}/{len(tests)} passed")
    sys.exit(0 if failed == 0 else 1)
