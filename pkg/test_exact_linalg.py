"""
Tests for exact rational linear algebra: scalars, subspaces, spectra
"""
import sys
import os
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.exact_linalg import (
    LinearAlgebraError,
    Subspace,
    certify_diagonalization,
    characteristic_polynomial,
    column,
    diagonal,
    eigen_report,
    eigen_report_from_candidates,
    format_scalar,
    identity,
    intersect,
    kernel,
    kron,
    kronecker_sum,
    mat_equal,
    matrix,
    rank,
    rational_eigenvalues,
    row,
    scale,
    solve_linear_system,
    to_scalar,
    vec,
)


def test_scalars_are_exact():
    assert to_scalar("3/6") == to_scalar(Fraction(1, 2))
    assert format_scalar("4/2") == "2"
    assert format_scalar(" -3/9 ") == "-1/3"
    for bad in (0.5, True, "abc"):
        try:
            to_scalar(bad)
        except LinearAlgebraError:
            continue
        raise AssertionError(f"{bad!r} should be rejected")


def test_matrix_rejects_ragged_rows():
    try:
        matrix([[1, 2], [3]])
    except LinearAlgebraError:
        return
    raise AssertionError("ragged rows should be rejected")


def test_kernel_and_membership():
    K = kernel(row([1, 1, 0]))
    assert K.dim == 2
    assert K.contains(column([1, -1, 0]))
    assert K.contains(column([0, 0, 5]))
    assert not K.contains(column([1, 0, 0]))
    assert kernel(identity(3)).dim == 0


def test_subspace_canonical_form():
    S1 = Subspace.span_of([column([1, 1, 0]), column([0, 1, 0])], 3)
    S2 = Subspace.span_of([column([2, 0, 0]), column([0, 3, 0]), column([1, 1, 0])], 3)
    assert S1 == S2
    assert S1.dim == 2
    assert Subspace.zero(3).is_subspace_of(S1)
    assert S1.is_subspace_of(Subspace.full(3))
    assert S1.plus(Subspace.span(column([0, 0, 1]))) == Subspace.full(3)


def test_intersection():
    S1 = Subspace.span_of([column([1, 0, 0]), column([0, 1, 0])], 3)
    S2 = Subspace.span_of([column([0, 1, 0]), column([0, 0, 1])], 3)
    assert intersect(S1, S2) == Subspace.span(column([0, 1, 0]))
    assert intersect(S1, Subspace.zero(3)).dim == 0
    try:
        intersect(S1, Subspace.zero(4))
    except LinearAlgebraError:
        return
    raise AssertionError("ambient mismatch should raise")


def test_solve_linear_system():
    x, homogeneous = solve_linear_system(matrix([[1, 1], [0, 1]]), column([3, 1]))
    assert mat_equal(x, column([2, 1]))
    assert homogeneous.dim == 0

    x, homogeneous = solve_linear_system(matrix([[1, 1], [1, 1]]), column([1, 2]))
    assert x is None
    assert homogeneous.dim == 1


def test_characteristic_polynomial():
    coefficients = characteristic_polynomial(matrix([[2, 1], [0, 3]]))
    assert coefficients == [to_scalar(1), to_scalar(-5), to_scalar(6)]


def test_rational_spectrum():
    report = eigen_report(diagonal([1, 1, 2]))
    assert report.multiplicities() == {to_scalar(1): 2, to_scalar(2): 1}
    assert report.diagonalizable
    assert report.eigenspace(1).dim == 2
    assert report.eigenspace(7).dim == 0

    halves = rational_eigenvalues(diagonal(["1/2", "-1/3", 0]))
    assert halves.is_rational
    assert halves.values() == [to_scalar("-1/3"), to_scalar(0), to_scalar("1/2")]


def test_jordan_block_not_diagonalizable():
    report = eigen_report(matrix([[1, 1], [0, 1]]))
    assert report.multiplicities() == {to_scalar(1): 2}
    assert not report.diagonalizable
    assert not certify_diagonalization(matrix([[1, 1], [0, 1]]), report)


def test_rotation_has_no_rational_spectrum():
    spectrum = rational_eigenvalues(matrix([[0, -1], [1, 0]]))
    assert not spectrum.is_rational
    assert spectrum.values() == []


def test_certified_diagonalization():
    M = matrix([[2, 1], [0, 3]])
    report = eigen_report(M)
    assert certify_diagonalization(M, report)
    P, D = report.change_of_basis()
    assert mat_equal(M * P, P * D)


def test_candidate_eigenvalues():
    M = diagonal([1, 2, 2])
    report = eigen_report_from_candidates(M, [1, 2, 5])
    assert report.multiplicities() == {to_scalar(1): 1, to_scalar(2): 2}
    fallback = eigen_report_from_candidates(M, [1])
    assert fallback.multiplicities() == {to_scalar(1): 1, to_scalar(2): 2}


def test_kronecker_products():
    A, B = diagonal([1, 2]), diagonal([10, 20, 30])
    assert kron(A, B).shape == (6, 6)
    assert mat_equal(kronecker_sum(A, B), diagonal([11, 21, 31, 12, 22, 32]))
    assert mat_equal(vec(matrix([[1, 2], [3, 4]])), column([1, 2, 3, 4]))
    assert rank(scale(identity(3), 0)) == 0


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]

    print("="*70)
    print("EXACT LINEAR ALGEBRA TESTS")
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
