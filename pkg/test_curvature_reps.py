"""
Tests for the curvature modules and the three flatness conditions
"""
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.exact_linalg import column, mat_equal, row, to_scalar, unit
from modules.graded_algebras import AlgebraFamily, build
from modules.curvature_reps import (
    ModuleShape,
    ShapeError,
    W_ss,
    W_st,
    build_module,
    check_flat_conditions,
    default_shape,
    is_invariant,
    module_spectrum,
    values_act_trivially,
)
from modules.isotropy import IsotropyError, T_spanning_set

PROJECTIVE_3 = build(AlgebraFamily.projective(3))
CONFORMAL_1_3 = build(AlgebraFamily.conformal(1, 3))


def values(items):
    return {to_scalar(v) for v in items}


def test_module_dimensions():
    assert build_module(PROJECTIVE_3, ModuleShape.TENSOR_G1).dimension == 9
    assert build_module(PROJECTIVE_3, ModuleShape.TENSOR_SL).dimension == 24
    assert build_module(CONFORMAL_1_3, ModuleShape.TENSOR_SO).dimension == 36
    assert build_module(CONFORMAL_1_3, ModuleShape.TENSOR_G1).dimension == 24


def test_default_shapes():
    assert default_shape(build(AlgebraFamily.projective(2))) == ModuleShape.TENSOR_G1
    assert default_shape(PROJECTIVE_3) == ModuleShape.TENSOR_SL
    assert default_shape(build(AlgebraFamily.conformal(1, 2))) == ModuleShape.TENSOR_G1
    assert default_shape(CONFORMAL_1_3) == ModuleShape.TENSOR_SO


def test_shape_must_match_family():
    for alg, shape in ((PROJECTIVE_3, ModuleShape.TENSOR_SO), (CONFORMAL_1_3, ModuleShape.TENSOR_SL)):
        try:
            build_module(alg, shape)
        except ShapeError:
            continue
        raise AssertionError(f"{shape.value} should be rejected for {alg.family.label}")


def test_grading_element_spectrum():
    assert build_module(PROJECTIVE_3, ModuleShape.TENSOR_G1).grading_spectrum() == {to_scalar(3): 9}
    assert build_module(PROJECTIVE_3, ModuleShape.TENSOR_SL).grading_spectrum() == {to_scalar(2): 24}
    assert build_module(CONFORMAL_1_3, ModuleShape.TENSOR_SO).grading_spectrum() == {to_scalar(2): 36}


def test_projective_module_spectrum_is_positive():
    Z, X = row([1, 0, 0]), column([1, 0, 0])
    module = build_module(PROJECTIVE_3)
    spectrum = module_spectrum(PROJECTIVE_3, Z, X, module)
    assert spectrum.verified
    assert set(spectrum.wedge.eigenvalues()) == values([2, 3])
    assert set(spectrum.second.eigenvalues()) <= values([-1, 0, 1])
    assert all(v > 0 for v in spectrum.eigenvalues())
    assert sum(spectrum.multiplicities().values()) == 24
    assert W_st(PROJECTIVE_3, Z, X, module).dim == 0


def test_null_module_spectrum():
    Z = row([1, 1, 0, 0])
    module = build_module(CONFORMAL_1_3)
    X = T_spanning_set(CONFORMAL_1_3, Z)[0]
    spectrum = module_spectrum(CONFORMAL_1_3, Z, X, module)
    assert spectrum.verified
    assert set(spectrum.wedge.eigenvalues()) == values([1, 2, 3])
    assert set(spectrum.second.eigenvalues()) <= values([-1, 0, 1])

    stable = spectrum.span_where(lambda nu: nu <= 0)
    assert stable.dim == (CONFORMAL_1_3.n - 2) ** 2
    assert W_ss(CONFORMAL_1_3, Z, X, module).dim == 0
    assert is_invariant(stable, module.action(spectrum.A))
    assert values_act_trivially(CONFORMAL_1_3, module, spectrum.A, stable)


def test_values_act_trivially_needs_endomorphisms():
    module = build_module(PROJECTIVE_3, ModuleShape.TENSOR_G1)
    spectrum = module_spectrum(PROJECTIVE_3, row([1, 0, 0]), column([1, 0, 0]), module)
    try:
        values_act_trivially(PROJECTIVE_3, module, spectrum.A, spectrum.span_where(lambda nu: nu <= 0))
    except ShapeError:
        return
    raise AssertionError("g_1-valued module has no endomorphism part")


def test_flat_conditions_hold():
    cases = [
        (PROJECTIVE_3, row([1, 0, 0]), None),
        (PROJECTIVE_3, row([0, 2, -1]), ModuleShape.TENSOR_G1),
        (CONFORMAL_1_3, row([1, 0, 0, 0]), None),
        (CONFORMAL_1_3, row([0, 0, 1, 0]), None),
        (CONFORMAL_1_3, row([1, 1, 0, 0]), None),
        (build(AlgebraFamily.conformal(1, 2)), row([1, 0, 1]), None),
    ]
    for alg, Z, shape in cases:
        report = check_flat_conditions(alg, Z, shape)
        assert report.passed, report.to_dict()
        assert all(report.certificates)
        trace = report.condition3.evidence["intersection_trace"]
        assert trace[-1] == 0
        assert all(a >= b for a, b in zip(trace, trace[1:]))


def test_null_flatness_needs_the_intersection():
    report = check_flat_conditions(CONFORMAL_1_3, row([1, 1, 0, 0]))
    assert report.condition3.evidence["W_st_dims"][0] == 4
    assert len(report.condition3.evidence["intersection_trace"]) > 1
    names = [c.name for c in report.checks()]
    assert names == ["condition1_nonpositive_spectrum", "condition2_W_ss_zero", "condition3_W_st_intersection"]


def test_flat_conditions_reject_zero_covector():
    try:
        check_flat_conditions(PROJECTIVE_3, row([0, 0, 0]))
    except IsotropyError:
        return
    raise AssertionError("Z = 0 should raise")


def test_factor_action_matches_assembled_action():
    Z = row([1, 1, 0, 0])
    module = build_module(CONFORMAL_1_3)
    X = T_spanning_set(CONFORMAL_1_3, Z)[1]
    spectrum = module_spectrum(CONFORMAL_1_3, Z, X, module)
    M = module.action(spectrum.A)
    for k in (0, 7, 20, 35):
        v = unit(module.dimension, 1, k, 0)
        assert mat_equal(spectrum.apply(v), M * v)
    assert is_invariant(spectrum.st_space, spectrum.apply)
    assert spectrum.st_space == spectrum.span_where(lambda nu: nu <= 0)


def test_block_verification_with_small_limit():
    Z = row([1, 1, 0, 0])
    module = build_module(CONFORMAL_1_3)
    X = T_spanning_set(CONFORMAL_1_3, Z)[0]
    assert module_spectrum(CONFORMAL_1_3, Z, X, module, verify_limit=1).verified


def test_flat_conditions_reuse_spectra():
    Z = row([1, 1, 0, 0])
    module = build_module(CONFORMAL_1_3)
    spectra = [module_spectrum(CONFORMAL_1_3, Z, X, module) for X in T_spanning_set(CONFORMAL_1_3, Z)]
    reused = check_flat_conditions(CONFORMAL_1_3, Z, module.shape, spectra=spectra)
    fresh = check_flat_conditions(CONFORMAL_1_3, Z, module.shape)
    assert reused.to_dict() == fresh.to_dict()
    try:
        check_flat_conditions(CONFORMAL_1_3, Z, ModuleShape.TENSOR_G1, spectra=spectra)
    except ShapeError:
        return
    raise AssertionError("spectra from another module shape should be rejected")


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]

    print("="*70)
    print("CURVATURE MODULE TESTS")
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
