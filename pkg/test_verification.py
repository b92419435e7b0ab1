"""
Tests for suite assembly: lemma chains, flow grids, classification, negative controls
"""
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.exact_linalg import column, row
from modules.graded_algebras import AlgebraFamily, build
from modules.isotropy import GeometricType, NotInTError, T_spanning_set
from modules.verification import (
    LemmaKind,
    LemmaSelectionError,
    SuiteSettings,
    algebra_suite,
    classify_suite,
    family_cases,
    flow_grid_case,
    flow_suite,
    lemma_for,
    negative_controls,
    select_lemma,
    trajectory_rows,
    verify_all,
    verify_lemma_suite,
)

SMALL = SuiteSettings(
    random_samples=1,
    membership_samples=10,
    bracket_samples=5,
    flow_pairs=1,
    null_rays=2,
    flow_grid=("1", "1/2", "-1/2"),
    classify_parameters=("1", "-1/2"),
)


def failures(records):
    return [(r["case"], r["name"], r["evidence"]) for r in records if not r["passed"]]


def test_lemma_routing():
    assert LemmaKind.PROJECTIVE.family == "projective"
    assert LemmaKind.CONFORMAL_NULL.family == "conformal"
    assert lemma_for(GeometricType.CONFORMAL_NEGATIVE) == LemmaKind.CONFORMAL_NONNULL
    assert lemma_for(GeometricType.CONFORMAL_ZERO) is None


def test_select_lemma_rejects_wrong_type():
    alg = build(AlgebraFamily.conformal(2, 2))
    assert select_lemma(alg, row([0, 1, 1, 0]), LemmaKind.CONFORMAL_NULL) == GeometricType.CONFORMAL_NULL
    try:
        select_lemma(alg, row([0, 1, 1, 0]), LemmaKind.CONFORMAL_NONNULL)
    except LemmaSelectionError as e:
        assert "ConformalNull" in str(e)
        return
    raise AssertionError("null Z under the non-null lemma should raise")


def test_algebra_suite_passes():
    records = algebra_suite(AlgebraFamily.conformal(1, 2), SMALL)
    assert records and not failures(records)
    assert all(r["suite"] == "validate-algebra" for r in records)


def test_projective_lemma_suite():
    records = verify_lemma_suite(AlgebraFamily.projective(3), LemmaKind.PROJECTIVE, SMALL)
    assert not failures(records), failures(records)
    names = {r["name"] for r in records}
    for expected in ("gm1_spectrum", "condition3_W_st_intersection", "scaled_T_is_complement_of_kernel",
                     "signature_symmetry_equivariance", "smoothly_isolated_witness"):
        assert expected in names
    cases = {r["case"] for r in records}
    assert cases == {"projective(n=3)/ProjectiveNonzero/canonical", "projective(n=3)/ProjectiveNonzero/random-00"}


def test_conformal_lemma_suites():
    family = AlgebraFamily.conformal(1, 3)
    for lemma in (LemmaKind.CONFORMAL_NONNULL, LemmaKind.CONFORMAL_NULL):
        records = verify_lemma_suite(family, lemma, SMALL)
        assert not failures(records), failures(records)
    null_records = verify_lemma_suite(family, LemmaKind.CONFORMAL_NULL, SMALL)
    assert any(r["name"] == "W_st_nonzero_per_X" for r in null_records)


def test_explicit_covector():
    records = verify_lemma_suite(AlgebraFamily.conformal(1, 2), LemmaKind.CONFORMAL_NULL, SMALL, row([1, 1, 0]))
    assert {r["case"] for r in records} == {"conformal(p=1,q=2)/explicit"}
    assert not failures(records)


def test_lemma_without_matching_types():
    definite = AlgebraFamily.conformal(0, 3, allow_definite=True)
    try:
        verify_lemma_suite(definite, LemmaKind.CONFORMAL_NULL, SMALL)
    except LemmaSelectionError:
        pass
    else:
        raise AssertionError("definite signature has no null covectors")
    try:
        verify_lemma_suite(AlgebraFamily.projective(2), LemmaKind.CONFORMAL_NULL, SMALL)
    except LemmaSelectionError:
        return
    raise AssertionError("conformal lemma on the projective family should raise")


def test_flow_grid_case():
    alg = build(AlgebraFamily.projective(2))
    records = flow_grid_case(alg, row([1, 0]), column([1, 0]), "explicit", ("1", "-1", "1/2"))
    by_name = {r["name"]: r for r in records}
    assert by_name["flow_law_positive_st"]["passed"]
    reported = by_name["flow_law_negative_st_reported"]["evidence"]
    assert reported["poles"] == [{"s": "1", "t": "-1"}, {"s": "-1", "t": "1"}]
    try:
        flow_grid_case(alg, row([1, 0]), column([2, 0]), "explicit", ("1",))
    except NotInTError:
        return
    raise AssertionError("X outside T(Z) should raise")


def test_flow_and_classify_suites():
    alg = build(AlgebraFamily.conformal(2, 2))
    for gtype in (GeometricType.CONFORMAL_NULL, GeometricType.CONFORMAL_POSITIVE):
        records = flow_suite(alg, SMALL, gtype)
        assert not failures(records), failures(records)
    records = classify_suite(alg, SMALL)
    assert not failures(records), failures(records)
    assert any(r["name"] == "classify_F_minus_C" for r in records)

    records = classify_suite(build(AlgebraFamily.conformal(1, 2)), SMALL)
    assert any(r["name"] == "F_minus_C_empty" for r in records)


def test_trajectory_rows():
    alg = build(AlgebraFamily.projective(2))
    rows = trajectory_rows(alg, row([1, 0]), column([1, 0]), 1, ["0", "-1", "1"])
    assert [r["in_chart"] for r in rows] == [True, False, True]
    assert rows[1]["y1"] is None
    assert set(rows[0]) == {"t", "in_chart", "y1", "y2"}


def test_negative_controls_pass():
    records = negative_controls(SMALL)
    assert len(records) == 6
    assert not failures(records), failures(records)


def test_family_cases():
    labels = [f.label for f in family_cases(4)]
    assert labels == [
        "projective(n=2)",
        "projective(n=3)",
        "projective(n=4)",
        "conformal(p=1,q=2)",
        "conformal(p=1,q=3)",
        "conformal(p=2,q=2)",
    ]


def test_verify_all_is_deterministic():
    first = verify_all(3, SMALL)
    second = verify_all(3, SMALL)
    assert first == second
    assert not failures(first), failures(first)
    keys = [(r["suite"], r["case"], r["name"]) for r in first]
    assert keys == sorted(keys)


def test_lemma_case_computes_each_module_spectrum_once():
    import modules.curvature_reps as curvature_reps
    import modules.verification as verification

    calls = []
    original = curvature_reps.module_spectrum

    def counting(*args, **kwargs):
        calls.append(args[2])
        return original(*args, **kwargs)

    curvature_reps.module_spectrum = verification.module_spectrum = counting
    try:
        records = verify_lemma_suite(AlgebraFamily.conformal(1, 3), LemmaKind.CONFORMAL_NULL, SMALL, row([1, 1, 0, 0]))
    finally:
        curvature_reps.module_spectrum = verification.module_spectrum = original
    assert not failures(records), failures(records)
    spanning = T_spanning_set(build(AlgebraFamily.conformal(1, 3)), row([1, 1, 0, 0]))
    assert len(calls) == len(spanning)


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]

    print("="*70)
    print("VERIFICATION SUITE TESTS")
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
