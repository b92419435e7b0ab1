import os

import config
from main import VerificationEngine
from modules.curvature_reps import check_flat_conditions
from modules.exact_linalg import column, row
from modules.graded_algebras import AlgebraFamily, build, validate
from modules.isotropy import analyze
from modules.model_flow import classify_point, normal_point, verify_flow_law
from modules.report_generator import RunConfig
from modules.utils import TextFormatter

# ============================================================================
# EXAMPLE 1: Build and validate a graded algebra
# ============================================================================

def example_validate_algebra():
    """Example: build the conformal algebra of signature (1,2) and validate it"""

    print("\n" + "="*70)
    print("EXAMPLE 1: Graded Algebra Validation")
    print("="*70)

    alg = build(AlgebraFamily.conformal(1, 2))
    report = validate(alg)

    print(f"\n✓ {alg.family.label}: dims {alg.dims}, matrix size {alg.size}")
    for check in report.checks:
        print(f"  {'✓' if check.passed else '✗'} {check.name}")

    return report


# ============================================================================
# EXAMPLE 2: Isotropy data of a null covector
# ============================================================================

def example_isotropy():
    """Example: C(Z), T(Z) and a T-spanning set for a null Z"""

    print("\n" + "="*70)
    print("EXAMPLE 2: Isotropy Data")
    print("="*70)

    alg = build(AlgebraFamily.conformal(1, 2))
    data = analyze(alg, row([1, 1, 0]))
    summary = TextFormatter.jsonable(data.to_dict())

    print(f"\n✓ Geometric type: {summary['geometric_type']}")
    print(f"  - C(Z) basis: {summary['C_basis']}")
    print(f"  - T(Z): {summary['T_description']}")
    print(f"  - Spanning set: {summary['T_spanning_set']}")

    return data


# ============================================================================
# EXAMPLE 3: Flatness conditions
# ============================================================================

def example_flatness():
    """Example: the three flatness conditions for a projective and a null conformal Z"""

    print("\n" + "="*70)
    print("EXAMPLE 3: Flatness Conditions")
    print("="*70)

    cases = [
        (AlgebraFamily.projective(3), row([1, 0, 0])),
        (AlgebraFamily.conformal(1, 3), row([1, 1, 0, 0])),
    ]
    reports = []
    for family, Z in cases:
        report = check_flat_conditions(build(family), Z)
        print(f"\n{family.label}: {'all conditions hold' if report.passed else 'a condition fails'}")
        for check in report.checks():
            print(f"  {'✓' if check.passed else '✗'} {check.name}")
        reports.append(report)

    return reports


# ============================================================================
# EXAMPLE 4: Flow law and point classification
# ============================================================================

def example_flow_and_classify():
    """Example: s' = s/(1+st) along a T-ray, then classify points on a null ray"""

    print("\n" + "="*70)
    print("EXAMPLE 4: Flow Law and Classification")
    print("="*70)

    alg = build(AlgebraFamily.projective(2))
    check = verify_flow_law(alg, row([1, 0]), column([1, 0]), 1, 1)
    print(f"\n✓ Flow law at s=1, t=1: s' = {TextFormatter.format_rational(check.s_prime)} "
          f"({'holds' if check.holds else 'fails'})")

    conformal = build(AlgebraFamily.conformal(1, 2))
    X = column([1, 0, 1])
    print(f"  - exp(X)o = {TextFormatter.format_vector(normal_point(conformal, X).values())}")
    for s in ("1/2", "1"):
        point_class = classify_point(conformal, row([1, 1, 0]), column([1, -1, 0]), s)
        print(f"  - C(Z) direction at s={s}: {point_class.value}")

    return check


# ============================================================================
# EXAMPLE 5: Engine runs with written reports
# ============================================================================

def example_engine_reports():
    """Example: run the engine and write JSON and human reports under REPORTS_DIR"""

    print("\n" + "="*70)
    print("EXAMPLE 5: Engine Reports")
    print("="*70)

    os.makedirs(config.REPORTS_DIR, exist_ok=True)
    runs = {
        "verify_projective_n3.json": RunConfig(command="verify", family="projective", n=3,
                                               lemma="projective", random=2, membership_samples=20,
                                               bracket_samples=10),
        "trajectory_conformal_1_2.txt": RunConfig(command="trajectory", family="conformal", p=1, q=2,
                                                  Z=["1", "0", "0"], X=["2", "0", "0"], s="1",
                                                  format="human"),
    }
    paths = {}
    for filename, run_config in runs.items():
        engine = VerificationEngine(run_config)
        report = engine.run()
        path = os.path.join(config.REPORTS_DIR, filename)
        engine.builder.write(engine.builder.render(report, run_config.format), path)
        paths[filename] = path
        print(f"\n✓ {run_config.command}: {'PASS' if report.passed else 'FAIL'} -> {path}")

    return paths


# ============================================================================
# MAIN - Run Examples
# ============================================================================

if __name__ == "__main__":

    print("\n" + "="*70)
    print("GRADED ISOTROPY VERIFIER - EXAMPLES")
    print("="*70)

    choice = input("\nSelect example to run (1-5): ")

    if choice == "1":
        example_validate_algebra()

    elif choice == "2":
        example_isotropy()

    elif choice == "3":
        example_flatness()

    elif choice == "4":
        example_flow_and_classify()

    elif choice == "5":
        example_engine_reports()

    else:
        print("Running all examples...")
        example_validate_algebra()
        example_isotropy()
        example_flatness()
        example_flow_and_classify()
        example_engine_reports()

    print("\n" + "="*70)
    print("Examples completed!")
    print("="*70)
