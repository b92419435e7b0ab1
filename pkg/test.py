"""
End-to-end smoke test: every engine command on small families
"""
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from main import VerificationEngine
from modules.report_generator import RunConfig
import config

def run_pipeline():
    """Run each subcommand once through the engine and check the verdicts"""

    print("="*70)
    print("GRADED ISOTROPY VERIFIER - SMOKE TEST")
    print("="*70)

    runs = [
        RunConfig(command="validate-algebra", family="projective", n=3),
        RunConfig(command="validate-algebra", family="conformal", p=1, q=3),
        RunConfig(command="verify", family="projective", n=3, lemma="projective",
                  random=1, membership_samples=20, bracket_samples=10),
        RunConfig(command="verify", family="conformal", p=1, q=3, lemma="conformal-nonnull",
                  random=1, membership_samples=20, bracket_samples=10),
        RunConfig(command="verify", family="conformal", p=1, q=3, lemma="conformal-null",
                  random=1, membership_samples=20, bracket_samples=10),
        RunConfig(command="flow-verify", family="projective", n=3, Z=["1", "0", "0"], X=["1", "5", "-2"]),
        RunConfig(command="classify", family="conformal", p=1, q=2, Z=["1", "1", "0"], X=["1", "-1", "0"], s="1/2"),
        RunConfig(command="trajectory", family="conformal", p=1, q=2, Z=["1", "1", "0"], X=["1/2", "1/2", "0"],
                  s="1", t_samples=list(config.TRAJECTORY_SAMPLES)),
    ]

    print("\n[1] Running engine commands...")
    results = []
    try:
        for run_config in runs:
            report = VerificationEngine(run_config).run()
            target = run_config.family + (f"(n={run_config.n})" if run_config.n else f"(p={run_config.p},q={run_config.q})")
            mark = "✓" if report.passed else "✗"
            print(f"  {mark} {run_config.command:<18} {target:<24} "
                  f"{report.summary['passed']}/{report.summary['total']} checks")
            results.append(report)
    except Exception as e:
        print(f"\n✗ Engine failed: {str(e)}")
        import traceback
        traceback.print_exc()
        return False

    print("\n[2] RESULTS SUMMARY")
    print("-" * 70)
    classified = results[6].data["point_class"]
    print(f"  Fixed point class on C(Z): {classified}")
    if classified != "HigherOrderFixedSameType":
        print("✗ Unexpected classification")
        return False

    failed = [r.command for r in results if not r.passed]
    if failed:
        print(f"✗ Failed commands: {', '.join(failed)}")
        return False

    print("\n" + "="*70)
    print("TEST COMPLETED SUCCESSFULLY!")
    print("="*70)

    return True


def test_pipeline():
    assert run_pipeline()


if __name__ == "__main__":
    success = run_pipeline()
    sys.exit(0 if success else 1)
