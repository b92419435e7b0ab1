import argparse
import json
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

import config
from modules.curvature_reps import ModuleShape, ShapeError
from modules.exact_linalg import LinearAlgebraError, column, format_scalar, mat_equal, row, scale, to_rows, to_scalar
from modules.graded_algebras import AlgebraFamily, FamilyError, UnsupportedOperationError, build
from modules.isotropy import (
    GeometricType,
    IsotropyError,
    NotInTError,
    T_membership,
    geometric_type,
)
from modules.model_flow import FlowPoleError, classify_point, transported_generator
from modules.report_generator import ReportBuilder, RunConfig, SuiteReport, report_schema
from modules.verification import (
    CheckRecorder,
    LemmaKind,
    LemmaSelectionError,
    SuiteSettings,
    algebra_suite,
    flow_grid_case,
    null_ray_case,
    trajectory_rows,
    verify_all,
    verify_lemma_suite,
)

logger = logging.getLogger(__name__)

USAGE_ERRORS = (
    FamilyError,
    LemmaSelectionError,
    IsotropyError,
    NotInTError,
    LinearAlgebraError,
    ShapeError,
    UnsupportedOperationError,
    FlowPoleError,
    json.JSONDecodeError,
)


def parse_rationals(text: Optional[str]) -> Optional[List[str]]:
    """Parse a JSON array of integers or "p/q" strings into canonical "p/q" strings."""
    if text is None:
        return None
    values = json.loads(text)
    if not isinstance(values, list) or not values:
        raise LinearAlgebraError(f"Expected a non-empty JSON array, got {text!r}")
    return [format_scalar(v) for v in values]


class VerificationEngine:
    def __init__(self, run_config: RunConfig):
        self.config = run_config
        self.builder = ReportBuilder(config.SCHEMA_VERSION, config.ARTIFACT_VERSION)
        self.settings = SuiteSettings(
            seed=run_config.seed,
            random_samples=run_config.random,
            membership_samples=run_config.membership_samples,
            bracket_samples=run_config.bracket_samples,
            flow_pairs=config.DEFAULT_FLOW_PAIRS,
            null_rays=config.DEFAULT_NULL_RAYS,
            numerator_bound=config.RANDOM_NUMERATOR_BOUND,
            denominator_bound=config.RANDOM_DENOMINATOR_BOUND,
            flow_grid=tuple(run_config.grid or config.FLOW_GRID),
            classify_parameters=config.CLASSIFY_PARAMETERS,
            verify_limit=config.VERIFY_MODULE_ACTION_LIMIT,
            jacobi_limit=config.JACOBI_TRIPLE_LIMIT,
            module_shape=run_config.module_shape,
        )

    # -- inputs ------------------------------------------------------------

    def family(self) -> AlgebraFamily:
        cfg = self.config
        if cfg.family == "projective":
            if cfg.n is None:
                raise FamilyError("--n is required for the projective family")
            return AlgebraFamily.projective(cfg.n)
        if cfg.family == "conformal":
            if cfg.p is None or cfg.q is None:
                raise FamilyError("--p and --q are required for the conformal family")
            return AlgebraFamily.conformal(cfg.p, cfg.q, cfg.allow_definite)
        raise FamilyError("--family must be projective or conformal")

    def covector(self, n: int, required: bool = True):
        if self.config.Z is None:
            if required:
                raise IsotropyError("--Z is required for this command")
            return None
        return self._sized(row(self.config.Z), n, "Z")

    def vector(self, n: int):
        if self.config.X is None:
            raise IsotropyError("--X is required for this command")
        return self._sized(column(self.config.X), n, "X")

    @staticmethod
    def _sized(M, n: int, name: str):
        if max(M.shape) != n:
            raise LinearAlgebraError(f"{name} has {max(M.shape)} entries, expected {n}")
        return M

    # -- commands ----------------------------------------------------------

    def validate_algebra(self) -> SuiteReport:
        return self._report(algebra_suite(self.family(), self.settings))

    def verify_lemma(self) -> SuiteReport:
        lemma = LemmaKind(self.config.lemma)
        family = self.family()
        Z = self.covector(family.n, required=False)
        return self._report(verify_lemma_suite(family, lemma, self.settings, Z))

    def flow_verify(self) -> SuiteReport:
        family = self.family()
        alg = build(family)
        Z, X = self.covector(family.n), self.vector(family.n)
        case = f"{family.label}/explicit"
        records = flow_grid_case(alg, Z, X, case, self.settings.flow_grid)
        if geometric_type(alg, Z) == GeometricType.CONFORMAL_NULL:
            sampler = self.settings.sampler(f"flow-verify/{case}")
            records += null_ray_case(alg, Z, f"{case}/null-rays", sampler,
                                     self.settings.null_rays, self.settings.flow_grid)
        return self._report(records)

    def classify(self) -> SuiteReport:
        family = self.family()
        alg = build(family)
        Z, X = self.covector(family.n), self.vector(family.n)
        s = to_scalar(self.config.s or "1")
        point_class = classify_point(alg, Z, X, s)
        recorder = CheckRecorder("classify", f"{family.label}/explicit")
        recorder.add("point_class", True, point_class=point_class.value, s=s)
        W = transported_generator(alg, Z, X, s)
        return self._report(recorder.records, data={"point_class": point_class.value, "transported_generator": to_rows(W)})

    def trajectory(self) -> SuiteReport:
        family = self.family()
        alg = build(family)
        Z, X = self.covector(family.n), self.vector(family.n)
        s = to_scalar(self.config.s or "1")
        t_samples = self.config.t_samples or list(config.TRAJECTORY_SAMPLES)
        rows = trajectory_rows(alg, Z, X, s, t_samples)

        recorder = CheckRecorder("trajectory", f"{family.label}/explicit")
        recorder.add("samples_in_chart", True, in_chart=sum(r["in_chart"] for r in rows), total=len(rows))
        if T_membership(alg, Z, X):
            on_ray = []
            for r in rows:
                t = to_scalar(r["t"])
                if 1 + s * t == 0 or not r["in_chart"]:
                    continue
                expected = scale(X, s / (1 + s * t))
                on_ray.append(mat_equal(column([r[f"y{i + 1}"] for i in range(alg.n)]), expected))
            recorder.add("ray_law", all(on_ray), checked=len(on_ray))
        return self._report(recorder.records, data={"trajectory": rows})

    def verify_all(self) -> SuiteReport:
        max_n = self.config.max_n or config.DEFAULT_MAX_N
        return self._report(verify_all(max_n, self.settings, self.config.workers))

    def _report(self, records: List[Dict[str, Any]], data: Optional[Dict[str, Any]] = None) -> SuiteReport:
        return self.builder.build(self.config, records, None, data)

    def run(self) -> SuiteReport:
        command = self.config.command
        logger.info("=" * 60)
        logger.info(f"Running {command}")
        logger.info("=" * 60)
        started = time.perf_counter()
        handler = {
            "validate-algebra": self.validate_algebra,
            "verify": self.verify_lemma,
            "flow-verify": self.flow_verify,
            "classify": self.classify,
            "trajectory": self.trajectory,
            "verify-all": self.verify_all,
        }[command]
        report = handler()
        elapsed = time.perf_counter() - started
        if self.config.timings:
            report = report.model_copy(update={"wall_time_seconds": round(elapsed, 3)})
        logger.info("=" * 60)
        logger.info(f"{command} {'passed' if report.passed else 'FAILED'}: "
                    f"{report.summary['passed']}/{report.summary['total']} checks in {elapsed:.2f}s")
        logger.info("=" * 60)
        return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Exact verification of isotropy and flatness conditions for projective and conformal structures",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=["projective", "conformal"])
    common.add_argument("--n", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--allow-definite", action="store_true")
    common.add_argument("--Z", help='covector as a JSON array, e.g. "[1, \\"1/2\\", 0]"')
    common.add_argument("--X", help="vector as a JSON array")
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    common.add_argument("--format", choices=["json", "csv", "human"], default="json")
    common.add_argument("--output")
    common.add_argument("--timings", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate-algebra", parents=[common])

    verify = sub.add_parser("verify", parents=[common])
    verify.add_argument("--lemma", required=True, choices=[k.value for k in LemmaKind])
    verify.add_argument("--random", type=int, default=config.DEFAULT_RANDOM_SAMPLES)
    verify.add_argument("--module-shape", choices=[s.value for s in ModuleShape])

    flow = sub.add_parser("flow-verify", parents=[common])
    flow.add_argument("--grid", default="default")

    classify = sub.add_parser("classify", parents=[common])
    classify.add_argument("--s", default="1")

    trajectory = sub.add_parser("trajectory", parents=[common])
    trajectory.add_argument("--s", default="1")
    trajectory.add_argument("--t-samples")

    verify_all_parser = sub.add_parser("verify-all", parents=[common])
    verify_all_parser.add_argument("--max-n", type=int, default=config.DEFAULT_MAX_N)
    verify_all_parser.add_argument("--workers", type=int, default=1)

    sub.add_parser("schema", parents=[common])
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    family = args.family
    lemma = getattr(args, "lemma", None)
    if lemma is not None:
        implied = LemmaKind(lemma).family
        if family is not None and family != implied:
            raise LemmaSelectionError(f"--lemma {lemma} implies --family {implied}, got {family}")
        family = implied

    grid = getattr(args, "grid", None)
    t_samples = getattr(args, "t_samples", None)
    s = getattr(args, "s", None)
    return RunConfig(
        command=args.command,
        family=family,
        n=args.n,
        p=args.p,
        q=args.q,
        allow_definite=args.allow_definite,
        Z=parse_rationals(args.Z),
        X=parse_rationals(args.X),
        lemma=lemma,
        module_shape=getattr(args, "module_shape", None),
        s=format_scalar(s) if s is not None else None,
        grid=None if grid in (None, "default") else parse_rationals(grid),
        t_samples=parse_rationals(t_samples),
        seed=args.seed,
        random=getattr(args, "random", config.DEFAULT_RANDOM_SAMPLES),
        membership_samples=config.DEFAULT_MEMBERSHIP_SAMPLES,
        bracket_samples=config.DEFAULT_BRACKET_SAMPLES,
        max_n=getattr(args, "max_n", None),
        workers=getattr(args, "workers", 1),
        format=args.format,
        timings=args.timings,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)

    if args.command == "schema":
        ReportBuilder.write(json.dumps(report_schema(config.SCHEMA_VERSION), indent=2, sort_keys=True) + "\n", args.output)
        return 0

    try:
        run_config = run_config_from_args(args)
        engine = VerificationEngine(run_config)
        report = engine.run()
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.error(f"Run failed: {str(e)}")
        return 1

    ReportBuilder.write(engine.builder.render(report, run_config.format), args.output)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
