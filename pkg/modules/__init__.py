from .graded_algebras import AlgebraFamily, GradedAlgebra, build, validate
from .isotropy import GeometricType, analyze
from .curvature_reps import ModuleShape, build_module, check_flat_conditions
from .model_flow import PointClass, classify_point, verify_flow_law
from .report_generator import ReportBuilder, RunConfig, SuiteReport
from .sampling import RationalSampler
from .utils import CheckResult, TextFormatter
from .verification import LemmaKind, SuiteSettings, verify_all

__all__ = [
    "AlgebraFamily",
    "GradedAlgebra",
    "build",
    "validate",
    "GeometricType",
    "analyze",
    "ModuleShape",
    "build_module",
    "check_flat_conditions",
    "PointClass",
    "classify_point",
    "verify_flow_law",
    "ReportBuilder",
    "RunConfig",
    "SuiteReport",
    "RationalSampler",
    "CheckResult",
    "TextFormatter",
    "LemmaKind",
    "SuiteSettings",
    "verify_all",
]
