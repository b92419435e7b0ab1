import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

from modules.curvature_reps import (
    ModuleShape,
    ModuleSpectrum,
    TensorModule,
    build_module,
    check_flat_conditions,
    is_invariant,
    module_spectrum,
    values_act_trivially,
)
from modules.exact_linalg import Mat, Subspace, column_values, mat_equal, row_values, scale, to_scalar
from modules.graded_algebras import AlgebraFamily, GradedAlgebra, build, inner_product, validate
from modules.isotropy import (
    A_of,
    C_closed_form,
    C_of,
    F_closed_form,
    F_membership,
    GeometricType,
    NotInTError,
    T_closed_form,
    T_membership,
    T_spanning_set,
    geometric_type,
    scaled_T_complement,
    signature_symmetries,
    transport_covector,
    transport_vector,
)
from modules.model_flow import (
    FlowPoleError,
    PointClass,
    chart_trajectory,
    classify_point,
    smoothly_isolated_witness,
    verify_flow_law,
    verify_null_ray_flow,
)
from modules.sampling import CovectorSample, RationalSampler, available_types
from modules.utils import CheckResult, TextFormatter

logger = logging.getLogger(__name__)


class LemmaSelectionError(ValueError):
    pass


class LemmaKind(str, Enum):
    PROJECTIVE = "projective"
    CONFORMAL_NONNULL = "conformal-nonnull"
    CONFORMAL_NULL = "conformal-null"

    @property
    def family(self) -> str:
        return "projective" if self == LemmaKind.PROJECTIVE else "conformal"


LEMMA_TYPES = {
    LemmaKind.PROJECTIVE: (GeometricType.PROJECTIVE_NONZERO,),
    LemmaKind.CONFORMAL_NONNULL: (GeometricType.CONFORMAL_POSITIVE, GeometricType.CONFORMAL_NEGATIVE),
    LemmaKind.CONFORMAL_NULL: (GeometricType.CONFORMAL_NULL,),
}


def lemma_for(gtype: GeometricType) -> Optional[LemmaKind]:
    for lemma, types in LEMMA_TYPES.items():
        if gtype in types:
            return lemma
    return None


@dataclass
class SuiteSettings:
    seed: int = 7
    random_samples: int = 20
    membership_samples: int = 200
    bracket_samples: int = 100
    flow_pairs: int = 5
    null_rays: int = 10
    numerator_bound: int = 5
    denominator_bound: int = 4
    flow_grid: Tuple[str, ...] = ("2", "1", "1/2", "1/3", "-1/3", "-1/2", "-1", "-2")
    classify_parameters: Tuple[str, ...] = ("1", "-1", "1/2", "-1/2", "2", "-2")
    verify_limit: int = 256
    jacobi: bool = True
    jacobi_limit: Optional[int] = 2000
    module_shape: Optional[str] = None

    def sampler(self, salt: str = "") -> RationalSampler:
        # one independent stream per case so worker scheduling never changes samples
        offset = sum((i + 1) * ord(c) for i, c in enumerate(salt))
        return RationalSampler(self.seed * 1_000_003 + offset, self.numerator_bound, self.denominator_bound)


@dataclass
class CheckRecorder:
    suite: str
    case: str
    records: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, name: str, passed: bool, **evidence) -> bool:
        self.records.append({
            "suite": self.suite,
            "case": self.case,
            "name": name,
            "passed": bool(passed),
            "evidence": TextFormatter.jsonable(evidence),
        })
        level = logging.INFO if passed else logging.WARNING
        logger.log(level, f"  {'✓' if passed else '✗'} [{self.suite}] {self.case}: {name}")
        return bool(passed)

    def extend(self, checks: Sequence[CheckResult]) -> None:
        for check in checks:
            self.add(check.name, check.passed, **check.evidence)


def canonical_key(record: Dict[str, Any]) -> Tuple[str, str, str]:
    return record["suite"], record["case"], record["name"]


# ---------------------------------------------------------------------------
# validate-algebra
# ---------------------------------------------------------------------------

def algebra_suite(family: AlgebraFamily, settings: SuiteSettings) -> List[Dict[str, Any]]:
    alg = build(family)
    sampler = settings.sampler(f"algebra/{family.label}")
    triples = sampler.bracket_triples(alg, settings.bracket_samples)
    report = validate(alg, jacobi=settings.jacobi, jacobi_limit=settings.jacobi_limit, triples=triples)
    recorder = CheckRecorder("validate-algebra", family.label)
    recorder.extend(report.checks)
    return recorder.records


# ---------------------------------------------------------------------------
# verify (per-lemma chain)
# ---------------------------------------------------------------------------

def select_lemma(alg: GradedAlgebra, Z: Mat, lemma: LemmaKind) -> GeometricType:
    if (lemma.family == "projective") != alg.family.is_projective:
        raise LemmaSelectionError(f"Lemma {lemma.value} does not apply to {alg.family.label}")
    gtype = geometric_type(alg, Z)
    if gtype not in LEMMA_TYPES[lemma]:
        raise LemmaSelectionError(
            f"Z = {TextFormatter.format_vector(row_values(Z))} has type {gtype.value}, "
            f"which is not covered by lemma {lemma.value}"
        )
    return gtype


def _expected_gm1_spectrum(alg: GradedAlgebra, lemma: LemmaKind) -> Dict[Any, int]:
    n = alg.n
    if lemma == LemmaKind.PROJECTIVE:
        expected = {-2: 1, -1: n - 1}
    elif lemma == LemmaKind.CONFORMAL_NONNULL:
        expected = {-2: n}
    else:
        expected = {-2: 1, -1: n - 2, 0: 1}
    return {to_scalar(k): m for k, m in expected.items() if m}


def _membership_checks(
    recorder: CheckRecorder,
    alg: GradedAlgebra,
    sample: CovectorSample,
    sampler: RationalSampler,
    count: int,
) -> None:
    Z = sample.Z
    f_mismatch, t_mismatch, both = 0, 0, 0
    f_hits, t_hits = 0, 0
    for kind, X in sampler.membership_probes(alg, sample, count):
        in_F, in_T = F_membership(alg, Z, X), T_membership(alg, Z, X)
        f_mismatch += in_F != F_closed_form(alg, Z, X)
        t_mismatch += in_T != T_closed_form(alg, Z, X)
        both += in_F and in_T
        f_hits += in_F
        t_hits += in_T
    recorder.add("F_closed_form_agreement", f_mismatch == 0, samples=count, mismatches=f_mismatch, members=f_hits)
    recorder.add("T_closed_form_agreement", t_mismatch == 0, samples=count, mismatches=t_mismatch, members=t_hits)
    recorder.add("F_T_disjoint", both == 0, overlaps=both)


def _density_check(recorder: CheckRecorder, alg: GradedAlgebra, Z: Mat, sampler: RationalSampler, count: int) -> None:
    mismatches = 0
    for i in range(count):
        X = sampler.kernel_element(alg, Z) if i % 3 == 0 else sampler.vector(alg.n)
        ZX = row_values(Z * X)[0]
        scaled_in_T = ZX != 0 and T_membership(alg, Z, scale(X, 1 / ZX))
        mismatches += scaled_T_complement(alg, Z, X) != scaled_in_T
    recorder.add("scaled_T_is_complement_of_kernel", mismatches == 0, samples=count, mismatches=mismatches)


def _equivariance_check(recorder: CheckRecorder, alg: GradedAlgebra, Z: Mat, sample_vectors: List[Mat]) -> None:
    C = C_of(alg, Z)
    failures = []
    for k, g in enumerate(signature_symmetries(alg)):
        gZ = transport_covector(g, Z)
        gC = Subspace.span_of([transport_vector(g, v) for v in C.vectors()], alg.n)
        if C_of(alg, gZ) != gC:
            failures.append(f"C[{k}]")
        for X in sample_vectors:
            gX = transport_vector(g, X)
            if F_membership(alg, gZ, gX) != F_membership(alg, Z, X) or T_membership(alg, gZ, gX) != T_membership(alg, Z, X):
                failures.append(f"FT[{k}]")
                break
    recorder.add("signature_symmetry_equivariance", not failures, offending=failures)


def lemma_case(
    alg: GradedAlgebra,
    lemma: LemmaKind,
    sample: CovectorSample,
    case: str,
    settings: SuiteSettings,
    equivariance: bool = False,
) -> List[Dict[str, Any]]:
    Z = sample.Z
    recorder = CheckRecorder(f"verify/{lemma.value}", case)
    sampler = settings.sampler(f"verify/{case}")
    gtype = geometric_type(alg, Z)
    recorder.add("geometric_type", gtype in LEMMA_TYPES[lemma], type=gtype.value)

    C = C_of(alg, Z)
    recorder.add("C_matches_closed_form", C == C_closed_form(alg, Z), C_dim=C.dim,
                 C_basis=[column_values(v) for v in C.vectors()])
    _membership_checks(recorder, alg, sample, sampler, settings.membership_samples)
    if lemma == LemmaKind.PROJECTIVE:
        _density_check(recorder, alg, Z, sampler, max(1, settings.membership_samples // 4))

    spanning = T_spanning_set(alg, Z)
    expected_rank = 1 if gtype.is_non_null else alg.n
    rank_ok = Subspace.span_of(spanning, alg.n).dim == expected_rank
    recorder.add("T_spanning_set", rank_ok and all(T_membership(alg, Z, X) for X in spanning), size=len(spanning))

    if lemma == LemmaKind.CONFORMAL_NONNULL:
        X = spanning[0]
        expected = scale(alg.signature_matrix * Z.transpose(), 2 / inner_product(alg, Z, Z))
        recorder.add("T_is_singleton", mat_equal(X, expected), point=column_values(X))
        recorder.add("A_is_twice_grading_element", mat_equal(A_of(alg, Z, X), scale(alg.grading_element, 2)))

    shape = ModuleShape(settings.module_shape) if settings.module_shape else None
    module = build_module(alg, shape)
    spectra = [module_spectrum(alg, Z, X, module, settings.verify_limit) for X in spanning]

    expected_gm1 = _expected_gm1_spectrum(alg, lemma)
    found = [spectrum.gm1.multiplicities() for spectrum in spectra]
    recorder.add("gm1_spectrum", all(s == expected_gm1 for s in found), expected=expected_gm1, found=found)

    _module_checks(recorder, alg, lemma, spectra, module)

    flatness = check_flat_conditions(alg, Z, module.shape, settings.verify_limit, spectra)
    recorder.extend(flatness.checks())
    trace = flatness.condition3.evidence["intersection_trace"]
    monotone = all(a >= b for a, b in zip(trace, trace[1:]))
    recorder.add("intersection_trace_monotone", monotone, trace=trace,
                 strictly_decreasing=all(a > b for a, b in zip(trace, trace[1:])))

    witness = smoothly_isolated_witness(alg, Z, settings.classify_parameters)
    expect_isolated = lemma != LemmaKind.CONFORMAL_NULL
    recorder.add(
        "smoothly_isolated_witness",
        witness.isolated == expect_isolated and (expect_isolated or witness.curve_confirmed),
        **witness.to_dict(),
    )

    if equivariance:
        probes = [X for _, X in sampler.membership_probes(alg, sample, 5)]
        _equivariance_check(recorder, alg, Z, probes)
    return recorder.records


def _module_checks(
    recorder: CheckRecorder,
    alg: GradedAlgebra,
    lemma: LemmaKind,
    spectra: List[ModuleSpectrum],
    module: TensorModule,
) -> None:
    wedge_values, second_values, module_values, verified = set(), set(), set(), True
    st_dims = []
    trivially = True
    for spectrum in spectra:
        wedge_values |= set(spectrum.wedge.eigenvalues())
        second_values |= set(spectrum.second.eigenvalues())
        module_values |= set(spectrum.eigenvalues())
        verified = verified and spectrum.verified

        W_ss = spectrum.ss_space
        W_st = spectrum.st_space
        st_dims.append(W_st.dim)
        if W_st.dim:
            invariant = is_invariant(W_st, spectrum.apply) and is_invariant(W_ss, spectrum.apply)
            if not (invariant and W_ss.is_subspace_of(W_st)):
                verified = False
            if module.shape != ModuleShape.TENSOR_G1:
                trivially = trivially and values_act_trivially(alg, module, spectrum.A, W_st)

    recorder.add("module_spectrum_verified", verified, shape=module.shape.value, dimension=module.dimension)
    wedge, second = sorted(wedge_values), sorted(second_values)
    as_set = lambda values: {to_scalar(v) for v in values}

    if lemma == LemmaKind.PROJECTIVE:
        if module.shape == ModuleShape.TENSOR_SL:
            recorder.add("wedge_spectrum_within", set(wedge) <= as_set([2, 3]), found=wedge)
            recorder.add("sl_spectrum_within", set(second) <= as_set([-1, 0, 1]), found=second)
        recorder.add("module_spectrum_positive", all(v > 0 for v in module_values), found=sorted(module_values))
    elif lemma == LemmaKind.CONFORMAL_NONNULL:
        recorder.add("module_spectrum_positive", all(v > 0 for v in module_values), found=sorted(module_values))
        recorder.add("W_st_zero", all(d == 0 for d in st_dims), W_st_dims=st_dims)
    else:
        recorder.add("wedge_spectrum_exact", set(wedge) == as_set([1, 2, 3]), found=wedge)
        if module.shape == ModuleShape.TENSOR_SO:
            recorder.add("so_spectrum_within", set(second) <= as_set([-1, 0, 1]), found=second)
            recorder.add("W_st_nonzero_per_X", all(d > 0 for d in st_dims), W_st_dims=st_dims,
                         expected=(alg.n - 2) ** 2)
            recorder.add("values_act_trivially", trivially)
        else:
            recorder.add("W_st_zero", all(d == 0 for d in st_dims), W_st_dims=st_dims)


def lemma_samples(
    alg: GradedAlgebra,
    lemma: LemmaKind,
    settings: SuiteSettings,
    Z: Optional[Mat] = None,
) -> List[Tuple[str, CovectorSample]]:
    """The explicit Z, or the canonical representative of each type plus random ones."""
    sampler = settings.sampler(f"lemma-samples/{alg.family.label}/{lemma.value}")
    if Z is not None:
        gtype = select_lemma(alg, Z, lemma)
        return [("explicit", CovectorSample(Z, gtype, Z, None, to_scalar(1)))]

    samples = []
    for gtype in LEMMA_TYPES[lemma]:
        if gtype not in available_types(alg):
            continue
        samples.append((f"{gtype.value}/canonical", sampler.canonical_sample(alg, gtype)))
        for k in range(settings.random_samples):
            samples.append((f"{gtype.value}/random-{k:02d}", sampler.covector_sample(alg, gtype)))
    return samples


def verify_lemma_suite(
    family: AlgebraFamily,
    lemma: LemmaKind,
    settings: SuiteSettings,
    Z: Optional[Mat] = None,
) -> List[Dict[str, Any]]:
    alg = build(family)
    if (lemma.family == "projective") != family.is_projective:
        raise LemmaSelectionError(f"Lemma {lemma.value} does not apply to {family.label}")
    samples = lemma_samples(alg, lemma, settings, Z)
    if not samples:
        raise LemmaSelectionError(f"{family.label} has no covectors of the types covered by lemma {lemma.value}")
    records = []
    for label, sample in samples:
        case = f"{family.label}/{label}"
        records.extend(lemma_case(alg, lemma, sample, case, settings, equivariance=label.endswith("canonical")))
    return records


# ---------------------------------------------------------------------------
# flow-verify, classify, trajectory
# ---------------------------------------------------------------------------

def flow_grid_case(
    alg: GradedAlgebra,
    Z: Mat,
    X: Mat,
    case: str,
    grid: Sequence[Any],
) -> List[Dict[str, Any]]:
    recorder = CheckRecorder("flow-verify", case)
    asserted, extended, skipped = [], [], []
    for s, t in product(grid, repeat=2):
        try:
            check = verify_flow_law(alg, Z, X, s, t)
        except FlowPoleError:
            skipped.append({"s": s, "t": t})
            continue
        (asserted if check.asserted else extended).append(check.to_dict())
    recorder.add("flow_law_positive_st", all(c["holds"] for c in asserted), cells=asserted)
    # st < 0 is a model-level fact, reported without affecting the verdict
    recorder.add("flow_law_negative_st_reported", True, cells=extended, poles=skipped,
                 all_hold=all(c["holds"] for c in extended))
    return recorder.records


def null_ray_case(
    alg: GradedAlgebra,
    Z: Mat,
    case: str,
    sampler: RationalSampler,
    count: int,
    grid: Sequence[Any],
    C_vector: Optional[Mat] = None,
) -> List[Dict[str, Any]]:
    recorder = CheckRecorder("flow-verify", case)
    times = [t for t in (to_scalar(g) for g in grid) if t > 0]
    results = []
    for _ in range(count):
        xi = sampler.null_ray(alg, Z)
        for t in times:
            results.append(verify_null_ray_flow(alg, Z, xi, t).to_dict())
    recorder.add("null_ray_flow", all(r["holds"] for r in results), checks=len(results))
    if C_vector is not None:
        fixed = [verify_null_ray_flow(alg, Z, C_vector, t).holds for t in (to_scalar(g) for g in grid)]
        recorder.add("null_ray_fixed_on_F", all(fixed), checks=len(fixed))
    return recorder.records


def flow_suite(alg: GradedAlgebra, settings: SuiteSettings, gtype: GeometricType) -> List[Dict[str, Any]]:
    sampler = settings.sampler(f"flow/{alg.family.label}/{gtype.value}")
    records = []
    samples = [("canonical", sampler.canonical_sample(alg, gtype))]
    samples += [(f"random-{k:02d}", sampler.covector_sample(alg, gtype)) for k in range(settings.flow_pairs)]
    for label, sample in samples:
        X = sampler.T_element(alg, sample.Z)
        case = f"{alg.family.label}/{gtype.value}/{label}"
        records.extend(flow_grid_case(alg, sample.Z, X, case, settings.flow_grid))
    if gtype == GeometricType.CONFORMAL_NULL:
        Z = samples[0][1].Z
        C_vector = C_of(alg, Z).vectors()[0]
        records.extend(null_ray_case(alg, Z, f"{alg.family.label}/{gtype.value}/null-rays",
                                     sampler, settings.null_rays, settings.flow_grid, C_vector))
    return records


def classify_case(
    alg: GradedAlgebra,
    sample: CovectorSample,
    case: str,
    sampler: RationalSampler,
    parameters: Sequence[Any],
) -> List[Dict[str, Any]]:
    recorder = CheckRecorder("classify", case)
    Z = sample.Z
    probes = []
    C_vector = sampler.C_element(alg, Z, C_of(alg, Z).vectors())
    if C_vector is not None:
        probes.append(("C", C_vector, PointClass.FIXED_SAME_TYPE))
    F_vector = sampler.F_minus_C_element(alg, sample)
    if F_vector is not None:
        probes.append(("F_minus_C", F_vector, PointClass.ZERO_OF_FIELD))
    probes.append(("T", sampler.T_element(alg, Z), PointClass.MOVING))

    for label, X, expected in probes:
        found = [classify_point(alg, Z, X, s) for s in parameters]
        recorder.add(f"classify_{label}", all(c == expected for c in found),
                     expected=expected.value, found=[c.value for c in found], X=column_values(X))
    if F_vector is None:
        recorder.add("F_minus_C_empty", True, reason="no F(Z) elements outside C(Z) for this signature")

    witness = smoothly_isolated_witness(alg, Z, parameters)
    expect_isolated = geometric_type(alg, Z) != GeometricType.CONFORMAL_NULL
    recorder.add("smoothly_isolated_witness",
                 witness.isolated == expect_isolated and (expect_isolated or witness.curve_confirmed),
                 **witness.to_dict())
    return recorder.records


def classify_suite(alg: GradedAlgebra, settings: SuiteSettings) -> List[Dict[str, Any]]:
    records = []
    for gtype in available_types(alg):
        sampler = settings.sampler(f"classify/{alg.family.label}/{gtype.value}")
        samples = [("canonical", sampler.canonical_sample(alg, gtype)),
                   ("random-00", sampler.covector_sample(alg, gtype))]
        for label, sample in samples:
            records.extend(classify_case(alg, sample, f"{alg.family.label}/{gtype.value}/{label}",
                                         sampler, settings.classify_parameters))
    return records


def trajectory_rows(alg: GradedAlgebra, Z: Mat, X: Mat, s: Any, t_samples: Sequence[Any]) -> List[Dict[str, Any]]:
    rows = []
    for sample in chart_trajectory(alg, Z, X, s, t_samples):
        row = {"t": sample.t, "in_chart": sample.in_chart}
        for i in range(alg.n):
            row[f"y{i + 1}"] = sample.coordinates[i] if sample.in_chart else None
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Negative controls and verify-all
# ---------------------------------------------------------------------------

def negative_controls(settings: SuiteSettings) -> List[Dict[str, Any]]:
    records = []
    for family in (AlgebraFamily.projective(2), AlgebraFamily.conformal(1, 2)):
        alg = build(family)
        recorder = CheckRecorder("negative-controls", family.label)

        corrupted_g1 = (alg.basis_g1[0] + alg.basis_gm1[0],) + alg.basis_g1[1:]
        report = validate(replace(alg, basis_g1=corrupted_g1), jacobi=False)
        broken = [c.name for c in report.failures() if c.name.startswith("[")]
        recorder.add("corrupted_basis_rejected", bool(broken), broken_inclusions=broken)

        wrong_lemma = LemmaKind.CONFORMAL_NULL if family.is_conformal else LemmaKind.CONFORMAL_NONNULL
        canonical = RationalSampler(settings.seed).canonical_sample(alg, available_types(alg)[0])
        try:
            select_lemma(alg, canonical.Z, wrong_lemma)
            rejected, message = False, None
        except LemmaSelectionError as e:
            rejected, message = True, str(e)
        recorder.add("wrong_type_rejected", rejected, message=message)

        bad_X = scale(settings.sampler("negative").T_element(alg, canonical.Z), 3)
        try:
            A_of(alg, canonical.Z, bad_X)
            rejected, message = False, None
        except NotInTError as e:
            rejected, message = "[[Z,X]" in str(e), str(e)
        recorder.add("non_T_rejected", rejected, message=message)
        records.extend(recorder.records)
    return records


def family_cases(max_n: int) -> List[AlgebraFamily]:
    families = [AlgebraFamily.projective(n) for n in range(2, max_n + 1)]
    for n in range(3, max_n + 1):
        for p in range(1, n // 2 + 1):
            families.append(AlgebraFamily.conformal(p, n - p))
    return families


def run_family_case(descriptor: Dict[str, Any], settings: SuiteSettings) -> List[Dict[str, Any]]:
    """Every suite for one family; a top-level function so workers can pickle it."""
    family = AlgebraFamily.from_descriptor(descriptor)
    started = time.perf_counter()
    records = algebra_suite(family, settings)
    alg = build(family)
    lemmas = [LemmaKind.PROJECTIVE] if family.is_projective else [LemmaKind.CONFORMAL_NONNULL, LemmaKind.CONFORMAL_NULL]
    for lemma in lemmas:
        records.extend(verify_lemma_suite(family, lemma, settings))
    for gtype in available_types(alg):
        records.extend(flow_suite(alg, settings, gtype))
    records.extend(classify_suite(alg, settings))
    logger.info(f"{family.label}: {len(records)} checks in {time.perf_counter() - started:.2f}s")
    return records


def verify_all(max_n: int, settings: SuiteSettings, workers: int = 1) -> List[Dict[str, Any]]:
    descriptors = [family.descriptor() for family in family_cases(max_n)]
    records = negative_controls(settings)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(run_family_case, descriptors, [settings] * len(descriptors)):
                records.extend(result)
    else:
        for descriptor in descriptors:
            records.extend(run_family_case(descriptor, settings))
    return sorted(records, key=canonical_key)
