import json
import logging
import os
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from modules.utils import TextFormatter

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Everything that determines a run; the seed fixes every randomized sample."""

    model_config = ConfigDict(frozen=True)

    command: str
    family: Optional[str] = None
    n: Optional[int] = None
    p: Optional[int] = None
    q: Optional[int] = None
    allow_definite: bool = False
    Z: Optional[List[str]] = None
    X: Optional[List[str]] = None
    lemma: Optional[str] = None
    module_shape: Optional[str] = None
    s: Optional[str] = None
    grid: Optional[List[str]] = None
    t_samples: Optional[List[str]] = None
    seed: int = 7
    random: int = 20
    membership_samples: int = 200
    bracket_samples: int = 100
    max_n: Optional[int] = None
    workers: int = 1
    format: str = "json"
    timings: bool = False


class CheckRecord(BaseModel):
    suite: str
    case: str
    name: str
    passed: bool
    evidence: Dict[str, Any] = Field(default_factory=dict)


class SuiteReport(BaseModel):
    schema_version: str
    artifact_version: str
    command: str
    passed: bool
    summary: Dict[str, int]
    config: RunConfig
    checks: List[CheckRecord]
    data: Optional[Dict[str, Any]] = None
    wall_time_seconds: Optional[float] = None


class ReportBuilder:

    def __init__(self, schema_version: str, artifact_version: str):
        self.schema_version = schema_version
        self.artifact_version = artifact_version

    def build(
        self,
        config: RunConfig,
        records: List[Dict[str, Any]],
        wall_time: Optional[float] = None,
        data: Optional[Dict[str, Any]] = None,
    ) -> SuiteReport:
        checks = sorted(
            (CheckRecord(**r) for r in records),
            key=lambda c: (c.suite, c.case, c.name),
        )
        failed = sum(1 for c in checks if not c.passed)
        return SuiteReport(
            schema_version=self.schema_version,
            artifact_version=self.artifact_version,
            command=config.command,
            passed=failed == 0,
            summary={"total": len(checks), "passed": len(checks) - failed, "failed": failed},
            config=config,
            checks=checks,
            data=TextFormatter.jsonable(data) if data is not None else None,
            wall_time_seconds=wall_time if config.timings else None,
        )

    @staticmethod
    def render_json(report: SuiteReport) -> str:
        payload = report.model_dump(mode="json", exclude_none=True)
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @staticmethod
    def render_csv(report: SuiteReport) -> str:
        if report.data and "trajectory" in report.data:
            return ReportBuilder.render_trajectory_csv(report.data["trajectory"])
        frame = pd.DataFrame(
            [{"suite": c.suite, "case": c.case, "name": c.name, "passed": c.passed} for c in report.checks],
            columns=["suite", "case", "name", "passed"],
        )
        return frame.to_csv(index=False)

    @staticmethod
    def render_trajectory_csv(rows: List[Dict[str, Any]]) -> str:
        """Columns t, y1..yn as decimals; out-of-chart samples leave the coordinates empty."""
        decimal_rows = []
        for row in rows:
            decimal_rows.append({
                key: (TextFormatter.format_decimal(value) if value is not None and key != "in_chart" else value)
                for key, value in row.items()
            })
        return pd.DataFrame(decimal_rows).to_csv(index=False)

    @staticmethod
    def render_human(report: SuiteReport) -> str:
        lines = TextFormatter.banner(f"{report.command}: {'PASS' if report.passed else 'FAIL'}")
        lines.append(
            f"{report.summary['passed']}/{report.summary['total']} checks passed"
            + (f" in {report.wall_time_seconds:.2f}s" if report.wall_time_seconds is not None else "")
        )
        current = None
        for check in report.checks:
            if (check.suite, check.case) != current:
                current = (check.suite, check.case)
                lines.append(f"\n[{check.suite}] {check.case}")
            lines.append(f"  {'✓' if check.passed else '✗'} {check.name}")
            if not check.passed and check.evidence:
                lines.append(f"      {json.dumps(check.evidence, sort_keys=True)}")
        if report.data:
            lines.append("")
            for key, value in sorted(report.data.items()):
                lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
        lines.append("=" * 60)
        return "\n".join(lines) + "\n"

    def render(self, report: SuiteReport, fmt: str) -> str:
        if fmt == "json":
            return self.render_json(report)
        if fmt == "csv":
            return self.render_csv(report)
        return self.render_human(report)

    @staticmethod
    def write(text: str, output_path: Optional[str]) -> None:
        if not output_path:
            print(text, end="")
            return
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output_path, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Report written to {output_path}")


def report_schema(schema_version: str) -> Dict[str, Any]:
    schema = SuiteReport.model_json_schema()
    schema["$comment"] = f"schema_version {schema_version}"
    return schema
