import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Sequence

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    """A single named verdict with its evidence payload."""

    name: str
    passed: bool
    evidence: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "evidence": TextFormatter.jsonable(self.evidence),
        }


class TextFormatter:

    @staticmethod
    def format_rational(value: Any) -> str:
        """Render an exact rational as 'p/q' (or 'p' for integers)."""
        if isinstance(value, bool):
            return str(value)
        if isinstance(value, int):
            return str(value)
        numerator = getattr(value, "numerator", None)
        denominator = getattr(value, "denominator", None)
        if numerator is None or denominator is None:
            return str(value)
        numerator, denominator = int(numerator), int(denominator)
        return str(numerator) if denominator == 1 else f"{numerator}/{denominator}"

    @staticmethod
    def format_decimal(value: Any, decimals: int = 6) -> str:
        fraction = Fraction(TextFormatter.format_rational(value))
        return f"{float(fraction):.{decimals}f}"

    @staticmethod
    def format_vector(values: Sequence[Any]) -> str:
        return "(" + ", ".join(TextFormatter.format_rational(v) for v in values) + ")"

    @staticmethod
    def jsonable(value: Any) -> Any:
        """Turn evidence payloads into plain JSON data; rationals become 'p/q' strings."""
        if value is None or isinstance(value, (bool, str)):
            return value
        if isinstance(value, int):
            return value
        if isinstance(value, dict):
            return {str(TextFormatter.jsonable(k)): TextFormatter.jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [TextFormatter.jsonable(v) for v in value]
        if hasattr(value, "to_dict"):
            return TextFormatter.jsonable(value.to_dict())
        if hasattr(value, "value") and hasattr(value, "name"):
            return value.value
        return TextFormatter.format_rational(value)

    @staticmethod
    def banner(title: str, width: int = 60) -> List[str]:
        return ["=" * width, title, "=" * width]
