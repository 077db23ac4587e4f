"""Turn per-disease probabilities into natural-language description lines.

Three fixed prompt styles; bucket boundaries are half-open on the left
so each probability maps to exactly one sentence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .domains import CadOutput
from .errors import ProbOutOfRange


class PromptStyle(enum.Enum):
    P1_DIRECT = "p1"
    P2_SIMPLISTIC = "p2"
    P3_ILLUSTRATIVE = "p3"

    @classmethod
    def parse(cls, value: "PromptStyle | str") -> "PromptStyle":
        if isinstance(value, PromptStyle):
            return value
        for style in cls:
            if value == style.value:
                return style
        raise ValueError(f"unknown prompt style {value!r}")


@dataclass(frozen=True)
class VisualDescription:
    domain_id: str
    lines: tuple[str, ...]

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


def _line_p1(disease: str, prob: float) -> str:
    return f"{disease} score: {prob:.3f}"


def _line_p2(disease: str, prob: float) -> str:
    if prob < 0.5:
        return "No Finding"
    return f"The prediction is {disease}"


def _line_p3(disease: str, prob: float) -> str:
    if prob < 0.2:
        return f"No sign of {disease}"
    if prob < 0.5:
        return f"Small possibility of {disease}"
    if prob < 0.9:
        return f"Patient is likely to have {disease}"
    return f"Definitely have {disease}"


_RENDERERS = {
    PromptStyle.P1_DIRECT: _line_p1,
    PromptStyle.P2_SIMPLISTIC: _line_p2,
    PromptStyle.P3_ILLUSTRATIVE: _line_p3,
}


def describe_finding(disease: str, prob: float, style: PromptStyle) -> str:
    if not 0.0 <= prob <= 1.0:
        raise ProbOutOfRange(f"{disease!r} probability {prob} outside [0, 1]")
    return _RENDERERS[style](disease, prob)


def prob2text(output: CadOutput, style: PromptStyle | str) -> VisualDescription:
    style = PromptStyle.parse(style)
    lines = tuple(describe_finding(d, p, style) for d, p in output.findings)
    return VisualDescription(domain_id=output.domain_id, lines=lines)
