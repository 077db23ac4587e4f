"""Prompt templates: external file, [name] sections, {placeholder} slots.

Templates are validated at load time: every placeholder a stage needs
must be present, and no section may reference a placeholder the pipeline
does not know how to fill. Prompt wording then becomes pure
configuration — no rebuild to tune it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import TemplateError

KNOWN_PLACEHOLDERS = frozenset(
    {"visual_description", "preliminary_report", "examples", "query", "knowledge"}
)

# placeholders each pipeline stage substitutes; validated on load
REQUIRED_PLACEHOLDERS: dict[str, frozenset[str]] = {
    "preliminary": frozenset({"visual_description"}),
    "refine": frozenset({"preliminary_report", "examples"}),
    "chat_answer": frozenset({"query", "knowledge"}),
}

_SECTION = re.compile(r"^\[([a-z0-9_]+)\]\s*$")
_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")

DEFAULT_TEMPLATES_TEXT = """\
[preliminary]
You are a radiology assistant. Write a concise clinical report based on
the findings below from automated image analysis.

Findings:
{visual_description}

Report:

[refine]
Revise the draft report below. Use the numbered example reports as
references for style and phrasing while keeping the draft's findings.

Draft report:
{preliminary_report}

Example reports:
{examples}

Revised report:

[chat_answer]
Answer the question using the reference material. If the material does
not cover the question, say that it does not.

Question:
{query}

Reference material:
{knowledge}

Answer:
"""


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER.findall(self.body))

    def render(self, **values: str) -> str:
        needed = self.placeholders()
        missing = needed - values.keys()
        if missing:
            raise TemplateError(f"template {self.name!r} missing values for {sorted(missing)}")
        return _PLACEHOLDER.sub(lambda m: values[m.group(1)], self.body)


class TemplateSet:
    def __init__(self, templates: dict[str, PromptTemplate]):
        self._templates = dict(templates)
        self._validate()

    def _validate(self) -> None:
        for name, required in REQUIRED_PLACEHOLDERS.items():
            if name not in self._templates:
                raise TemplateError(f"missing template section [{name}]")
            present = self._templates[name].placeholders()
            unknown = present - KNOWN_PLACEHOLDERS
            if unknown:
                raise TemplateError(
                    f"template {name!r} uses unknown placeholders {sorted(unknown)}"
                )
            absent = required - present
            if absent:
                raise TemplateError(
                    f"template {name!r} lacks required placeholders {sorted(absent)}"
                )

    def get(self, name: str) -> PromptTemplate:
        if name not in self._templates:
            raise TemplateError(f"no template named {name!r}")
        return self._templates[name]

    def names(self) -> list[str]:
        return sorted(self._templates)

    @classmethod
    def from_text(cls, text: str) -> "TemplateSet":
        sections: dict[str, list[str]] = {}
        current: list[str] | None = None
        for line in text.splitlines():
            match = _SECTION.match(line)
            if match:
                name = match.group(1)
                if name in sections:
                    raise TemplateError(f"duplicate template section [{name}]")
                current = sections.setdefault(name, [])
            elif current is not None:
                current.append(line)
            elif line.strip():
                raise TemplateError(f"content before first section: {line!r}")
        if not sections:
            raise TemplateError("template file has no sections")
        templates = {
            name: PromptTemplate(name, "\n".join(lines).strip("\n"))
            for name, lines in sections.items()
        }
        return cls(templates)

    @classmethod
    def from_file(cls, path: str | Path) -> "TemplateSet":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "TemplateSet":
        return cls.from_text(DEFAULT_TEMPLATES_TEXT)
