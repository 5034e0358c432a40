"""Prompt construction and response parsing for the metaphor workflow.

Prompts are rendered from the versioned template file shipped with the
package (wording is data, not code). Rendering is deterministic: equal
inputs give byte-identical prompts, with no timestamps or randomness.
"""

from __future__ import annotations

import re
import sys
from importlib import resources
from pathlib import Path

from pydantic import BaseModel, ConfigDict, computed_field, field_validator

from .errors import InvalidSpec, UnparseableResponse
from .story import MeaningType, MetaphorSpec, VisualStructure

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MAX_CONCEPT_WORDS = 8
DEFAULT_SUGGESTION_COUNT = 5


class PromptText(BaseModel):
    model_config = ConfigDict(frozen=True)

    role_preamble: str = ""
    body: str

    @computed_field
    @property
    def full(self) -> str:
        if self.role_preamble:
            return f"{self.role_preamble}\n\n{self.body}"
        return self.body


class MetaphorSuggestion(BaseModel):
    concept: str
    rationale: str | None = None

    @field_validator("concept")
    @classmethod
    def _concept_bounds(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("concept is empty")
        if len(v.split()) > MAX_CONCEPT_WORDS:
            raise ValueError(f"concept exceeds {MAX_CONCEPT_WORDS} words")
        return v


def _default_templates_path() -> Path:
    return Path(str(resources.files("dreamloom").joinpath("templates/prompts.toml")))


class PromptEngine:
    """Renders provider prompts from a MetaphorSpec."""

    def __init__(self, templates_path: str | Path | None = None):
        path = Path(templates_path) if templates_path else _default_templates_path()
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        self.version: int = data["version"]
        self.templates_path = path
        self._suggestion = data["suggestion"]
        self._image = data["image"]
        self._depiction = data["depiction"]
        self._relation_phrases: dict[str, str] = data["relation_phrases"]
        self._structure_directives: dict[str, str] = data["structure_directives"]

    @staticmethod
    def _adjectives(spec: MetaphorSpec) -> str:
        # Spec fields are trimmed on construction; joining preserves each
        # adjective verbatim.
        return ", ".join(a for a in spec.adjectives if a.strip())

    def relation_phrase(self, meaning_type: MeaningType) -> str:
        return self._relation_phrases[MeaningType(meaning_type).value]

    def structure_directive(self, structure: VisualStructure) -> str:
        return self._structure_directives[VisualStructure(structure).value]

    def build_suggestion_prompt(
        self,
        spec: MetaphorSpec,
        meaning_type: MeaningType | None = None,
        n: int = DEFAULT_SUGGESTION_COUNT,
    ) -> PromptText:
        """Ask for n metaphor concepts related to the feeling by the chosen
        meaning type; the reply must be a machine-parseable numbered list."""
        spec.require_g1()
        if n < 1:
            raise InvalidSpec(f"suggestion count must be >= 1, got {n}")
        meaning = MeaningType(meaning_type) if meaning_type is not None else spec.meaning_type
        body = self._suggestion["body"].format(
            affective_element=spec.affective_element,
            adjectives=self._adjectives(spec),
            relation_phrase=self.relation_phrase(meaning),
            n=n,
        )
        return PromptText(role_preamble=self._suggestion["role"], body=body)

    def build_image_prompt(self, spec: MetaphorSpec) -> PromptText:
        spec.require_full()
        extra = ""
        if spec.extra_prompt:
            extra = self._image["extra_clause"].format(extra=spec.extra_prompt)
        body = self._image["body"].format(
            affective_element=spec.affective_element,
            concept=spec.metaphor_concept,
            structure_directive=self.structure_directive(spec.visual_structure),
            adjectives=self._adjectives(spec),
            extra=extra,
        )
        return PromptText(role_preamble=self._image["role"], body=body)

    def build_depiction_prompt(self, spec: MetaphorSpec) -> PromptText:
        spec.require_full()
        body = self._depiction["body"].format(
            affective_element=spec.affective_element,
            adjectives=self._adjectives(spec),
            concept=spec.metaphor_concept,
        )
        return PromptText(role_preamble=self._depiction["role"], body=body)


# --- suggestion parsing -------------------------------------------------------

_ITEM_RE = re.compile(r"^\s*(?:\d+\s*[.):–-]|[-*•])\s*(.+?)\s*$")
_QUOTES = "\"'`“”‘’"
_TRAILING_PUNCT = ".,;:!?"
_RATIONALE_SEP = re.compile(r"\s+(?:—|–|-)\s+|:\s+")


def _clean(fragment: str) -> str:
    return fragment.strip().strip(_QUOTES).rstrip(_TRAILING_PUNCT).strip()


def parse_suggestions(response_text: str) -> list[MetaphorSuggestion]:
    """Pull metaphor concepts out of a numbered or bulleted list reply.

    Strips list markers, surrounding quotes and trailing punctuation; a
    dash- or colon-separated tail becomes the rationale. Items that are
    empty (or too long to be a usable concept) are dropped.
    """
    suggestions: list[MetaphorSuggestion] = []
    matched_any = False
    for line in response_text.splitlines():
        m = _ITEM_RE.match(line)
        if not m:
            continue
        matched_any = True
        item = m.group(1)
        parts = _RATIONALE_SEP.split(item, maxsplit=1)
        concept = _clean(parts[0])
        rationale = _clean(parts[1]) if len(parts) > 1 and parts[1] else None
        if not concept or len(concept.split()) > MAX_CONCEPT_WORDS:
            continue
        suggestions.append(MetaphorSuggestion(concept=concept, rationale=rationale or None))
    if not matched_any or not suggestions:
        raise UnparseableResponse("no list items found in response")
    return suggestions


def render_numbered_list(items: list[str]) -> str:
    """The inverse of parse_suggestions for plain concepts; mocks use it."""
    return "\n".join(f"{i + 1}. {item}" for i, item in enumerate(items))
