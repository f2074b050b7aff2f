"""Query templates sent to the language model, and the answer parser.

The template strings are frozen byte for byte: suggestion fixtures and
the sidecar contract both key off the exact wording, so quirks like the
singular "color" in the color question and the doubled "and and" in the
rewrite instruction are intentional and must not be "fixed".
"""

from __future__ import annotations

from ..backends.base import TEMPLATE_COLOR, TEMPLATE_SHAPE
from ..domain import CandidateKind, CandidateSource, FeatureCandidate

_SHAPE_QUERY = """What are the common shapes of the {object}?

Please output the answer without explanation.
There are two guidelines:
1) The output should add shapes to the neglected object to construct a fluent phrase, separating each phrase with a semicolon;
2) Each shape should originate from a distinct perspective.

Example:

Question: What are the common shapes of bicycle?

Output: two-wheeled bicycle; bicycle with pedals; bicycle with chain and gears"""

_COLOR_QUERY = """What are the most common color of the {object}?

Please output the answer without explanation.
There are two guidelines:
1) The output should add colors to the neglected object to construct a fluent phrase, separating each phrase with a semicolon;
2) Each color should originate from a distinct perspective.

Example:

Question: What are the most common colors of apple?

Output: red apple; green apple"""

_LLM_REPAIR_QUERY = """Input Prompt: {prompt}

The input prompt is fed into the Text-to-Image model.
However, the {object} is not shown on the generated image.
Please repair the input prompt and output eight repaired prompt and and separating each prompt with a semicolon without explanation."""

_FEATURE_QUERIES = {
    TEMPLATE_SHAPE: _SHAPE_QUERY,
    TEMPLATE_COLOR: _COLOR_QUERY,
}

_FEATURE_KINDS = {
    TEMPLATE_SHAPE: CandidateKind.SHAPE,
    TEMPLATE_COLOR: CandidateKind.COLOR,
}


def render_feature_query(kind: str, object_lemma: str) -> str:
    """The full question asking for color or shape descriptions of an object."""
    if kind not in _FEATURE_QUERIES:
        raise ValueError(f"feature queries cover {sorted(_FEATURE_QUERIES)}, not {kind!r}")
    if not object_lemma or not object_lemma.strip():
        raise ValueError("object lemma must be non-empty")
    return _FEATURE_QUERIES[kind].format(object=object_lemma)


def render_llm_repair_query(prompt_text: str, object_lemma: str) -> str:
    """The whole-prompt rewrite request used by the language-model baseline."""
    if not object_lemma or not object_lemma.strip():
        raise ValueError("object lemma must be non-empty")
    return _LLM_REPAIR_QUERY.format(prompt=prompt_text, object=object_lemma)


def parse_feature_response(text: str, kind: str, target: str = "") -> list[FeatureCandidate]:
    """Split a semicolon-separated answer into ordered feature candidates.

    Unparseable input degrades to an empty list rather than an error.
    """
    candidate_kind = _FEATURE_KINDS.get(kind)
    if candidate_kind is None or not isinstance(text, str):
        return []
    out: list[FeatureCandidate] = []
    for piece in text.split(";"):
        phrase = piece.strip()
        if phrase:
            out.append(
                FeatureCandidate(
                    kind=candidate_kind,
                    phrase=phrase,
                    target=target,
                    source=CandidateSource.LLM,
                )
            )
    return out
