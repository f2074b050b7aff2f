"""Object extraction: which things does a prompt ask the image to show.

The builtin mode is a deterministic rule-based chunker over the bundled
word-class lexicon: a noun phrase is a maximal adjective/noun run ending
at its last noun, optionally extended by a "with ..." feature complement.
A remote mode can delegate to a sidecar parser and raises
RemoteParserUnavailable when the endpoint cannot serve it, letting the
caller fall back to the builtin rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import httpx

from .domain import ObjectEntity, Prompt, Token
from .errors import RemoteParserUnavailable
from .lexicon import ADJ, CONJ, DET, NOUN, PREP, Lexicon, default_lexicon

BUILTIN_CHUNKER = "builtin_chunker"
REMOTE_PARSER = "remote_parser"


@dataclass(frozen=True)
class ExtractionConfig:
    mode: str = BUILTIN_CHUNKER
    lexicon: Lexicon | None = None
    endpoint: str | None = None
    # test seam: lets unit tests stand in for the network
    transport: httpx.BaseTransport | None = field(default=None, compare=False)

    def lex(self) -> Lexicon:
        return self.lexicon or default_lexicon()


def extract_objects(p: Prompt, cfg: ExtractionConfig | None = None) -> tuple[ObjectEntity, ...]:
    """All object entities of a prompt, in reading order."""
    cfg = cfg or ExtractionConfig()
    if cfg.mode == REMOTE_PARSER:
        return _extract_remote(p, cfg)
    return _extract_builtin(p, cfg.lex())


def head_token_indices(entity: ObjectEntity, p: Prompt, lexicon: Lexicon | None = None) -> list[int]:
    """Token indices whose attention describes this object.

    Every content token in the span counts; articles, conjunctions, and
    prepositions inside the span do not.
    """
    lex = lexicon or default_lexicon()
    start, end = entity.span
    indices = [t.index for t in p.tokens[start : end + 1] if _is_content(t, lex)]
    return indices or [end]


def content_lemma_phrase(entity: ObjectEntity, p: Prompt, lexicon: Lexicon | None = None) -> str:
    """Space-joined content lemmas of the entity, e.g. "mountain bike"."""
    lex = lexicon or default_lexicon()
    start, end = entity.span
    lemmas = [t.lemma for t in p.tokens[start : end + 1] if _is_content(t, lex)]
    return " ".join(lemmas) if lemmas else entity.head_lemma


def phrase_lemmas(text: str, lexicon: Lexicon | None = None) -> list[str]:
    """Content lemmas of free text, same convention as content_lemma_phrase."""
    lex = lexicon or default_lexicon()
    p = Prompt.from_text("_", text, lex)
    return [t.lemma for t in p.tokens if _is_content(t, lex)]


# ===== builtin chunker =====

def _is_content(tok: Token, lex: Lexicon) -> bool:
    tags = lex.tags(tok.lemma)
    return bool(tags & {NOUN, ADJ}) and not tags & {DET, CONJ, PREP}


def _role(tokens: tuple[Token, ...], i: int, lex: Lexicon) -> str:
    """Resolve the chunk role of token i, disambiguating ADJ/NOUN words."""
    tags = lex.tags(tokens[i].lemma)
    if DET in tags:
        return DET
    if CONJ in tags:
        return CONJ
    if PREP in tags:
        return PREP
    nominal = tags & {NOUN, ADJ}
    if not nominal:
        return "OTHER"
    if nominal == {NOUN}:
        return NOUN
    if nominal == {ADJ}:
        return ADJ
    # ambiguous word: acts as a modifier when the phrase continues
    if i + 1 < len(tokens):
        nxt = lex.tags(tokens[i + 1].lemma) & {NOUN, ADJ}
        if nxt and not lex.tags(tokens[i + 1].lemma) & {DET, CONJ, PREP}:
            return ADJ
    return NOUN


def _extract_builtin(p: Prompt, lex: Lexicon) -> tuple[ObjectEntity, ...]:
    tokens = p.tokens
    n = len(tokens)
    roles = [_role(tokens, i, lex) for i in range(n)]
    entities: list[ObjectEntity] = []
    i = 0
    while i < n:
        if roles[i] not in (ADJ, NOUN):
            i += 1
            continue
        run_start = i
        last_noun = -1
        while i < n and roles[i] in (ADJ, NOUN):
            if roles[i] == NOUN:
                last_noun = i
            i += 1
        if last_noun < 0:
            continue  # pure modifier run, nothing to depict
        end = last_noun
        head = last_noun
        # absorb "with <feature run>" complements, continuing over bare
        # "and <noun run>" conjuncts that carry no article of their own
        j = end + 1
        while j < n and tokens[j].lemma == "with":
            k = j + 1
            feat_last = -1
            while k < n:
                if roles[k] in (ADJ, NOUN):
                    if roles[k] == NOUN:
                        feat_last = k
                    k += 1
                elif (
                    roles[k] == CONJ
                    and tokens[k].lemma == "and"
                    and k + 1 < n
                    and roles[k + 1] in (ADJ, NOUN)
                ):
                    k += 1
                else:
                    break
            if feat_last < 0:
                break
            end = feat_last
            j = end + 1
        phrase = " ".join(t.surface for t in tokens[run_start : end + 1])
        entities.append(
            ObjectEntity(phrase=phrase, head_lemma=tokens[head].lemma, span=(run_start, end))
        )
        i = end + 1
    return tuple(entities)


# ===== remote parser =====

def _extract_remote(p: Prompt, cfg: ExtractionConfig) -> tuple[ObjectEntity, ...]:
    if not cfg.endpoint:
        raise RemoteParserUnavailable("remote parser mode needs an endpoint")
    url = cfg.endpoint.rstrip("/") + "/v1/parse"
    try:
        with httpx.Client(transport=cfg.transport, timeout=10.0) as client:
            resp = client.post(url, json={"text": p.text})
    except (httpx.TransportError, httpx.TimeoutException) as exc:
        raise RemoteParserUnavailable(f"parser endpoint unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise RemoteParserUnavailable(f"parser endpoint answered {resp.status_code}")
    try:
        body = resp.json()
        entities = tuple(
            ObjectEntity(
                phrase=str(o["phrase"]),
                head_lemma=str(o["head"]),
                span=(int(o["start"]), int(o["end"])),
            )
            for o in body["objects"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RemoteParserUnavailable(f"parser endpoint payload malformed: {exc}") from exc
    return entities
