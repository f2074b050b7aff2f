"""Exception types shared across the package."""

from __future__ import annotations


class PatcherError(Exception):
    """Base class for every error raised by this package."""


# ===== domain / geometry =====

class SpanOutOfRange(PatcherError):
    """An object span points outside the prompt's token range."""


class EmptyIndexList(PatcherError):
    """An operation received an empty token-index list."""


class IndexOutOfRange(PatcherError):
    """A token index points outside the attention array."""


class SpanMismatch(PatcherError):
    """A substitution target does not match the prompt it claims to live in."""


# ===== attention arithmetic =====

class EmptySet(PatcherError):
    """Attention difference needs at least one score on each side."""


class TooFewScores(PatcherError):
    """Pairwise statistics need at least two scores."""


# ===== detection =====

class SingleClassInput(PatcherError):
    """Threshold calibration needs both present and absent examples."""


# ===== taxonomy =====

class LemmaNotFound(PatcherError):
    """The lemma has no noun entry in the taxonomy database."""


class WordNetUnreadable(PatcherError):
    """The taxonomy database files are missing or malformed."""


# ===== backends =====

class BackendError(PatcherError):
    """Base class for backend failures."""


class UnknownImageRef(BackendError):
    """A similarity query referenced an image the backend never produced."""


class RemoteError(BackendError):
    """Base class for remote sidecar failures."""


class RemoteTimeout(RemoteError):
    """The sidecar did not answer within the deadline, after retries."""


class ProtocolViolation(RemoteError):
    """The sidecar answered with a payload that breaks the wire contract."""


class ServerError(RemoteError):
    """The sidecar reported an application-level error."""

    def __init__(self, status: int, message: str):
        super().__init__(f"server error {status}: {message}")
        self.status = status
        self.message = message


class RemoteParserUnavailable(RemoteError):
    """Remote object extraction was requested but the endpoint cannot serve it."""


# ===== pipeline =====

class RepairAborted(PatcherError):
    """A backend failed mid-repair; carries the partial trail for diagnosis."""

    def __init__(self, cause: Exception, trail: tuple = (), attempts: int = 0):
        super().__init__(f"repair aborted after {attempts} generation call(s): {cause}")
        self.cause = cause
        self.trail = trail
        self.attempts = attempts


# ===== datasets / evaluation =====

class WrongVocabularySize(PatcherError):
    """A dataset vocabulary does not have the expected number of unique entries."""


class MalformedRecord(PatcherError):
    """A dataset or annotation line could not be parsed."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NoAnnotators(PatcherError):
    """A prompt id has no annotation rows at all."""


class MissingAnnotations(PatcherError):
    """Evaluation against human judgments is missing verdicts for some prompts."""

    def __init__(self, prompt_ids: list[str]):
        shown = ", ".join(prompt_ids[:5])
        more = "" if len(prompt_ids) <= 5 else f" (+{len(prompt_ids) - 5} more)"
        super().__init__(f"no annotations for: {shown}{more}")
        self.prompt_ids = prompt_ids
