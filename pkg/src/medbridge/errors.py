"""Exception hierarchy shared across the package.

Domain-level errors subclass MedbridgeError so callers (CLI, service) can
map them to exit code 1 / HTTP 4xx uniformly; config problems use
ConfigError (exit code 2).
"""


class MedbridgeError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigError(MedbridgeError):
    """Bad or missing configuration (CLI exit code 2)."""


# --- domain dispatch ---

class EmptyRegistry(MedbridgeError):
    pass


class DuplicateDomain(MedbridgeError):
    pass


class DimensionMismatch(MedbridgeError):
    pass


class ZeroNormVector(MedbridgeError):
    pass


class UnknownImage(MedbridgeError):
    pass


class MalformedModelOutput(MedbridgeError):
    pass


# --- prob2text ---

class ProbOutOfRange(MedbridgeError):
    pass


# --- report index ---

class ZeroEmbedding(MedbridgeError):
    """A document or query has no term-set occurrences at all."""


class EmptyCorpus(MedbridgeError):
    pass


class AllDocumentsEmpty(MedbridgeError):
    """Every corpus document produced a zero TF-IDF embedding."""


# --- templates / pipeline ---

class TemplateError(MedbridgeError):
    pass


# --- knowledge base ---

class DuplicateSiblingTitle(MedbridgeError):
    pass


class EmptyDocument(MedbridgeError):
    pass


class MalformedStructure(MedbridgeError):
    pass


class PathNotFound(MedbridgeError):
    pass


class ParseFailure(MedbridgeError):
    """Navigator reply could not be mapped to an action."""


# --- LLM gateway ---

class LlmUnavailable(MedbridgeError):
    """Backend unreachable after the retry policy was exhausted."""


class AuthError(MedbridgeError):
    """401/403 from the remote backend; never retried."""


class ResponseMalformed(MedbridgeError):
    pass


class MockExhausted(MedbridgeError):
    """Scripted mock ran out of queued replies."""


# --- metrics ---

class LengthMismatch(MedbridgeError):
    pass
