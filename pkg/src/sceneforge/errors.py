"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SceneforgeError(Exception):
    """Base class for all sceneforge errors."""


class CatalogError(SceneforgeError):
    """Malformed catalog file: bad field, duplicate id, or invalid geometry."""


class TaxonomyError(CatalogError):
    """Taxonomy has a cycle or a category that never reaches the root."""


class ParseError(SceneforgeError):
    """Input text could not be parsed.

    ``span`` is the (start, end) character range of the offending fragment
    in the original utterance, when known.
    """

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        super().__init__(message)
        self.span = span


class UnknownVerbError(ParseError):
    """Command starts with a verb outside the operation table."""


class ResolutionError(SceneforgeError):
    """An object reference could not be resolved against the scene."""


class NotFoundError(ResolutionError):
    """Definite reference with zero matching instances."""


class AmbiguousReferenceError(ResolutionError):
    """Definite reference with several equally ranked candidates."""


class NoModelFoundError(SceneforgeError):
    """Object selection found no catalog model for a category."""

    def __init__(self, category: str):
        super().__init__(f"no catalog model found for category {category!r}")
        self.category = category


class NoDataError(SceneforgeError):
    """A prior lookup came up empty even after full back-off."""


class KnowledgeBaseError(SceneforgeError):
    """Knowledge-base file is corrupt or has an unsupported version."""


class SceneStructureError(SceneforgeError):
    """Scene or template violates a structural invariant (e.g. support cycle)."""
