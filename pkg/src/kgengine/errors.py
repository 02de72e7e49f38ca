"""Exception types shared across the engine."""

from __future__ import annotations


class KnowledgeGraphError(Exception):
    """Base class for all engine errors."""


class ValueParseError(KnowledgeGraphError):
    """A textual or raw value does not fit the requested kind."""


class CycleError(KnowledgeGraphError):
    """The calc models induce a cyclic field dependency."""


class UnknownFieldError(KnowledgeGraphError):
    """A field id is not declared in the graph."""


class NotAnInputError(KnowledgeGraphError):
    """Attempt to store a fact against a computed field."""


class KindMismatchError(KnowledgeGraphError):
    """A value's kind conflicts with a field or condition declaration."""


class CompletenessStructureError(KnowledgeGraphError):
    """A completeness graph is structurally unusable (bad refs, cycle)."""
