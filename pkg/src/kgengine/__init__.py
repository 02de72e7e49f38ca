"""kgengine: an embeddable knowledge engine for compliance calculations.

Calculation logic lives in explicit graphs (gist instances chained through
shared fields) and eligibility rules in condition graphs backed by truth
tables. The engine evaluates incrementally over partial facts, reports
what is still missing, and explains every computed value by backward
chaining.
"""

from .completeness import (
    CompletenessStatus,
    MissingReport,
    assess,
    missing_report,
    next_question,
)
from .diagnostics import Diagnostic, Severity, SourceLocation
from .engine import (
    ABSENT,
    EvalResult,
    EvalState,
    FactStore,
    full_eval,
    recompute,
    set_fact,
)
from .errors import (
    CycleError,
    KindMismatchError,
    KnowledgeGraphError,
    NotAnInputError,
    UnknownFieldError,
    ValueParseError,
)
from .explain import ExplanationNode, explain, explain_path
from .gists import BUILTIN_GISTS, GistSpec
from .loader import LoadResult, load, load_file, save
from .model import (
    Binding,
    BoundedCalcModel,
    CompletenessGraph,
    Condition,
    ConditionNode,
    FieldDecl,
    FieldRole,
    KnowledgeGraph,
    OutcomeNode,
    TruthRow,
    TruthTable,
    dependency_cone,
    structurally_equal,
    topo_order,
    validate,
)
from .values import UNKNOWN, Value, ValueKind, parse_value

__version__ = "0.1.0"

__all__ = [
    "ABSENT",
    "BUILTIN_GISTS",
    "Binding",
    "BoundedCalcModel",
    "CompletenessGraph",
    "CompletenessStatus",
    "Condition",
    "ConditionNode",
    "CycleError",
    "Diagnostic",
    "EvalResult",
    "EvalState",
    "ExplanationNode",
    "FactStore",
    "FieldDecl",
    "FieldRole",
    "GistSpec",
    "KindMismatchError",
    "KnowledgeGraph",
    "KnowledgeGraphError",
    "LoadResult",
    "MissingReport",
    "NotAnInputError",
    "OutcomeNode",
    "Severity",
    "SourceLocation",
    "TruthRow",
    "TruthTable",
    "UNKNOWN",
    "UnknownFieldError",
    "Value",
    "ValueKind",
    "ValueParseError",
    "assess",
    "dependency_cone",
    "explain",
    "explain_path",
    "full_eval",
    "load",
    "load_file",
    "missing_report",
    "next_question",
    "parse_value",
    "recompute",
    "save",
    "set_fact",
    "structurally_equal",
    "topo_order",
    "validate",
]
