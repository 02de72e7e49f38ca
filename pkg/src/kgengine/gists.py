"""Generic calc patterns and their built-in semantics.

A gist is a reusable calculation template: a name, an input arity, ordered
role names for fixed-arity patterns, and an explanation template rendered
by the explainer. Concrete calculations bind gists to form fields; the
binding carries no behavior of its own.

The CALC gist is the escape hatch for opaque host logic: its model names a
pure function that the embedding application registers in a host-function
table passed to the evaluator. All other gists evaluate here.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Context, Decimal
from typing import Callable, Mapping

from .errors import KnowledgeGraphError

# Intermediate arithmetic is exact well past any realistic amount; results
# are quantized to the output field's scale on assignment only. The engine
# activates this context around its evaluation loop.
EVAL_CONTEXT = Context(prec=60)

Raw = Decimal | bool | str
HostFunction = Callable[[list[Raw]], Raw]


class GistEvalError(KnowledgeGraphError):
    """A gist application failed at run time (host error, bad operand)."""


@dataclass(frozen=True)
class GistSpec:
    """A generic calculation pattern.

    ``max_inputs`` is None for variadic gists; ``roles`` is empty for them
    and positional otherwise. ``semantics`` names the built-in evaluation
    rule below.
    """

    name: str
    min_inputs: int
    max_inputs: int | None
    roles: tuple[str, ...]
    semantics: str
    template: str

    def arity_ok(self, count: int) -> bool:
        if count < self.min_inputs:
            return False
        return self.max_inputs is None or count <= self.max_inputs


BUILTIN_GISTS: dict[str, GistSpec] = {
    g.name: g
    for g in (
        GistSpec(
            "CALC", 1, None, (), "calc",
            "{out} ({out_val}) is computed from {inputs}",
        ),
        GistSpec(
            "ADD", 1, None, (), "add",
            "{out} ({out_val}) is the sum of {inputs}",
        ),
        GistSpec(
            "SUBTRACT", 2, 2, ("minuend", "subtrahend"), "subtract",
            "{out} ({out_val}) is {in:minuend} ({in_val:minuend}) minus "
            "{in:subtrahend} ({in_val:subtrahend})",
        ),
        GistSpec(
            "NONNEG_SUBTRACT", 2, 2, ("minuend", "subtrahend"), "nonneg_subtract",
            "{out} ({out_val}) is {in:minuend} ({in_val:minuend}) minus "
            "{in:subtrahend} ({in_val:subtrahend}), floored at zero",
        ),
        GistSpec(
            "MULTIPLY", 1, None, (), "multiply",
            "{out} ({out_val}) is the product of {inputs}",
        ),
        GistSpec(
            "MIN", 1, None, (), "min",
            "{out} ({out_val}) is the smallest of {inputs}",
        ),
        GistSpec(
            "MAX", 1, None, (), "max",
            "{out} ({out_val}) is the largest of {inputs}",
        ),
        GistSpec(
            "CONDITIONAL", 3, 3, ("condition", "then", "else"), "conditional",
            "{out} ({out_val}) takes {in:then} ({in_val:then}) when "
            "{in:condition} ({in_val:condition}) holds, else {in:else} ({in_val:else})",
        ),
    )
}


def _decimals(args: list[Raw], gist: str) -> list[Decimal]:
    out: list[Decimal] = []
    for a in args:
        if isinstance(a, bool) or not isinstance(a, Decimal):
            raise GistEvalError(f"{gist} requires numeric operands, got {type(a).__name__}")
        out.append(a)
    return out


def apply_gist(
    spec: GistSpec,
    args: list[Raw],
    fn_name: str | None = None,
    host: Mapping[str, HostFunction] | None = None,
) -> Raw:
    """Evaluate a gist over known raw operands, returning a raw result.

    Arithmetic runs under the ambient decimal context; the engine wraps
    its evaluation loop in ``EVAL_CONTEXT`` so intermediates stay exact.
    Raises GistEvalError for host failures (the classic one being division
    by zero inside a CALC function) and operand type errors.
    """
    sem = spec.semantics
    if sem == "add":
        return sum(_decimals(args, spec.name), Decimal(0))
    if sem == "subtract":
        a, b = _decimals(args, spec.name)
        return a - b
    if sem == "nonneg_subtract":
        a, b = _decimals(args, spec.name)
        diff = a - b
        return diff if diff > 0 else Decimal(0)
    if sem == "multiply":
        product = Decimal(1)
        for d in _decimals(args, spec.name):
            product *= d
        return product
    if sem == "min":
        return min(_decimals(args, spec.name))
    if sem == "max":
        return max(_decimals(args, spec.name))
    if sem == "conditional":
        cond = args[0]
        if not isinstance(cond, bool):
            raise GistEvalError("CONDITIONAL requires a boolean condition")
        return args[1] if cond else args[2]
    if sem == "calc":
        if fn_name is None:
            raise GistEvalError("CALC model does not name a host function")
        table = host or {}
        if fn_name not in table:
            raise GistEvalError(f"host function {fn_name!r} is not registered")
        try:
            return table[fn_name](list(args))
        except (ArithmeticError, ValueError, TypeError, KeyError) as exc:
            raise GistEvalError(f"host function {fn_name!r} failed: {exc}") from exc
    raise GistEvalError(f"unknown gist semantics {sem!r}")  # pragma: no cover
