"""Value domain for graph evaluation.

Every amount handled by the engine is a fixed-point decimal: money carries
2 decimal places, plain numbers carry 4. Binary floating point never enters
evaluation; values are parsed from decimal strings and stored as
``decimal.Decimal`` quantized to their scale. Unknown is a real value (the
absence of information), represented by the ``UNKNOWN`` singleton rather
than ``None`` so it can flow through arithmetic strictly.

Rounding happens in exactly one place: when a raw arithmetic result is
assigned into a field, it is quantized to the field's scale with ties
rounding away from zero (see :func:`coerce_raw`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Context, InvalidOperation, ROUND_HALF_UP, Decimal
from enum import Enum

from .errors import ValueParseError

MONEY_SCALE = Decimal("0.01")
NUMBER_SCALE = Decimal("0.0001")

# Quantization must not be limited by the ambient 28-digit context.
_QUANTIZE_CONTEXT = Context(prec=60, rounding=ROUND_HALF_UP)


def _quantize(raw: Decimal, scale: Decimal) -> Decimal:
    try:
        return _QUANTIZE_CONTEXT.quantize(raw, scale)
    except InvalidOperation as exc:
        raise ValueParseError(f"amount {raw} overflows the supported precision") from exc

_DECIMAL_TOKEN = re.compile(r"-?\d+(?:\.(\d+))?\Z")


class ValueKind(str, Enum):
    MONEY = "money"
    NUMBER = "number"
    BOOLEAN = "boolean"
    TEXT = "text"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class Value:
    """A typed field value. ``kind is None`` marks the Unknown singleton."""

    kind: ValueKind | None
    raw: Decimal | bool | str | None = None

    @property
    def is_unknown(self) -> bool:
        return self.kind is None

    @staticmethod
    def money(raw: Decimal | int | str) -> "Value":
        return Value(ValueKind.MONEY, _quantize(_as_decimal(raw), MONEY_SCALE))

    @staticmethod
    def number(raw: Decimal | int | str) -> "Value":
        return Value(ValueKind.NUMBER, _quantize(_as_decimal(raw), NUMBER_SCALE))

    @staticmethod
    def boolean(raw: bool) -> "Value":
        return Value(ValueKind.BOOLEAN, bool(raw))

    @staticmethod
    def text(raw: str) -> "Value":
        return Value(ValueKind.TEXT, raw)

    def render(self) -> str:
        """Canonical string form: money "200.00", number "0.5000",
        boolean "true"/"false", text verbatim, unknown "unknown"."""
        if self.is_unknown:
            return "unknown"
        if self.kind is ValueKind.BOOLEAN:
            return "true" if self.raw else "false"
        return str(self.raw)


UNKNOWN = Value(None, None)


def _as_decimal(raw: Decimal | int | str) -> Decimal:
    if isinstance(raw, bool):
        raise ValueParseError("boolean is not a decimal amount")
    if isinstance(raw, float):
        raise ValueParseError("binary floats are not accepted; pass a decimal string")
    if isinstance(raw, Decimal):
        return raw
    return Decimal(raw)


def scale_for(kind: ValueKind) -> Decimal | None:
    if kind is ValueKind.MONEY:
        return MONEY_SCALE
    if kind is ValueKind.NUMBER:
        return NUMBER_SCALE
    return None


def is_numeric(kind: ValueKind) -> bool:
    return kind in (ValueKind.MONEY, ValueKind.NUMBER)


def parse_value(kind: ValueKind, text: str, enum: tuple[str, ...] = ()) -> Value:
    """Parse user-facing text into a Value of ``kind``, strictly.

    Money rejects more than 2 decimal places and number more than 4;
    exponents, thousands separators and floats are never accepted. Text
    must belong to ``enum``.
    """
    if kind in (ValueKind.MONEY, ValueKind.NUMBER):
        m = _DECIMAL_TOKEN.match(text.strip())
        if not m:
            raise ValueParseError(f"not a decimal amount: {text!r}")
        frac = m.group(1) or ""
        limit = 2 if kind is ValueKind.MONEY else 4
        if len(frac) > limit:
            raise ValueParseError(
                f"{kind.value} allows at most {limit} decimal places: {text!r}"
            )
        return Value.money(text.strip()) if kind is ValueKind.MONEY else Value.number(text.strip())
    if kind is ValueKind.BOOLEAN:
        t = text.strip().lower()
        if t == "true":
            return Value.boolean(True)
        if t == "false":
            return Value.boolean(False)
        raise ValueParseError(f"not a boolean (true/false): {text!r}")
    if kind is ValueKind.TEXT:
        if text not in enum:
            raise ValueParseError(f"{text!r} is not one of the declared choices {list(enum)}")
        return Value.text(text)
    raise ValueParseError(f"unsupported kind {kind!r}")


def coerce_raw(raw: Decimal | bool | str, kind: ValueKind, enum: tuple[str, ...] = ()) -> Value:
    """Assign a raw computation result into a field of ``kind``.

    Decimals are quantized to the field scale (half away from zero); this
    is the engine's single rounding point. Raises ValueParseError when the
    raw type cannot inhabit the kind or a text value is outside the enum.
    """
    if kind is ValueKind.MONEY or kind is ValueKind.NUMBER:
        if isinstance(raw, bool) or not isinstance(raw, Decimal):
            raise ValueParseError(f"{kind.value} field cannot hold {type(raw).__name__}")
        scale = MONEY_SCALE if kind is ValueKind.MONEY else NUMBER_SCALE
        return Value(kind, _quantize(raw, scale))
    if kind is ValueKind.BOOLEAN:
        if not isinstance(raw, bool):
            raise ValueParseError(f"boolean field cannot hold {type(raw).__name__}")
        return Value(kind, raw)
    if kind is ValueKind.TEXT:
        if not isinstance(raw, str):
            raise ValueParseError(f"text field cannot hold {type(raw).__name__}")
        if raw not in enum:
            raise ValueParseError(f"{raw!r} is not one of the declared choices {list(enum)}")
        return Value(kind, raw)
    raise ValueParseError(f"unsupported kind {kind!r}")  # pragma: no cover


def kinds_comparable(a: ValueKind, b: ValueKind) -> bool:
    """Whether values of the two kinds may be compared at all."""
    if is_numeric(a) and is_numeric(b):
        return True
    return a == b


def compare(op: str, left: Value, right: Value) -> bool:
    """Apply a predicate (eq/ne/lt/le/gt/ge) between two known values.

    Ordered predicates are numeric-only; booleans and text support only
    eq/ne. Raises ValueParseError on kind conflicts.
    """
    if left.is_unknown or right.is_unknown:
        raise ValueParseError("cannot compare unknown values")
    assert left.kind is not None and right.kind is not None
    if not kinds_comparable(left.kind, right.kind):
        raise ValueParseError(f"cannot compare {left.kind.value} with {right.kind.value}")
    if op == "eq":
        return left.raw == right.raw
    if op == "ne":
        return left.raw != right.raw
    if not (is_numeric(left.kind) and is_numeric(right.kind)):
        raise ValueParseError(f"ordered predicate {op!r} requires numeric operands")
    assert isinstance(left.raw, Decimal) and isinstance(right.raw, Decimal)
    if op == "lt":
        return left.raw < right.raw
    if op == "le":
        return left.raw <= right.raw
    if op == "gt":
        return left.raw > right.raw
    if op == "ge":
        return left.raw >= right.raw
    raise ValueParseError(f"unknown predicate {op!r}")
