"""Polynomial input-output model structures in product form.

A model is a finite sum of monomials in delayed input, output and noise
samples, plus an always-present additive noise term for the current
instant.  Each monomial owns a symbolic coefficient slot and may carry
an optional numeric value; coefficients are attachments, never part of
the structure.

Delays are stored as nonnegative integers (``delay`` of 1 means "one
step in the past").  Output factors must have delay >= 1; noise factors
must as well in ``strict`` mode, while the default ``extended`` mode
also admits the current noise sample inside products.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence


class ModelError(ValueError):
    """Invalid model content or inconsistent operation arguments."""


class CausalityError(ModelError):
    """A factor references the present or future of a feedback signal."""


class ModelSyntaxError(ModelError):
    """Malformed model text, with a character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SignalKind(Enum):
    INPUT = "u"
    OUTPUT = "y"
    NOISE = "xi"


_SIGNAL_RANK = {SignalKind.INPUT: 0, SignalKind.OUTPUT: 1, SignalKind.NOISE: 2}


class Mode(Enum):
    STRICT = "strict"
    EXTENDED = "extended"


FactorKey = tuple[SignalKind, int]


@dataclass(frozen=True, eq=False)
class Monomial:
    """One model term: a coefficient slot times a product of delayed factors.

    ``factors`` maps ``(signal, delay)`` to a positive exponent; absent
    keys mean exponent zero.  An empty map is the constant term.
    """

    coeff_id: int
    factors: Mapping[FactorKey, int]
    coeff_value: float | None = None

    def __post_init__(self) -> None:
        if self.coeff_id < 1:
            raise ModelError("coefficient ids are positive integers")
        factors = dict(self.factors)
        object.__setattr__(self, "factors", factors)
        for (signal, delay), exponent in factors.items():
            if exponent < 1:
                raise ModelError("zero exponents must be absent keys")
            if delay < 0:
                raise CausalityError(f"negative delay on {signal.value}")
            if signal is SignalKind.OUTPUT and delay < 1:
                raise CausalityError("output factors need delay >= 1")

    def total_degree(self) -> int:
        return sum(self.factors.values())

    def signals(self) -> frozenset[SignalKind]:
        return frozenset(signal for signal, _ in self.factors)

    def sort_key(self) -> tuple:
        return (self.total_degree(), _factor_key(self.factors))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Monomial):
            return NotImplemented
        return (
            self.coeff_id == other.coeff_id
            and self.factors == other.factors
            and self.coeff_value == other.coeff_value
        )


def _factor_key(factors: Mapping[FactorKey, int]) -> tuple:
    return tuple(
        sorted((_SIGNAL_RANK[signal], delay, exp) for (signal, delay), exp in factors.items())
    )


def _sorted_factors(factors: Mapping[FactorKey, int]) -> dict[FactorKey, int]:
    return {
        key: factors[key]
        for key in sorted(factors, key=lambda k: (_SIGNAL_RANK[k[0]], k[1]))
    }


@dataclass(frozen=True, eq=False)
class NarmaxModel:
    """Sum of monomials plus the implicit additive current-noise term.

    ``terms`` may be empty: the pure-noise model.  The canonical form
    (see :func:`canonicalize`) sorts terms by total degree then factor
    keys, merges duplicate factor maps and renumbers coefficients.
    """

    terms: tuple[Monomial, ...]
    mode: Mode = Mode.EXTENDED

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.mode is Mode.STRICT:
            for term in self.terms:
                if (SignalKind.NOISE, 0) in term.factors:
                    raise CausalityError(
                        "strict mode forbids the current noise sample in products"
                    )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NarmaxModel):
            return NotImplemented
        return self.terms == other.terms and self.mode is other.mode

    def __str__(self) -> str:
        return format_model_text(self)

    def term_count(self) -> int:
        return len(self.terms)

    def structure(self) -> tuple:
        """Factor maps only, in term order; coefficients are ignored."""
        return tuple(_factor_key(term.factors) for term in self.terms)


@dataclass(frozen=True)
class TermIndexSets:
    """Delay index sets of one term, per signal, with sorted enumerations."""

    input_delays: frozenset[int]
    noise_delays: frozenset[int]
    output_delays: frozenset[int]
    input_sequence: tuple[int, ...]
    noise_sequence: tuple[int, ...]
    output_sequence: tuple[int, ...]


def index_sets(term: Monomial) -> TermIndexSets:
    """Delays with nonzero exponent, split by signal."""
    by_signal: dict[SignalKind, set[int]] = {kind: set() for kind in SignalKind}
    for (signal, delay), _ in term.factors.items():
        by_signal[signal].add(delay)
    return TermIndexSets(
        input_delays=frozenset(by_signal[SignalKind.INPUT]),
        noise_delays=frozenset(by_signal[SignalKind.NOISE]),
        output_delays=frozenset(by_signal[SignalKind.OUTPUT]),
        input_sequence=tuple(sorted(by_signal[SignalKind.INPUT])),
        noise_sequence=tuple(sorted(by_signal[SignalKind.NOISE])),
        output_sequence=tuple(sorted(by_signal[SignalKind.OUTPUT])),
    )


def max_lags(model: NarmaxModel) -> tuple[int, int, int]:
    """Componentwise maximum delays ``(input, output, noise)``; 0 if absent."""
    lags = {kind: 0 for kind in SignalKind}
    for term in model.terms:
        for (signal, delay), _ in term.factors.items():
            lags[signal] = max(lags[signal], delay)
    return (lags[SignalKind.INPUT], lags[SignalKind.OUTPUT], lags[SignalKind.NOISE])


def canonicalize(model: NarmaxModel) -> NarmaxModel:
    """Sorted, merged, renumbered form; idempotent.

    Terms with identical factor maps are merged: numeric coefficient
    values are summed when every merged term has one, otherwise the
    merged slot stays symbolic.  Coefficient ids are renumbered 1..p in
    sorted order and factor maps are stored key-sorted.
    """
    merged: dict[tuple, tuple[dict, float | None, bool]] = {}
    for term in model.terms:
        key = _factor_key(term.factors)
        if key in merged:
            factors, value, numeric = merged[key]
            if numeric and term.coeff_value is not None:
                merged[key] = (factors, value + term.coeff_value, True)
            else:
                merged[key] = (factors, None, False)
        else:
            merged[key] = (
                dict(term.factors),
                term.coeff_value,
                term.coeff_value is not None,
            )
    ordered = sorted(merged.items(), key=lambda item: (sum(item[1][0].values()), item[0]))
    terms = tuple(
        Monomial(i + 1, _sorted_factors(factors), value if numeric else None)
        for i, (_, (factors, value, numeric)) in enumerate(ordered)
    )
    return NarmaxModel(terms, model.mode)


def simulate(
    model: NarmaxModel,
    coefficients: Sequence[float] | None,
    inputs: Sequence[float],
    noise: Sequence[float],
) -> list[float]:
    """Run the model recursion over equal-length input and noise records.

    Out-of-range (pre-record) samples read as zero.  When
    ``coefficients`` is None each term's attached value is used.
    """
    if len(inputs) != len(noise):
        raise ModelError(
            f"input and noise records differ in length ({len(inputs)} vs {len(noise)})"
        )
    if coefficients is None:
        values = [term.coeff_value for term in model.terms]
        if any(v is None for v in values):
            raise ModelError("model has coefficient slots without numeric values")
        coeffs = [float(v) for v in values]  # type: ignore[arg-type]
    else:
        coeffs = [float(c) for c in coefficients]
        if len(coeffs) != len(model.terms):
            raise ModelError(
                f"expected {len(model.terms)} coefficients, got {len(coeffs)}"
            )
    out: list[float] = []
    for k in range(len(inputs)):
        value = float(noise[k])
        for coeff, term in zip(coeffs, model.terms):
            product = coeff
            for (signal, delay), exponent in term.factors.items():
                idx = k - delay
                if idx < 0:
                    sample = 0.0
                elif signal is SignalKind.INPUT:
                    sample = float(inputs[idx])
                elif signal is SignalKind.OUTPUT:
                    sample = out[idx]
                else:
                    sample = float(noise[idx])
                product *= sample**exponent
            value += product
        out.append(value)
    return out


def classify(model: NarmaxModel) -> frozenset[str]:
    """Structural class tags; every model carries ``NARMAX``.

    Constant (degree-0) terms count as degree-1 for the linear classes.
    """
    signals: frozenset[SignalKind] = frozenset()
    for term in model.terms:
        signals |= term.signals()
    linear = all(term.total_degree() <= 1 for term in model.terms)
    input_only = signals <= {SignalKind.INPUT}
    noise_free = SignalKind.NOISE not in signals
    tags = {"NARMAX"}
    if noise_free:
        tags.add("NARX")
    if linear:
        tags.add("ARMAX")
    if linear and noise_free:
        tags.add("ARX")
    if input_only:
        tags.add("Volterra")
    if input_only and linear:
        tags.add("FIR")
    return frozenset(tags)


CLASS_TAG_ORDER = ("FIR", "Volterra", "ARX", "ARMAX", "NARX", "NARMAX")


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_SIGNAL_TOKEN = {"u": SignalKind.INPUT, "y": SignalKind.OUTPUT, "xi": SignalKind.NOISE}


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str) -> None:
        if not self.take(literal):
            raise ModelSyntaxError(f"expected {literal!r}", self.pos)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ModelSyntaxError("expected an integer", start)
        return int(self.text[start : self.pos])

    def real(self) -> float:
        self.skip_ws()
        match = re.match(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?", self.text[self.pos :])
        if not match:
            raise ModelSyntaxError("expected a number", self.pos)
        self.pos += match.end()
        return float(match.group())


def _parse_factor(scanner: _Scanner, factors: dict[FactorKey, int]) -> None:
    scanner.skip_ws()
    start = scanner.pos
    for token, signal in (("xi", SignalKind.NOISE), ("u", SignalKind.INPUT), ("y", SignalKind.OUTPUT)):
        if scanner.take(token):
            break
    else:
        raise ModelSyntaxError("expected a signal (u, y or xi)", start)
    scanner.expect("[")
    negative = scanner.take("-")
    offset = scanner.integer()
    scanner.expect("]")
    delay = offset if negative else -offset
    if delay < 0:
        raise CausalityError(
            f"{signal.value}[{-delay}] references the future (position {start})"
        )
    if signal is SignalKind.OUTPUT and delay == 0:
        raise CausalityError(f"y[0] violates causality (position {start})")
    exponent = 1
    if scanner.take("^"):
        exponent = scanner.integer()
        if exponent < 1:
            raise ModelSyntaxError("exponents must be >= 1", scanner.pos)
    key = (signal, delay)
    factors[key] = factors.get(key, 0) + exponent


def parse_model_text(text: str, mode: Mode = Mode.EXTENDED) -> NarmaxModel:
    """Parse model text and return its canonical form.

    Grammar: ``model := term ('+' term)* '+' 'xi' | 'xi'`` with
    ``term := cN(:VALUE)? ('*' factor)*`` and
    ``factor := (u|y|xi)[OFFSET](^EXP)?`` where offsets are 0 or
    negative (``u[0]`` is the current input, ``y[-1]`` the previous
    output).
    """
    scanner = _Scanner(text)
    terms: list[Monomial] = []
    while True:
        scanner.skip_ws()
        if scanner.text.startswith("xi", scanner.pos):
            after = scanner.pos + 2
            rest = scanner.text[after:].lstrip()
            if not rest.startswith("["):
                scanner.pos = after
                if not scanner.at_end():
                    raise ModelSyntaxError(
                        "the trailing noise term must end the model", scanner.pos
                    )
                break
        start = scanner.pos
        scanner.expect("c")
        coeff_id = scanner.integer()
        value = None
        if scanner.take(":"):
            value = scanner.real()
        factors: dict[FactorKey, int] = {}
        while scanner.take("*"):
            _parse_factor(scanner, factors)
        try:
            terms.append(Monomial(coeff_id, factors, value))
        except ModelError as exc:
            raise ModelSyntaxError(str(exc), start) from exc
        scanner.expect("+")
    return canonicalize(NarmaxModel(tuple(terms), mode))


def _format_value(value: float) -> str:
    return repr(value)


def format_model_text(model: NarmaxModel) -> str:
    """Canonical single-space rendering; inverse of :func:`parse_model_text`."""
    parts = []
    for term in model.terms:
        text = f"c{term.coeff_id}"
        if term.coeff_value is not None:
            text += f":{_format_value(term.coeff_value)}"
        for (signal, delay), exponent in sorted(
            term.factors.items(), key=lambda item: (_SIGNAL_RANK[item[0][0]], item[0][1])
        ):
            text += f"*{signal.value}[{-delay if delay else 0}]"
            if exponent > 1:
                text += f"^{exponent}"
        parts.append(text)
    parts.append("xi")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Two-equation extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NbjModel:
    """Process/noise equation pair for the nonlinear Box-Jenkins structure.

    ``process_terms`` is the noise-free process polynomial: its
    output-role factors denote the model's own simulated output and its
    monomials range over inputs and delayed simulated outputs only.
    ``noise_terms`` is the noise polynomial, whose output-role factors
    denote the autoregressive disturbance; the implicit additive current
    noise sample belongs to the noise equation.  ``mode`` constrains the
    noise side only.
    """

    process_terms: tuple[Monomial, ...]
    noise_terms: tuple[Monomial, ...]
    mode: Mode = Mode.EXTENDED

    def __post_init__(self) -> None:
        object.__setattr__(self, "process_terms", tuple(self.process_terms))
        object.__setattr__(self, "noise_terms", tuple(self.noise_terms))
        for term in self.process_terms:
            if SignalKind.NOISE in term.signals():
                raise ModelError("the process equation cannot contain noise factors")
        if self.mode is Mode.STRICT:
            for term in self.noise_terms:
                if (SignalKind.NOISE, 0) in term.factors:
                    raise CausalityError(
                        "strict mode forbids the current noise sample in products"
                    )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NbjModel):
            return NotImplemented
        return (
            self.process_terms == other.process_terms
            and self.noise_terms == other.noise_terms
            and self.mode is other.mode
        )
