"""Command-line surface.

Every command is a pure function of its arguments (seeded noise
included): identical invocations print identical bytes.  Exit codes are
0 on success, 1 on a domain error (a diagnostic goes to stderr) and 2
on a usage error.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Sequence

from .generate import GenBounds, SampleConfig, enumerate_models, sample_model
from .models import (
    CLASS_TAG_ORDER,
    Mode,
    ModelError,
    classify,
    format_model_text,
    parse_model_text,
    simulate,
)
from .narmax import (
    GrammarPreset,
    UnrepresentableModelError,
    YieldError,
    build_nbj_grammar,
    derived_to_model,
    model_to_derivation,
    restrict,
    roundtrip_check,
)
from .treeio import (
    TextFormatError,
    format_derivation,
    format_grammar,
    format_tree,
    parse_derivation,
    parse_grammar,
    parse_tree,
)
from .trees import TagError, derive, validate_grammar, yield_of

_DOMAIN_ERRORS = (TagError, ModelError, YieldError, UnrepresentableModelError, TextFormatError, OSError)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _read_numbers(path: str) -> list[float]:
    return [float(tok) for tok in _read(path).split()]


def _preset(name: str) -> GrammarPreset:
    return GrammarPreset(name)


def _mode(name: str) -> Mode:
    return Mode(name)


def _grammar_for(args: argparse.Namespace):
    if getattr(args, "grammar", None):
        return parse_grammar(_read(args.grammar))
    return restrict(_preset(getattr(args, "preset", "narmax")))


def _cmd_grammar_show(args: argparse.Namespace) -> int:
    if args.preset == "nbj":
        print(format_grammar(build_nbj_grammar().grammar), end="")
    else:
        print(format_grammar(restrict(_preset(args.preset))), end="")
    return 0


def _cmd_parse(args: argparse.Namespace) -> int:
    model = parse_model_text(args.model, mode=_mode(args.mode))
    print(format_derivation(model_to_derivation(model)))
    return 0


def _cmd_derive(args: argparse.Namespace) -> int:
    grammar = _grammar_for(args)
    derivation = parse_derivation(_read(args.derivation_file))
    print(format_tree(derive(derivation, grammar)))
    return 0


def _cmd_yield(args: argparse.Namespace) -> int:
    tree = parse_tree(_read(args.tree_file))
    print(" ".join(yield_of(tree)))
    return 0


def _cmd_to_model(args: argparse.Namespace) -> int:
    tree = parse_tree(_read(args.tree_file))
    print(format_model_text(derived_to_model(tree, mode=_mode(args.mode))))
    return 0


def _cmd_roundtrip(args: argparse.Namespace) -> int:
    model = parse_model_text(args.model, mode=_mode(args.mode))
    if not roundtrip_check(model):
        print("MISMATCH", file=sys.stderr)
        return 1
    print("OK")
    print(format_derivation(model_to_derivation(model)))
    return 0


def _cmd_classify(args: argparse.Namespace) -> int:
    def tags_of(text: str) -> str:
        model = parse_model_text(text, mode=_mode(args.mode))
        tags = classify(model)
        return " ".join(tag for tag in CLASS_TAG_ORDER if tag in tags)

    if args.all:
        for line in sys.stdin:
            line = line.strip()
            if line:
                print(f"{line}\t{tags_of(line)}")
    elif args.model is not None:
        print(tags_of(args.model))
    else:
        print("classify: provide a model or --all for stdin batches", file=sys.stderr)
        return 2
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    model = parse_model_text(args.model, mode=_mode(args.mode))
    coeffs = None
    if args.coeffs is not None:
        coeffs = [float(tok) for tok in args.coeffs.split(",") if tok.strip()]
    inputs = _read_numbers(args.u) if args.u else None
    if args.xi:
        noise = _read_numbers(args.xi)
        length = len(noise)
    else:
        length = args.n if args.n else (len(inputs) if inputs is not None else None)
        if length is None:
            print(
                "simulate: need --xi, --n or --u to fix the record length",
                file=sys.stderr,
            )
            return 2
        rng = random.Random(args.noise_seed)
        noise = [rng.gauss(0.0, args.noise_std) for _ in range(length)]
        print(
            f"noise-seed={args.noise_seed} noise-std={args.noise_std!r}",
            file=sys.stderr,
        )
    if inputs is None:
        inputs = [0.0] * length
    for value in simulate(model, coeffs, inputs, noise):
        print(repr(value))
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    grammar = restrict(_preset(args.preset))
    bounds = GenBounds(max_adjunctions=args.max)
    for derivation, model in enumerate_models(grammar, bounds):
        if args.derivations:
            print(format_derivation(derivation))
        else:
            print(format_model_text(model))
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    bounds = GenBounds(
        max_adjunctions=args.max_adjunctions,
        max_terms=args.max_terms,
        max_delay=args.max_delay,
        max_exponent=args.max_exponent,
        mode=_mode(args.mode),
    )
    for i in range(args.count):
        config = SampleConfig(bounds=bounds, seed=args.seed + i)
        print(format_model_text(sample_model(config, _preset(args.preset))))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    grammar = parse_grammar(_read(args.grammar_file))
    diagnostics = validate_grammar(grammar)
    if not diagnostics:
        print("OK")
        return 0
    for diagnostic in diagnostics:
        print(diagnostic)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="narmaxtag",
        description="Tree-adjoining-grammar toolkit for polynomial dynamic "
        "model structures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    presets = [p.value for p in GrammarPreset]

    def add_mode(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--mode",
            choices=[m.value for m in Mode],
            default=Mode.EXTENDED.value,
            help="noise-delay discipline inside products",
        )

    p = sub.add_parser("grammar-show", help="print a grammar in file format")
    p.add_argument("--preset", choices=presets + ["nbj"], default="narmax")
    p.set_defaults(func=_cmd_grammar_show)

    p = sub.add_parser("parse", help="model text -> derivation")
    p.add_argument("model")
    add_mode(p)
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("derive", help="derivation file -> derived tree")
    p.add_argument("derivation_file")
    p.add_argument("--grammar", help="grammar file (default: the full model grammar)")
    p.add_argument("--preset", choices=presets, default="narmax")
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("yield", help="tree file -> leaf tokens")
    p.add_argument("tree_file")
    p.set_defaults(func=_cmd_yield)

    p = sub.add_parser("to-model", help="derived-tree file -> model text")
    p.add_argument("tree_file")
    add_mode(p)
    p.set_defaults(func=_cmd_to_model)

    p = sub.add_parser("roundtrip", help="check model -> derivation -> model")
    p.add_argument("model")
    add_mode(p)
    p.set_defaults(func=_cmd_roundtrip)

    p = sub.add_parser("classify", help="structural class tags of a model")
    p.add_argument("model", nargs="?")
    p.add_argument("--all", action="store_true", help="classify stdin lines")
    add_mode(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="run a model over input/noise records")
    p.add_argument("model")
    p.add_argument("--coeffs", help="comma-separated coefficient values")
    p.add_argument("--u", help="input record file (default: zeros)")
    p.add_argument("--xi", help="noise record file")
    p.add_argument("--n", type=int, help="record length for generated noise")
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--noise-std", type=float, default=1.0)
    add_mode(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("enumerate", help="all models up to an adjunction budget")
    p.add_argument("--preset", choices=presets, default="narmax")
    p.add_argument("--max", type=int, required=True, help="adjunction budget")
    p.add_argument(
        "--derivations", action="store_true", help="print derivations instead"
    )
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("sample", help="seeded random models")
    p.add_argument("--preset", choices=presets, default="narmax")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--max-adjunctions", type=int, default=8)
    p.add_argument("--max-terms", type=int, default=3)
    p.add_argument("--max-delay", type=int, default=3)
    p.add_argument("--max-exponent", type=int, default=2)
    add_mode(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("validate", help="diagnose a grammar file")
    p.add_argument("grammar_file")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
