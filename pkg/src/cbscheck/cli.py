"""Command-line front end.

Exit codes: 0 formula true, 1 formula false (critical tree emitted),
2 usage or input error, 3 state-count cap exceeded, 4 internal
inconsistency (engine/oracle disagreement, failed tree construction).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional

from .critical import TreeError, build_tree, compress
from .csm import DEFAULT_STATE_CAP, ModelError, StateLimitExceeded, build_rg, load_model
from .engine import EvalContext, EvalError, evaluate
from .formula import FormulaError, lexeme, parse_formula, reduction_atoms
from .oracle import OracleError, eval_oracle
from .reduction import project_sequence, reduce, segment_starts
from .views import (
    VIEWS, SeqDiagramError, render, render_compressed, render_seqdiagram,
    seqdiagram_from_xml,
)

EXIT_TRUE, EXIT_FALSE, EXIT_USAGE, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3, 4

ADVISORY = ("advisory: the reduced state space skips the steps that lead to the error; "
            "evaluate the formula again over the original state space to obtain a "
            "useful critical tree")


class Usage(Exception):
    pass


class Internal(Exception):
    pass


@dataclass
class RunConfig:
    model: Optional[str] = None
    formula: Optional[str] = None
    formula_file: Optional[str] = None
    view: str = "states"
    out: Optional[str] = None
    compress: bool = False
    reduced: bool = False
    force: bool = False
    node: Optional[int] = None
    xml: Optional[str] = None
    cap: int = DEFAULT_STATE_CAP
    oracle: bool = False

    def formula_text(self) -> str:
        if (self.formula is None) == (self.formula_file is None):
            raise Usage("give exactly one of --formula and --formula-file")
        if self.formula is not None:
            return self.formula
        return _read(self.formula_file).strip()


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise Usage(f"{path}: {exc.strerror}") from exc


def _emit(doc: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)


def _load(cfg: RunConfig):
    if cfg.model is None:
        raise Usage("--model is required")
    try:
        net = load_model(cfg.model)
    except OSError as exc:
        raise Usage(f"{cfg.model}: {exc.strerror}") from exc
    except ModelError as exc:
        raise Usage(f"{cfg.model}: {exc}") from exc
    text = cfg.formula_text()
    try:
        f = parse_formula(text, net)
    except FormulaError as exc:
        raise Usage(f"formula: {exc}") from exc
    return net, f, build_rg(net, cap=cfg.cap)


def _verdict(rg, f, cfg: RunConfig) -> tuple[bool, EvalContext]:
    ctx = EvalContext(rg)
    try:
        v = evaluate(ctx, f, rg.initial)
    except EvalError as exc:
        raise Usage(f"formula: {exc}") from exc
    for note in ctx.notes:
        print(f"note: {note}", file=sys.stderr)
    if cfg.oracle:
        try:
            w = eval_oracle(rg, f, rg.initial)
        except OracleError as exc:
            raise Usage(f"formula: {exc}") from exc
        if v != w:
            raise Internal(f"engine says {v}, fixed-point oracle says {w}")
    return v, ctx


def _tree(rg, f):
    try:
        return build_tree(rg, f, rg.initial)
    except TreeError as exc:
        raise Internal(str(exc)) from exc


def cmd_check(cfg: RunConfig) -> int:
    if cfg.view not in VIEWS:
        raise Usage(f"unknown view {cfg.view!r}")
    if cfg.compress and cfg.view != "states":
        raise Usage("--compress is available for the states view only")
    if cfg.force and not cfg.reduced:
        raise Usage("--force only makes sense with --reduced")
    net, f, rg = _load(cfg)
    if cfg.reduced:
        red = reduce(rg, reduction_atoms(f))
        print(f"reduced state space: {len(red.quotient)} of {len(rg)} states", file=sys.stderr)
        rg = red.quotient
    v, _ = _verdict(rg, f, cfg)
    print("TRUE" if v else "FALSE")
    if v:
        return EXIT_TRUE
    if cfg.reduced and not cfg.force:
        print("critical tree not built over a reduced state space (use --force to override)")
        print(ADVISORY)
        return EXIT_FALSE
    t = _tree(rg, f)
    doc = render_compressed(compress(t), net) if cfg.compress else render(cfg.view, t, net)
    _emit(doc, cfg)
    return EXIT_FALSE


def cmd_seqdiag(cfg: RunConfig) -> int:
    if cfg.node is None:
        raise Usage("--node is required")
    try:
        if cfg.xml is not None:
            if cfg.model or cfg.formula or cfg.formula_file:
                raise Usage("--xml replaces --model/--formula")
            _emit(seqdiagram_from_xml(_read(cfg.xml), cfg.node), cfg)
            return EXIT_FALSE
        net, f, rg = _load(cfg)
        v, _ = _verdict(rg, f, cfg)
        if v:
            print("TRUE")
            print("no critical tree: the formula holds", file=sys.stderr)
            return EXIT_TRUE
        _emit(render_seqdiagram(_tree(rg, f), net, cfg.node), cfg)
        return EXIT_FALSE
    except SeqDiagramError as exc:
        raise Usage(str(exc)) from exc


def cmd_reduce_report(cfg: RunConfig) -> int:
    net, f, rg = _load(cfg)
    v, _ = _verdict(rg, f, cfg)
    red = reduce(rg, reduction_atoms(f))
    try:
        rv = evaluate(EvalContext(red.quotient), f, red.quotient.initial)
    except EvalError as exc:
        raise Usage(f"formula over the reduced space: {exc}") from exc
    out = [
        "reduction atoms: " + ", ".join(lexeme(a) for a in red.atoms),
        f"original states: {len(rg)}, reduced states: {len(red.quotient)}",
        f"verdict over original: {'TRUE' if v else 'FALSE'}, "
        f"over reduced: {'TRUE' if rv else 'FALSE'}",
    ]
    for note in red.notes:
        out.append(f"note: {note}")
    if v:
        _emit("\n".join(out) + "\n", cfg)
        return EXIT_TRUE
    t = _tree(rg, f)
    for e in t.constructed():
        if len(e.states) < 2:
            continue
        proj = project_sequence(e.states, red)
        starts = segment_starts(e.states, red)
        out.append("")
        out.append(f"node {e.node_id} ({lexeme(f[e.node_id])}): original length {len(e.states)}, "
                   f"reduced length {len(proj)}")
        out.append("original:")
        out.append(render_seqdiagram(t, net, e.node_id).rstrip("\n"))
        out.append("reduced:")
        out.append(render_seqdiagram(t, net, e.node_id, states=[s for _, s in starts],
                                     numbers=[k for k, _ in starts]).rstrip("\n"))
    out.append("")
    out.append(ADVISORY)
    _emit("\n".join(out) + "\n", cfg)
    return EXIT_FALSE


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cbscheck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def formula_args(sp, required=True):
        sp.add_argument("--model", help="model file")
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--formula", help="formula text")
        g.add_argument("--formula-file", help="file holding the formula")
        sp.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP, help="state-count limit")
        sp.add_argument("--oracle", action="store_true",
                        help="cross-check the verdict with the fixed-point oracle")
        sp.add_argument("--out", help="write the document here instead of standard output")

    c = sub.add_parser("check", help="evaluate a formula; emit a critical tree when false")
    formula_args(c)
    c.add_argument("--view", default="states", choices=sorted(VIEWS))
    c.add_argument("--compress", action="store_true")
    c.add_argument("--reduced", action="store_true", help="evaluate over the reduced state space")
    c.add_argument("--force", action="store_true", help="build the tree even over a reduced space")

    s = sub.add_parser("seqdiag", help="signal listing for one sequence of the critical tree")
    formula_args(s, required=False)
    s.add_argument("--xml", help="replay a previously written XML view")
    s.add_argument("--node", type=int, required=True)

    r = sub.add_parser("reduce-report", help="compare sequences over original and reduced spaces")
    formula_args(r)
    return p


COMMANDS = {"check": cmd_check, "seqdiag": cmd_seqdiag, "reduce-report": cmd_reduce_report}


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k != "command"})
    try:
        return COMMANDS[args.command](cfg)
    except Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except Internal as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
