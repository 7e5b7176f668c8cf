#!/usr/bin/env python3
"""
CLL Workbench CLI

Front end for the finite logic-process calculus: parsing, LTS export,
consistency and refinement queries, normalization with proofs, proof
checking and the law fuzzer.

Terms are given inline, as `@file`, or as `-` for standard input.
Exit status: 0 positive verdict, 1 negative verdict, 2 usage or input
error, 3 state bound or nesting limit exceeded.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError
from typing_extensions import Annotated

from axioms.checker import check_proof
from axioms.proofs import Proof, equation_to_json, proof_size, proof_to_json, proofs_from_json
from calculus.syntax import format_term, parse, term_to_json
from calculus.terms import Term
from core import console
from core.config import ConfigManager, RunConfig
from core.errors import ConfigError, ProofFormatError, StateLimitExceeded, TermSyntaxError
from normalizer.normal_form import normal_form_size
from normalizer.normalize import normalize as normalize_term
from prover.completeness import prove_equal, prove_leq
from refinement.simulation import check_refinement, rs_equiv, witness_to_json
from semantics.lts import build_lts, lts_to_dot, lts_to_json
from services.fuzz_service import FuzzService
from services.laws import GROUPS, LAWS, LAWS_BY_NAME

cli = typer.Typer(name="cll", help="Workbench for the finite logic-process calculus", add_completion=False)

EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

TermArg = Annotated[str, typer.Argument(help="Term text, @file, or - for stdin.")]
FormatOpt = Annotated[Optional[str], typer.Option("--format", "-f", help="text, json or dot.")]


class Session:
    """Settings shared by the subcommands of one invocation."""
    def __init__(self, manager: ConfigManager, run: RunConfig):
        self.manager = manager
        self.run = run

    def with_overrides(self, **overrides) -> RunConfig:
        try:
            return RunConfig.from_manager(self.manager, **{**self.run.model_dump(), **overrides})
        except ValidationError as e:
            console.error("CLI", _first_error(e))
            raise typer.Exit(EXIT_USAGE)


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    return f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"


@contextmanager
def reporting(tag: str):
    """Maps workbench errors to messages and exit statuses."""
    try:
        yield
    except (TermSyntaxError, ProofFormatError) as e:
        console.error(tag, str(e))
        raise typer.Exit(EXIT_USAGE)
    except StateLimitExceeded as e:
        console.error(tag, str(e))
        raise typer.Exit(EXIT_LIMIT)
    except RecursionError:
        console.error(tag, "term or proof nested too deeply for this operation")
        raise typer.Exit(EXIT_LIMIT)


def read_input(arg: str) -> str:
    if arg == "-":
        return typer.get_text_stream("stdin").read()
    if arg.startswith("@"):
        path = Path(arg[1:])
        try:
            return path.read_text()
        except OSError as e:
            console.error("CLI", f"cannot read {path}: {e.strerror}")
            raise typer.Exit(EXIT_USAGE)
    return arg


def read_term(arg: str) -> Term:
    return parse(read_input(arg))


def _session(ctx: typer.Context) -> Session:
    return ctx.obj


def _verdict(ok: bool, yes: str, no: str):
    typer.echo(yes if ok else no)
    if not ok:
        raise typer.Exit(EXIT_NEGATIVE)


def _stats(pf: Proof, label: str):
    dag, tree = proof_size(pf)
    console.info("PROVER", f"{label}: {dag} distinct node(s), {tree} node(s) as a tree", fg=typer.colors.CYAN)


# --- Commands ---

@cli.callback()
def main(ctx: typer.Context,
         verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Trace progress on stderr.")] = False,
         state_bound: Annotated[Optional[int], typer.Option(help="Maximum number of LTS states.")] = None,
         config: Annotated[Optional[Path], typer.Option(help="Configuration file.")] = None):
    """Workbench for the finite logic-process calculus."""
    try:
        manager = ConfigManager(config) if config is not None else ConfigManager.from_environment()
        run = RunConfig.from_manager(manager, state_bound=state_bound, verbose=verbose or None)
    except ConfigError as e:
        console.error("CLI", str(e))
        raise typer.Exit(EXIT_USAGE)
    except ValidationError as e:
        console.error("CLI", _first_error(e))
        raise typer.Exit(EXIT_USAGE)
    console.set_verbose(run.verbose)
    ctx.obj = Session(manager, run)


@cli.command("parse")
def parse_cmd(ctx: typer.Context, term: TermArg, output: FormatOpt = None):
    """Echoes the canonical text (or JSON encoding) of a term."""
    run = _session(ctx).with_overrides(output_format=output)
    with reporting("PARSE"):
        t = read_term(term)
        typer.echo(term_to_json(t) if run.output_format == "json" else format_term(t))


@cli.command()
def lts(ctx: typer.Context, term: TermArg, output: FormatOpt = None):
    """Exports the LTS of a term."""
    run = _session(ctx).with_overrides(output_format=output)
    with reporting("LTS"):
        l = build_lts(read_term(term), run.state_bound)
        if run.output_format == "json":
            typer.echo(lts_to_json(l))
        elif run.output_format == "dot":
            typer.echo(lts_to_dot(l), nl=False)
        else:
            ids = {p: i for i, p in enumerate(l.order)}
            for p in l.order:
                marks = [m for m, on in (("stable", l.is_stable(p)), ("inconsistent", p in l.inconsistent)) if on]
                typer.echo(f"s{ids[p]} {p}" + (f" [{', '.join(marks)}]" if marks else ""))
            for p in l.order:
                for a, q in l.successors[p]:
                    typer.echo(f"s{ids[p]} -{a}-> s{ids[q]}")


@cli.command()
def consistent(ctx: typer.Context, term: TermArg):
    """Exit 0 when the term is consistent, 1 when it is inconsistent."""
    run = _session(ctx).run
    with reporting("LTS"):
        t = read_term(term)
        ok = t not in build_lts(t, run.state_bound).inconsistent
    _verdict(ok, "consistent", "inconsistent")


@cli.command()
def refines(ctx: typer.Context, left: TermArg, right: TermArg,
            witness: Annotated[bool, typer.Option("--witness", "-w", help="Print the refusal witness as JSON.")] = False):
    """Decides whether LEFT refines RIGHT."""
    run = _session(ctx).run
    with reporting("SIM"):
        result = check_refinement(read_term(left), read_term(right), run.state_bound)
    if result.holds:
        typer.echo("refined")
        return
    typer.echo("not refined")
    if witness:
        typer.echo(witness_to_json(result.witness))
    else:
        console.info("SIM", result.witness.describe(), fg=typer.colors.YELLOW)
    raise typer.Exit(EXIT_NEGATIVE)


@cli.command()
def equiv(ctx: typer.Context, left: TermArg, right: TermArg):
    """Decides ready-simulation equivalence."""
    run = _session(ctx).run
    with reporting("SIM"):
        ok = rs_equiv(read_term(left), read_term(right), run.state_bound)
    _verdict(ok, "equivalent", "not equivalent")


@cli.command()
def normalize(ctx: typer.Context, term: TermArg,
              proof: Annotated[bool, typer.Option("--proof", help="Print both halves of the equality proof as JSON.")] = False,
              stats: Annotated[bool, typer.Option("--stats", help="Report sizes on stderr.")] = False):
    """Prints the canonical normal form of a term."""
    with reporting("NF"):
        t = read_term(term)
        nf, eq = normalize_term(t)
        if proof:
            typer.echo(equation_to_json(eq.fwd, eq.bwd))
        else:
            typer.echo(format_term(nf.term))
        if stats:
            console.info("NF", f"normal form size: {normal_form_size(nf)} prefix(es)", fg=typer.colors.CYAN)
            _stats(eq.fwd, "forward proof")
            _stats(eq.bwd, "backward proof")


@cli.command()
def prove(ctx: typer.Context, left: TermArg, right: TermArg,
          equal: Annotated[bool, typer.Option("--equal", help="Derive the equality instead.")] = False,
          stats: Annotated[bool, typer.Option("--stats", help="Report proof sizes on stderr.")] = False):
    """Derives LEFT <= RIGHT, or prints the refusal witness."""
    run = _session(ctx).run
    with reporting("PROVER"):
        t1, t2 = read_term(left), read_term(right)
        verdict = (prove_equal if equal else prove_leq)(t1, t2, run.state_bound)
        if not verdict:
            typer.echo(witness_to_json(verdict.witness))
            raise typer.Exit(EXIT_NEGATIVE)
        if equal:
            typer.echo(equation_to_json(verdict.proof, verdict.converse))
        else:
            typer.echo(proof_to_json(verdict.proof))
        if stats:
            _stats(verdict.proof, "proof")
            if verdict.converse is not None:
                _stats(verdict.converse, "converse proof")


@cli.command("check-proof")
def check_proof_cmd(ctx: typer.Context,
                    source: Annotated[str, typer.Argument(help="Proof JSON file, @file, or - for stdin.")]):
    """Validates a proof document and reports its claim."""
    text = read_input(source if source == "-" or source.startswith("@") else "@" + source)
    with reporting("PROVER"):
        proofs = proofs_from_json(text)
        accepted = True
        for pf in proofs:
            verdict = check_proof(pf)
            if verdict.accepted:
                typer.echo(f"accepted: {format_term(verdict.lhs)} <= {format_term(verdict.rhs)}")
            else:
                accepted = False
                typer.echo(f"rejected at {list(verdict.path)}: {verdict.reason}")
    if not accepted:
        raise typer.Exit(EXIT_NEGATIVE)


@cli.command()
def fuzz(ctx: typer.Context,
         count: Annotated[Optional[int], typer.Option(help="Cases per law.")] = None,
         size: Annotated[Optional[int], typer.Option(help="Maximum term size.")] = None,
         seed: Annotated[Optional[int], typer.Option(help="Base seed.")] = None,
         alphabet: Annotated[Optional[List[str]], typer.Option(help="Action names; repeatable.")] = None,
         suite: Annotated[str, typer.Option(help="Law group or single law name.")] = "all",
         workers: Annotated[Optional[int], typer.Option(help="Worker processes.")] = None,
         output: FormatOpt = None):
    """Checks the law catalogue on random terms."""
    run = _session(ctx).with_overrides(fuzz_count=count, fuzz_size=size, fuzz_seed=seed,
                                       alphabet=alphabet, fuzz_workers=workers, output_format=output)
    if suite not in GROUPS and suite not in LAWS_BY_NAME:
        console.error("FUZZ", f"unknown suite {suite!r}")
        raise typer.Exit(EXIT_USAGE)
    report = FuzzService(run).run_sweep(suite)
    if run.output_format == "json":
        typer.echo(report.model_dump_json(indent=2))
    else:
        for law in report.laws:
            typer.echo(f"{law.law}: {law.cases} case(s), {law.skipped} skipped, {len(law.violations)} violation(s)")
            for v in law.violations:
                typer.echo(f"  #{v.index}: {v.message}")
                typer.echo(f"    case:   {v.case}")
                typer.echo(f"    shrunk: {v.shrunk}")
    if report.violation_count:
        raise typer.Exit(EXIT_NEGATIVE)


@cli.command()
def laws():
    """Lists the law catalogue and its groups."""
    for law in LAWS:
        line = f"{law.name:<20} {','.join(law.groups)}"
        typer.echo(f"{line}  {law.doc}".rstrip())


if __name__ == "__main__":
    cli()
