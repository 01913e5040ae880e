"""Batch command line front end.

One subcommand group per library module; commands compose through JSON
files, not flags.  Every output document embeds the package version, and
commands are deterministic given their inputs.  Exit codes: 0 on success or
a passing check, 1 when a mathematical check fails, 2 on usage or parse
errors, 3 when a resource cap is exceeded.  Errors are written to standard
error as single-line JSON objects.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import __version__
from . import _exact as xla
from .correlations import (
    Correlation,
    InvariantViolation,
    ScenarioMismatch,
    check_perfect,
    validate,
)
from .coxeter import CoxeterCapExceeded, CoxeterContext, RelatorViolation, normal_form
from .coxeter import DEFAULT_NODE_CAP
from .dihedral import (
    automorphism_unitary,
    build_cp,
    build_cp_prime,
    canonical_strategy,
    verify_fcp,
)
from .fnfamily import (
    ConstraintViolation,
    FnContext,
    TraceFunction,
    compute_Wn,
    correlation_from_f,
    enumerate_Fn,
    trace_constraints,
)
from .kms import command_relator, input_word, word_to_json
from .minsky import MinskyMachine, add_glass_extension, p_cycle_extension, run
from .numerics import (
    NotUnitary,
    OperatorFamily,
    SpectralGapFailure,
    UNITARITY_TOL,
    approx_defect,
    round_to_pvm,
)
from .presentations import (
    BinaryLinearSystem,
    Presentation,
    TooLarge,
    normalize_rows_to_three,
    solution_group,
)
from .words import Word


class CheckFailed(Exception):
    """A requested mathematical check did not pass."""


# -- plumbing ----------------------------------------------------------------


def _echo_error(code: str, message: str) -> None:
    click.echo(json.dumps({"error": code, "message": message}), err=True)


def _emit(doc: dict, out: str | None = None) -> None:
    doc = {"version": __version__, **doc}
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _load(path: str, key: str | None = None) -> dict:
    """Parse a JSON file, unwrapping an emitted document if needed."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise click.UsageError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise click.UsageError(f"{path} is not valid JSON: {e}") from e
    if key is not None and isinstance(data, dict) and key in data:
        return data[key]
    return data


def _load_machine(path: str) -> MinskyMachine:
    return MinskyMachine.from_json(_load(path, "machine"))


def _load_system(path: str) -> BinaryLinearSystem:
    return BinaryLinearSystem.from_json(_load(path, "system"))


def _load_correlation(path: str) -> Correlation:
    return Correlation.from_json(_load(path, "correlation"))


# Presentations travel as {"generators": n, "names": [...], "relators":
# [[[symbol, exponent], ...], ...]}; symbols are the generator indices.
def presentation_to_json(pres: Presentation) -> dict:
    return {
        "generators": pres.generators,
        "names": [pres.name_of(i) for i in range(pres.generators)],
        "relators": [[[s, e] for s, e in w.letters] for w in pres.relators],
    }


def presentation_from_json(data: dict) -> Presentation:
    relators = tuple(
        Word((sym, int(exp)) for sym, exp in rel) for rel in data["relators"]
    )
    return Presentation(int(data["generators"]), relators, tuple(data.get("names", ())))


def _float_correlation(c: Correlation) -> Correlation:
    table = {
        (a, b, x, y): xla.to_complex(v) for a, b, x, y, v in c.nonzero_items()
    }
    return Correlation(c.scenario, table, exact=False)


def _correlation_doc(c: Correlation, fmt: str) -> dict:
    if fmt == "float" and c.exact:
        c = _float_correlation(c)
    return {"correlation": c.to_json()}


_FORMAT = click.option(
    "--format", "fmt", type=click.Choice(["exact", "float"]), default="exact",
    help="Value encoding for emitted correlations.",
)
_OUT = click.option("--out", type=click.Path(), default=None,
                    help="Write the document here instead of stdout.")


# -- command tree ------------------------------------------------------------


@click.group()
@click.version_option(__version__)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker threads for commands that process several files.")
@click.pass_context
def cli(ctx, jobs):
    """Exact pipeline tools: machines, presentations, correlations."""
    if jobs < 1:
        raise click.UsageError("--jobs must be at least 1")
    ctx.obj = {"jobs": jobs}


# minsky ----------------------------------------------------------------------


@cli.group("minsky")
def minsky_group():
    """Counter machines: runs and acceptance-preserving extensions."""


@minsky_group.command("run")
@click.option("--machine", required=True, type=click.Path())
@click.option("--input", "value", required=True, type=int)
@click.option("--max-steps", type=int, default=100_000, show_default=True)
@_OUT
def minsky_run(machine, value, max_steps, out):
    """Run a machine on one input and report the outcome."""
    result = run(_load_machine(machine), value, max_steps)
    config = None
    if result.config is not None:
        config = {"state": result.config.state, "coins": list(result.config.coins)}
    _emit(
        {
            "status": result.status,
            "accepted": result.accepted,
            "steps": result.steps,
            "config": config,
        },
        out,
    )


@minsky_group.command("extend-glass")
@click.option("--machine", required=True, type=click.Path())
@_OUT
def minsky_extend_glass(machine, out):
    """Add the tracking glass; acceptance is unchanged."""
    _emit({"machine": add_glass_extension(_load_machine(machine)).to_json()}, out)


@minsky_group.command("extend-cycle")
@click.option("--machine", required=True, type=click.Path())
@click.option("--p", required=True, type=int)
@_OUT
def minsky_extend_cycle(machine, p, out):
    """Interleave the p-cycle; acceptance becomes length-divisibility aware."""
    _emit({"machine": p_cycle_extension(_load_machine(machine), p).to_json()}, out)


# kms -------------------------------------------------------------------------


@cli.group("kms")
def kms_group():
    """Word calculus for machine-derived presentations."""


@kms_group.command("relator")
@click.option("--machine", required=True, type=click.Path())
@click.option("--command", "index", required=True, type=int)
@_OUT
def kms_relator(machine, index, out):
    """The relator word of one machine command."""
    m = _load_machine(machine)
    if not 0 <= index < len(m.commands):
        raise click.UsageError(f"command index out of range 0..{len(m.commands) - 1}")
    _emit({"word": word_to_json(command_relator(m.commands[index], m.glasses))}, out)


@kms_group.command("input-word")
@click.option("--n", required=True, type=int)
@click.option("--machine", type=click.Path(), default=None)
@click.option("--glasses", type=int, default=None)
@_OUT
def kms_input_word(n, machine, glasses, out):
    """The word encoding input n (glass count from --machine or --glasses)."""
    if (machine is None) == (glasses is None):
        raise click.UsageError("give exactly one of --machine and --glasses")
    k = _load_machine(machine).glasses if machine else glasses
    _emit({"word": word_to_json(input_word(n, k))}, out)


# linsys ------------------------------------------------------------------------


@cli.group("linsys")
def linsys_group():
    """Binary linear systems and their solution groups."""


@linsys_group.command("normalize")
@click.option("--system", required=True, type=click.Path())
@_OUT
def linsys_normalize(system, out):
    """Rewrite every row to exactly three nonzero entries."""
    normalized, column_map = normalize_rows_to_three(_load_system(system))
    _emit(
        {
            "system": normalized.to_json(),
            "column_map": sorted([k, v] for k, v in column_map.items()),
        },
        out,
    )


@linsys_group.command("solution-group")
@click.option("--system", required=True, type=click.Path())
@_OUT
def linsys_solution_group(system, out):
    """The involution/row-product/commutation presentation of a system."""
    _emit({"presentation": presentation_to_json(solution_group(_load_system(system)))}, out)


# coxeter -----------------------------------------------------------------------


@cli.group("coxeter")
def coxeter_group():
    """Word problem for reflection groups with one braid pair."""


@coxeter_group.command("normal-form")
@click.option("--ctx", "ctx_path", required=True, type=click.Path())
@click.option("--word", "word_text", required=True,
              help="Space-separated generator indices, e.g. '0 1 0'.")
@click.option("--cap", type=int, default=DEFAULT_NODE_CAP, show_default=True,
              help="Rewriting search node cap.")
@_OUT
def coxeter_normal_form(ctx_path, word_text, cap, out):
    """Shortest-then-lexicographic normal form of a word."""
    ctx = CoxeterContext.from_json(_load(ctx_path, "context"))
    word = tuple(int(tok) for tok in word_text.split())
    _emit({"word": list(normal_form(ctx, word, node_cap=cap))}, out)


# dihedral ------------------------------------------------------------------------


@cli.group("dihedral")
def dihedral_group():
    """The constant-sized correlation pair and its certificate."""


@dihedral_group.command("build-cp")
@click.option("--p", required=True, type=int)
@click.option("--variant", type=click.Choice(["cp", "cp-prime"]), default="cp",
              show_default=True)
@_FORMAT
@_OUT
def dihedral_build_cp(p, variant, fmt, out):
    """The canonical correlation (or its primed variant) at an odd prime p."""
    c = build_cp(p) if variant == "cp" else build_cp_prime(p)
    _emit(_correlation_doc(c, fmt), out)


@dihedral_group.command("verify-fcp")
@click.option("--p", required=True, type=int)
@click.option("--r", required=True, type=int)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@_OUT
def dihedral_verify_fcp(p, r, tol, out):
    """Check the order-p certificate on the canonical strategy."""
    s = canonical_strategy(p)
    report = verify_fcp(
        s, automorphism_unitary(p, r, "A"), automorphism_unitary(p, r, "B"), r, tol=tol
    )
    _emit(
        {
            "p": report.p,
            "r": report.r,
            "tolerance": report.tolerance,
            "hypothesis_defects": list(report.hypothesis_defects),
            "conclusion_defect": report.conclusion_defect,
            "eigenvalue_defects": list(report.eigenvalue_defects),
            "passed": report.passed,
        },
        out,
    )
    if not report.passed:
        raise CheckFailed(f"certificate defects exceed {tol}")


# corr ----------------------------------------------------------------------------


@cli.group("corr")
def corr_group():
    """Checks on correlation tables."""


@corr_group.command("validate")
@click.argument("files", nargs=-1, type=click.Path())
@click.option("--tol", type=float, default=0.0, show_default=True)
@click.pass_context
def corr_validate(ctx, files, tol):
    """Nonnegativity and normalization of one or more correlation files."""
    if not files:
        raise click.UsageError("give at least one correlation file")

    def one(path):
        report = validate(_load_correlation(path))
        return {
            "file": path,
            "ok": report.ok(tol),
            "max_defect": report.max_defect,
            "negative_entries": len(report.negative_entries),
            "normalization_defects": len(report.normalization_defects),
        }

    jobs = ctx.obj["jobs"]
    if jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(one, files))
    else:
        reports = [one(path) for path in files]
    _emit({"reports": reports})
    bad = [r["file"] for r in reports if not r["ok"]]
    if bad:
        raise CheckFailed(f"not a valid correlation: {', '.join(bad)}")


@corr_group.command("check-perfect")
@click.option("--correlation", required=True, type=click.Path())
@click.option("--linsys", "system", required=True, type=click.Path())
@click.option("--tol", type=float, default=0.0, show_default=True)
@_OUT
def corr_check_perfect(correlation, system, tol, out):
    """The six zero conditions of a perfect correlation for a system."""
    report = check_perfect(_load_correlation(correlation), _load_system(system), tol)
    _emit(
        {
            "passed": report.passed,
            "violation_counts": [len(v) for v in report.violations],
            "violations": [
                [[list(a), list(b), _json_label(x), _json_label(y)] for a, b, x, y in v]
                for v in report.violations
            ],
        },
        out,
    )
    if not report.passed:
        raise CheckFailed("perfect-correlation conditions violated")


def _json_label(label):
    return list(label) if isinstance(label, tuple) else label


# fn ------------------------------------------------------------------------------


@cli.group("fn")
def fn_group():
    """The trace-indexed correlation family."""


@fn_group.command("wn")
@click.option("--ctx", "ctx_path", required=True, type=click.Path())
@_OUT
def fn_wn(ctx_path, out):
    """The support word set and its pinned/free partition."""
    ctx = FnContext.from_json(_load(ctx_path, "context"))
    cons = trace_constraints(ctx, compute_Wn(ctx))
    _emit(
        {
            "size": len(compute_Wn(ctx)),
            "forced_one": [list(w) for w in cons.forced_one],
            "forced_zero": [list(w) for w in cons.forced_zero],
            "free": [list(w) for w in cons.free],
        },
        out,
    )


@fn_group.command("eval")
@click.option("--ctx", "ctx_path", required=True, type=click.Path())
@click.option("--f", "f_path", required=True, type=click.Path())
@_FORMAT
@_OUT
def fn_eval(ctx_path, f_path, fmt, out):
    """The exact correlation induced by one trace function."""
    ctx = FnContext.from_json(_load(ctx_path, "context"))
    f = TraceFunction.from_json(_load(f_path, "f"))
    _emit(_correlation_doc(correlation_from_f(ctx, f), fmt), out)


@fn_group.command("enumerate")
@click.option("--ctx", "ctx_path", required=True, type=click.Path())
@click.option("--limit", required=True, type=int)
@click.option("--start", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for one JSON file per member.")
def fn_enumerate(ctx_path, limit, start, out_dir):
    """Stream family members in canonical candidate order."""
    ctx = FnContext.from_json(_load(ctx_path, "context"))
    free = trace_constraints(ctx, compute_Wn(ctx)).free
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    members = []
    files = []
    for seq, (f, c) in enumerate(enumerate_Fn(ctx, limit=limit, start=start)):
        index = sum(f(w) << k for k, w in enumerate(free))
        record = {"index": index, "f": f.to_json(), "correlation": c.to_json()}
        if out_dir:
            name = f"member_{seq:06d}.json"
            _emit(record, str(Path(out_dir) / name))
            files.append(name)
        else:
            members.append(record)
    summary: dict = {"found": len(files) if out_dir else len(members), "start": start}
    if out_dir:
        summary["files"] = files
    else:
        summary["members"] = members
    _emit(summary)


# num -----------------------------------------------------------------------------


@cli.group("num")
def num_group():
    """Floating-point defects and projective rounding."""


@num_group.command("defect")
@click.option("--presentation", required=True, type=click.Path())
@click.option("--assignment", required=True, type=click.Path())
@click.option("--tol", type=float, default=UNITARITY_TOL, show_default=True,
              help="Unitarity tolerance for the assigned matrices.")
@_OUT
def num_defect(presentation, assignment, tol, out):
    """Per-relator defects of a matrix assignment, in the normalized norm."""
    pres = presentation_from_json(_load(presentation, "presentation"))
    family = OperatorFamily.from_json(_load(assignment, "assignment"))
    report = approx_defect(pres, family, tol=tol)
    _emit(
        {
            "epsilon": report.epsilon,
            "defects": [
                {"relator": [[s, e] for s, e in w.letters], "defect": d}
                for w, d in report.items()
            ],
        },
        out,
    )


@num_group.command("round-pvm")
@click.option("--family", required=True, type=click.Path())
@click.option("--c", "bound", type=float, default=1.0, show_default=True,
              help="The constant in the distance bound the caller tracks.")
@_OUT
def num_round_pvm(family, bound, out):
    """Round near-projections to an exact projective measurement."""
    fam = OperatorFamily.from_json(_load(family, "family"))
    rounded, report = round_to_pvm(fam, c=bound)
    _emit(
        {
            "family": rounded.to_json(),
            "epsilon": report.epsilon,
            "distances": [
                {"label": _json_label(label), "distance": d}
                for label, d in report.items()
            ],
        },
        out,
    )


# -- dispatch ----------------------------------------------------------------


def dispatch(argv) -> int:
    """Run one command line and map exceptions onto the exit-code contract."""
    try:
        cli.main(args=list(argv), prog_name="corrgroups", standalone_mode=False)
        return 0
    except CheckFailed as e:
        _echo_error("check_failed", str(e))
        return 1
    except (
        ConstraintViolation,
        InvariantViolation,
        NotUnitary,
        RelatorViolation,
        ScenarioMismatch,
        SpectralGapFailure,
    ) as e:
        _echo_error("check_failed", str(e))
        return 1
    except (CoxeterCapExceeded, TooLarge) as e:
        _echo_error("resource_cap", str(e))
        return 3
    except click.exceptions.Exit as e:
        return int(e.exit_code)
    except click.Abort:
        return 2
    except click.ClickException as e:
        _echo_error("usage", e.format_message())
        return 2
    except (KeyError, IndexError, TypeError, ValueError, OSError) as e:
        _echo_error("usage", f"{type(e).__name__}: {e}")
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
