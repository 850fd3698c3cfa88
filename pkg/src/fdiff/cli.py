"""Command line driver: eval, table, delta, chain, verify, newton.

Settings resolve as command-line flag, then FDIFF_<NAME> environment variable,
then fdiff.toml in the working directory, then the built-in default.
Exit status: 0 all checks pass, 1 a verification failed, 2 usage or parse error.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from pathlib import Path

import click

from . import chain as chain_mod
from . import classes, delta as delta_mod, diagram, newton
from .dsl import ParseError, parse, to_functor, to_spec, to_str
from .finset import card, show, to_json
from .functor import NotTautError, check_taut
from .report import DEFAULT_SEED, Report

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULTS = {"k": 3, "seed": DEFAULT_SEED, "maxk": 5, "n": 3, "format": "text", "timing": False}


def load_config(cwd: Path | None = None) -> dict:
    path = Path(cwd or ".") / "fdiff.toml"
    if not path.exists():
        return {}
    with path.open("rb") as fh:
        data = tomllib.load(fh)
    return {k.lower(): v for k, v in data.get("fdiff", data).items()}


def setting(name: str, flag):
    """flag > FDIFF_NAME > fdiff.toml > default."""
    if flag is not None:
        return flag
    env = os.environ.get(f"FDIFF_{name.upper()}")
    default = DEFAULTS[name]
    if env is not None:
        if isinstance(default, bool):
            return env.lower() in ("1", "true", "yes")
        return int(env, 0) if isinstance(default, int) else env
    cfg = load_config()
    if name in cfg:
        return cfg[name]
    return default


def _expr(src: str):
    try:
        return parse(src)
    except ParseError as err:
        click.echo(f"parse error: {err}", err=True)
        click.echo(f"  {src}\n  {' ' * len(src.encode()[:err.offset].decode(errors='ignore'))}^", err=True)
        sys.exit(2)


def _functor(src: str, K: int):
    e = _expr(src)
    try:
        return e, to_functor(e, K)
    except NotTautError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)
    except (OSError, ValueError, TypeError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)


def emit(command: str, params: dict, header: list[str], rows: list, report: Report | None, fmt: str,
         timing: bool = False, text_extra: str = "") -> None:
    if fmt == "json":
        out = {"command": command, "params": params, "rows": rows,
               "report": report.to_dict(timing) if report else None}
        click.echo(json.dumps(out, indent=2, sort_keys=True, default=str))
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        if report:
            w.writerow(["#status", report.status])
        click.echo(buf.getvalue(), nl=False)
    else:
        if header and rows:
            widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
            click.echo("  ".join(str(h).rjust(w) for h, w in zip(header, widths)))
            for r in rows:
                click.echo("  ".join(str(v).rjust(w) for v, w in zip(r, widths)))
        if text_extra:
            click.echo(text_extra)
        if report:
            click.echo(f"{report.name}: {report.status.upper()}")
            for k, v in report.details.items():
                click.echo(f"  {k}: {v}")
            for w in report.witnesses:
                click.echo(f"  witness: {w}")
            if timing:
                click.echo(f"  time: {report.timing:.3f}s")


def finish(report: Report | None) -> None:
    sys.exit(0 if report is None or report.passed else 1)


fmt_opt = click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]), default=None)
k_opt = click.option("-K", "--K", "k", type=int, default=None, help="test sets range over sizes 0..K")
seed_opt = click.option("--seed", type=int, default=None, help="seed for every sampled check")
timing_opt = click.option("--timing/--no-timing", default=None, help="include wall time in reports")


@click.group()
def main():
    """Finite-set calculus of taut functors."""


@main.command("eval")
@click.argument("expr")
@click.option("--sizes", default="0,1,2", help="comma-separated set sizes")
@click.option("--limit", default=50, help="list at most this many elements per size")
@fmt_opt
@k_opt
def cmd_eval(expr, sizes, limit, fmt, k):
    """List the elements of EXPR on sets of the given sizes."""
    K, fmt = setting("k", k), setting("format", fmt)
    e, F = _functor(expr, K)
    rows = []
    for n in (int(s) for s in sizes.split(",") if s.strip()):
        elems = F(card(n)).elems
        rows.append([n, len(elems), [show(x) for x in elems[:limit]] if fmt != "json" else
                     [to_json(x) for x in elems[:limit]]])
    if fmt == "text":
        for n, size, elems in rows:
            click.echo(f"|{to_str(e)}({n})| = {size}")
            for x in elems:
                click.echo(f"  {x}")
        return
    emit("eval", {"expr": to_str(e), "sizes": sizes, "limit": limit}, ["k", "size", "elements"], rows, None, fmt)


@main.command("table")
@click.argument("expr")
@click.option("--maxk", type=int, default=None)
@fmt_opt
@k_opt
def cmd_table(expr, maxk, fmt, k):
    """Print |EXPR(k)| for k = 0..maxk, with the closed-form difference when one is known."""
    K, maxk, fmt = setting("k", k), setting("maxk", maxk), setting("format", fmt)
    e, F = _functor(expr, K)
    rows = [[n, F.size(n)] for n in range(maxk + 1)]
    extra = ""
    spec = to_spec(e)
    if spec is not None:
        try:
            extra = f"delta: {delta_mod.symbolic_delta(spec).out}"
        except (TypeError, ValueError):
            extra = ""
    params = {"expr": to_str(e), "maxk": maxk}
    if extra:
        params["closed_form_delta"] = extra[len("delta: "):]
    emit("table", params, ["k", "size"], rows, None, fmt, text_extra=extra)


@main.command("delta")
@click.argument("expr")
@fmt_opt
@k_opt
@seed_opt
@timing_opt
def cmd_delta(expr, fmt, k, seed, timing):
    """Closed-form difference of EXPR, verified against the operational one."""
    K, fmt, seed, timing = setting("k", k), setting("format", fmt), setting("seed", seed), setting("timing", timing)
    e = _expr(expr)
    spec = to_spec(e)
    if spec is None:
        _, F = _functor(expr, K)
        try:
            D = delta_mod.delta(F, K)
        except NotTautError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)
        rep = delta_mod.counting_law(F, K + 1)
        rep.note = "no closed form for this expression; operational difference only"
        rows = [[n, D.size(n)] for n in range(K + 1)]
        emit("delta", {"expr": to_str(e), "K": K, "seed": seed}, ["k", "delta size"], rows, rep, fmt, timing)
        finish(rep)
    try:
        sd = delta_mod.symbolic_delta(spec)
        rep = delta_mod.verify_symbolic(spec, K, seed)
    except NotTautError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)
    rep.params["seed"] = seed
    t = sd.transf()
    rows = [[n, t.src.size(n), t.dst.size(n)] for n in range(K + 1)]
    emit("delta", {"expr": to_str(e), "K": K, "seed": seed, "closed_form": str(sd.out)},
         ["k", "operational", "closed form"], rows, rep, fmt, timing, text_extra=f"delta({spec}) = {sd.out}")
    finish(rep)


def _chain_report(F_src: str, G_src: str, K: int, seed: int) -> tuple[Report, list]:
    _, F = _functor(F_src, K)
    _, G = _functor(G_src, K)
    rep = chain_mod.gamma_report(F, G, K, seed)
    cmp = chain_mod.chain_rule_comparison(F, G)
    rep.merge(cmp)
    rep.details["source_poly"] = cmp.details["source_poly"]
    rep.details["target_poly"] = cmp.details["target_poly"]
    rep.details["surjective"] = cmp.details["surjective"]
    return rep, cmp.details["rows"]


@main.command("chain")
@click.option("--F", "F_src", required=True, help="inner functor")
@click.option("--G", "G_src", required=True, help="outer functor")
@fmt_opt
@k_opt
@seed_opt
@timing_opt
def cmd_chain(F_src, G_src, fmt, k, seed, timing):
    """Check the chain-rule comparison for G o F and print the count table."""
    K, fmt, seed, timing = setting("k", k), setting("format", fmt), setting("seed", seed), setting("timing", timing)
    rep, rows = _chain_report(F_src, G_src, K, seed)
    emit("chain", {"F": F_src, "G": G_src, "K": K, "seed": seed},
         ["k", "(dG o F) x dF", "d(G o F)"], rows, rep, fmt, timing)
    finish(rep)


SUITES = ["taut", "product-rule", "chain-rule", "confluence", "newton-roundtrip", "dirichlet", "monads"]


@main.command("verify")
@click.argument("suite", type=click.Choice(SUITES))
@click.option("--expr", default="X^2")
@click.option("--F", "F_src", default="X^2")
@click.option("--G", "G_src", default="X^2")
@click.option("-N", "n", type=int, default=None, help="truncation degree")
@fmt_opt
@k_opt
@seed_opt
@timing_opt
def cmd_verify(suite, expr, F_src, G_src, n, fmt, k, seed, timing):
    """Run a named verification suite."""
    K, fmt, seed, timing = setting("k", k), setting("format", fmt), setting("seed", seed), setting("timing", timing)
    N = setting("n", n)
    rows: list = []
    header: list = []
    params = {"suite": suite, "K": K, "seed": seed}
    if suite == "taut":
        e = _expr(expr)
        F = _functor(expr, K)[1]
        rep = check_taut(F, K, seed)
        params["expr"] = to_str(e)
    elif suite == "product-rule":
        F, G = _functor(F_src, K)[1], _functor(G_src, K)[1]
        rep = delta_mod.product_rule_check(F, G, K)
        params.update(F=F_src, G=G_src)
    elif suite == "chain-rule":
        rep, rows = _chain_report(F_src, G_src, K, seed)
        header = ["k", "(dG o F) x dF", "d(G o F)"]
        params.update(F=F_src, G=G_src)
    elif suite == "confluence":
        rep = Report("confluence", params={"seed": seed})
        header = ["shape", "confluent", "brute force", "commutes or counterexample"]
        for C in diagram.shape_library():
            r = diagram.check_colimit_commutes_with_inverse_images(C, seed=seed)
            brute = diagram.confluent_by_representables(C)
            rows.append([C.name, diagram.is_confluent(C), brute, r.status])
            rep.merge(r)
            if brute != diagram.is_confluent(C):
                rep.fail({"shape": C.name})
    elif suite == "newton-roundtrip":
        e, F = _functor(expr, K)
        rep = newton.newton_roundtrip(F, N, max(K, 4))
        params.update(expr=to_str(e), N=N)
        rows = [[i, s] for i, s in enumerate(rep.details["delta_star_sizes"])]
        header = ["n", "|delta^n F(0)|"]
    elif suite == "dirichlet":
        rep = Report("dirichlet")
        rep.merge(classes.rep_of_transf_roundtrip(4, K))
        for m in range(1, 5):
            r = delta_mod.chain_delta_check(m, K)
            rows.append([f"chain{m}", r.details["coefficients"], r.status])
            rep.merge(r)
        rep.merge(classes.euler_check({2, 3}, 12, K))
        header = ["lattice", "delta coefficients", "status"]
    else:
        rep = Report("monads")
        header = ["monad", "laws", "D-monad laws"]
        for M in (classes.powerset_monad(), classes.filter_monad()):
            laws = classes.check_monad_laws(M, K, seed)
            _, dlaws = chain_mod.d_monad(M, min(K, 2))
            rows.append([M.name, laws.status, dlaws.status])
            rep.merge(laws)
            rep.merge(dlaws)
    emit("verify", params, header, rows, rep, fmt, timing)
    finish(rep)


@main.command("newton")
@click.option("--sum", "sum_file", type=click.Path(exists=True, dir_okay=False), help="soft species JSON file")
@click.option("--delta-star", "ds_expr", help="expression whose difference tower to extract")
@click.option("--roundtrip", "rt_expr", help="expression to rebuild from its difference tower")
@click.option("-N", "n", type=int, default=None, help="truncation degree")
@click.option("--maxk", type=int, default=None)
@fmt_opt
@k_opt
@timing_opt
def cmd_newton(sum_file, ds_expr, rt_expr, n, maxk, fmt, k, timing):
    """Newton sums of soft species and the difference tower of a functor."""
    K, fmt, N, maxk = setting("k", k), setting("format", fmt), setting("n", n), setting("maxk", maxk)
    timing = setting("timing", timing)
    picked = [x for x in (sum_file, ds_expr, rt_expr) if x]
    if len(picked) != 1:
        raise click.UsageError("give exactly one of --sum, --delta-star, --roundtrip")
    if sum_file:
        try:
            G = newton.load_species(Path(sum_file).read_text())
        except (ValueError, KeyError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
        Gt = newton.NewtonSum(G)
        rep = check_taut(Gt, min(K, 3))
        rep.merge(newton.unit_iso_check(G))
        rows = [[i, Gt.size(i), newton.cardinality_formula(G, i)] for i in range(maxk + 1)]
        emit("newton", {"sum": sum_file, "N": G.N}, ["k", "size", "formula"], rows, rep, fmt, timing)
        finish(rep)
    if ds_expr:
        e, F = _functor(ds_expr, K)
        try:
            G = newton.delta_star(F, N, K)
        except NotTautError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)
        rep = newton.unit_iso_check(G)
        rows = [[i, len(G(i)), [show(a) for a in G(i)]] for i in range(N + 1)]
        emit("newton", {"delta_star": to_str(e), "N": N}, ["n", "size", "elements"], rows, rep, fmt, timing)
        finish(rep)
    e, F = _functor(rt_expr, K)
    rep = newton.newton_roundtrip(F, N, max(K, 4))
    rows = [[i, F.size(i)] for i in range(maxk + 1)]
    emit("newton", {"roundtrip": to_str(e), "N": N}, ["k", "size"], rows, rep, fmt, timing)
    finish(rep)


if __name__ == "__main__":
    main()
