"""Command-line front end.

    hardytree norm f.json --p 2
    hardytree opnorm --map shift:0.1 --q 2 --p 1 --depth 6
    hardytree diagnose --map halving --q 3 --depth 12
    hardytree verify --suite q1-bound --suite table --seed 3

Exit codes: 0 success, 1 a verification check failed, 2 usage or I/O error.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click

from .errors import HardyTreeError
from .hardy import INF, as_exponent, format_exponent, load_function, tp_norm
from .operators import (
    compactness_diagnostics,
    operator_norm_bounds,
    sequential_compactness_probe,
)
from .selfmaps import MAP_SPEC_HELP, map_from_spec
from .tree import DEFAULT_DEPTH_CAP, TreeParams
from .verify import SUITES, VerifyConfig, run_suites

OUT_FORMATS = click.Choice(["text", "json", "csv"])


class Exponent(click.ParamType):
    name = "p"

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        try:
            return as_exponent(value)
        except HardyTreeError as exc:
            self.fail(str(exc), param, ctx)


def _emit(text: str) -> None:
    click.echo(text, nl=not text.endswith("\n"))


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _params(q: int, depth: int) -> TreeParams:
    return TreeParams(q, max(DEFAULT_DEPTH_CAP, depth))


@click.group()
def cli():
    """Norms, composition-operator bounds and compactness diagnostics on T_p over homogeneous trees."""


@cli.command("norm")
@click.argument("function_file", type=click.Path(dir_okay=False))
@click.option("--p", "p", type=Exponent(), default="2", show_default=True, help="Exponent p >= 1 or 'inf'.")
@click.option("--out", type=OUT_FORMATS, default="text", show_default=True)
def cmd_norm(function_file, p, out):
    """Per-level means M_p(n, f) and the T_p norm of a function file."""
    f = load_function(function_file)
    rep = tp_norm(f, p)
    if out == "json":
        _emit(json.dumps({"q": f.params.q, "depth": f.depth, **rep.to_dict()}, indent=2))
    elif out == "csv":
        _emit(_csv(["level", "M_p"], [[n, repr(x)] for n, x in enumerate(rep.per_level)]))
    else:
        lines = [f"q={f.params.q} depth={f.depth} p={format_exponent(p)}"]
        lines += [f"  M_p({n}) = {x!r}" for n, x in enumerate(rep.per_level)]
        lines.append(f"norm = {rep.sup!r} (attained at level {rep.argmax}"
                     + (", deepest level: truncation may hide more)" if rep.attained_at_boundary else ")"))
        _emit("\n".join(lines))


def map_options(fn):
    fn = click.option("--map", "map_spec", default="parent", show_default=True, help=MAP_SPEC_HELP)(fn)
    fn = click.option("--depth", type=click.IntRange(0, None), default=8, show_default=True,
                      help="Coverage depth of the map (target depth).")(fn)
    fn = click.option("--q", type=click.IntRange(1, None), default=2, show_default=True)(fn)
    return fn


@cli.command("opnorm")
@map_options
@click.option("--p", "p", type=Exponent(), default="1", show_default=True)
@click.option("--domain-depth", type=click.IntRange(0, None), default=None,
              help="Support depth D of test functions (default: --depth).")
@click.option("--out", type=OUT_FORMATS, default="text", show_default=True)
def cmd_opnorm(map_spec, depth, q, p, domain_depth, out):
    """Lower bound, exact truncated norm and closed-form checks for C_phi."""
    params = _params(q, depth)
    phi = map_from_spec(map_spec, params, depth)
    bounds = operator_norm_bounds(phi, p, domain_depth, depth if p != INF else None)
    data = {"map": phi.label, "q": q, "depth": depth, **bounds.to_dict()}
    if out == "json":
        _emit(json.dumps(data, indent=2))
        return
    if out == "csv":
        if bounds.oracle is None:
            _emit(_csv(["n", "oracle_pow"], [[0, 1]]))
            return
        S = bounds.sufficiency.values
        rows = [[n, str(bounds.lower_bound_fw.per_level[n]), str(x), str(S.get(n, ""))]
                for n, x in enumerate(bounds.oracle.per_level)]
        _emit(_csv(["n", "fw_lower_pow", "oracle_pow", "S"], rows))
        return
    lines = [f"map={phi.label} q={q} p={format_exponent(p)} depth={depth}"]
    lines.append(f"lower  = {bounds.lower!r}  (witness: {bounds.witness})")
    if bounds.upper is None:
        lines.append(f"upper  = {bounds.upper_status}")
    else:
        lines.append(f"upper  = {bounds.upper!r}  ({bounds.upper_status})")
    if bounds.lower_bound_fw is not None:
        lb = bounds.lower_bound_fw
        lines.append(f"f_w bound^p = {lb.value_pow} at w={lb.w}, n={lb.n}")
        lines.append("f_w bound^p by level: " + ", ".join(str(x) for x in lb.per_level))
    if bounds.oracle is not None:
        lines.append("oracle^p by level:    " + ", ".join(str(x) for x in bounds.oracle.per_level))
    if bounds.sufficiency is not None:
        s = bounds.sufficiency
        lines.append("S(n):                 " + ", ".join(str(x) for x in s.values.values()))
    if bounds.formula_value is not None:
        lines.append(f"closed form = {bounds.formula_value!r}  [{bounds.formula_source}]")
    _emit("\n".join(lines))


@cli.command("diagnose")
@map_options
@click.option("--p", "p", type=Exponent(), default="1", show_default=True, help="Exponent for the sequential probe.")
@click.option("--family", type=click.Choice(["fw", "range"]), default="fw", show_default=True,
              help="Trial sequence for the probe.")
@click.option("--out", type=OUT_FORMATS, default="text", show_default=True)
def cmd_diagnose(map_spec, depth, q, p, family, out):
    """Finite-depth compactness diagnostics for C_phi."""
    params = _params(q, depth)
    phi = map_from_spec(map_spec, params, depth)
    rep = compactness_diagnostics(phi)
    probe = sequential_compactness_probe(phi, p, family=family)
    if out == "json":
        data = {
            "map": rep.label,
            "q": q,
            "depth": depth,
            "verdict": rep.verdict,
            "hints": [{"criterion": h.criterion, "status": h.status, "message": h.message} for h in rep.hints],
            "bounded_range": rep.bounded_range,
            "range_radius_by_level": rep.range_radius_by_level,
            "decay_sequence": {str(r): str(x) for r, x in rep.decay_sequence.items()},
            "decay_reliable_upto": rep.decay_reliable_upto,
            "displacement": [{"level": d.level, "min": d.min, "max": d.max, "mean": d.mean}
                             for d in rep.displacement],
            "opnorm_pow_by_depth": [str(x) for x in rep.opnorm_pow_by_depth],
            "boundedness_trend": rep.boundedness_trend,
            "probe": probe.to_dict(),
        }
        _emit(json.dumps(data, indent=2))
        return
    if out == "csv":
        rows = []
        for d in rep.displacement:
            n = d.level
            rows.append([n, d.min, d.max, repr(d.mean), rep.range_radius_by_level[n],
                         str(rep.decay_sequence.get(n, "")), str(rep.opnorm_pow_by_depth[n])])
        _emit(_csv(["level", "disp_min", "disp_max", "disp_mean", "range_radius", "decay_max", "opnorm_pow"], rows))
        return
    lines = [f"map={rep.label} q={q} depth={depth}", f"verdict: {rep.verdict}"]
    lines += [f"  {h}" for h in rep.hints]
    lines.append("decay max_{|w|=r} s(w): " + ", ".join(f"r={r}: {x}" for r, x in rep.decay_sequence.items()
                                                         if r <= rep.decay_reliable_upto))
    lines.append("displacement min by level: " + ", ".join(str(d.min) for d in rep.displacement))
    lines.append("truncated ||C_phi||^p by depth: " + ", ".join(str(x) for x in rep.opnorm_pow_by_depth)
                 + f" ({rep.boundedness_trend})")
    lines.append(f"probe ({family}, p={format_exponent(p)}): "
                 + ", ".join(f"{s}: {x:.6g}" for s, x in zip(probe.labels, probe.norms)) + f" -> {probe.trend}")
    _emit("\n".join(lines))


@cli.command("verify")
@click.option("--suite", "suites", multiple=True, type=click.Choice(sorted(SUITES)),
              help="Run only these suites (repeatable). Default: all.")
@click.option("--q", "qs", type=click.IntRange(1, None), multiple=True, help="Branching parameters (default 1 2 3).")
@click.option("--p", "ps", type=Exponent(), multiple=True, help="Finite exponents (default 1 2).")
@click.option("--depth", type=click.IntRange(1, DEFAULT_DEPTH_CAP), default=8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=OUT_FORMATS, default="text", show_default=True)
def cmd_verify(suites, qs, ps, depth, seed, out):
    """Run the verification battery; exit 1 if any check fails."""
    if any(p == INF for p in ps):
        raise click.BadParameter("verify takes finite exponents only", param_hint="--p")
    cfg = VerifyConfig(qs=tuple(qs) or (1, 2, 3), ps=tuple(ps) or (1.0, 2.0), depth=depth, seed=seed)
    results = run_suites(cfg, list(suites))
    passed = all(r.passed for r in results)
    if out == "json":
        _emit(json.dumps({"passed": passed, "checks": [r.to_dict() for r in results]}, indent=2))
    elif out == "csv":
        _emit(_csv(["suite", "anchor", "passed", "detail"],
                   [[r.suite, r.anchor, r.passed, r.detail] for r in results]))
    else:
        lines = [r.line() for r in results]
        lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
        _emit("\n".join(lines))
    sys.exit(0 if passed else 1)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="hardytree", standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except (HardyTreeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
