"""Command-line client for the readability service.

The CLI reads files, builds request payloads, and talks HTTP. By default the
requests run against an in-process instance of the service; `--server URL`
(or GLARE_SERVER) points them at a remote one instead, with identical
behavior. Progress notes go to standard error; results go to a file or
standard output as JSON or CSV.

Exit codes: 0 success, 2 usage error, 3 input error, 4 internal error.
"""

from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx

from .graphio import dump_report_json, format_layout_csv, parse_edgelist, read_layout
from .model import (
    METRIC_FIELDS,
    GlareError,
    InputError,
    InvariantError,
    ParameterError,
    ReadabilityReport,
)

_ALL_METRICS = ("nc", "ma", "ml", "ec", "eca")
_ENHANCED_METRICS = ("nc", "ec", "eca")


# -- transport ---------------------------------------------------------------


async def _local_request(method: str, path: str, payload):
    from .service.app import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(
        transport=transport, base_url="http://service.internal", timeout=None
    ) as client:
        return await client.request(method, path, json=payload)


def _raise_http_error(resp) -> None:
    try:
        body = resp.json()
    except ValueError:
        body = {}
    name = body.get("error")
    message = body.get("message") or str(body.get("detail", resp.text))
    if name == "ParameterError":
        raise ParameterError(message)
    if name in ("InputError", "SchemaError"):
        raise InputError(message)
    if resp.status_code == 422:
        raise ParameterError(f"request rejected: {message}")
    raise InvariantError(f"service error {resp.status_code}: {message}")


def _request(server, method: str, path: str, payload=None) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.request(method, path, json=payload)
    else:
        resp = asyncio.run(_local_request(method, path, payload))
    if resp.status_code >= 400:
        _raise_http_error(resp)
    return resp.json()


# -- shared option plumbing ----------------------------------------------------


def _graph_options(fn):
    for option in reversed(
        (
            click.option(
                "--edges", "edges_path", required=True, metavar="FILE",
                help="Edge list: whitespace-separated id pairs, # comments.",
            ),
            click.option(
                "--layout", "layout_path", default=None, metavar="FILE",
                help="Layout CSV with an id,x,y header.",
            ),
            click.option(
                "--gen-layout", type=click.Choice(["random", "fr"]), default=None,
                help="Generate the layout instead of reading one.",
            ),
            click.option("--seed", default=0, show_default=True, type=int,
                          help="Seed for --gen-layout."),
            click.option("--extent", default=100.0, show_default=True, type=float,
                          help="Layout square side for --gen-layout."),
            click.option("--iterations", default=50, show_default=True, type=int,
                          help="Force-directed rounds for --gen-layout fr."),
        )
    ):
        fn = option(fn)
    return fn


def _param_options(fn):
    for option in reversed(
        (
            click.option("--radius", default=0.5, show_default=True, type=float,
                          help="Vertex disc radius for nc."),
            click.option("--ideal-angle", default=70.0, show_default=True,
                          type=float, help="Ideal crossing angle in degrees."),
            click.option("--strip-fraction", default=0.05, show_default=True,
                          type=float, help="Strip width as a fraction of extent."),
            click.option(
                "--orientation", default="vertical", show_default=True,
                type=click.Choice(["vertical", "horizontal", "both"]),
                help="Strip direction for enhanced crossings.",
            ),
            click.option("--threads", default=1, show_default=True, type=int,
                          help="Worker count for parallel paths."),
        )
    ):
        fn = option(fn)
    return fn


def _output_options(fn):
    for option in reversed(
        (
            click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                          default="json", show_default=True),
            click.option("--out", "out_path", default=None, metavar="FILE",
                          help="Output file (default: stdout)."),
        )
    ):
        fn = option(fn)
    return fn


def _parse_metrics(value, allowed) -> list | None:
    if value is None:
        return None
    keys = []
    for key in value.split(","):
        key = key.strip()
        if not key:
            continue
        if key not in _ALL_METRICS:
            raise click.UsageError(
                f"unknown metric {key!r}; choose from {','.join(_ALL_METRICS)}"
            )
        if key not in allowed:
            raise click.UsageError(
                f"metric {key!r} is not available here; choose from "
                f"{','.join(allowed)}"
            )
        if key not in keys:
            keys.append(key)
    if not keys:
        raise click.UsageError("--metrics must name at least one metric")
    return keys


def _params_payload(radius, ideal_angle, strip_fraction, orientation, threads):
    return {
        "radius": radius,
        "ideal_angle_deg": ideal_angle,
        "strip_fraction": strip_fraction,
        "orientation": orientation,
        "threads": threads,
    }


def _graph_payload(
    server, edges_path, layout_path, gen_layout, seed, extent, iterations
):
    if (layout_path is None) == (gen_layout is None):
        raise click.UsageError("provide exactly one of --layout or --gen-layout")
    edges = parse_edgelist(edges_path).tolist()
    if gen_layout:
        data = _request(
            server, "POST", "/generate",
            {"edges": edges, "kind": gen_layout, "seed": seed,
             "extent": extent, "iterations": iterations},
        )
        positions = data["positions"]
    else:
        layout = read_layout(layout_path)
        positions = [
            {"id": vid, "x": xy[0], "y": xy[1]}
            for vid, xy in sorted(layout.items())
        ]
    return {"edges": edges, "positions": positions}


def _emit(text: str, out_path) -> None:
    if out_path is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {out_path}: {exc}") from exc


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else str(v) for v in row))
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------------


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--server", envvar="GLARE_SERVER", default=None, metavar="URL",
    help="Remote service URL (default: run the service in process).",
)
@click.pass_context
def cli(ctx, server):
    """Graph-layout readability metrics: evaluate, compare, benchmark."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@cli.command("eval")
@_graph_options
@_param_options
@click.option("--mode", type=click.Choice(["oracle", "exact", "enhanced"]),
              default="oracle", show_default=True)
@click.option("--metrics", "metrics_opt", default=None, metavar="LIST",
              help="Comma-separated subset of nc,ma,ml,ec,eca.")
@_output_options
@click.pass_context
def cmd_eval(ctx, edges_path, layout_path, gen_layout, seed, extent, iterations,
             radius, ideal_angle, strip_fraction, orientation, threads,
             mode, metrics_opt, fmt, out_path):
    """Evaluate readability metrics for one laid-out graph."""
    server = ctx.obj["server"]
    allowed = _ENHANCED_METRICS if mode == "enhanced" else _ALL_METRICS
    metrics = _parse_metrics(metrics_opt, allowed)
    requested = list(metrics) if metrics else list(allowed)
    graph = _graph_payload(
        server, edges_path, layout_path, gen_layout, seed, extent, iterations
    )
    click.echo(
        f"evaluating {','.join(requested)} in {mode} mode on "
        f"{len(graph['positions'])} vertices / {len(graph['edges'])} edges",
        err=True,
    )
    data = _request(
        server, "POST", "/evaluate",
        {"graph": graph, "mode": mode, "metrics": metrics,
         "params": _params_payload(radius, ideal_angle, strip_fraction,
                                   orientation, threads)},
    )
    for warning in data.get("warnings", ()):
        click.echo(f"warning: {warning}", err=True)
    if fmt == "csv":
        rows = [(key, data["metrics"][METRIC_FIELDS[key]]) for key in requested]
        _emit(_csv_text(("metric", "value"), rows), out_path)
    else:
        report = ReadabilityReport.from_dict(data)
        _emit(dump_report_json(report), out_path)


@cli.command("compare")
@_graph_options
@_param_options
@click.option("--metrics", "metrics_opt", default=None, metavar="LIST",
              help="Comma-separated subset of nc,ec,eca.")
@_output_options
@click.pass_context
def cmd_compare(ctx, edges_path, layout_path, gen_layout, seed, extent,
                iterations, radius, ideal_angle, strip_fraction, orientation,
                threads, metrics_opt, fmt, out_path):
    """Enhanced vs oracle values with percentage errors."""
    server = ctx.obj["server"]
    metrics = _parse_metrics(metrics_opt, _ENHANCED_METRICS)
    graph = _graph_payload(
        server, edges_path, layout_path, gen_layout, seed, extent, iterations
    )
    click.echo(
        f"comparing {','.join(metrics or _ENHANCED_METRICS)} on "
        f"{len(graph['positions'])} vertices / {len(graph['edges'])} edges",
        err=True,
    )
    data = _request(
        server, "POST", "/compare",
        {"graph": graph, "metrics": metrics,
         "params": _params_payload(radius, ideal_angle, strip_fraction,
                                   orientation, threads)},
    )
    for row in data["rows"]:
        if row["flagged"]:
            click.echo(
                f"warning: {row['metric']} oracle value is 0 but enhanced is "
                f"{row['enhanced']}; percentage error undefined",
                err=True,
            )
    if fmt == "csv":
        rows = [
            (r["metric"], r["oracle"], r["enhanced"], r["pct_error"])
            for r in data["rows"]
        ]
        _emit(_csv_text(("metric", "oracle", "enhanced", "pct_error"), rows),
              out_path)
    else:
        _emit(json.dumps(data, sort_keys=True, indent=2), out_path)


@cli.command("bench")
@_graph_options
@_param_options
@click.option("--mode", type=click.Choice(["oracle", "exact", "enhanced"]),
              default="enhanced", show_default=True)
@click.option("--metrics", "metrics_opt", default=None, metavar="LIST",
              help="Comma-separated metric subset.")
@click.option("--threads-list", default="1,2,4", show_default=True,
              metavar="LIST", help="Ascending worker counts to time.")
@_output_options
@click.pass_context
def cmd_bench(ctx, edges_path, layout_path, gen_layout, seed, extent,
              iterations, radius, ideal_angle, strip_fraction, orientation,
              threads, mode, metrics_opt, threads_list, fmt, out_path):
    """Time the metrics across worker counts; values must not change."""
    server = ctx.obj["server"]
    allowed = _ENHANCED_METRICS if mode == "enhanced" else _ALL_METRICS
    metrics = _parse_metrics(metrics_opt, allowed)
    try:
        counts = [int(c) for c in threads_list.split(",") if c.strip()]
    except ValueError:
        raise click.UsageError(f"--threads-list must be integers, got {threads_list!r}")
    if not counts or any(c < 1 for c in counts):
        raise click.UsageError("--threads-list needs worker counts >= 1")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise click.UsageError("--threads-list must be strictly ascending")
    graph = _graph_payload(
        server, edges_path, layout_path, gen_layout, seed, extent, iterations
    )
    click.echo(
        f"benchmarking {mode} mode at worker counts {counts} on "
        f"{len(graph['positions'])} vertices / {len(graph['edges'])} edges",
        err=True,
    )
    data = _request(
        server, "POST", "/bench",
        {"graph": graph, "mode": mode, "metrics": metrics,
         "threads_list": counts,
         "params": _params_payload(radius, ideal_angle, strip_fraction,
                                   orientation, threads)},
    )
    if fmt == "csv":
        rows = [
            (r["threads"], r["metric"], r["value"], r["seconds"], r["speedup"])
            for r in data["rows"]
        ]
        _emit(
            _csv_text(("threads", "metric", "value", "seconds", "speedup"), rows),
            out_path,
        )
    else:
        _emit(json.dumps(data, sort_keys=True, indent=2), out_path)


@cli.command("gen")
@click.option("--edges", "edges_path", required=True, metavar="FILE",
              help="Edge list file.")
@click.option("--kind", type=click.Choice(["random", "fr"]), default="random",
              show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--extent", default=100.0, show_default=True, type=float)
@click.option("--iterations", default=50, show_default=True, type=int)
@click.option("--out", "out_path", default=None, metavar="FILE",
              help="Layout CSV output (default: stdout).")
@click.pass_context
def cmd_gen(ctx, edges_path, kind, seed, extent, iterations, out_path):
    """Write a deterministic layout file for an edge list."""
    server = ctx.obj["server"]
    edges = parse_edgelist(edges_path).tolist()
    click.echo(f"generating {kind} layout (seed {seed}) for {len(edges)} edges",
               err=True)
    data = _request(
        server, "POST", "/generate",
        {"edges": edges, "kind": kind, "seed": seed, "extent": extent,
         "iterations": iterations},
    )
    rows = ((p["id"], p["x"], p["y"]) for p in data["positions"])
    _emit(format_layout_csv(rows), out_path)


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 130
    except click.FileError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 3
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except ParameterError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except GlareError as exc:
        click.echo(f"error: {exc}", err=True)
        return 4
    except httpx.HTTPError as exc:
        click.echo(f"error: transport failure: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
