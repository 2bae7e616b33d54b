"""Command-line entry point: run benchmark cases and emit reports.

A config file (JSON, keys mirroring the CLI options) can pre-populate
any option; values given on the command line win.
"""
import json
import sys

import click

from . import bench


def _parse_meshes(_ctx, _param, value):
    if value in (None, ""):
        return None
    try:
        return [int(tok) for tok in str(value).split(",")]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, "
                                 f"got {value!r}")


@click.group()
def main():
    """Geometrically exact beam benchmarks."""


@main.command()
@click.argument("case", type=click.Choice(bench.CASE_TAGS))
@click.option("--element", type=click.Choice(sorted(bench.ELEMENT_FAMILIES)),
              default=None, help="element formulation (case default if unset)")
@click.option("--locking", default=None,
              help="membrane-locking policy: mcs, fi or ri")
@click.option("--zeta", type=float, default=None, help="slenderness ratio")
@click.option("--meshes", callback=_parse_meshes, default=None,
              help="comma-separated element counts, e.g. 1,2,4,8")
@click.option("--steps", type=int, default=None, help="initial load steps")
@click.option("--dt", type=float, default=None, help="time step (dynamics)")
@click.option("--rho-inf", type=float, default=None,
              help="spectral radius at infinity (dynamics)")
@click.option("--out", type=click.Path(), default=None,
              help="report output directory")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default=None, help="report format (json is always written)")
@click.option("--dump", is_flag=True, default=None,
              help="write per-mesh centerline dumps (s x y z q0 q1 q2 q3)")
@click.option("--arc-window", is_flag=True, default=None,
              help="restrict the L2 norm to the first eighth of the beam")
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON file with default option values")
def run(case, config_path, **cli_args):
    """Run one benchmark CASE and print/emit its report."""
    args = {"locking": "mcs", "dt": 0.25, "rho_inf": 0.95, "fmt": "csv",
            "dump": False, "arc_window": False}
    if config_path is not None:
        with open(config_path) as fh:
            cfg = json.load(fh)
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if "format" in cfg:
            cfg["fmt"] = cfg.pop("format")
        unknown = set(cfg) - set(args) - {"element", "zeta", "meshes",
                                          "steps", "out"}
        if unknown:
            raise click.ClickException(
                f"unknown config keys: {sorted(unknown)}")
        args.update({k: v for k, v in cfg.items() if v is not None})
    args.update({k: v for k, v in cli_args.items() if v is not None})
    try:
        payload = bench.run_case(case, **args)
    except bench.UnsupportedPolicy as exc:
        raise click.ClickException(str(exc))
    rows = payload["rows"]
    if rows:
        cols = [c for c in bench.CSV_SCHEMA if any(r.get(c) is not None
                                                   for r in rows)]
        click.echo("  ".join(cols))
        for r in rows:
            click.echo("  ".join(bench._fmt(r.get(c)) for c in cols))
    for key, val in payload["extras"].items():
        small = isinstance(val, (int, float, str)) or (
            isinstance(val, (tuple, list, dict)) and len(val) <= 8
            and "trace" not in key)
        if small:
            click.echo(f"{key}: {val}")


if __name__ == "__main__":
    sys.exit(main())
