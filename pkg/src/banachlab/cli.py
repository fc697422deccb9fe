"""Command-line front door.

Every subcommand prints a JSON report and exits 0 exactly when all of
its assertions pass.  Reports are also stashed next to the working
directory so `lab report` can re-emit the most recent one in another
format.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import dilation, gallery, operators, shifts, spaces
from .errors import ArgumentError, ContractionError

_STASH = ".lab-last-report.json"


def _emit(report, out):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
        click.echo("wrote %s" % out)
    else:
        click.echo(text)
    try:
        with open(_STASH, "w") as fh:
            fh.write(text + "\n")
    except OSError:
        pass  # read-only working directory; report still printed


def _threads():
    try:
        return max(1, int(os.environ.get("LAB_THREADS", "1")))
    except ValueError:
        return 1


@click.group()
def main():
    """Numerical laboratory for contraction functionals, dilations,
    sigma-shifts, and isometric decompositions on finite p-norm models."""


@main.command()
@click.argument("entry_id")
@click.option("--seed", default=0, show_default=True)
@click.option("--tol-scale", default=1.0, show_default=True,
              help="multiplies agreement tolerances; violation thresholds "
                   "are never loosened")
@click.option("--window", default=None, type=int,
              help="override the truncation window for entries that take one")
@click.option("--out", default=None, type=click.Path())
def example(entry_id, seed, tol_scale, window, out):
    """Run one registry entry and report its assertions."""
    overrides = {}
    if window is not None:
        overrides["window"] = window
    try:
        report = gallery.run_counterexample(
            entry_id, seed=seed, tol_scale=tol_scale, **overrides
        )
    except TypeError:
        raise click.ClickException(
            "entry %r does not take a --window override" % entry_id
        )
    except ArgumentError as e:
        raise click.ClickException(str(e))
    _emit(report, out)
    sys.exit(0 if report["pass"] else 1)


@main.command()
@click.argument("name")
@click.option("--seed", default=0, show_default=True)
@click.option("--tol-scale", default=1.0, show_default=True)
@click.option("--out", default=None, type=click.Path())
def suite(name, seed, tol_scale, out):
    """Run a named suite (orthogonality, dilation, shifts, decomposition,
    hilbert-characterization, all)."""
    try:
        report = gallery.run_suite(
            name, seed=seed, tol_scale=tol_scale, threads=_threads()
        )
    except ArgumentError as e:
        raise click.ClickException(str(e))
    _emit(report, out)
    if not report["pass"]:
        for rep in report["reports"]:
            for a in rep["assertions"]:
                if not a["pass"]:
                    click.echo(
                        "FAIL %s :: %s (value %g)"
                        % (rep["id"], a["name"], a["value"]),
                        err=True,
                    )
        sys.exit(1)
    sys.exit(0)


@main.command()
@click.argument("operator_json", type=click.Path(exists=True))
@click.option("--depth", default=6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path())
def dilate(operator_json, depth, seed, out):
    """Certify A_T and build + verify the minimal dilation of the
    operator stored in OPERATOR_JSON."""
    with open(operator_json) as fh:
        t_op = operators.operator_from_dict(json.load(fh))
    cert = dilation.triangle_violation_search(t_op, seed=seed)
    report = {
        "id": os.path.basename(operator_json),
        "verdict": cert.verdict,
        "margin": cert.margin,
        "operator_norm": cert.operator_norm,
    }
    if cert.verdict == "violation":
        wx, wy = cert.witness_pair
        report["witness_pair"] = [
            [[z.real, z.imag] for z in wx],
            [[z.real, z.imag] for z in wy],
        ]
        report["pass"] = False
        _emit(report, out)
        sys.exit(1)
    try:
        bundle = dilation.build_min_dilation(t_op, depth, cert)
    except (ArgumentError, ContractionError) as e:
        report["pass"] = False
        report["error"] = str(e)
        _emit(report, out)
        sys.exit(1)
    check = dilation.verify_dilation(bundle, t_op, kmax=depth - 2, seed=seed)
    report["dilation"] = {
        "construction": bundle.construction,
        "depth": depth,
        "kmax": depth - 2,
        "worst_residual": check.worst_residual,
        "krylov_rank": check.krylov_rank,
        "expected_rank": check.expected_rank,
        "minimal": check.minimal,
    }
    report["pass"] = bool(check.passed)
    _emit(report, out)
    sys.exit(0 if check.passed else 1)


@main.command()
@click.argument("sigma_json", type=click.Path(exists=True))
@click.option("--grid", default=64, show_default=True,
              help="number of equispaced unit-circle probe points")
@click.option("--horizon", default=None, type=int,
              help="support half-width of the probe vectors")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", show_default=True,
              type=click.Choice(["csv", "json"]))
def spectrum(sigma_json, grid, horizon, seed, out, fmt):
    """Residual-vs-lambda table for the sigma-shift described in
    SIGMA_JSON ({"base": <space>, "halfwidth": H} or
    {"source": <operator>})."""
    with open(sigma_json) as fh:
        desc = json.load(fh)
    if "source" in desc:
        bundle = shifts.sigma_extension(
            operators.operator_from_dict(desc["source"])
        )
    else:
        bundle = shifts.make_sigma_shift(
            spaces.space_from_dict(desc["base"]), int(desc["halfwidth"])
        )
    lams = np.exp(2j * np.pi * np.arange(grid) / grid)
    rows = shifts.spectrum_scan(bundle, lams, horizon=horizon, seed=seed)
    if fmt == "json":
        report = {
            "id": os.path.basename(sigma_json),
            "rows": [
                {"lam_re": r[0], "lam_im": r[1], "residual": r[2],
                 "horizon": r[3]}
                for r in rows
            ],
        }
        _emit(report, out)
        return
    lines = ["lam_re,lam_im,residual,horizon"]
    for r in rows:
        lines.append("%.17g,%.17g,%.17g,%d" % r)
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo("wrote %s" % out)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--format", "fmt", default="json", show_default=True,
              type=click.Choice(["json", "csv"]))
@click.option("--out", default=None, type=click.Path())
def report(fmt, out):
    """Re-emit the most recent example/suite report."""
    if not os.path.exists(_STASH):
        raise click.ClickException(
            "no stashed report; run an example or suite first"
        )
    with open(_STASH) as fh:
        last = json.load(fh)
    if out is None:
        out = "report.%s" % fmt
    gallery.emit_report(out, fmt, report=last)
    click.echo("wrote %s" % out)


if __name__ == "__main__":
    main()
