"""Command line interface: ``spinmur {constants,curve,divergence,verify,sample}``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import math
import sys

import click
import numpy as np

from . import closed_forms as cf
from . import kernels
from .families import (
    FamilyParam,
    ParameterError,
    coordinate_axes,
    d2_family,
    d4_family,
    o_family,
    target_pair,
)
from .minimax import DEFAULT_RESTARTS, DEFAULT_SEED, divergence, incompatibility_degree, mean_divergence
from .qubit import BlochState, InvalidState, spin_observable
from .report import CurvePoint, curve_csv, curve_svg, dumps
from .sampler import RNG_ALGORITHM, empirical_error_function, sample_outcomes
from .verify import SUITES, run_suite

FAMILY_KINDS = {"d4": "c2", "o": "c3", "d2": "gamma", "so3": "epsilon"}
FAMILY_BUILDERS = {"d4": d4_family, "o": o_family, "d2": d2_family}


def _emit(text: str):
    sys.stdout.write(text)


def _family_param(family: str, value: float) -> FamilyParam:
    try:
        return FamilyParam(value, FAMILY_KINDS[family])
    except ParameterError as exc:
        raise click.BadParameter(str(exc), param_hint="--param") from exc


def _targets(spec: str, degrees: bool):
    """Parse ``xy``, ``xyz``, ``alpha:<angle>`` or ``all``."""
    if spec == "xy":
        return [spin_observable(d) for d in coordinate_axes(2)]
    if spec == "xyz":
        return [spin_observable(d) for d in coordinate_axes(3)]
    if spec == "all":
        return None
    if spec.startswith("alpha:"):
        try:
            alpha = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise click.BadParameter(f"cannot parse angle in {spec!r}", param_hint="--targets") from exc
        if degrees:
            alpha = math.radians(alpha)
        if not 0.0 <= alpha <= math.pi:
            raise click.BadParameter("alpha must lie in [0, pi]", param_hint="--targets")
        pair = target_pair(alpha)
        return [spin_observable(pair.a), spin_observable(pair.b)]
    raise click.BadParameter(f"unknown targets {spec!r}", param_hint="--targets")


def _state(text: str) -> BlochState:
    try:
        return BlochState([float(x) for x in text.split(",")])
    except (ValueError, InvalidState) as exc:
        raise click.BadParameter(str(exc), param_hint="--state") from exc


@click.group()
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True, help="Worker cap for multi-start searches.")
@click.pass_context
def main(ctx, threads):
    """Entropic measurement uncertainty for spin-1/2."""
    ctx.obj = {"threads": threads}


@main.command()
def constants():
    """Print the optimal-bound constants as JSON."""
    c = cf.constants()
    _emit(dumps({
        "constants": {k: float(v) for k, v in c.items()},
        "formulas": {k: v.formula for k, v in c.items()},
        "definitions": {k: cf.FORMULAS[k] for k in ("c_orth2", "c_orth3", "c_inf")},
        "ordering": {"c_inf < mean_c_orth3 < mean_c_orth2": bool(c["c_inf"] < c["mean_c_orth3"] < c["mean_c_orth2"])},
    }))


def incompatibility_curve(steps: int, tol: float) -> list[CurvePoint]:
    points = []
    for alpha in np.linspace(0.0, math.pi, steps):
        res = incompatibility_degree(float(alpha), tol)
        points.append(CurvePoint(float(alpha), res.value, res.witness["gamma"], tuple(res.witness["state"])))
    return points


@main.command()
@click.option("--steps", type=click.IntRange(min=2), default=25, show_default=True, help="Number of alpha grid points on [0, pi].")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-4, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None, help="CSV path (default: stdout).")
@click.option("--svg", type=click.Path(dir_okay=False, writable=True), default=None, help="Also write an SVG plot.")
def curve(steps, tol, out, svg):
    """Incompatibility degree I(alpha) on a uniform alpha grid, as CSV."""
    points = incompatibility_curve(steps, tol)
    text = curve_csv(points)
    if out:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _emit(text)
    if svg:
        with open(svg, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(curve_svg(points))


@main.command("divergence")
@click.option("--family", type=click.Choice(sorted(FAMILY_KINDS)), required=True)
@click.option("--param", type=float, required=True)
@click.option("--targets", "targets_spec", required=True, help="xy | xyz | alpha:<angle> | all")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-8, show_default=True)
@click.option("--degrees", is_flag=True, help="Read alpha in degrees.")
def divergence_cmd(family, param, targets_spec, tol, degrees):
    """Worst-case information loss of a covariant family member."""
    p = _family_param(family, param)
    targets = _targets(targets_spec, degrees)
    if family == "so3":
        if targets is not None:
            raise click.BadParameter("the so3 family is compared against all spin components: use --targets all", param_hint="--targets")
        res = mean_divergence(p.value, tol)
    else:
        if targets is None:
            raise click.BadParameter("--targets all needs --family so3", param_hint="--targets")
        M = FAMILY_BUILDERS[family](p)
        if M.arity != len(targets):
            raise click.BadParameter(f"family {family} jointly measures {M.arity} components, targets give {len(targets)}", param_hint="--targets")
        res = divergence(targets, M, tol)
    _emit(dumps({
        "family": family,
        "param": p.value,
        "targets": targets_spec,
        "value": res.value,
        "state": res.witness["state"],
        "iterations": res.iterations,
        "tolerance": res.tolerance,
        "converged": res.converged,
        "backend": kernels.backend.name,
    }))


@main.command()
@click.option("--suite", type=click.Choice(SUITES + ("all",)), default="all", show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=DEFAULT_RESTARTS, show_default=True, help="Restarts for the global search check.")
@click.pass_context
def verify(ctx, suite, seed, restarts):
    """Run invariant suites; exit status 1 if any check fails."""
    report = run_suite(suite, seed, restarts, ctx.obj["threads"])
    _emit(dumps(report))
    if not report["passed"]:
        ctx.exit(1)


@main.command()
@click.option("--family", type=click.Choice(sorted(FAMILY_BUILDERS)), required=True)
@click.option("--param", type=float, required=True)
@click.option("--state", "state_text", required=True, help="Bloch vector rx,ry,rz")
@click.option("--n", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--targets", "targets_spec", default=None, help="xy | xyz | alpha:<angle> (default: xy or xyz by family)")
@click.option("--degrees", is_flag=True)
def sample(family, param, state_text, n, seed, targets_spec, degrees):
    """Simulate measurements and report counts and the plug-in error function."""
    from .entropy import error_function
    from .qubit import marginals

    p = _family_param(family, param)
    s = _state(state_text)
    M = FAMILY_BUILDERS[family](p)
    if targets_spec is None:
        targets_spec = "xyz" if family == "o" else "xy"
    targets = _targets(targets_spec, degrees)
    if targets is None or len(targets) != M.arity:
        raise click.BadParameter("targets do not match the family", param_hint="--targets")
    run = sample_outcomes(M, s, n, seed)
    _emit(dumps({
        "family": family,
        "param": p.value,
        "state": s.r,
        "n": n,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "outcomes": [list(o) for o in run.outcomes],
        "counts": run.counts,
        "probabilities": M.probabilities(s),
        "empirical_error_function": float(empirical_error_function(targets, M, s, n, seed)),
        "error_function": float(error_function(targets, marginals(M), s)),
    }))


if __name__ == "__main__":  # pragma: no cover
    main()
