"""Command-line front end: ``orbtherm <subcommand> ...``.

Files carry kelvin with the unit in every CSV header; the on-screen summary
uses degrees Celsius.  Without ``--model`` the bundled ten-node model is
used, and without ``--profile`` the default synthetic eclipse profile.
"""
from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from .datasets import ten_node_model
from .errors import OrbthermError
from .integrator import LINEAR, FOURIER as INTERP_FOURIER, compare, cyclic_solve, integrate
from .linearization import VARIANTS, antisymmetry_ratio, jacobian, structure_report
from .model import ThermalModel, format_profile, load_model, load_profile, total_load
from .modes import decompose, perron_mode
from .periodic import METHODS, solve_periodic
from .profiles import synthetic_eclipse_profile
from .steady import KELVIN_OFFSET, hot_cold_cases, solve_steady

FMT = "%.17g"


def _labels(model: ThermalModel) -> list:
    return list(model.node_labels) if model.node_labels else [f"node{i + 1}" for i in range(model.node_count)]


def _model(path) -> ThermalModel:
    return ten_node_model() if path is None else load_model(path)


def _profile(path, model):
    return synthetic_eclipse_profile(model) if path is None else load_profile(path, model)


def _write_csv(path, header, columns) -> None:
    data = np.column_stack(columns)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt=FMT, delimiter=",")


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_temperature_csv(path, N: int):
    """Time column plus the first ``N`` temperature columns of a CSV we wrote."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]])
    except ValueError as exc:
        raise click.BadParameter(f"{path}: non-numeric entry ({exc})")
    if data.ndim != 2 or data.shape[1] < N + 1:
        raise click.BadParameter(f"{path}: expected a time column and {N} temperature columns")
    return data[:, 0], data[:, 1:N + 1]


def _celsius_table(labels, *cols, names) -> None:
    width = max(len(s) for s in labels)
    click.echo(f"{'node':>4}  {'label':<{width}}  " + "  ".join(f"{n:>10}" for n in names))
    for i, lab in enumerate(labels):
        click.echo(f"{i + 1:>4}  {lab:<{width}}  " + "  ".join(f"{c[i]:>10.3f}" for c in cols))


model_opt = click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
                         help="Model JSON (default: bundled ten-node model).")
profile_opt = click.option("--profile", "profile_path", type=click.Path(exists=True, dir_okay=False),
                           help="Heat-input CSV (default: synthetic eclipse profile).")
variant_opt = click.option("--variant", type=click.Choice(VARIANTS), default="exact", show_default=True)
rtol_opt = click.option("--rtol", type=click.FloatRange(min=0, min_open=True), default=1e-8, show_default=True)
atol_opt = click.option("--atol", type=click.FloatRange(min=0, min_open=True), default=1e-6, show_default=True)
interp_opt = click.option("--interpolation", type=click.Choice([LINEAR, INTERP_FOURIER]), default=LINEAR,
                          show_default=True, help="Heat input between samples.")


@click.group()
@click.option("-v", "--verbose", count=True, help="Log progress (repeat for debug).")
def cli(verbose):
    """Periodic thermal state of a lumped-parameter spacecraft model."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@model_opt
@profile_opt
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-9, show_default=True,
              help="Residual tolerance (K/s).")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write result JSON here.")
def steady(model_path, profile_path, tol, json_path):
    """Steady state of the orbit-averaged equations."""
    model = _model(model_path)
    prof = _profile(profile_path, model)
    res = solve_steady(model, prof.means, tol=tol)
    if json_path:
        _write_json(json_path, res.to_dict())

    _celsius_table(_labels(model), res.celsius, names=["T [C]"])
    click.echo(f"residual {res.residual_norm:.3e} K/s after {res.iterations} iterations")


@cli.command()
@model_opt
@profile_opt
@click.option("--json", "json_path", type=click.Path(dir_okay=False))
def hotcold(model_path, profile_path, json_path):
    """Steady states at maximum and minimum total heat load."""
    model = _model(model_path)
    prof = _profile(profile_path, model)
    cases = hot_cold_cases(model, prof)
    load = total_load(prof)
    t = prof.times
    if json_path:
        _write_json(json_path, {
            "hot": dict(cases.hot.to_dict(), sample=cases.hot_position, time_s=float(t[cases.hot_position])),
            "cold": dict(cases.cold.to_dict(), sample=cases.cold_position, time_s=float(t[cases.cold_position])),
        })

    click.echo(f"hot : sample {cases.hot_position} (t = {t[cases.hot_position]:g} s, {load[cases.hot_position]:.3f} W)")
    click.echo(f"cold: sample {cases.cold_position} (t = {t[cases.cold_position]:g} s, {load[cases.cold_position]:.3f} W)")
    _celsius_table(_labels(model), cases.hot.celsius, cases.cold.celsius, names=["hot [C]", "cold [C]"])


@cli.command("jacobian")
@model_opt
@profile_opt
@variant_opt
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the matrix (1/s) here.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write structure diagnostics here.")
def jacobian_cmd(model_path, profile_path, variant, csv_path, json_path):
    """Jacobian at the averaged steady state, with structure diagnostics."""
    model = _model(model_path)
    Tb = solve_steady(model, _profile(profile_path, model).means).temperatures
    J = jacobian(model, Tb, variant).matrix
    rep = structure_report(J, model.capacitance)
    if csv_path:
        labels = _labels(model)
        _write_csv(csv_path, [f"d_dT_{lab}_per_s" for lab in labels], [J[:, j] for j in range(len(J))])
    if json_path:
        _write_json(json_path, rep.to_dict())

    click.echo(f"Jacobian ({variant}) in 1e-3 1/s:")
    for row in J:
        click.echo(" ".join(f"{1e3 * v:8.3f}" for v in row))
    click.echo(f"Z-matrix: {rep.z_matrix}  diagonally dominant rows: {sum(rep.diagonal_dominance)}/{len(J)}")
    click.echo(f"max Re(lambda) = {rep.max_real_eigenvalue:.4e} 1/s  antisymmetry ratio = {rep.antisymmetry_ratio:.3e}")


@cli.command()
@model_opt
@profile_opt
@variant_opt
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the mode matrix here.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write eigenvalues and diagnostics here.")
def modes(model_path, profile_path, variant, csv_path, json_path):
    """Thermal modes: eigenvalues, relaxation times and mode shapes."""
    model = _model(model_path)
    Tb = solve_steady(model, _profile(profile_path, model).means).temperatures
    J = jacobian(model, Tb, variant).matrix
    basis = decompose(J, model.capacitance)
    ratio = antisymmetry_ratio(J, model.capacitance)
    tau = basis.relaxation_times
    if csv_path:
        header = ["node"] + [f"mode{a + 1}" for a in range(basis.size)]
        _write_csv(csv_path, header, [np.arange(1, basis.size + 1)] + list(basis.mode_matrix.T))
    if json_path:
        payload = basis.to_dict()
        payload["antisymmetry_ratio"] = ratio
        payload["mode_matrix"] = basis.mode_matrix.tolist()
        _write_json(json_path, payload)

    click.echo(f"{'mode':>4}  {'lambda [1/s]':>13}  {'tau [s]':>10}  {'tau [min]':>9}")
    for a, (lam, t) in enumerate(zip(basis.eigenvalues, tau)):
        click.echo(f"{a + 1:>4}  {lam:>13.5e}  {t:>10.2f}  {t / 60:>9.2f}")
    click.echo(f"normalization error {basis.normalization_error:.2e}  antisymmetry ratio {ratio:.2e}")
    try:
        _, p = perron_mode(basis)
        click.echo("Perron mode (unit length): " + " ".join(f"{v:.4f}" for v in p))
    except OrbthermError as exc:
        click.echo(f"Perron mode: {exc}")


@cli.command()
@model_opt
@profile_opt
@variant_opt
@click.option("--method", type=click.Choice(METHODS), default="fourier", show_default=True)
@click.option("--order", type=click.IntRange(1, 2), default=2, show_default=True)
@click.option("--modes-kept", type=click.IntRange(min=0), default=None,
              help="Keep only the slowest modes (fourier method).")
@click.option("--asymptotic", is_flag=True, help="Add the quasi-static tail of dropped modes.")
@click.option("--cesaro", is_flag=True, help="Cesaro-sum the Fourier series.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write temperatures here.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write min/max summary here.")
def periodic(model_path, profile_path, variant, method, order, modes_kept, asymptotic, cesaro,
             csv_path, json_path):
    """Linear periodic solution (first order plus optional second order)."""
    model = _model(model_path)
    prof = _profile(profile_path, model)
    if modes_kept is not None and modes_kept > model.node_count:
        raise click.BadParameter(f"at most {model.node_count} modes", param_hint="--modes-kept")
    if method == "integral" and (cesaro or modes_kept is not None):
        raise click.UsageError("--cesaro and --modes-kept need --method fourier")
    sol = solve_periodic(model, prof, order=order, method=method, keep=modes_kept,
                         asymptotic=asymptotic, cesaro=cesaro, variant=variant)
    tot = sol.total
    if csv_path:
        labels = _labels(model)
        header = (["time_s"] + [f"T_{lab}_K" for lab in labels] + [f"T1_{lab}_K" for lab in labels]
                  + [f"T2_{lab}_K" for lab in labels])
        _write_csv(csv_path, header, [sol.times, tot, sol.first_order, sol.second_order])
    if json_path:
        _write_json(json_path, sol.summary())

    _celsius_table(_labels(model), sol.base - KELVIN_OFFSET, tot.min(axis=0) - KELVIN_OFFSET,
                   tot.max(axis=0) - KELVIN_OFFSET, names=["mean [C]", "min [C]", "max [C]"])


@cli.command("integrate")
@model_opt
@profile_opt
@click.option("--periods", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True,
              help="Length of the run in orbit periods.")
@rtol_opt
@atol_opt
@interp_opt
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the trajectory here.")
def integrate_cmd(model_path, profile_path, periods, rtol, atol, interpolation, csv_path):
    """Integrate the nonlinear equations from the averaged steady state."""
    model = _model(model_path)
    prof = _profile(profile_path, model)
    T0 = solve_steady(model, prof.means).temperatures
    t_end = periods * prof.period
    dt = prof.period / prof.sample_count
    t_eval = np.arange(int(np.floor(t_end / dt * (1 + 1e-12))) + 1) * dt
    traj = integrate(model, prof, T0, (0.0, t_end), rtol=rtol, atol=atol, t_eval=t_eval,
                     interpolation=interpolation)
    if csv_path:
        _write_csv(csv_path, ["time_s"] + [f"T_{lab}_K" for lab in _labels(model)], [traj.times, traj.states])

    click.echo(f"{traj.accepted_steps} steps accepted, {traj.rejected_steps} rejected, "
               f"step size {traj.min_step:.3g} .. {traj.max_step:.3g} s")
    _celsius_table(_labels(model), traj.states.min(axis=0) - KELVIN_OFFSET,
                   traj.states.max(axis=0) - KELVIN_OFFSET, names=["min [C]", "max [C]"])


@cli.command()
@model_opt
@profile_opt
@click.option("--cycle-tol", type=click.FloatRange(min=0, min_open=True), default=1e-3, show_default=True,
              help="Start/end mismatch tolerance (K).")
@click.option("--max-periods", type=click.IntRange(min=1), default=50, show_default=True)
@rtol_opt
@atol_opt
@interp_opt
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the periodic orbit here.")
def cycle(model_path, profile_path, cycle_tol, max_periods, rtol, atol, interpolation, csv_path):
    """Periodic orbit by integrating whole periods until start and end agree."""
    model = _model(model_path)
    prof = _profile(profile_path, model)
    res = cyclic_solve(model, prof, cycle_tol=cycle_tol, max_periods=max_periods, rtol=rtol, atol=atol,
                       interpolation=interpolation)
    if csv_path:
        _write_csv(csv_path, ["time_s"] + [f"T_{lab}_K" for lab in _labels(model)], [res.times, res.orbit])

    click.echo(f"converged in {res.periods_used} periods; mismatches [K]: "
               + " ".join(f"{d:.2e}" for d in res.mismatches))
    click.echo(f"contraction ratio per period: {res.contraction_ratio():.3f}")
    _celsius_table(_labels(model), res.orbit.min(axis=0) - KELVIN_OFFSET,
                   res.orbit.max(axis=0) - KELVIN_OFFSET, names=["min [C]", "max [C]"])


@cli.command("compare")
@model_opt
@profile_opt
@click.option("--linear", "linear_path", type=click.Path(exists=True, dir_okay=False),
              help="CSV from 'periodic' (default: compute it).")
@click.option("--oracle", "oracle_path", type=click.Path(exists=True, dir_okay=False),
              help="CSV from 'cycle' (default: compute it).")
@click.option("--order", type=click.IntRange(1, 2), default=2, show_default=True)
@click.option("--cesaro", is_flag=True)
@click.option("--cycle-tol", type=click.FloatRange(min=0, min_open=True), default=1e-3, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write oracle - linear here.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the error summary here.")
def compare_cmd(model_path, profile_path, linear_path, oracle_path, order, cesaro, cycle_tol,
                csv_path, json_path):
    """Deviation of the linear solution from the nonlinear periodic orbit."""
    model = _model(model_path)
    N = model.node_count
    prof = None if (linear_path and oracle_path) else _profile(profile_path, model)
    if linear_path:
        t_lin, lin = _read_temperature_csv(linear_path, N)
    else:
        sol = solve_periodic(model, prof, order=order, cesaro=cesaro)
        t_lin, lin = sol.times, sol.total
    if oracle_path:
        t_orc, orc = _read_temperature_csv(oracle_path, N)
    else:
        res = cyclic_solve(model, prof, cycle_tol=cycle_tol)
        t_orc, orc = res.times, res.orbit
    if t_lin.shape != t_orc.shape or not np.allclose(t_lin, t_orc, rtol=1e-12, atol=1e-9):
        raise ValueError(f"sample grids differ: {t_lin.size} linear vs {t_orc.size} oracle samples")
    rep = compare(lin, orc, times=t_lin)
    labels = _labels(model)
    if csv_path:
        _write_csv(csv_path, ["time_s"] + [f"dT_{lab}_K" for lab in labels], [rep.times, rep.delta])
    if json_path:
        _write_json(json_path, rep.summary())

    width = max(len(s) for s in labels)
    click.echo(f"{'node':>4}  {'label':<{width}}  {'max|dT| [K]':>11}  {'at t [s]':>9}")
    for i, lab in enumerate(labels):
        k = rep.argmax_positions[i]
        click.echo(f"{i + 1:>4}  {lab:<{width}}  {rep.max_abs[i]:>11.4f}  {rep.times[k]:>9.1f}")


@cli.command()
@model_opt
@click.option("--duty", type=float, default=0.7, show_default=True, help="Sunlit fraction, in (0, 1).")
@click.option("--baseline", type=float, default=0.2, show_default=True,
              help="Eclipse input relative to sunlit input, in [0, 1).")
@click.option("--hard-steps", is_flag=True, help="Discontinuous eclipse entry and exit.")
@click.option("--n", "n", type=int, default=111, show_default=True, help="Samples per period (>= 8).")
@click.option("--period", type=click.FloatRange(min=0, min_open=True), default=6660.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--means", type=str, default=None,
              help="Comma-separated mean inputs in W (default: the model's mean_inputs).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Output CSV (default: stdout).")
def genprofile(model_path, duty, baseline, hard_steps, n, period, seed, means, out_path):
    """Write a deterministic synthetic eclipse heat-input profile."""
    model = _model(model_path)
    mean_vals = None
    if means is not None:
        try:
            mean_vals = [float(x) for x in means.split(",")]
        except ValueError:
            raise click.BadParameter(f"not a comma-separated list of numbers: {means!r}", param_hint="--means")
    prof = synthetic_eclipse_profile(model, means=mean_vals, n=n, period=period, duty=duty,
                                     baseline=baseline, hard_steps=hard_steps, seed=seed)
    text = format_profile(prof, _labels(model))
    if out_path:
        Path(out_path).write_text(text)
        load = total_load(prof)
        click.echo(f"wrote {n} samples over {period:g} s to {out_path}; total load "
                   f"{load.min():.2f} .. {load.max():.2f} W (mean {load.mean():.2f} W)")
    else:
        click.echo(text, nl=False)


def main(argv: Optional[list] = None) -> int:
    """Run the CLI; returns 0 on success, 1 on domain errors, 2 on usage errors."""
    try:
        cli.main(args=argv, prog_name="orbtherm", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except (OrbthermError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
