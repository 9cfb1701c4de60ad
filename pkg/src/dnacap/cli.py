"""Command-line front end: bound sweeps, exponent curves, critical-beta,
symmetry reports, Monte Carlo simulation, and figure-data reproduction.

All commands are deterministic given their flags (including --seed): CSV
and JSON outputs are byte-identical across reruns.  Floats print with 9
significant digits.  Exit codes: 0 success, 1 numeric failure, 2 input
error.  The environment variable DNACAP_WORKERS sets the sweep pool size.
"""

import csv
import json
import sys

import click
import numpy as np

from . import bounds as bnd
from . import reliability as rel
from .channel import Dmc, make_bsc, validate_dmc
from .dnasim import Codebook, make_codebook, monte_carlo_error
from .errors import DnacapError, InfiniteNuMin, NoConvergence, NoFixedPointInRange, UnknownFigure
from .infotheory import uniform
from .symmetry import check_extension_symmetry

W0_ROWS = [
    [0.94, 0.02, 0.02, 0.02],
    [0.02, 0.70, 0.25, 0.03],
    [0.03, 0.02, 0.85, 0.10],
    [0.10, 0.05, 0.05, 0.80],
]


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".9g")


def load_channel(path: str) -> Dmc:
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or "rows" not in payload:
        raise DnacapError('channel file must be a JSON object with a "rows" key')
    return validate_dmc(payload["rows"])


def parse_range(text: str) -> list[float]:
    """start:stop:step, inclusive of stop up to float fuzz."""
    parts = text.split(":")
    if len(parts) != 3:
        raise DnacapError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(v) for v in parts)
    if step <= 0 or stop < start:
        raise DnacapError(f"bad range {text!r}")
    n = int(round((stop - start) / step))
    return [start + k * step for k in range(n + 1) if start + k * step <= stop + 1e-12]


def write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


@click.group()
def main():
    """Capacity, reliability, and simulation tools for the DNA storage channel."""


def _run(body):
    try:
        body()
    except (NoConvergence, NoFixedPointInRange) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(1)
    except (DnacapError, OSError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(2)


def _bounds_rows(w: Dmc, alpha: float, betas, dbar: int, grid: int):
    opt = bnd.OptimizerConfig(grid_resolution=grid)
    sweep = bnd.bounds_sweep(w, alpha, betas, dbar=dbar, opt=opt)
    nx = w.num_inputs
    header = (["beta", "lb", "ub"]
              + [f"lb_px{i}" for i in range(nx)]
              + [f"ub_px{i}" for i in range(nx)]
              + ["trunc_err"])
    rows, plot_rows = [], []
    for item in sweep:
        ub_val = None if item.ub is None else item.ub.value
        ub_px = [None] * nx if item.ub is None else list(item.ub.argmax_px)
        rows.append([fmt(item.beta), fmt(item.lb.value), fmt(ub_val)]
                    + [fmt(v) for v in item.lb.argmax_px]
                    + [fmt(v) for v in ub_px]
                    + [fmt(item.lb.truncation_error)])
        plot_rows.append({"beta": item.beta, "lb": item.lb.value, "ub": ub_val})
        if item.ub_error:
            click.echo(f"beta={item.beta:g}: upper bound unavailable ({item.ub_error})", err=True)
    return header, rows, plot_rows


@main.command("bounds")
@click.option("--channel", "channel_path", required=True, type=click.Path())
@click.option("--alpha", required=True, type=float)
@click.option("--beta", type=float, default=None, help="single beta")
@click.option("--beta-range", type=str, default=None, help="start:stop:step")
@click.option("--dbar", type=int, default=20, show_default=True)
@click.option("--grid", "grid_resolution", type=int, default=10, show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--plot/--no-plot", default=False, show_default=True)
def bounds_cmd(channel_path, alpha, beta, beta_range, dbar, grid_resolution, output_path, plot):
    """Capacity lower/upper bounds per beta, as CSV."""

    def body():
        if (beta is None) == (beta_range is None):
            raise DnacapError("provide exactly one of --beta / --beta-range")
        w = load_channel(channel_path)
        betas = [beta] if beta is not None else parse_range(beta_range)
        header, rows, plot_rows = _bounds_rows(w, alpha, betas, dbar, grid_resolution)
        write_csv(output_path, header, rows)
        if plot:
            from .plots import render_bounds

            render_bounds(plot_rows, output_path.rsplit(".", 1)[0] + ".png")

    _run(body)


@main.command("reliability")
@click.option("--channel", "channel_path", required=True, type=click.Path())
@click.option("--alpha", required=True, type=float)
@click.option("--beta", "betas", required=True, type=float, multiple=True)
@click.option("--dbar", type=int, default=10, show_default=True)
@click.option("--rates", required=True, type=str, help="start:stop:step in nats")
@click.option("--optimize-px", is_flag=True, default=False,
              help="maximize over input laws instead of using the uniform one")
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--plot/--no-plot", default=False, show_default=True)
def reliability_cmd(channel_path, alpha, betas, dbar, rates, optimize_px, output_path, plot):
    """Error-exponent lower-bound curves E(R), as CSV."""

    def body():
        w = load_channel(channel_path)
        rate_grid = parse_range(rates)
        fam = bnd.ExtensionFamily(w, dbar, with_deficit=False)
        px = uniform(w.num_inputs)
        header = (["R", "exponent", "beta"]
                  + [f"argmin_theta{d}" for d in range(dbar + 1)])
        rows, plot_rows = [], []
        for beta in sorted(betas):
            p = bnd.DnaParams(alpha=alpha, beta=beta, w=w, dbar=dbar)
            for R in rate_grid:
                if optimize_px:
                    value = rel.reliability_lower_bound(R, p, family=fam)
                    theta = [None] * (dbar + 1)
                else:
                    value, theta = rel.reliability_minimizer(R, p, px, family=fam)
                rows.append([fmt(R), fmt(value), fmt(beta)] + [fmt(t) for t in theta])
                plot_rows.append({"R": R, "exponent": value, "beta": beta})
        write_csv(output_path, header, rows)
        if plot:
            from .plots import render_reliability

            render_reliability(plot_rows, output_path.rsplit(".", 1)[0] + ".png")

    _run(body)


@main.command("critical-beta")
@click.option("--channel", "channel_path", required=True, type=click.Path())
@click.option("--alpha", required=True, type=float)
@click.option("--dbar", type=int, default=20, show_default=True)
def critical_beta_cmd(channel_path, alpha, dbar):
    """Critical molecule-length parameter, as JSON on stdout."""

    def body():
        w = load_channel(channel_path)
        out = {"alpha": alpha, "beta_cr": bnd.critical_beta(alpha, w, dbar=dbar)}
        if w.is_modulo_additive():
            out["beta_cr_uniform"] = bnd.critical_beta_uniform(alpha, w)
        click.echo(json.dumps(out, sort_keys=True))

    _run(body)


@main.command("symmetry")
@click.option("--channel", "channel_path", required=True, type=click.Path())
@click.option("--order", type=int, default=1, show_default=True,
              help="extension order to classify")
def symmetry_cmd(channel_path, order):
    """Symmetry report of the channel's merged extension, as JSON."""

    def body():
        w = load_channel(channel_path)
        report = check_extension_symmetry(w, order)
        click.echo(json.dumps(report.to_dict(), sort_keys=True))

    _run(body)


@main.command("simulate")
@click.option("--channel", "channel_path", required=True, type=click.Path())
@click.option("--alpha", required=True, type=float)
@click.option("--beta", required=True, type=float)
@click.option("--m", "--M", "num_molecules", required=True, type=int)
@click.option("--rate", required=True, type=float, help="nats per symbol")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dbar", type=int, default=None, help="decoder multiplicity cap")
def simulate_cmd(channel_path, alpha, beta, num_molecules, rate, trials, seed, dbar):
    """Monte Carlo decoding-error estimate, as JSON on stdout."""

    def body():
        w = load_channel(channel_path)
        M = num_molecules
        N = int(round(alpha * M))
        L = max(1, int(round(beta * np.log(M))))
        count = max(2, int(round(np.exp(rate * M * L))))
        px = uniform(w.num_inputs)
        codebook = make_codebook(count, M, L, px, seed)
        err, (lo, hi) = monte_carlo_error(codebook, w, N, trials, seed, px, dbar=dbar)
        click.echo(json.dumps({
            "error_rate": err, "ci_low": lo, "ci_high": hi,
            "trials": trials, "seed": seed,
        }, sort_keys=True))

    _run(body)


def _repro_fig2():
    header = ["w", "beta_cr_unif", "beta_bar", "ratio"]
    rows, plot_rows = [], []
    for k in range(1, 25):
        w = k * 0.005
        bsc = make_bsc(w)
        b_unif = bnd.critical_beta_uniform(1.0, bsc)
        b_bar = bnd.critical_beta_prior_bsc(w)
        rows.append([fmt(w), fmt(b_unif), fmt(b_bar), fmt(b_bar / b_unif)])
        plot_rows.append({"w": w, "beta_cr_unif": b_unif, "beta_bar": b_bar,
                          "ratio": b_bar / b_unif})
    return header, rows, plot_rows, "critical_beta"


def _repro_fig4():
    w = validate_dmc(W0_ROWS)
    betas = [round(1.0 + 0.1 * k, 10) for k in range(51)]
    header, rows, plot_rows = _bounds_rows(w, 5.0, betas, 20, 10)
    return header, rows, plot_rows, "bounds"


def _repro_fig5():
    w = validate_dmc(W0_ROWS)
    dbar = 10
    fam = bnd.ExtensionFamily(w, dbar, with_deficit=False)
    px = uniform(4)
    header = ["R", "exponent", "beta"] + [f"argmin_theta{d}" for d in range(dbar + 1)]
    rows, plot_rows = [], []
    for beta in [2.0, 3.0, 4.0, 5.0]:
        p = bnd.DnaParams(alpha=5.0, beta=beta, w=w, dbar=dbar)
        lb = bnd.lb_objective(px, p, family=fam)
        for R in np.linspace(0.0, lb, 21):
            value, theta = rel.reliability_minimizer(float(R), p, px, family=fam)
            rows.append([fmt(R), fmt(value), fmt(beta)] + [fmt(t) for t in theta])
            plot_rows.append({"R": float(R), "exponent": value, "beta": beta})
    return header, rows, plot_rows, "reliability"


@main.command("repro")
@click.argument("fig_id")
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--plot/--no-plot", default=True, show_default=True)
def repro_cmd(fig_id, output_path, plot):
    """Reproduce figure data (fig2, fig4, or fig5) as CSV plus a rendered
    figure alongside it."""

    def body():
        makers = {"fig2": _repro_fig2, "fig4": _repro_fig4, "fig5": _repro_fig5}
        if fig_id not in makers:
            raise UnknownFigure(f"unknown figure {fig_id!r}; expected one of {sorted(makers)}")
        header, rows, plot_rows, kind = makers[fig_id]()
        write_csv(output_path, header, rows)
        if plot:
            from . import plots

            png = output_path.rsplit(".", 1)[0] + ".png"
            if kind == "bounds":
                plots.render_bounds(plot_rows, png)
            elif kind == "reliability":
                plots.render_reliability(plot_rows, png)
            else:
                plots.render_critical_beta(plot_rows, png)

    _run(body)


if __name__ == "__main__":
    main()
