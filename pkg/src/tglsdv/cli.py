"""Command line interface: ``tglsdv <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report
from .bias import DGP, monte_carlo_bias
from .estimator import FitResult, fit_two_groups_lsdv
from .panel import assign_groups, load_panel, read_codes, read_panel, write_panel
from .preprocess import DesignSpec, build_variables, make_frame
from .synth import data_path, write_synthetic_csv

MODELS = {"baseline": "baseline", "semi": "semi", "interact": "interact",
          "timevary": "timevary"}


def _lam(text):
    return None if text.lower() in ("none", "off", "") else float(text)


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _write(path, text):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def cmd_ingest(args):
    schema = json.loads(Path(args.schema).read_text(encoding="utf-8"))
    panel = load_panel(args.data, schema)
    if args.ssh:
        panel = assign_groups(panel, read_codes(args.ssh))
    write_panel(panel, args.out)
    print(f"panel: n={panel.n} T={panel.T} s={panel.s} -> {args.out}")


def cmd_preprocess(args):
    panel = read_panel(args.panel)
    smoothing = {"y": _lam(args.lambda_y), "lnsk": _lam(args.lambda_sk),
                 "lnn": _lam(args.lambda_n), "lnattain": _lam(args.lambda_attain)}
    built = build_variables(panel, smoothing, args.gdelta)
    write_panel(built, args.out, kind="frame")
    print(f"frame: variables={','.join(built.series)} -> {args.out}")


def _fit(panel, model, lag, trend=False, knot_grid=None):
    spec = DesignSpec(model=MODELS[model], lag=lag, trend=trend,
                      **({"knot_grid": knot_grid} if knot_grid else {}))
    frame = make_frame(panel, lag, spec)
    return fit_two_groups_lsdv(frame, spec)


def cmd_fit(args):
    panel = read_panel(args.frame)
    fit = _fit(panel, args.model, args.lag, args.trend,
               _ints(args.knot_grid) if args.knot_grid else None)
    _write(args.out, fit.dumps())
    print(report.render_coefficient_table(fit), end="")


def _report(fit, table=None, csv_path=None, plot=None, path_csv=None, effects=None):
    if table:
        _write(table, report.render_coefficient_table(fit, "text"))
    if csv_path:
        _write(csv_path, report.render_coefficient_table(fit, "csv"))
    if fit.model == "timevary":
        if plot:
            _write(plot, report.emit_dummy_path(fit, "svg"))
        if path_csv:
            _write(path_csv, report.emit_dummy_path(fit, "csv"))
    elif plot or path_csv:
        print("note: dummy path needs --model timevary; plot skipped", file=sys.stderr)
    if effects and fit.model != "timevary":
        _write(effects, json.dumps(report.fixed_effects_summary(fit), indent=1) + "\n")


def cmd_report(args):
    fit = FitResult.loads(Path(args.fit).read_text(encoding="utf-8"))
    _report(fit, args.table, args.csv, args.plot, args.path_csv, args.effects)
    if not any([args.table, args.csv, args.plot, args.path_csv, args.effects]):
        print(report.render_coefficient_table(fit), end="")


def _dgp_from_args(args):
    K = len(args.beta)
    x_sd = args.x_sd if len(args.x_sd) == K else tuple(args.x_sd[:1] * K)
    return DGP(rho=args.rho, beta=args.beta, ssh=args.ssh_value, sigma_nu=args.sigma_nu,
               sigma_eta=args.sigma_eta, x_mean=(0.0,) * K, x_sd=x_sd,
               n=args.n, s=args.s, T=args.T)


def cmd_bias(args):
    dgp = _dgp_from_args(args)
    rep = monte_carlo_bias(dgp, args.reps, args.seed, n_jobs=args.jobs)
    text = rep.render(beta_names=list(dgp.x_names[:len(dgp.beta)]))
    print(text, end="")
    if args.out:
        _write(args.out, json.dumps(rep.to_dict(), indent=1) + "\n")


def cmd_simulate(args):
    write_synthetic_csv(args.out, args.seed)
    print(f"synthetic raw panel -> {args.out}")


def cmd_run_all(args):
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    schema = json.loads(Path(args.schema).read_text(encoding="utf-8"))
    panel = assign_groups(load_panel(args.data, schema), read_codes(args.ssh))
    write_panel(panel, out / "panel.txt")
    built = build_variables(panel, {"y": args.lambda_y, "lnsk": args.lambda_sk}, args.gdelta)
    write_panel(built, out / "frame.txt", kind="frame")
    fit = _fit(built, args.model, args.lag)
    _write(out / "result.json", fit.dumps())
    tv = fit.model == "timevary"
    _report(fit, out / "table.txt", out / "table.csv",
            out / "path.svg" if tv else None, out / "path.csv" if tv else None,
            out / "effects.json")
    if args.bias_reps:
        base = fit if fit.model == "baseline" else _fit(built, "baseline", args.lag)
        dgp = DGP(rho=base.rho_hat, beta=tuple(base.beta_hat), ssh=base["SSH"],
                  eta_g=base.eta_g_hat, sigma_nu=float(base.sigma2 ** 0.5),
                  sigma_eta=float(base.eta_tilde_hat.std()), n=panel.n, s=panel.s,
                  T=panel.T - args.lag + 1,
                  x_sd=tuple(float(v) for v in _x_sd(built)))
        rep = monte_carlo_bias(dgp, args.bias_reps, args.seed)
        _write(out / "bias.json", json.dumps(rep.to_dict(), indent=1) + "\n")
        _write(out / "bias.txt", rep.render(beta_names=list(dgp.x_names)))
    print(report.render_coefficient_table(fit), end="")
    print(f"outputs in {out}")


def _x_sd(panel):
    from .design import demean
    out = []
    for v in ("lnn", "lnsk", "lnattain"):
        m = panel.series[v]
        out.append(demean(m.ravel(), panel.n, panel.T).std())
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="tglsdv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("ingest", help="read a CSV panel and tag the SSH group")
    q.add_argument("--data", required=True)
    q.add_argument("--schema", required=True, help="JSON map of roles to column names")
    q.add_argument("--ssh", help="file with SSH country codes")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_ingest)

    q = sub.add_parser("preprocess", help="HP-smooth, interpolate and log-transform")
    q.add_argument("--panel", required=True)
    q.add_argument("--lambda-y", default="100")
    q.add_argument("--lambda-sk", default="25")
    q.add_argument("--lambda-n", default="none")
    q.add_argument("--lambda-attain", default="none")
    q.add_argument("--gdelta", type=float, default=0.05)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_preprocess)

    q = sub.add_parser("fit", help="fit a two-groups LSDV model")
    q.add_argument("--frame", required=True)
    q.add_argument("--model", choices=sorted(MODELS), default="baseline")
    q.add_argument("--lag", type=int, choices=(1, 5), default=1)
    q.add_argument("--trend", action="store_true", help="add a linear time trend")
    q.add_argument("--knot-grid", help="comma-separated interior knot counts (semi)")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_fit)

    q = sub.add_parser("report", help="render tables and plots from a result file")
    q.add_argument("--fit", required=True)
    q.add_argument("--table")
    q.add_argument("--csv")
    q.add_argument("--plot", help="SVG of the time-varying dummy path")
    q.add_argument("--path-csv", help="CSV of the time-varying dummy path")
    q.add_argument("--effects", help="JSON boxplot summary of fixed effects")
    q.set_defaults(func=cmd_report)

    q = sub.add_parser("bias", help="Monte Carlo Nickell-bias assessment")
    q.add_argument("--rho", type=float, default=0.99)
    q.add_argument("--T", type=int, default=48)
    q.add_argument("--n", type=int, default=81)
    q.add_argument("--s", type=int, default=18)
    q.add_argument("--reps", type=int, default=1000)
    q.add_argument("--seed", type=int, default=42)
    q.add_argument("--beta", type=_floats, default=(-0.01, 0.03, -0.015))
    q.add_argument("--ssh-value", type=float, default=-0.15)
    q.add_argument("--sigma-nu", type=float, default=0.01)
    q.add_argument("--sigma-eta", type=float, default=0.1)
    q.add_argument("--x-sd", type=_floats, default=(1.0,))
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--out")
    q.set_defaults(func=cmd_bias)

    q = sub.add_parser("simulate", help="write the synthetic raw fixture CSV")
    q.add_argument("--seed", type=int, default=2014)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("run-all", help="ingest -> preprocess -> fit -> report")
    q.add_argument("--data", default=str(data_path("synthetic_panel.csv")))
    q.add_argument("--schema", default=str(data_path("schema.json")))
    q.add_argument("--ssh", default=str(data_path("ssh_codes.txt")))
    q.add_argument("--lag", type=int, choices=(1, 5), default=1)
    q.add_argument("--model", choices=sorted(MODELS), default="baseline")
    q.add_argument("--lambda-y", type=_lam, default=100.0)
    q.add_argument("--lambda-sk", type=_lam, default=25.0)
    q.add_argument("--gdelta", type=float, default=0.05)
    q.add_argument("--seed", type=int, default=42)
    q.add_argument("--bias-reps", type=int, default=200,
                   help="Monte Carlo replications calibrated on the fit (0 to skip)")
    q.add_argument("--outdir", default="tglsdv-out")
    q.set_defaults(func=cmd_run_all)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
