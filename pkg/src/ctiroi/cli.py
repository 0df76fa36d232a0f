"""Command-line front end.

    ctiroi tiei      [--scores Q,E,I,O --weights Q,E,I,O] [--config FILE]
    ctiroi roi       --config FILE
    ctiroi scenario run <finance|healthcare|retail|FILE> [--monte-carlo N --seed S]
    ctiroi gl        <single|two|portfolio> --config FILE
    ctiroi ahp       [--matrix "1,3;1/3,1"] [--config FILE]
    ctiroi sweep     [--target tiei:I --lo 1 --hi 100 --steps 100 --base finance] [--config FILE]

Common flags: --output text|csv|json, --precision K. Reports go to stdout,
diagnostics to stderr. Exit status: 0 ok, 1 invalid input, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from . import ahp, gl, risk, tiei
from .config import COMMANDS, OUTPUTS, RunConfig, builtin_scenario_config, config_from_dict, judgment, load_document
from .errors import NumericError, ValidationError
from .report import COUNT, MONEY, NUMBER, PERCENT, RATIO, TEXT, Report, render
from .sensitivity import sweep_scenario, sweep_tiei, tornado

DEFAULT_MC_SEED = 0


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors: exit 1, keep 2 for numeric failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text):
    try:
        return [[judgment(x) for x in row.split(",")] for row in text.split(";")]
    except ValidationError:
        raise argparse.ArgumentTypeError(f"expected rows like '1,3;1/3,1', got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--output", choices=OUTPUTS, help="report format (default text)")
    common.add_argument("--precision", type=int, help="display decimals (default 2)")

    p = _Parser(prog="ctiroi", description="CTI effectiveness index, ROI and investment calculations")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("tiei", parents=[common], help="effectiveness index from component scores")
    t.add_argument("--scores", type=_floats, help="Q,E,I,O component scores (0-100)")
    t.add_argument("--weights", type=_floats, help="Q,E,I,O weights summing to 1")

    sub.add_parser("roi", parents=[common], help="cost-avoidance ROI from threats and TCO")

    s = sub.add_parser("scenario", parents=[common], help="ALE / delta ALE / ROI for a threat scenario")
    s.add_argument("action", choices=["run"])
    s.add_argument("target", help="built-in scenario key or a config file")
    s.add_argument("--monte-carlo", type=int, metavar="N", help="sample N draws instead of point estimates")
    s.add_argument("--seed", type=int, help=f"Monte Carlo seed (default {DEFAULT_MC_SEED})")

    g = sub.add_parser("gl", parents=[common], help="optimal security investment")
    g.add_argument("mode", choices=["single", "two", "portfolio"])

    a = sub.add_parser("ahp", parents=[common], help="weights from a pairwise comparison matrix")
    a.add_argument("--matrix", type=_matrix, help="rows separated by ';', entries by ','; fractions like 1/3 allowed")

    w = sub.add_parser("sweep", parents=[common], help="sensitivity curves and tornado ranges")
    w.add_argument("--target", help="tiei:<Q|E|I|O> or scenario:<lef0|reduction|lm|cti_cost>")
    w.add_argument("--lo", type=float)
    w.add_argument("--hi", type=float)
    w.add_argument("--steps", type=int)
    w.add_argument("--base", help="built-in scenario for scenario sweeps")
    return p


def _document(args):
    doc = load_document(args.config) if args.config else {}
    cmd = args.command
    if cmd == "tiei" and (args.scores or args.weights):
        sec = doc.setdefault("tiei", {})
        if args.scores:
            sec["scores"] = args.scores
            sec.pop("components", None)
        if args.weights:
            sec["weights"] = args.weights
            for k in ("weights_ahp", "weights_budget"):
                sec.pop(k, None)
    elif cmd == "ahp" and args.matrix:
        sec = doc.setdefault("ahp", {})
        sec["matrix"] = args.matrix
        sec.pop("budget", None)
    elif cmd == "sweep":
        sec = doc.setdefault("sweep", {})
        for key in ("target", "lo", "hi", "steps", "base"):
            val = getattr(args, key)
            if val is not None:
                sec[key] = val
        if cmd == "sweep" and "tiei" not in doc and str(sec.get("target", "")).startswith("tiei:"):
            # sweeping the worked example by default
            doc["tiei"] = {"scores": [85, 70, 60, 90], "weights": [0.40, 0.20, 0.25, 0.15]}
    return doc


def build_config(args) -> RunConfig:
    if args.command == "scenario":
        if args.target in risk.BUILTIN_SCENARIOS:
            cfg = builtin_scenario_config(args.target)
            if args.config:
                base = config_from_dict({**load_document(args.config), "scenario": {"builtin": args.target}}, "scenario")
                cfg.currency, cfg.output, cfg.precision, cfg.seed = base.currency, base.output, base.precision, base.seed
        else:
            cfg = config_from_dict(load_document(args.target), "scenario")
        if args.monte_carlo is not None:
            if args.monte_carlo < 1:
                raise ValidationError(f"--monte-carlo needs a positive draw count, got {args.monte_carlo}")
            cfg.options["monte_carlo"] = args.monte_carlo
        if args.seed is not None:
            cfg.seed = args.seed
    else:
        cfg = config_from_dict(_document(args), args.command, getattr(args, "mode", None))
    if args.output:
        cfg.output = args.output
    if args.precision is not None:
        if args.precision < 0:
            raise ValidationError("--precision must be >= 0")
        cfg.precision = args.precision
    return cfg


# -- per-command execution --------------------------------------------------------------


def _run_tiei(cfg):
    p = cfg.payload
    if "scores" in p:
        res = tiei.compute_tiei(p["scores"], p["weights"], p["notes"])
    else:
        res = tiei.tiei_from_measurements(p["rubrics"], p["raws"], p["weights"], p["policies"])
    rep = Report("tiei", "Threat Intelligence Effectiveness Index", currency=cfg.currency)
    rep.add("tiei", "TIEI", res.tiei).add("linear", "Linear", res.linear)
    rep.add("gap", "Linear - TIEI", res.linear - res.tiei)
    rep.columns = ["component", "score", "weight"]
    rep.rows = [[c, s, w] for c, s, w in zip(tiei.COMPONENTS, res.component_scores.as_tuple(), res.weights.as_tuple())]
    rep.notes = list(res.annotations)
    return rep


def _run_roi(cfg):
    p = cfg.payload
    tco = risk.compute_tco(p["tco"])
    roi = risk.roi_cost_avoidance(p["threats"], tco)
    avoided = sum(t.p * t.c * t.m for t in p["threats"])
    rep = Report("roi", "Cost-avoidance ROI", currency=cfg.currency)
    rep.add("tco", "TCO", tco, MONEY).add("avoided", "Expected loss avoided", avoided, MONEY)
    rep.add("roi_percent", "ROI", roi, PERCENT)
    rep.columns = ["threat", "p", "c", "m", "avoided"]
    rep.rows = [[t.name, t.p, t.c, t.m, t.p * t.c * t.m] for t in p["threats"]]
    return rep


def _run_scenario(cfg):
    s = cfg.payload
    n = cfg.options.get("monte_carlo")
    rep = Report("scenario", f"Scenario: {s.name}", currency=s.currency)
    if n:
        seed = DEFAULT_MC_SEED if cfg.seed is None else cfg.seed
        r = risk.monte_carlo_scenario(s, n, seed)
    else:
        r = risk.evaluate_scenario(s)
    rep.add("ale0", "ALE0 (baseline)", r.ale0, MONEY)
    rep.add("ale_cti", "ALE with CTI", r.ale_cti, MONEY)
    rep.add("delta_ale", "Delta ALE", r.delta_ale, MONEY)
    rep.add("cti_cost", "CTI cost", r.cost, MONEY)
    rep.add("roi_ratio", "ROI (R_CTI)", r.roi_ratio, RATIO)
    if n:
        st = r.sample_stats
        rep.add("draws", "Draws", st.n, COUNT).add("seed", "Seed", st.seed, COUNT)
        rep.columns = ["quantity", "mean", "p5", "p50", "p95", "std"]
        for name in ("lef0", "lm", "ale0", "ale_cti", "delta_ale", "roi_ratio"):
            v = r.variable_stats[name]
            rep.rows.append([name, v.mean, v.p5, v.p50, v.p95, v.std])
    return rep


def _run_gl(cfg):
    p = cfg.payload
    mode = p["mode"]
    L = p["loss"]
    if mode == "single":
        opt = gl.optimal_investment_single(p["breach"], L, p["tol"])
    elif mode == "two":
        opt = gl.optimal_investment_two_param(p["breach"], p["multiplier"], L, p["tol"])
    else:
        opt = gl.optimize_portfolio(p["portfolio"], L, p["tol"], p["restarts"])
    rep = Report("gl", f"Optimal investment ({mode})", currency=cfg.currency)
    if mode == "portfolio":
        z = list(opt.z_star)
        rep.add("total_spend", "Total spend", sum(z), MONEY)
        rep.columns = ["control", "z_star"]
        rep.rows = [[k + 1, zi] for k, zi in enumerate(z)]
        rep.add("objective", "Spend + expected loss", opt.objective_value, MONEY)
        rep.add("bound", "Zero-spend expected loss", opt.bound, MONEY)
    else:
        rep.add("z_star", "Optimal spend z*", opt.z_star, MONEY)
        rep.add("objective", "Spend + expected loss", opt.objective_value, MONEY)
        rep.add("bound", "1/e bound", opt.bound, MONEY)
        rep.add("net_benefit", "Net benefit at z*", gl.net_benefit(p["breach"], L, opt.z_star), MONEY)
    rep.add("method", "Method", opt.method, TEXT)
    rep.add("iterations", "Iterations", opt.iterations, COUNT)
    rep.add("tolerance", "Tolerance", opt.tolerance_used, NUMBER)
    if opt.fallback:
        rep.notes.append("breach/loss curve is not convex; used grid scan + local refinement")
    return rep


def _run_ahp(cfg):
    p = cfg.payload
    rep = Report("ahp", "Criteria weights", currency=cfg.currency)
    if "matrix" in p:
        wr = ahp.derive_weights_ahp(p["matrix"], p["tol"])
        weights = wr.weights
        rep.add("lambda_max", "lambda_max", wr.lambda_max)
        rep.add("consistency_index", "Consistency index", wr.consistency_index)
        rep.add("consistency_ratio", "Consistency ratio", wr.consistency_ratio)
        rep.add("acceptable", "Acceptable (CR <= 0.10)", "yes" if wr.acceptable else "no", TEXT)
        if not wr.acceptable:
            rep.notes.append("consistency ratio above 0.10; consider revisiting the judgments")
    else:
        weights = ahp.weights_from_budget(p["budget"])
    rep.columns = ["criterion", "weight"]
    rep.rows = [[label, w] for label, w in zip(p["labels"], weights)]
    return rep


def _run_sweep(cfg):
    p = cfg.payload
    if p["mode"] == "tornado":
        bars = tornado(p["scenario"], p["spans"])
        rep = Report("sweep", f"Tornado: {p['scenario'].name}", currency=cfg.currency)
        rep.columns = ["param", "lo", "hi", "roi_lo", "roi_hi"]
        rep.rows = [[b.param, b.lo, b.hi, b.roi_lo, b.roi_hi] for b in bars]
        return rep
    spec = p["spec"]
    points = sweep_tiei(spec) if spec.kind == "tiei" else sweep_scenario(spec)
    rep = Report("sweep", f"Sweep of {spec.target}", currency=cfg.currency)
    names = ["tiei", "linear"] if spec.kind == "tiei" else ["roi_ratio"]
    rep.columns = ["x"] + names
    for pt in points:
        rep.rows.append([pt.x] + [pt.outputs.get(k) for k in names])
        rep.notes.extend(f"x={pt.x:g}: {n}" for n in pt.notes)
    return rep


_DISPATCH = {
    "tiei": _run_tiei,
    "roi": _run_roi,
    "scenario": _run_scenario,
    "gl": _run_gl,
    "ahp": _run_ahp,
    "sweep": _run_sweep,
}
assert set(_DISPATCH) == set(COMMANDS)


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute ``cfg`` and return ``(exit_status, rendered_report)``.

    Errors propagate; :func:`main` turns them into exit codes.
    """
    report = _DISPATCH[cfg.command](cfg)
    return 0, render(report, cfg.output, cfg.precision)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, text = run(build_config(args))
    except ValidationError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ArithmeticError) as exc:
        print(f"error[numeric]: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
