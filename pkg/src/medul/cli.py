"""``medul`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from medul import bench, datasets, estimators, oracle, verify
from medul.config import defaults, load_config
from medul.errors import ConfigError, MedulError

log = logging.getLogger("medul")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _lam_arg(s):
    return "auto" if s == "auto" else float(s)


def _csv_ints(s):
    return [int(v) for v in s.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="medul", description="Learning from mediated uncoupled data.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="run configuration file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    def gen_flags(sp):
        sp.add_argument("--dim", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--n-prime", type=int)
        sp.add_argument("--n-test", type=int)
        sp.add_argument("--setting", choices=["satisfied", "violated"])
        sp.add_argument("--noise-y-var", type=float)

    def fit_flags(sp):
        sp.add_argument("--method", choices=list(estimators.METHODS))
        sp.add_argument("--w", type=float)
        sp.add_argument("--lambda", dest="lam", type=_lam_arg)
        sp.add_argument("--features")
        sp.add_argument("--folds", type=int)

    g = common(sub.add_parser("generate", help="write S_X, S_Y and test CSVs"))
    gen_flags(g)

    f = common(sub.add_parser("fit", help="fit one method and write a model file"))
    fit_flags(f)
    f.add_argument("--sx")
    f.add_argument("--sy")

    pr = common(sub.add_parser("predict", help="predict from an X CSV"))
    pr.add_argument("--model")
    pr.add_argument("--x", required=True)

    ev = common(sub.add_parser("eval", help="test MSE of a model on an XY CSV"))
    ev.add_argument("--model")
    ev.add_argument("--test")

    b = common(sub.add_parser("bench", help="run the synthetic benchmark grid"))
    gen_flags(b)
    fit_flags(b)
    b.add_argument("--dims", type=_csv_ints)
    b.add_argument("--methods")
    b.add_argument("--trials", type=int)
    b.add_argument("--threads", type=int)
    b.add_argument("--timing", action="store_true", default=None)

    r = common(sub.add_parser("rate", help="median excess MSE against sample size"))
    gen_flags(r)
    fit_flags(r)
    r.add_argument("--n-list", type=_csv_ints)
    r.add_argument("--methods")
    r.add_argument("--trials", type=int)
    r.add_argument("--threads", type=int)

    v = common(sub.add_parser("verify", help="run the oracle property suites"))
    v.add_argument("--suite", default="all", help="suite name or 'all'")
    v.add_argument("--trials", type=int)
    v.add_argument("--instance", help="joint distribution file to check instead of the built-in suites")
    return p


def _effective(args):
    cfg = load_config(args.config) if args.config else defaults()
    s = cfg.sections
    gen, fit, bn, paths = s["generator"], s["fit"], s["bench"], s["paths"]
    for flag, key in (("dim", "dim"), ("n", "n"), ("n_prime", "n_prime"), ("n_test", "n_test"),
                      ("setting", "setting"), ("noise_y_var", "noise_y_var"), ("seed", "seed")):
        if getattr(args, flag, None) is not None:
            gen[key] = getattr(args, flag)
    for flag, key in (("method", "method"), ("w", "w"), ("lam", "lambda"), ("features", "features"), ("folds", "folds")):
        if getattr(args, flag, None) is not None:
            fit[key] = getattr(args, flag)
    if getattr(args, "dims", None) is not None:
        bn["dims"] = args.dims
    if getattr(args, "methods", None) is not None:
        bn["methods"] = [m for m in args.methods.split(",") if m]
    if getattr(args, "trials", None) is not None:
        bn["trials"] = args.trials
    if getattr(args, "n_list", None) is not None:
        bn["n_list"] = args.n_list
    if getattr(args, "timing", None):
        bn["timing"] = True
    if getattr(args, "seed", None) is not None:
        bn["base_seed"] = args.seed
    for key in ("sx", "sy", "test", "model"):
        if getattr(args, key, None) is not None:
            paths[key] = getattr(args, key)
    if args.out is not None:
        paths["out"] = args.out
    print(f"# effective config (digest {cfg.digest()}, seed {gen['seed']})", file=sys.stderr)
    print(cfg.to_text(), file=sys.stderr)
    return cfg


def _synthetic(cfg):
    g = cfg.sections["generator"]
    return datasets.SyntheticConfig(g["dim"], g["n"], g["n_prime"], g["n_test"], g["setting"], g["noise_y_var"], g["seed"])


def _feature_specs(fit):
    base = fit["features"]
    return fit["f_features"] or base, fit["h_features"] or base, fit["g_features"] or base


def _experiment(cfg):
    fit, bn = cfg.sections["fit"], cfg.sections["bench"]
    f, h, g = _feature_specs(fit)
    return bench.ExperimentConfig(
        generator=_synthetic(cfg), dims=tuple(bn["dims"]), methods=tuple(bn["methods"]), trials=bn["trials"],
        base_seed=bn["base_seed"], f_features=f, h_features=h, g_features=g, lam=fit["lambda"], w=fit["w"],
        folds=fit["folds"], timing=bn["timing"], out=cfg.sections["paths"]["out"],
    )


def _need(value, what):
    if not value:
        raise UsageError(f"missing {what}")
    return value


def cmd_generate(args, cfg):
    out = _need(cfg.sections["paths"]["out"], "--out directory")
    os.makedirs(out, exist_ok=True)
    sx, sy, test = datasets.gen_synthetic(_synthetic(cfg))
    for name, ps in (("sx.csv", sx), ("sy.csv", sy), ("test.csv", test)):
        datasets.write_csv(ps, os.path.join(out, name))
    print(f"wrote {len(sx)} XU, {len(sy)} UY and {len(test)} XY rows to {out}")
    return EXIT_OK


def cmd_fit(args, cfg):
    paths, fit = cfg.sections["paths"], cfg.sections["fit"]
    sx = datasets.read_csv(_need(paths["sx"], "--sx"), "XU")
    sy = datasets.read_csv(_need(paths["sy"], "--sy"), "UY")
    out = _need(paths["out"] or paths["model"], "--out model path")
    f, h, g = _feature_specs(fit)
    model = estimators.fit_method(
        fit["method"], sx, sy, f, h, g, w=fit["w"], lam=fit["lambda"], seed=cfg.sections["generator"]["seed"],
        folds=fit["folds"], grid=tuple(fit["lambda_grid"]),
    )
    estimators.save_model(model, out)
    print(f"fitted {model.method} ({model.hyper}) -> {out}")
    return EXIT_OK


def cmd_predict(args, cfg):
    paths = cfg.sections["paths"]
    model = estimators.load_model(_need(paths["model"], "--model"))
    X = datasets.read_inputs(args.x)
    pred = estimators.predict(model, X)
    datasets.write_matrix_csv(pred, paths["out"] or sys.stdout)
    return EXIT_OK


def cmd_eval(args, cfg):
    paths = cfg.sections["paths"]
    model = estimators.load_model(_need(paths["model"], "--model"))
    test = datasets.read_csv(_need(paths["test"], "--test"), "XY")
    value = estimators.mse(estimators.predict(model, test.left), test.right)
    print(f"mse {value!r}")
    if paths["out"]:
        bench.write_dicts_csv([{"method": model.method, "n_test": len(test), "mse": value}],
                              ["method", "n_test", "mse"], paths["out"])
    return EXIT_OK


def cmd_bench(args, cfg):
    exp = _experiment(cfg)
    out = _need(exp.out, "--out directory")
    _, summary = bench.run_experiment(exp, out, threads=args.threads)
    for row in summary:
        print(f"dim={row['dim']:<3} {row['method']:<8} median={row['median_mse']:.5f} "
              f"mean={row['mean_mse']:.5f} se={row['se_mse']:.5f}")
    return EXIT_OK


def cmd_rate(args, cfg):
    exp = _experiment(cfg)
    methods = tuple(cfg.sections["bench"]["methods"]) if args.methods else ("twostep",)
    out = _need(exp.out, "--out CSV path")
    records = bench.rate_study(exp, cfg.sections["bench"]["n_list"], methods, out, threads=args.threads)
    for rec in records:
        print(f"n={rec['n']:<6} {rec['method']:<8} median_excess={rec['median_excess_mse']:.5f}")
    return EXIT_OK


def cmd_verify(args, cfg):
    seed = args.seed if args.seed is not None else cfg.sections["generator"]["seed"]
    if args.instance:
        r = verify.suite_instance(oracle.load_joint(args.instance), trials=args.trials or 200, seed=seed)
        print(r.line())
        return EXIT_OK if r.passed else EXIT_VERIFY
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    unknown = [n for n in names if n not in verify.SUITES]
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; choose from {', '.join(verify.SUITES)} or all")
    results = verify.run_suites(names, trials=args.trials, seed=seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "generate": cmd_generate, "fit": cmd_fit, "predict": cmd_predict, "eval": cmd_eval,
    "bench": cmd_bench, "rate": cmd_rate, "verify": cmd_verify,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("missing subcommand")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        cfg = _effective(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MedulError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
