"""Command-line entry point: ``dualcusum {trace,simulate,calibrate,arl,couple,verify}``.

Experiments are described by a JSON document::

    {"model": {"type": "gaussian", "mu0": -0.5, "mu1": 0.5, "sigma": 1.0},
     "thresholds": {"kL": 5, "kU": 5, "h": [6, 8, 10]},
     "schedule": {"horizon": 75, "periods": [{"start": 16, "end": 35, "state": "F1"},
                                             {"start": 51, "end": 60, "state": "F1"}]},
     "run": {"reps": 10000, "master_seed": 0, "t_max": 10000}}

Command-line flags override file values.  Exit codes: 0 success, 1 failed
verification, 2 configuration error, 3 numerical or censoring error.

Convention for the upper chart: it is reported on the ``[0, h]`` scale and
signals in control when ``rU <= h - kU``.  Its unbounded counterpart (used by
``arl --side upper``) is the non-negative reflected sum of ``-log lr``,
signalling when it reaches ``kU``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace

from .calibration import arl_markov, arl_mc, calibrate_threshold
from .charts import run_dual
from .checks import run_verification
from .distributions import DistributionPair, Regime, gaussian, make_stream
from .errors import CalibrationError, CensoringError, ConfigError
from .schedule import RegimeSchedule, two_burst_schedule
from .signals import classify
from .simulation import coupling_stats, simulate_experiment

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    pair: DistributionPair
    kL: float
    kU: float
    hs: tuple
    schedule: RegimeSchedule
    reps: int = 10_000
    master_seed: int = 0
    t_max: int = 10_000

    def policies(self):
        return [classify(self.kL, self.kU, h) for h in self.hs]

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config: expected a JSON object at top level")
        for key in ("model", "thresholds", "schedule"):
            if key not in doc:
                raise ConfigError(f"config: missing section {key!r}")
        pair = DistributionPair.from_config(doc["model"])
        th = doc["thresholds"]
        try:
            kL, kU, h = float(th["kL"]), float(th["kU"]), th["h"]
        except KeyError as exc:
            raise ConfigError(f"thresholds: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"thresholds: {exc}") from None
        hs = tuple(float(v) for v in (h if isinstance(h, list) else [h]))
        schedule = RegimeSchedule.from_config(doc["schedule"])
        run = doc.get("run", {})
        cfg = cls(pair, kL, kU, hs, schedule,
                  int(run.get("reps", 10_000)), int(run.get("master_seed", 0)), int(run.get("t_max", 10_000)))
        for i, pol_h in enumerate(cfg.hs):
            try:
                classify(kL, kU, pol_h)
            except ConfigError as exc:
                raise ConfigError(f"thresholds.h[{i}]: {exc}") from None
        return cfg

    def to_dict(self) -> dict:
        return {
            "model": self.pair.to_config(),
            "thresholds": {"kL": self.kL, "kU": self.kU, "h": list(self.hs)},
            "schedule": self.schedule.to_config(),
            "run": {"reps": self.reps, "master_seed": self.master_seed, "t_max": self.t_max},
        }


PRESETS = {
    # two charts with h = 16 and one shared threshold at 8
    "intro": ExperimentConfig(
        gaussian(), 8.0, 8.0, (16.0,),
        RegimeSchedule(150, ((41, 90, Regime.F1),)),
        reps=1, master_seed=0,
    ),
    # thresholds 5 / 5 with h in {6, 8, 10}; out of control on 16..35 and 51..60
    "upper-boundary": ExperimentConfig(
        gaussian(), 5.0, 5.0, (6.0, 8.0, 10.0), two_burst_schedule(75), reps=10_000, master_seed=0,
    ),
}


def load_config(args) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        cfg = ExperimentConfig.from_dict(doc)
    else:
        cfg = PRESETS[getattr(args, "preset", None) or "upper-boundary"]
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        changes["reps"] = args.reps
    if getattr(args, "t_max", None) is not None:
        changes["t_max"] = args.t_max
    if getattr(args, "h", None):
        changes["hs"] = tuple(args.h)
    cfg = replace(cfg, **changes)
    if cfg.reps < 1:
        raise ConfigError("run.reps must be at least 1")
    if cfg.master_seed < 0:
        raise ConfigError("run.master_seed must be non-negative")
    for i, h in enumerate(cfg.hs):
        try:
            classify(cfg.kL, cfg.kU, h)
        except ConfigError as exc:
            raise ConfigError(f"thresholds.h[{i}]: {exc}") from None
    return cfg


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_trace(args) -> int:
    cfg = load_config(args)
    if len(cfg.hs) != 1:
        raise ConfigError(f"trace needs a single h, config lists {list(cfg.hs)}; pass --h")
    trace = run_dual(cfg.pair, cfg.schedule, cfg.policies()[0], make_stream(cfg.master_seed, 0))
    _emit(trace.to_csv(), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    summary = simulate_experiment(cfg.pair, cfg.policies(), cfg.schedule, cfg.reps, cfg.master_seed, args.threads)
    _emit(summary.to_csv(), args.out)
    info = sys.stdout if args.out else sys.stderr
    for h, (false_mass, correct_mass) in summary.totals().items():
        print(f"h={h!r} scenario={classify(cfg.kL, cfg.kU, h).scenario.value} "
              f"false_mass={false_mass!r} correct_mass={correct_mass!r} reps={cfg.reps} seed={cfg.master_seed}",
              file=info)
    return EXIT_OK


def _pair(args) -> DistributionPair:
    if args.config:
        return load_config(args).pair
    return gaussian()


def cmd_arl(args) -> int:
    pair = _pair(args)
    regime = Regime.parse(args.regime)
    if args.method == "markov":
        value = arl_markov(pair, args.side, regime, args.k, args.states)
        print(f"method=markov side={args.side} regime={regime.name} k={args.k!r} states={args.states} arl={value!r}")
    else:
        est = arl_mc(pair, args.side, regime, args.k, args.reps, args.t_max, args.seed or 0, args.threads)
        print(f"method=monte-carlo side={args.side} regime={regime.name} k={args.k!r} reps={est.reps} "
              f"arl={est.mean!r} std_error={est.std_error!r} censored={est.censored_count}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    pair = _pair(args)
    regime = Regime.parse(args.regime)
    k = calibrate_threshold(pair, args.side, regime, args.target_arl, args.method, args.states,
                            args.reps, args.t_max, args.seed or 0, args.threads)
    if args.method == "markov":
        arl = arl_markov(pair, args.side, regime, k, args.states)
        extra = f"states={args.states}"
    else:
        arl = arl_mc(pair, args.side, regime, k, args.reps, args.t_max, args.seed or 0, args.threads).mean
        extra = f"reps={args.reps}"
    print(f"method={args.method} side={args.side} regime={regime.name} target_arl={args.target_arl!r} "
          f"k={k!r} arl={arl!r} {extra}")
    return EXIT_OK


def cmd_couple(args) -> int:
    pair = _pair(args)
    stats = coupling_stats(pair, args.h_value, Regime.parse(args.regime), args.reps, args.seed or 0,
                           args.t_max, args.threads)
    _emit(stats.to_csv(), args.out)
    info = sys.stdout if args.out else sys.stderr
    m, c = stats.means(), stats.censor_count
    print(f"h={stats.h!r} regime={stats.regime.name} reps={stats.reps} t_max={stats.t_max} "
          f"mean_T={m['T']!r} mean_nu_up={m['nu_up']!r} mean_nu_down={m['nu_down']!r} "
          f"censored_nu_up={c['nu_up']} censored_nu_down={c['nu_down']} "
          f"frac_down_before_up={stats.fraction_down_before_up()!r}", file=info)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_verification(threads=args.threads, quick=args.quick)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed")
    common.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker cap; never changes results")

    parser = argparse.ArgumentParser(prog="dualcusum", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", parents=[common], help="per-step trace of both charts and the signal")
    p.add_argument("--preset", choices=sorted(PRESETS), default="intro")
    p.add_argument("--h", type=float, nargs="+")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("simulate", parents=[common], help="pointwise false/correct signal rates over an h sweep")
    p.add_argument("--preset", choices=sorted(PRESETS), default="upper-boundary")
    p.add_argument("--h", type=float, nargs="+")
    p.add_argument("--reps", type=int)
    p.set_defaults(func=cmd_simulate)

    def arl_flags(p):
        p.add_argument("--side", choices=["lower", "upper"], default="lower")
        p.add_argument("--regime", default="f0")
        p.add_argument("--method", choices=["markov", "monte-carlo"], default="markov")
        p.add_argument("--states", type=int, default=100)
        p.add_argument("--reps", type=int, default=10_000)
        p.add_argument("--t-max", dest="t_max", type=int, default=1_000_000)

    p = sub.add_parser("arl", parents=[common], help="average run length for a threshold")
    arl_flags(p)
    p.add_argument("--k", type=float, required=True)
    p.set_defaults(func=cmd_arl)

    p = sub.add_parser("calibrate", parents=[common], help="threshold for a target average run length")
    arl_flags(p)
    p.add_argument("--target-arl", dest="target_arl", type=float, required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("couple", parents=[common], help="coupling time and boundary hitting times")
    p.add_argument("--h", dest="h_value", type=float, default=10.0)
    p.add_argument("--regime", default="f1")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--t-max", dest="t_max", type=int, default=10_000)
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("verify", parents=[common], help="run the exhaustive-oracle and pathwise property suite")
    p.add_argument("--quick", action="store_true", help="fewer seeds and replications")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CalibrationError, CensoringError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
