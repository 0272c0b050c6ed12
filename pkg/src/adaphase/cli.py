"""Command-line entry point.

Exit codes: 0 success, 1 invalid arguments or spec, 2 runtime failure.
Options can also come from ``--config FILE`` holding ``key = value`` lines
(keys are the long option names, with dashes or underscores); explicit
command-line flags win. Output files go to ``--out-dir``, defaulting to
``$ADAPHASE_OUTPUT_DIR`` or the current directory.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import DegenerateProbeError, InvalidConfigError
from .gaussian import SqueezedThermalProbe, mean_photons, optimal_phase, probe_from_db
from .grid import PhaseGrid

log = logging.getLogger("adaphase")

OUTPUT_ENV = "ADAPHASE_OUTPUT_DIR"
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(v)) for v in str(text).replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(str(text).replace(",", " ").split())


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidConfigError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _probe_args(p):
    g = p.add_argument_group("probe")
    g.add_argument("--squeezed-db", type=float, default=5.69, help="noise reduction below vacuum")
    g.add_argument("--antisqueezed-db", type=float, default=11.83, help="excess noise above vacuum")
    g.add_argument("--r", type=float, default=None, help="squeezing parameter (overrides dB pair)")
    g.add_argument("--n-th", type=float, default=None, help="thermal photons (with --r)")
    p.add_argument("--grid-points", type=int, default=2048)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--config", default=None)


def _sweep_args(p, n_tot_default):
    from .harness import DEFAULT_PHASES

    p.add_argument("--phases", type=_floats, default=DEFAULT_PHASES, help="comma-separated input phases")
    p.add_argument("--n-tot", type=_ints, default=n_tot_default, help="comma-separated sample budgets")
    p.add_argument("--repetitions", type=int, default=80)
    p.add_argument("--rough-fraction", type=float, default=0.1)
    p.add_argument("--modes", type=_words, default=("adaptive", "nonadaptive"))
    p.add_argument("--engine", choices=("exact", "lut"), default="exact")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--prefix", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adaphase", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.subcommands = sub.choices

    p = sub.add_parser("bounds", help="Fisher-information curve and variance bounds")
    _probe_args(p)
    p.add_argument("--n-samples", type=int, default=10_000)

    p = sub.add_parser("sweep-phase", help="variance vs input phase at one N_tot")
    _probe_args(p)
    _sweep_args(p, (10_000,))

    p = sub.add_parser("sweep-n", help="variance vs N_tot, pooled over phases")
    _probe_args(p)
    _sweep_args(p, (1000, 3000, 10_000, 30_000))

    p = sub.add_parser("bench-lut", help="lookup-table vs float throughput and accuracy")
    _probe_args(p)
    p.add_argument("--m", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=4096)
    p.add_argument("--scale", type=int, default=1 << 20)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run-one", help="single protocol run with a stage-by-stage trace")
    _probe_args(p)
    p.add_argument("--phase", type=float, default=0.7)
    p.add_argument("--n-tot", type=int, default=10_000)
    p.add_argument("--rough-fraction", type=float, default=0.1)
    p.add_argument("--mode", choices=("adaptive", "nonadaptive"), default="adaptive")
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        sub = parser.subcommands[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _probe(args) -> SqueezedThermalProbe:
    if args.r is not None:
        return SqueezedThermalProbe(args.r, args.n_th or 0.0)
    return probe_from_db(args.squeezed_db, args.antisqueezed_db)


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUTPUT_ENV) or ".")


def _spec(args, probe):
    from .harness import SweepSpec

    return SweepSpec(
        probe=probe,
        phases=args.phases,
        n_tot_values=args.n_tot,
        repetitions=args.repetitions,
        rough_fraction=args.rough_fraction,
        modes=args.modes,
        engine=args.engine,
        master_seed=args.seed,
        grid_points=args.grid_points,
        workers=args.workers,
    )


def cmd_bounds(args, probe):
    from .harness import emit_bounds

    _, scalars = emit_bounds(probe, args.n_samples, PhaseGrid(args.grid_points), _out_dir(args),
                             prefix="bounds")
    print(json.dumps(scalars, indent=2, sort_keys=True))


def cmd_sweep(args, probe):
    from .harness import sweep_n, sweep_phase

    spec = _spec(args, probe)
    if args.command == "sweep-phase":
        res = sweep_phase(spec, _out_dir(args), prefix=args.prefix or "sweep_phase")
    else:
        res = sweep_n(spec, _out_dir(args), prefix=args.prefix or "sweep_n")
    for s in res.summaries:
        where = f"phase={s.true_phase:.4f}" if s.true_phase is not None else f"phases={s.n_phases}"
        print(f"N={s.n_tot:<7d} {where} {s.mode:<12s} mean_var={s.mean_var:.4e} "
              f"std={s.std_var:.2e} mse={s.mse:.4e} sql={s.sql:.3e} ocr={s.ocr:.3e}")
    if "loglog_slope" in res.meta:
        for mode, slope in res.meta["loglog_slope"].items():
            print(f"log-log slope ({mode}): {slope:.3f}")
    for f in res.files:
        log.info("wrote %s", f)


def cmd_bench(args, probe):
    from .harness import write_atomic
    from .lut import QuantizerSpec, bench_throughput, build_table

    table = build_table(probe, PhaseGrid(args.grid_points),
                        QuantizerSpec.for_probe(probe, bins=args.bins, scale=args.scale))
    report = bench_throughput(table, args.m, seed=args.seed)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    write_atomic({_out_dir(args) / "bench_lut.json": text})
    print(text, end="")


def cmd_run_one(args, probe):
    from .protocol import ProtocolConfig, run

    cfg = ProtocolConfig(n_tot=args.n_tot, rough_fraction=args.rough_fraction,
                         grid=PhaseGrid(args.grid_points), adaptive=args.mode == "adaptive",
                         seed=args.seed)
    rec = run(probe, args.phase, cfg)
    print(f"probe         r={probe.r:.6f} n_th={probe.n_th:.6f} <n>={mean_photons(probe):.4f}")
    print(f"preparation   true phase {rec.true_phase:.6f}, phi_opt {optimal_phase(probe):.6f}")
    if args.mode == "adaptive":
        print(f"rough stage   M_R={rec.m_rough} samples -> MAP {rec.rough_estimate:.6f} "
              f"(error {rec.rough_error:+.2e})")
        print(f"feedback      LO shift {rec.feedback_shift:+.6f} -> probe at {rec.corrected_phase:.6f}")
    print(f"final stage   M_F={rec.m_final} samples -> MAP {rec.final_stage_estimate:.6f}, "
          f"PPD variance {rec.posterior_variance:.4e}")
    print(f"estimate      {rec.final_estimate:.6f} (error {rec.final_error:+.2e}"
          f"{', clamped' if rec.clamped else ''})")
    print(json.dumps(rec.as_dict(), sort_keys=True))


COMMANDS = {
    "bounds": cmd_bounds,
    "sweep-phase": cmd_sweep,
    "sweep-n": cmd_sweep,
    "bench-lut": cmd_bench,
    "run-one": cmd_run_one,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InvalidConfigError as exc:
        print(f"adaphase: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        probe = _probe(args)
        handler = COMMANDS[args.command]
    except (InvalidConfigError, ValueError) as exc:
        print(f"adaphase: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        handler(args, probe)
    except (InvalidConfigError, DegenerateProbeError) as exc:
        print(f"adaphase: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 2
        log.debug("runtime failure", exc_info=True)
        print(f"adaphase: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0
