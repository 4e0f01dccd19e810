"""Command-line entry point.

Subcommands: ``simulate`` runs a configured simulation and writes the
measurement, fix, truth, and statistics files; ``localize`` re-solves
fixes from a recorded measurement file; ``evaluate`` compares fixes
against ground truth; ``schedule`` prints slot plans; ``linkbudget``
prints radio-link figures.

Exit codes: 0 success, 1 validation or domain error, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as uio
from .config import PRESET_NAMES, RunConfig, resolve_config_path
from .constants import SPEED_OF_LIGHT_M_S
from .errors import UwbError
from .evaluation import align, error_stats, percent_distance_error
from .localization import AnchorSet, combine_uncertainty
from .rf import (
    ChannelParams,
    channel_capacity_bps,
    db_to_linear,
    link_budget,
    penetration_depth_m,
    range_resolution_m,
)
from .sim import default_freshness_s, fixes_from_measurements, simulate
from .tdma import SuperframeConfig, build_schedule

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _UsageError(Exception):
    """Bad command line; maps to the validation exit code."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="uwb-rtls",
        description=(
            "Deterministic ranging simulator, position solver, and "
            "evaluation tools for a small-arena locating system."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate",
        help="run a configured simulation and write its output files",
        description=(
            "Run the slot-by-slot simulation described by a JSON config and "
            "write measurements.csv, fixes.csv, truth.csv, and stats.json."
        ),
    )
    sim.add_argument(
        "--config",
        required=True,
        help=(
            "path to a run-configuration JSON file, or a bundled preset "
            f"name ({', '.join(PRESET_NAMES)})"
        ),
    )
    sim.add_argument(
        "--out-dir",
        default=".",
        help="directory for the output files (created if absent)",
    )
    sim.add_argument(
        "--seeds",
        default=None,
        metavar="A..B",
        help=(
            "inclusive integer seed range; runs once per seed, overriding the "
            "config seed, writing into per-seed subdirectories seed_<n>/"
        ),
    )

    loc = sub.add_parser(
        "localize",
        help="re-solve position fixes from a measurements file",
        description=(
            "Read a measurements.csv, rebuild position fixes with the anchor "
            "layout and timing from the config, and write fixes.csv."
        ),
    )
    loc.add_argument(
        "--config",
        required=True,
        help="run-configuration JSON (anchor layout, superframe, clock) or preset name",
    )
    loc.add_argument("--measurements", required=True, help="input measurements.csv path")
    loc.add_argument(
        "--out-dir", default=".", help="directory for fixes.csv (created if absent)"
    )
    loc.add_argument(
        "--solver",
        choices=("least-squares", "closed-form"),
        default="least-squares",
        help="fix solver: iterative least squares or three-anchor closed form",
    )
    loc.add_argument(
        "--y-form",
        choices=("consistent", "subtract-x2"),
        default="consistent",
        help=(
            "closed-form y expression: 'consistent' solves the circle "
            "geometry; 'subtract-x2' applies an extra -x^2 term, kept for "
            "comparison output only"
        ),
    )

    ev = sub.add_parser(
        "evaluate",
        help="compare fixes against ground truth",
        description=(
            "Align fixes.csv with truth.csv by timestamp, print the error "
            "table, and write stats.json and histogram.csv."
        ),
    )
    ev.add_argument("--fixes", required=True, help="estimated fixes.csv path")
    ev.add_argument("--truth", required=True, help="ground-truth truth.csv path")
    ev.add_argument(
        "--out-dir", default=".", help="directory for stats.json and histogram.csv"
    )
    ev.add_argument(
        "--max-gap-s",
        type=float,
        default=0.5,
        help="largest timestamp gap in seconds (s) a fix may sit from a truth sample",
    )
    ev.add_argument(
        "--pct-norm",
        choices=("path_scale", "truth_distance"),
        default=None,
        help=(
            "also report percentage distance error, normalized by the mean "
            "truth step (path_scale) or the total truth path length "
            "(truth_distance)"
        ),
    )

    sched = sub.add_parser(
        "schedule",
        help="print a slot schedule or its capacity diagnosis",
        description=(
            "Build the slot schedule for a tag count and update rate; print "
            "slot,phase,tag,anchor rows, or the capacity diagnosis on failure."
        ),
    )
    sched.add_argument("--tags", type=int, required=True, help="number of tags (count)")
    sched.add_argument(
        "--rate", type=float, required=True, help="per-tag update rate in hertz (Hz)"
    )
    sched.add_argument(
        "--superframe-s",
        type=float,
        default=0.100,
        help="superframe duration in seconds (s)",
    )
    sched.add_argument(
        "--slots", type=int, default=15, help="slots per superframe (count)"
    )
    sched.add_argument(
        "--anchors", type=int, default=8, help="anchors for round-robin pairing (count)"
    )

    link = sub.add_parser(
        "linkbudget",
        help="print link figures: attenuation, SNR, capacity, resolution, depth",
        description=(
            "Evaluate the radio-link models and print a name/value table; "
            "rows needing an absent flag are omitted."
        ),
    )
    link.add_argument(
        "--distance", type=float, default=None, help="link distance in meters (m)"
    )
    link.add_argument(
        "--freq", type=float, default=6.5e9, help="carrier frequency in hertz (Hz)"
    )
    link.add_argument(
        "--bandwidth", type=float, default=500e6, help="channel bandwidth in hertz (Hz)"
    )
    link.add_argument(
        "--obstacles", type=int, default=0, help="obstructing objects on the path (count)"
    )
    link.add_argument(
        "--snr-linear",
        type=float,
        default=None,
        help="signal-to-noise power ratio (dimensionless, linear not dB)",
    )
    link.add_argument(
        "--tx-power", type=float, default=1e-3, help="transmit power in watts (W)"
    )
    link.add_argument(
        "--tx-gain",
        type=float,
        default=10.0 ** 0.25,
        help="transmit antenna gain (dimensionless linear)",
    )
    link.add_argument(
        "--rx-gain",
        type=float,
        default=10.0 ** 0.25,
        help="receive antenna gain (dimensionless linear)",
    )
    link.add_argument(
        "--obstacle-loss",
        type=float,
        default=5.0,
        help="path loss coefficient per obstacle (dB)",
    )
    link.add_argument(
        "--freq-loss-factor",
        type=float,
        default=1.0,
        help="frequency-dependent loss factor (dimensionless)",
    )
    link.add_argument(
        "--velocity",
        type=float,
        default=SPEED_OF_LIGHT_M_S,
        help="propagation speed for penetration depth in meters/second (m/s)",
    )
    link.add_argument(
        "--delay-s",
        type=float,
        default=1e-9,
        help="pulse travel time for penetration depth in seconds (s)",
    )
    return parser


def _parse_seeds(spec: str) -> range:
    parts = spec.split("..")
    if len(parts) != 2:
        raise _UsageError(f"--seeds expects A..B, got {spec!r}")
    try:
        first, last = int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--seeds bounds must be integers, got {spec!r}") from None
    if last < first:
        raise _UsageError(f"--seeds range is empty: {spec!r}")
    return range(first, last + 1)


def _run_one_simulation(cfg: RunConfig, seed: int, out_dir: Path) -> None:
    schedule = cfg.build_schedule()
    measurements, fixes = simulate(
        cfg.arena,
        cfg.trajectory,
        schedule,
        cfg.noise,
        cfg.channel,
        cfg.clock,
        seed,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    uio.write_measurements_csv(out_dir / "measurements.csv", measurements)
    uio.write_fixes_csv(out_dir / "fixes.csv", fixes)
    if len(fixes) >= 2:
        truth_times = [f.t for f in fixes]
    else:
        truth_times = [t for t, _ in cfg.trajectory.waypoints]
    truth = uio.truth_from_trajectory(cfg.trajectory, truth_times)
    uio.write_truth_csv(out_dir / "truth.csv", truth)

    aligned = align(fixes, truth, max_gap_s=0.5)
    stats = error_stats(aligned)
    uio.write_stats_json(out_dir / "stats.json", stats)
    print(
        f"seed {seed}: {len(measurements)} measurements, {len(fixes)} fixes, "
        f"mean_m {uio.fmt_float(stats.mean_m)}, sigma_m {uio.fmt_float(stats.sigma_m)}"
    )


def _cmd_simulate(args) -> int:
    config_path = resolve_config_path(args.config)
    cfg = RunConfig.from_json_file(config_path)
    base = Path(args.out_dir)
    if args.seeds is None:
        _run_one_simulation(cfg, cfg.seed, base)
    else:
        for seed in _parse_seeds(args.seeds):
            _run_one_simulation(cfg, seed, base / f"seed_{seed}")
    return EXIT_OK


def _cmd_localize(args) -> int:
    config_path = resolve_config_path(args.config)
    cfg = RunConfig.from_json_file(config_path)
    measurements = uio.read_measurements_csv(args.measurements)
    measurements.sort(key=lambda m: m.t)
    schedule = cfg.build_schedule()
    anchor_set = AnchorSet.from_positions(cfg.arena.anchors)
    sigma_pos_m = combine_uncertainty(
        SPEED_OF_LIGHT_M_S * cfg.clock.sigma_tof_s,
        SPEED_OF_LIGHT_M_S * abs(cfg.clock.sync_offset_s),
    )
    fixes = fixes_from_measurements(
        anchor_set,
        measurements,
        freshness_s=default_freshness_s(schedule),
        sigma_pos_m=sigma_pos_m,
        solver=args.solver.replace("-", "_"),
        y_variant=args.y_form.replace("-", "_"),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    uio.write_fixes_csv(out_dir / "fixes.csv", fixes)
    print(f"{len(fixes)} fixes from {len(measurements)} measurements")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    fixes = uio.read_fixes_csv(args.fixes)
    truth = uio.read_truth_csv(args.truth)
    aligned = align(fixes, truth, max_gap_s=args.max_gap_s)
    stats = error_stats(aligned)
    extra = {"n_dropped": aligned.n_dropped}
    if args.pct_norm is not None:
        mean_pct, sigma_pct = percent_distance_error(
            aligned.pairs, normalization=args.pct_norm
        )
        extra["mean_pct"] = mean_pct
        extra["sigma_pct"] = sigma_pct
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    uio.write_stats_json(out_dir / "stats.json", stats, extra=extra)
    uio.write_histogram_csv(out_dir / "histogram.csv", stats)
    print(f"n       {stats.n}")
    print(f"mean_m  {uio.fmt_float(stats.mean_m)}")
    print(f"sigma_m {uio.fmt_float(stats.sigma_m)}")
    print(f"max_m   {uio.fmt_float(stats.max_m)}")
    if args.pct_norm is not None:
        print(f"mean_pct  {uio.fmt_float(extra['mean_pct'])}")
        print(f"sigma_pct {uio.fmt_float(extra['sigma_pct'])}")
    return EXIT_OK


def _cmd_schedule(args) -> int:
    cfg = SuperframeConfig(
        superframe_s=args.superframe_s, slots_per_superframe=args.slots
    )
    schedule = build_schedule(args.tags, args.rate, cfg, n_anchors=args.anchors)
    uio.write_schedule_csv(sys.stdout, schedule)
    print(
        f"# period_superframes={schedule.period_superframes} "
        f"demand_slots={uio.fmt_float(args.tags * args.rate * cfg.superframe_s)} "
        f"capacity_slots={cfg.slots_per_superframe}"
    )
    return EXIT_OK


def _cmd_linkbudget(args) -> int:
    params = ChannelParams(
        carrier_frequency_hz=args.freq,
        bandwidth_hz=args.bandwidth,
        tx_power_w=args.tx_power,
        tx_gain_linear=args.tx_gain,
        rx_gain_linear=args.rx_gain,
        path_loss_coeff_L=args.obstacle_loss,
        freq_loss_factor_F=args.freq_loss_factor,
    )
    rows = []
    snr_linear = args.snr_linear
    if args.distance is not None:
        budget = link_budget(params, args.distance, n_obstacles=args.obstacles)
        rows.append(("attenuation_db", budget.attenuation_db))
        rows.append(("snr_db", budget.snr_db))
        if snr_linear is None:
            snr_linear = db_to_linear(budget.snr_db)
    if snr_linear is not None:
        rows.append(
            ("capacity_bps", channel_capacity_bps(params.bandwidth_hz, snr_linear))
        )
    rows.append(("range_resolution_m", range_resolution_m(params.bandwidth_hz)))
    rows.append(("penetration_depth_m", penetration_depth_m(args.velocity, args.delay_s)))
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {uio.fmt_float(value)}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "localize": _cmd_localize,
    "evaluate": _cmd_evaluate,
    "schedule": _cmd_schedule,
    "linkbudget": _cmd_linkbudget,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except UwbError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
