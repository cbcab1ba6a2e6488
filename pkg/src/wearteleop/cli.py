"""Command-line entry point: ``wearteleop {synth,train,run-sim,run-live,eval}``.

Exit codes: 0 success, 2 invalid input, 3 runtime fault. Failures print a
JSON object ``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import build_configs, effective_config, load_config_file
from .errors import TeleopError, ValidationError
from .io import atomic_write_text, write_jsonl
from .kinematics import ArmModel
from .metrics import DEFAULT_PAIR_TOL_US, evaluate, read_trajectory, write_trajectory
from .semg import TrainConfig, accuracy, dataset_records, load_model, read_dataset, save_model, train
from .synth import SHAPES, SensorLog, ShapeSpec, gen_shape, semg_training_windows

log = logging.getLogger("wearteleop")

EXIT_OK, EXIT_INVALID, EXIT_FAULT = 0, 2, 3


def _floats(n):
    def parse(text):
        vals = [float(v) for v in text.split(",")]
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return vals

    return parse


def _grip_schedule(text):
    out = []
    for part in text.split(","):
        profile, _, secs = part.partition(":")
        try:
            out.append((profile.strip(), float(secs)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grip segment {part!r}; use profile:seconds") from None
    return out


def _write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_synth(args):
    if args.shape is None and args.dataset_out is None:
        raise ValidationError("synth needs --shape and/or --dataset-out")
    written = {}
    if args.shape is not None:
        if args.out is None:
            raise ValidationError("--out is required with --shape")
        spec = ShapeSpec(
            args.shape,
            size=args.size,
            origin=tuple(args.origin),
            duration_s=args.duration,
            dwell_s=args.dwell,
            sigma_q=np.radians(args.sigma_q_deg),
            sigma_emg=args.sigma_emg,
            seed=args.seed,
            grip=args.grip or [],
        )
        sensor_log, truth = gen_shape(spec, ArmModel(args.l_upper, args.l_forearm))
        out = Path(args.out)
        truth_out = Path(args.truth_out) if args.truth_out else out.with_name(out.stem + "_truth.csv")
        sensor_log.write(out)
        write_trajectory(truth_out, truth)
        written.update(log=str(out), truth=str(truth_out), imu_samples=len(sensor_log.imu), emg_frames=len(sensor_log.emg))
    if args.dataset_out is not None:
        windows = semg_training_windows(args.windows_per_class, args.window_len, args.sigma_emg, args.seed)
        write_jsonl(args.dataset_out, dataset_records(windows))
        written.update(dataset=str(args.dataset_out), windows=len(windows))
    print(json.dumps(written))


def cmd_train(args):
    data = read_dataset(args.data, args.window_len)
    rng = np.random.default_rng(args.seed)
    order = rng.permutation(len(data))
    n_test = int(round(args.test_frac * len(data)))
    test = [data[i] for i in order[:n_test]]
    fit = [data[i] for i in order[n_test:]]
    model = train(fit, TrainConfig(lam=args.lam, epochs=args.epochs, lr=args.lr))
    model.config["window_len"] = args.window_len
    report = {
        "n_train": len(fit),
        "n_test": len(test),
        "train_accuracy": accuracy(model, [x for x, _ in fit], [y for _, y in fit]),
        "test_accuracy": accuracy(model, [x for x, _ in test], [y for _, y in test]) if test else None,
        "final_loss": model.config["final_loss"],
        "lr": model.config["lr"],
        "epochs": args.epochs,
    }
    save_model(model, args.model_out)
    report_out = args.report_out or str(Path(args.model_out).with_suffix(".report.json"))
    _write_json(report_out, report)
    print(json.dumps(report))


_RUN_FLAGS = {
    # dest: (type, help)
    "latency_us": (int, "channel one-way latency (us)"),
    "jitter_us": (int, "channel uniform jitter bound (us)"),
    "drop_prob": (float, "per-message drop probability"),
    "corrupt_prob": (float, "per-message single-bit corruption probability"),
    "seed": (int, "channel PRNG seed"),
    "smoothing_window": (int, "sliding-average window N"),
    "staleness_us": (int, "staleness threshold (us)"),
    "d_max": (float, "per-increment position clamp (m)"),
    "workspace_half": (float, "half-width of the workspace clamp cube (m)"),
    "debounce": (int, "consecutive decisions needed to change grip state"),
    "window_len": (int, "sEMG window length (samples)"),
    "hop": (int, "sEMG window hop (samples)"),
    "l_upper": (float, "upper-arm length (m)"),
    "l_forearm": (float, "forearm length (m)"),
    "tail_us": (int, "simulated time after the last sample (us)"),
    "semg_period_us": (int, "sEMG process period (us)"),
    "imu_period_us": (int, "IMU process period (us)"),
    "receive_period_us": (int, "receive-check process period (us)"),
    "control_period_us": (int, "control process period (us)"),
}


def _add_run_flags(p):
    p.add_argument("--config", help="TOML or JSON config file")
    p.add_argument("--channel", help="channel config file, or inline key=value,... list")
    for dest, (typ, help_) in _RUN_FLAGS.items():
        p.add_argument("--" + dest.replace("_", "-"), dest=dest, type=typ, help=help_)
    p.add_argument("--calib-p", type=_floats(3), help="robot calibration position x,y,z (m)")
    p.add_argument("--calib-q", type=_floats(4), help="robot calibration orientation qw,qx,qy,qz")


def _parse_inline(text: str) -> dict:
    out = {}
    for part in text.split(","):
        k, sep, v = part.partition("=")
        if not sep:
            raise ValidationError(f"bad channel setting {part!r}; use key=value")
        out[k.strip()] = json.loads(v)
    return out


def _run_configs(args):
    file_values = load_config_file(args.config) if args.config else {}
    if args.channel:
        chan = load_config_file(args.channel) if Path(args.channel).exists() else _parse_inline(args.channel)
        file_values = {**file_values, "channel": {**file_values.get("channel", {}), **chan.get("channel", chan)}}
    overrides = {k: getattr(args, k) for k in _RUN_FLAGS}
    overrides["calib_p"] = args.calib_p
    overrides["calib_q"] = args.calib_q
    return build_configs(file_values, overrides)


def _write_outputs(out_dir: Path, result, effective: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    if result.commanded is not None:
        write_trajectory(out_dir / "commanded.csv", result.commanded)
        changes = [0] + [i for i in range(1, len(result.grip)) if result.grip[i] != result.grip[i - 1]]
        rows = "t_us,state\n" + "".join(f"{int(result.commanded.t_us[i])},{int(result.grip[i])}\n" for i in changes if len(result.grip))
        atomic_write_text(out_dir / "grip.csv", rows)
    if result.human is not None:
        write_trajectory(out_dir / "human.csv", result.human)
        write_trajectory(out_dir / "human_raw.csv", result.human_raw)
    atomic_write_text(out_dir / "events.jsonl", result.event_log())
    _write_json(out_dir / "stats.json", result.stats)
    _write_json(out_dir / "effective_config.json", effective)


def cmd_run_sim(args):
    from .sync.sim import Scenario, run_simulation

    run_cfg, chan = _run_configs(args)
    model = load_model(args.model) if args.model else None
    scenario = Scenario(SensorLog.read(args.scenario), model, run_cfg, chan)
    result = run_simulation(scenario)
    _write_outputs(Path(args.out_dir), result, effective_config(run_cfg, chan, scenario=str(args.scenario), model=args.model))
    print(json.dumps(result.stats["host2"] | {"final_stale": result.stats["final_stale"]}))


def cmd_run_live(args):
    from .sync.live import run_live

    run_cfg, chan = _run_configs(args)
    if args.role == "host1":
        if not args.scenario:
            raise ValidationError("host1 needs --scenario (a sensor log to replay)")
        model = load_model(args.model) if args.model else None
        result = run_live("host1", args.addr, sensor_log=SensorLog.read(args.scenario), model=model, config=run_cfg,
                          connect_timeout_s=args.connect_timeout, abort_after_s=args.abort_after)
    else:
        result = run_live("host2", args.addr, config=run_cfg, duration_s=args.duration, accept_timeout_s=args.connect_timeout, linger_s=args.linger)
    _write_outputs(Path(args.out_dir), result, effective_config(run_cfg, chan, role=args.role, addr=args.addr))
    print(json.dumps(result.stats))


def cmd_eval(args):
    human = read_trajectory(args.human)
    robot = read_trajectory(args.robot)
    rep = evaluate(human, robot, args.tol_us, args.skip_us)
    table = {}
    if args.merge and Path(args.report).exists():
        table = json.loads(Path(args.report).read_text())
    table[args.shape] = rep.table()
    _write_json(args.report, table)
    print(json.dumps({"shape": args.shape, **rep.table(), "paired": rep.paired, "unpaired": rep.unpaired}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wearteleop", description="Wearable-armband teleoperation: synthesize, train, simulate, run live and evaluate.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic armband log and/or a classifier dataset")
    p.add_argument("--shape", choices=SHAPES)
    p.add_argument("--out", help="sensor log output (JSON Lines)")
    p.add_argument("--truth-out", help="ground-truth wrist trajectory (default: <out>_truth.csv)")
    p.add_argument("--size", type=float, help="side (square, triangle) or radius (circle, pentagram) in m")
    p.add_argument("--origin", type=_floats(3), default=[0.0, 0.35, 0.0], help="shape centre in the shoulder frame")
    p.add_argument("--duration", type=float, default=10.0, help="traversal time (s)")
    p.add_argument("--dwell", type=float, default=0.5, help="still time before and after the traversal (s)")
    p.add_argument("--sigma-q-deg", type=float, default=0.0, help="per-axis orientation noise (deg)")
    p.add_argument("--sigma-emg", type=float, default=1.0, help="sEMG amplitude scale")
    p.add_argument("--grip", type=_grip_schedule, help="sEMG schedule, e.g. relaxed:3,contracted:4,relaxed:4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--l-upper", type=float, default=0.30)
    p.add_argument("--l-forearm", type=float, default=0.25)
    p.add_argument("--dataset-out", help="write a labelled sEMG training set (JSON Lines)")
    p.add_argument("--windows-per-class", type=int, default=1000)
    p.add_argument("--window-len", type=int, default=100)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the grasp classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out")
    p.add_argument("--window-len", type=int, default=100)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lam", type=float, default=1e-4)
    p.add_argument("--lr", type=float, help="fixed step size (default: derived from the data)")
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run-sim", help="run both hosts on a simulated channel")
    p.add_argument("--scenario", required=True, help="sensor log (JSON Lines)")
    p.add_argument("--model", help="grasp model file")
    p.add_argument("--out-dir", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_run_sim)

    p = sub.add_parser("run-live", help="run one host over TCP")
    p.add_argument("--role", choices=("host1", "host2"), required=True)
    p.add_argument("--addr", required=True, help="HOST:PORT (host2 listens, host1 connects)")
    p.add_argument("--scenario", help="sensor log to replay (host1)")
    p.add_argument("--model", help="grasp model file (host1)")
    p.add_argument("--duration", type=float, help="host2 run time limit (s)")
    p.add_argument("--linger", type=float, default=0.3, help="host2 hold time after peer disconnect (s)")
    p.add_argument("--connect-timeout", type=float, default=10.0)
    p.add_argument("--abort-after", type=float, help="host1: drop the connection after this many seconds")
    p.add_argument("--out-dir", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_run_live)

    p = sub.add_parser("eval", help="compare human and robot trajectories")
    p.add_argument("--human", required=True)
    p.add_argument("--robot", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--shape", default="trajectory", help="row label in the report")
    p.add_argument("--tol-us", type=int, default=DEFAULT_PAIR_TOL_US)
    p.add_argument("--skip-us", type=int, help="ignore human samples before this time")
    p.add_argument("--merge", action="store_true", help="add to an existing report instead of replacing it")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValidationError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INVALID
    except (TeleopError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
