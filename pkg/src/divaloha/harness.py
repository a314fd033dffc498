"""Command-line front end.

Four subcommands: ``analytic`` evaluates the closed-form curves, ``simulate``
runs the Monte Carlo sweep, ``compare`` runs both and applies an agreement
policy per load, ``threshold`` prints the link budget numbers. Results are
emitted as CSV (fixed column set, byte-deterministic for a given spec) or
JSON (same rows plus a metadata block).

Durations are given in symbols, or in microseconds with a ``us`` suffix that
is converted through ``--ts``. A JSON config file can preload any option;
command-line flags win over the file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytic import analytic_curve
from .config import SystemConfig
from .errors import ConfigError, DivalohaError, InvalidParameterError
from .link import LinkModel
from .simulator import RNG_ALGORITHM, RNG_STREAM_RULE, sweep

EXIT_OK = 0
EXIT_COMPARE_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

OUT_DIR_ENV = "DIVALOHA_OUT_DIR"

CSV_COLUMNS = (
    "G",
    "n_tx",
    "plr_analytic",
    "thr_analytic",
    "plr_sim",
    "plr_stderr",
    "thr_sim",
    "abs_diff",
    "pass",
)

_MODES = ("analytic", "simulate", "compare", "threshold")
_POLICIES = ("tight", "lower-bound")
_TIGHT_FLOOR = 0.02
_TIGHT_SIGMA = 4.0
_LOWER_BOUND_SIGMA = 2.0
_AUTO_TIGHT_RATIO = 100.0


class UsageError(DivalohaError):
    """Bad flags or an inconsistent run specification."""


@dataclass(frozen=True)
class RunSpec:
    """Fully resolved description of one harness invocation."""

    mode: str
    frame_len: int | None
    burst_len: int
    copies: int
    symbol_time_us: float
    modulation_order: int
    code_rate: float
    snr_db: float
    snir_dec_db: float | None
    loads: tuple[float, ...]
    rounds: int
    seed: int
    workers: int
    policy: str | None
    out_format: str
    out_path: str | None

    def system_config(self) -> SystemConfig:
        return SystemConfig(
            frame_len=self.frame_len,
            burst_len=self.burst_len,
            copies=self.copies,
            symbol_time=self.symbol_time_us * 1e-6,
        )

    def link_model(self) -> LinkModel:
        return LinkModel.from_parameters(
            self.modulation_order,
            self.code_rate,
            self.snr_db,
            self.burst_len,
            self.snir_dec_db,
        )


def _parse_ts(text: str) -> float:
    """Symbol time in microseconds; a 'us' suffix is allowed and redundant."""
    raw = text[:-2] if text.endswith("us") else text
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"cannot parse symbol time {text!r}") from None
    if not value > 0:
        raise UsageError(f"symbol time must be > 0, got {text!r}")
    return value


def _duration_to_symbols(text: str, ts_us: float, flag: str) -> int:
    """A bare number is a symbol count; with a 'us' suffix it is a duration
    converted through the symbol time and must land on a whole symbol."""
    if text.endswith("us"):
        try:
            micros = float(text[:-2])
        except ValueError:
            raise UsageError(f"cannot parse {flag} duration {text!r}") from None
        value = micros / ts_us
    else:
        try:
            value = float(text)
        except ValueError:
            raise UsageError(f"cannot parse {flag} value {text!r}") from None
    rounded = round(value)
    if abs(value - rounded) > 1e-9 * max(1.0, abs(value)):
        raise UsageError(
            f"{flag} = {text!r} is {value} symbols, not a whole number"
        )
    if rounded < 1:
        raise UsageError(f"{flag} must be at least 1 symbol, got {text!r}")
    return int(rounded)


def _parse_loads(value) -> tuple[float, ...]:
    """Comma list, single value, or start:stop:step grid (stop inclusive)."""
    if isinstance(value, (list, tuple)):
        items = [float(v) for v in value]
    else:
        text = str(value)
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"load grid must be start:stop:step, got {text!r}")
            try:
                start, stop, step = (float(p) for p in parts)
            except ValueError:
                raise UsageError(f"cannot parse load grid {text!r}") from None
            if step <= 0:
                raise UsageError(f"load grid step must be > 0, got {step}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            if count < 1:
                raise UsageError(f"load grid {text!r} is empty")
            # round off the accumulated step error so 0.1:1.5:0.1 gives 0.3, not 0.30000000000000004
            items = [round(start + i * step, 10) for i in range(count)]
        else:
            try:
                items = [float(p) for p in text.split(",")]
            except ValueError:
                raise UsageError(f"cannot parse loads {value!r}") from None
    if not items:
        raise UsageError("loads must not be empty")
    for g in items:
        if g < 0:
            raise UsageError(f"loads must be >= 0, got {g}")
    return tuple(items)


def _parse_int(value, flag: str, minimum: int) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise UsageError(f"cannot parse {flag} value {value!r}") from None
    if out < minimum:
        raise UsageError(f"{flag} must be >= {minimum}, got {out}")
    return out


def _parse_float(value, flag: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"cannot parse {flag} value {value!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divaloha",
        description="Packet loss and throughput of two-copy asynchronous diversity Aloha",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in _MODES:
        p = sub.add_parser(mode, help=f"{mode} run")
        p.add_argument("--config", help="JSON file preloading any option below")
        p.add_argument("--tf", help="frame length (symbols, or e.g. '100000us')")
        p.add_argument("--tau", help="burst length (symbols, or e.g. '1000us')")
        p.add_argument("--ts", help="symbol time in microseconds (default 1)")
        p.add_argument("--copies", help="copies per packet (default 2)")
        p.add_argument("--mod", help="modulation order (default 4)")
        p.add_argument("--rate", help="code rate (default 0.5)")
        p.add_argument("--snr-db", help="burst SNR in dB (default 10)")
        p.add_argument(
            "--snir-dec-db", help="decoder SNIR threshold override in dB"
        )
        p.add_argument(
            "--loads", help="normalized load grid: start:stop:step or comma list"
        )
        p.add_argument("--rounds", help="simulated frames per load (default 10000)")
        p.add_argument("--seed", help="master seed (default 1)")
        p.add_argument("--workers", help="process count (default 1)")
        p.add_argument(
            "--policy",
            choices=_POLICIES,
            help="compare policy (default: by frame/burst ratio)",
        )
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--out", help="output path (default: stdout)")
    return parser


_DEFAULTS = {
    "tf": None,
    "tau": None,
    "ts": "1",
    "copies": "2",
    "mod": "4",
    "rate": "0.5",
    "snr_db": "10",
    "snir_dec_db": None,
    "loads": None,
    "rounds": "10000",
    "seed": "1",
    "workers": "1",
    "policy": None,
    "format": "csv",
    "out": None,
}


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = set(data) - set(_DEFAULTS)
    if unknown:
        raise UsageError(
            f"config file {path} has unknown keys: {', '.join(sorted(unknown))}"
        )
    return data


def parse_spec(argv) -> RunSpec:
    """Resolve argv (plus any config file) into a RunSpec.

    Precedence: command line, then config file, then built-in defaults.
    """
    ns = _build_parser().parse_args(argv)
    from_file = _load_config_file(ns.config) if ns.config else {}

    def pick(dest: str):
        cli = getattr(ns, dest)
        if cli is not None:
            return cli
        if dest in from_file and from_file[dest] is not None:
            return from_file[dest]
        return _DEFAULTS[dest]

    mode = ns.mode
    ts_us = _parse_ts(str(pick("ts")))

    tau_raw = pick("tau")
    if tau_raw is None:
        raise UsageError("--tau is required")
    burst_len = _duration_to_symbols(str(tau_raw), ts_us, "--tau")

    tf_raw = pick("tf")
    if tf_raw is None and mode != "threshold":
        raise UsageError(f"--tf is required for {mode}")
    frame_len = (
        None if tf_raw is None else _duration_to_symbols(str(tf_raw), ts_us, "--tf")
    )

    copies = _parse_int(pick("copies"), "--copies", 1)
    modulation_order = _parse_int(pick("mod"), "--mod", 2)
    code_rate = _parse_float(pick("rate"), "--rate")
    if not 0.0 < code_rate <= 1.0:
        raise UsageError(f"--rate must be in (0, 1], got {code_rate}")
    snr_db = _parse_float(pick("snr_db"), "--snr-db")
    snir_raw = pick("snir_dec_db")
    snir_dec_db = None if snir_raw is None else _parse_float(snir_raw, "--snir-dec-db")

    loads_raw = pick("loads")
    if mode == "threshold":
        loads = ()
    else:
        if loads_raw is None:
            raise UsageError(f"--loads is required for {mode}")
        loads = _parse_loads(loads_raw)

    rounds = _parse_int(pick("rounds"), "--rounds", 1)
    seed = _parse_int(pick("seed"), "--seed", 0)
    workers = _parse_int(pick("workers"), "--workers", 1)

    policy = pick("policy")
    if policy is not None and policy not in _POLICIES:
        raise UsageError(f"--policy must be one of {_POLICIES}, got {policy!r}")
    out_format = pick("format")
    if out_format not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {out_format!r}")
    out_path = pick("out")

    if frame_len is not None:
        if copies * burst_len > frame_len:
            raise UsageError(
                f"{copies} copies of {burst_len} symbols cannot fit in a "
                f"{frame_len}-symbol frame"
            )
        if mode in ("analytic", "compare"):
            if copies != 2:
                raise UsageError(
                    f"the analytic model needs --copies 2, got {copies}"
                )
            if frame_len < 5 * burst_len - 2:
                raise UsageError(
                    f"the analytic model needs --tf >= 5*tau - 2 "
                    f"({5 * burst_len - 2}), got {frame_len}"
                )

    return RunSpec(
        mode=mode,
        frame_len=frame_len,
        burst_len=burst_len,
        copies=copies,
        symbol_time_us=ts_us,
        modulation_order=modulation_order,
        code_rate=code_rate,
        snr_db=snr_db,
        snir_dec_db=snir_dec_db,
        loads=loads,
        rounds=rounds,
        seed=seed,
        workers=workers,
        policy=policy,
        out_format=out_format,
        out_path=out_path,
    )


def spec_to_argv(spec: RunSpec) -> list[str]:
    """Inverse of parse_spec: parse_spec(spec_to_argv(s)) == s."""
    argv = [spec.mode]
    if spec.frame_len is not None:
        argv += ["--tf", str(spec.frame_len)]
    argv += ["--tau", str(spec.burst_len)]
    argv += ["--ts", repr(spec.symbol_time_us)]
    argv += ["--copies", str(spec.copies)]
    argv += ["--mod", str(spec.modulation_order)]
    argv += ["--rate", repr(spec.code_rate)]
    argv += ["--snr-db", repr(spec.snr_db)]
    if spec.snir_dec_db is not None:
        argv += ["--snir-dec-db", repr(spec.snir_dec_db)]
    if spec.mode != "threshold":
        argv += ["--loads", ",".join(repr(g) for g in spec.loads)]
    argv += ["--rounds", str(spec.rounds)]
    argv += ["--seed", str(spec.seed)]
    argv += ["--workers", str(spec.workers)]
    if spec.policy is not None:
        argv += ["--policy", spec.policy]
    argv += ["--format", spec.out_format]
    if spec.out_path is not None:
        argv += ["--out", spec.out_path]
    return argv


def resolve_policy(spec: RunSpec) -> str:
    """Explicit policy, or tight when the frame dwarfs the burst."""
    if spec.policy is not None:
        return spec.policy
    ratio = spec.frame_len / spec.burst_len
    return "tight" if ratio >= _AUTO_TIGHT_RATIO else "lower-bound"


def row_passes(row: dict, policy: str) -> bool:
    """Agreement check for one compare row.

    tight: |plr_analytic - plr_sim| within max(0.02, 4 sigma).
    lower-bound: analytic throughput must not exceed simulated by more than
    2 sigma (the model ignores effects that only ever lose extra packets,
    so it must sit at or below the simulation).
    """
    if policy == "tight":
        tol = max(_TIGHT_FLOOR, _TIGHT_SIGMA * row["plr_stderr"])
        return row["abs_diff"] <= tol
    thr_sigma = row["G"] * row["plr_stderr"]
    return row["thr_analytic"] <= row["thr_sim"] + _LOWER_BOUND_SIGMA * thr_sigma


def build_rows(spec: RunSpec) -> tuple[list[dict], str | None]:
    """Row dicts (CSV_COLUMNS keys, None where a column does not apply) and
    the policy that was applied, if any."""
    config = spec.system_config()
    link = spec.link_model()
    rows = [dict.fromkeys(CSV_COLUMNS) for _ in spec.loads]

    if spec.mode in ("analytic", "compare"):
        for row, pt in zip(rows, analytic_curve(config, link, spec.loads)):
            row["G"] = pt.load
            row["n_tx"] = pt.n_tx
            row["plr_analytic"] = pt.plr
            row["thr_analytic"] = pt.throughput
    if spec.mode in ("simulate", "compare"):
        results = sweep(
            config, link, spec.loads, spec.rounds, spec.seed, workers=spec.workers
        )
        for row, res in zip(rows, results):
            row["G"] = res.load
            row["n_tx"] = res.n_tx
            row["plr_sim"] = res.plr_mean
            row["plr_stderr"] = res.plr_stderr
            row["thr_sim"] = res.throughput_mean

    policy = None
    if spec.mode == "compare":
        policy = resolve_policy(spec)
        for row in rows:
            row["abs_diff"] = abs(row["plr_analytic"] - row["plr_sim"])
            row["pass"] = row_passes(row, policy)
    return rows, policy


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".10g")


def render_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_cell(row[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _metadata(spec: RunSpec, policy: str | None, wall_time_s: float) -> dict:
    link = spec.link_model()
    return {
        "tool": "divaloha",
        "version": __version__,
        "mode": spec.mode,
        "policy": policy,
        "frame_len": spec.frame_len,
        "burst_len": spec.burst_len,
        "copies": spec.copies,
        "symbol_time_us": spec.symbol_time_us,
        "modulation_order": spec.modulation_order,
        "code_rate": spec.code_rate,
        "rate": link.rate,
        "snr_db": spec.snr_db,
        "snir_dec_db": link.snir_dec_db,
        "max_interference": link.budget.max_interference,
        "loads": list(spec.loads),
        "rounds": spec.rounds,
        "seed": spec.seed,
        "workers": spec.workers,
        "rng_algorithm": RNG_ALGORITHM,
        "rng_stream_rule": RNG_STREAM_RULE,
        "python_version": platform.python_version(),
        "numpy_version": np.__version__,
        "wall_time_s": round(wall_time_s, 3),
    }


def render_json(rows: list[dict], metadata: dict) -> str:
    return json.dumps({"metadata": metadata, "rows": rows}, indent=2) + "\n"


def threshold_report(spec: RunSpec) -> str:
    link = spec.link_model()
    budget = link.budget
    lines = [
        f"modulation_order: {spec.modulation_order}",
        f"code_rate: {_format_cell(spec.code_rate)}",
        f"rate_bits_per_symbol: {_format_cell(link.rate)}",
        f"snir_dec_linear: {_format_cell(link.snir_dec_linear)}",
        f"snir_dec_db: {_format_cell(link.snir_dec_db)}",
        f"snr_db: {_format_cell(spec.snr_db)}",
        f"burst_len: {spec.burst_len}",
        "max_interference: "
        + (
            str(budget.max_interference)
            if budget.decodable
            else "none (snr below decoding threshold)"
        ),
    ]
    return "\n".join(lines) + "\n"


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(out_path):
        out_path = os.path.join(base, out_path)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run(spec: RunSpec) -> int:
    """Execute a resolved spec and write its output. Returns the exit code."""
    started = time.perf_counter()
    if spec.mode == "threshold":
        _write_output(threshold_report(spec), spec.out_path)
        return EXIT_OK
    rows, policy = build_rows(spec)
    if spec.out_format == "json":
        text = render_json(rows, _metadata(spec, policy, time.perf_counter() - started))
    else:
        text = render_csv(rows)
    _write_output(text, spec.out_path)
    if spec.mode == "compare" and any(row["pass"] is False for row in rows):
        return EXIT_COMPARE_FAILED
    return EXIT_OK


def main(argv=None) -> int:
    try:
        spec = parse_spec(argv)
    except UsageError as exc:
        print(f"divaloha: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return run(spec)
    except (ConfigError, InvalidParameterError, UsageError) as exc:
        print(f"divaloha: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivalohaError as exc:
        print(f"divaloha: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"divaloha: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
