"""Command-line interface.

Every subcommand writes CSV (or plain lines) preceded by '#' comment
lines that echo the fully resolved configuration, including defaulted
values and the seed, so each output is reproducible from its own header.
Exit codes: 0 success, 1 validation/usage error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from math import pi

import numpy as np

from . import bounds as bnd
from . import radar, simkit
from .errors import CapabilityError, NumericError, PermradError, ValidationError
from .lehmer import (
    bits_per_block,
    permutation_to_rank,
    rank_to_permutation,
    symbol_capacity,
)
from .receiver import assignment_score, exhaustive_detect, hungarian_detect
from .waveform import WaveformParams, synthesize

# key aliases accepted in simulate config files
_CONFIG_ALIASES = {"n_antennas": "n", "snr_db_list": "snr_db"}


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _write(fh, header_pairs, lines):
    for key, value in header_pairs:
        fh.write(f"# {key}={value}\n")
    for line in lines:
        fh.write(line + "\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="permrad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, _Parser] = {}

    p = subs["encode"] = sub.add_parser("encode", help="map a data symbol to a tone permutation")
    p.add_argument("--m", type=int, required=True, help="tones per block")
    p.add_argument("--symbol", type=int, required=True, help="symbol rank (0-based)")
    p.add_argument("--bit-mode", action="store_true",
                   help="restrict symbols to the 2**floor(log2 m!) binary-addressable range")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(handler=_cmd_encode)

    p = subs["decode"] = sub.add_parser("decode", help="map a tone permutation back to its symbol")
    p.add_argument("--perm", type=_int_list, required=True,
                   help="comma-separated tone indices, e.g. 0,3,2,1")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_decode)

    p = subs["waveform"] = sub.add_parser("waveform", help="emit waveform samples as CSV t,re,im")
    p.add_argument("--m", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--symbol", type=int, default=0, help="symbol to encode (default 0)")
    group.add_argument("--perm", type=_int_list, default=None, help="explicit permutation")
    p.add_argument("--t-sec", type=float, default=1.0, help="pulse width in seconds")
    p.add_argument("--delta-f-hz", type=float, default=None,
                   help="tone spacing in Hz (default 1/t)")
    p.add_argument("--f0-hz", type=float, default=0.0, help="lowest tone frequency in Hz")
    p.add_argument("--energy", type=float, default=1.0, help="total waveform energy")
    p.add_argument("--oversampling", type=int, default=None, help="samples per pulse")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_waveform)

    p = subs["detect"] = sub.add_parser("detect", help="detect the permutation in a correlation matrix")
    p.add_argument("--matrix", required=True, help="CSV file with the square matrix ('#' comments ok)")
    p.add_argument("--receiver", choices=simkit.RECEIVERS, default="hungarian")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_detect)

    p = subs["bounds"] = sub.add_parser("bounds", help="closed-form error bounds as CSV")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", "--n-antennas", dest="n", type=int, required=True,
                   help="receive antennas")
    p.add_argument("--channel", choices=("awgn", "rician", "rayleigh"), default="awgn")
    p.add_argument("--rician-k", type=float, default=0.0, help="Rician factor (linear)")
    p.add_argument("--snr-db", "--snr-db-list", dest="snr_db", type=_float_list, required=True,
                   help="comma-separated SNR grid in dB (snr = energy/n0)")
    p.add_argument("--series-tol", type=float, default=1e-12, help="fading series truncation")
    p.add_argument("--j-max", type=int, default=200, help="fading series term cap")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_bounds)

    p = subs["simulate"] = sub.add_parser("simulate", help="Monte Carlo BLER sweep as CSV")
    p.add_argument("--config", default=None,
                   help="flat key=value file; command-line flags win over it")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--n", "--n-antennas", dest="n", type=int, default=2)
    p.add_argument("--channel", choices=("awgn", "rician", "rayleigh"), default="awgn")
    p.add_argument("--rician-k", type=float, default=0.0)
    p.add_argument("--snr-db", "--snr-db-list", dest="snr_db", type=_float_list,
                   default=(0.0, 2.0, 4.0, 6.0, 8.0, 10.0))
    p.add_argument("--trials", type=int, default=100_000, help="trials per SNR point")
    p.add_argument("--target-errors", type=int, default=None,
                   help="stop a point early once this many errors are seen")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--receiver", choices=simkit.RECEIVERS, default="hungarian")
    p.add_argument("--mode", choices=simkit.MODES, default="statistic")
    p.add_argument("--energy", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--t-sec", type=float, default=1.0, help="pulse width (sampled mode)")
    p.add_argument("--delta-f-hz", type=float, default=None, help="tone spacing (sampled mode)")
    p.add_argument("--f0-hz", type=float, default=0.0, help="base frequency (sampled mode)")
    p.add_argument("--oversampling", type=int, default=None, help="samples per pulse (sampled mode)")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_simulate)

    p = subs["af"] = sub.add_parser("af", help="ambiguity magnitude grid as CSV tau,omega_rad_s,magnitude")
    p.add_argument("--m", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--perm", type=_int_list, default=None)
    group.add_argument("--symbol", type=int, default=None)
    group.add_argument("--order", choices=("ascending", "descending"), default=None,
                       help="convenience tone orders")
    p.add_argument("--t-sec", type=float, default=1.0)
    p.add_argument("--delta-f-hz", type=float, default=None)
    p.add_argument("--f0-hz", type=float, default=0.0)
    p.add_argument("--tau-min-sec", type=float, default=None, help="default -m*t")
    p.add_argument("--tau-max-sec", type=float, default=None, help="default +m*t")
    p.add_argument("--tau-steps", type=int, default=81)
    p.add_argument("--doppler-min-hz", type=float, default=None, help="default -2/t")
    p.add_argument("--doppler-max-hz", type=float, default=None, help="default +2/t")
    p.add_argument("--doppler-steps", type=int, default=81)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_af)

    p = subs["crlb"] = sub.add_parser("crlb", help="delay/Doppler estimation bounds as CSV")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--perm", type=_int_list, default=None, help="default ascending order")
    p.add_argument("--t-sec", type=float, default=1.0)
    p.add_argument("--delta-f-hz", type=float, default=None)
    p.add_argument("--f0-hz", type=float, default=0.0)
    p.add_argument("--bt", type=float, default=100.0,
                   help="bandwidth-time product; receiver bandwidth b = bt/t")
    p.add_argument("--energy", type=float, default=1.0)
    p.add_argument("--snr-db", "--snr-db-list", dest="snr_db", type=_float_list, required=True,
                   help="SNR grid in dB; n0 = energy / snr")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_crlb)

    p = subs["selftest"] = sub.add_parser("selftest", help="run built-in golden and identity checks")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_selftest)

    return parser, subs


def _cmd_encode(args) -> int:
    cap = symbol_capacity(args.m, bit_mode=args.bit_mode)
    if not 0 <= args.symbol < cap:
        raise ValidationError(
            f"symbol {args.symbol} out of range: valid symbols are 0..{cap - 1}"
            f" ({'bit' if args.bit_mode else 'symbol'} mode, m={args.m})"
        )
    perm = rank_to_permutation(args.symbol, args.m)
    header = [
        ("command", "encode"),
        ("m", args.m),
        ("symbol", args.symbol),
        ("bit_mode", args.bit_mode),
        ("bits_per_block", bits_per_block(args.m)),
    ]
    with _open_out(args.out) as fh:
        _write(fh, header, [" ".join(str(x) for x in perm)])
    return 0


def _cmd_decode(args) -> int:
    rank = permutation_to_rank(args.perm)
    header = [
        ("command", "decode"),
        ("m", len(args.perm)),
        ("perm", ",".join(str(x) for x in args.perm)),
    ]
    with _open_out(args.out) as fh:
        _write(fh, header, [str(rank)])
    return 0


def _resolve_waveform(args) -> tuple[list[int], WaveformParams]:
    delta_f = args.delta_f_hz if args.delta_f_hz is not None else 1.0 / args.t_sec
    params = WaveformParams(
        m=args.m,
        t=args.t_sec,
        delta_f=delta_f,
        f0=args.f0_hz,
        energy=getattr(args, "energy", 1.0),
        oversampling=getattr(args, "oversampling", None),
    )
    if getattr(args, "perm", None) is not None:
        perm = args.perm
    elif getattr(args, "order", None) == "descending":
        perm = list(range(args.m))[::-1]
    elif getattr(args, "order", None) == "ascending":
        perm = list(range(args.m))
    elif getattr(args, "symbol", None) is not None:
        perm = rank_to_permutation(args.symbol, args.m)
    else:
        perm = list(range(args.m))
    return perm, params


def _cmd_waveform(args) -> int:
    perm, params = _resolve_waveform(args)
    sig = synthesize(perm, params)
    header = [
        ("command", "waveform"),
        ("m", params.m),
        ("perm", ",".join(str(x) for x in perm)),
        ("t_sec", _fmt(params.t)),
        ("delta_f_hz", _fmt(params.delta_f)),
        ("f0_hz", _fmt(params.f0)),
        ("energy", _fmt(params.energy)),
        ("oversampling", params.samples_per_pulse),
        ("sample_rate_hz", _fmt(params.sample_rate)),
    ]
    times = sig.times()
    lines = ["t,re,im"]
    lines += [
        f"{_fmt(float(t))},{_fmt(float(s.real))},{_fmt(float(s.imag))}"
        for t, s in zip(times, sig.samples)
    ]
    with _open_out(args.out) as fh:
        _write(fh, header, lines)
    return 0


def _cmd_detect(args) -> int:
    matrix = np.atleast_2d(np.loadtxt(args.matrix, delimiter=",", comments="#"))
    detect = hungarian_detect if args.receiver == "hungarian" else exhaustive_detect
    perm = detect(matrix)
    rank = permutation_to_rank(perm)
    header = [
        ("command", "detect"),
        ("matrix", args.matrix),
        ("m", matrix.shape[0]),
        ("receiver", args.receiver),
    ]
    with _open_out(args.out) as fh:
        _write(fh, header, [" ".join(str(x) for x in perm), str(rank)])
    return 0


def _cmd_bounds(args) -> int:
    cfg = bnd.SeriesConfig(tol=args.series_tol, j_max=args.j_max)
    k = args.rician_k if args.channel == "rician" else 0.0
    header = [
        ("command", "bounds"),
        ("m", args.m),
        ("n", args.n),
        ("channel", args.channel),
        ("rician_k", _fmt(k)),
        ("snr_db", ",".join(_fmt(x) for x in args.snr_db)),
        ("series_tol", _fmt(args.series_tol)),
        ("j_max", args.j_max),
        ("snr_definition", "energy/n0 per receive antenna"),
    ]
    lines = ["snr_db,ub,nn,channel,M,N,K"]
    for snr_db in args.snr_db:
        snr = 10.0 ** (snr_db / 10.0)
        if args.channel == "awgn":
            ub = bnd.union_bound_awgn(args.m, args.n, snr)
            nn = bnd.nn_awgn(args.m, args.n, snr)
        elif args.channel == "rician":
            ub = bnd.union_bound_rician(args.m, args.n, k, snr, cfg)
            nn = bnd.nn_rician(args.m, args.n, k, snr, cfg)
        else:
            ub = bnd.union_bound_rayleigh(args.m, args.n, snr)
            nn = bnd.nn_rayleigh(args.m, args.n, snr)
        lines.append(
            f"{_fmt(snr_db)},{_fmt(ub)},{_fmt(nn)},{args.channel},{args.m},{args.n},{_fmt(k)}"
        )
    with _open_out(args.out) as fh:
        _write(fh, header, lines)
    return 0


def _cmd_simulate(args) -> int:
    cfg = simkit.SimConfig(
        m=args.m,
        n=args.n,
        snr_db=tuple(args.snr_db),
        channel=args.channel,
        k=args.rician_k,
        trials=args.trials,
        target_errors=args.target_errors,
        master_seed=args.seed,
        receiver=args.receiver,
        mode=args.mode,
        energy=args.energy,
        workers=args.workers,
        t=args.t_sec,
        delta_f=args.delta_f_hz,
        f0=args.f0_hz,
        oversampling=args.oversampling,
    )
    points = simkit.run_bler_sweep(cfg)
    header = [
        ("command", "simulate"),
        ("m", cfg.m),
        ("n", cfg.n),
        ("channel", cfg.channel),
        ("rician_k", _fmt(cfg.k)),
        ("snr_db", ",".join(_fmt(x) for x in cfg.snr_db)),
        ("trials", cfg.trials),
        ("target_errors", cfg.target_errors),
        ("seed", cfg.master_seed),
        ("receiver", cfg.receiver),
        ("mode", cfg.mode),
        ("energy", _fmt(cfg.energy)),
        ("workers", cfg.workers),
        ("t_sec", _fmt(cfg.t)),
        ("delta_f_hz", _fmt(cfg.delta_f) if cfg.delta_f is not None else None),
        ("f0_hz", _fmt(cfg.f0)),
        ("oversampling", cfg.oversampling),
        ("snr_definition", "energy/n0 per receive antenna"),
    ]
    lines = ["snr_db,bler,ci_lo,ci_hi,trials,errors,M,N,channel,K,receiver,mode,seed"]
    for pt in points:
        lines.append(
            f"{_fmt(pt.snr_db)},{_fmt(pt.bler)},{_fmt(pt.ci_lo)},{_fmt(pt.ci_hi)},"
            f"{pt.trials},{pt.errors},{cfg.m},{cfg.n},{cfg.channel},{_fmt(cfg.k)},"
            f"{cfg.receiver},{cfg.mode},{cfg.master_seed}"
        )
    with _open_out(args.out) as fh:
        _write(fh, header, lines)
    return 0


def _cmd_af(args) -> int:
    perm, params = _resolve_waveform(args)
    t = params.t
    tau_min = args.tau_min_sec if args.tau_min_sec is not None else -params.duration
    tau_max = args.tau_max_sec if args.tau_max_sec is not None else params.duration
    dop_min = args.doppler_min_hz if args.doppler_min_hz is not None else -2.0 / t
    dop_max = args.doppler_max_hz if args.doppler_max_hz is not None else 2.0 / t
    tau_axis = np.linspace(tau_min, tau_max, args.tau_steps)
    omega_axis = 2.0 * pi * np.linspace(dop_min, dop_max, args.doppler_steps)
    grid = radar.af_grid(perm, params, tau_axis, omega_axis, workers=args.workers)
    header = [
        ("command", "af"),
        ("m", params.m),
        ("perm", ",".join(str(x) for x in perm)),
        ("t_sec", _fmt(params.t)),
        ("delta_f_hz", _fmt(params.delta_f)),
        ("f0_hz", _fmt(params.f0)),
        ("tau_min_sec", _fmt(float(tau_min))),
        ("tau_max_sec", _fmt(float(tau_max))),
        ("tau_steps", args.tau_steps),
        ("doppler_min_hz", _fmt(float(dop_min))),
        ("doppler_max_hz", _fmt(float(dop_max))),
        ("doppler_steps", args.doppler_steps),
        ("omega_rad_s", "2*pi*doppler_hz"),
        ("workers", args.workers),
    ]
    lines = ["tau,omega_rad_s,magnitude"]
    for i, tau in enumerate(grid.tau):
        for j, om in enumerate(grid.omega):
            lines.append(f"{_fmt(float(tau))},{_fmt(float(om))},{_fmt(float(grid.values[i, j]))}")
    with _open_out(args.out) as fh:
        _write(fh, header, lines)
    return 0


def _cmd_crlb(args) -> int:
    perm, params = _resolve_waveform(args)
    b = args.bt / params.t
    header = [
        ("command", "crlb"),
        ("m", params.m),
        ("perm", ",".join(str(x) for x in perm)),
        ("t_sec", _fmt(params.t)),
        ("delta_f_hz", _fmt(params.delta_f)),
        ("f0_hz", _fmt(params.f0)),
        ("bt", _fmt(args.bt)),
        ("bandwidth_hz", _fmt(b)),
        ("energy", _fmt(args.energy)),
        ("snr_db", ",".join(_fmt(x) for x in args.snr_db)),
        ("n0_definition", "energy/snr"),
    ]
    lines = ["snr_db,n0,crlb_tau,crlb_omega,variant"]
    indefinite = []
    for snr_db in args.snr_db:
        n0 = args.energy / 10.0 ** (snr_db / 10.0)
        try:
            full = radar.crlb_full(perm, params, n0, b)
        except NumericError:
            # the large-BT closed form loses positive definiteness when the
            # coupling entry dominates; report the gap instead of aborting
            full = (float("nan"), float("nan"))
            indefinite.append(snr_db)
        simple = radar.crlb_simplified(params, n0, b)
        lines.append(f"{_fmt(snr_db)},{_fmt(n0)},{_fmt(full[0])},{_fmt(full[1])},full")
        lines.append(f"{_fmt(snr_db)},{_fmt(n0)},{_fmt(simple[0])},{_fmt(simple[1])},simplified")
    if indefinite:
        header.append(
            ("warning",
             "fisher matrix indefinite at snr_db="
             + ",".join(_fmt(x) for x in indefinite)
             + "; full-variant rows are nan (increase --bt)")
        )
    with _open_out(args.out) as fh:
        _write(fh, header, lines)
    return 0


# reference 4x4 case: optimal assignment [2, 1, 0, 3] with objective 6
_GOLDEN_MATRIX = np.array(
    [
        [-4.0, -3.0, -2.0, -6.0],
        [-2.0, 1.0, 0.0, -4.0],
        [4.0, -2.0, 5.0, -3.0],
        [5.0, 4.0, -4.0, 3.0],
    ]
)


def _cmd_selftest(args) -> int:
    checks = []
    got = hungarian_detect(_GOLDEN_MATRIX)
    checks.append(("assignment_golden_case", got == [2, 1, 0, 3]))
    checks.append(
        ("assignment_objective", assignment_score(_GOLDEN_MATRIX, got) == 6.0)
    )
    checks.append(
        ("assignment_oracle_agreement", exhaustive_detect(_GOLDEN_MATRIX) == got)
    )
    ub = bnd.union_bound_awgn(2, 1, 1.0)
    nn = bnd.nn_awgn(2, 1, 1.0)
    q1 = bnd.qfunc(1.0)
    checks.append(("two_tone_bound_identity", ub == nn == q1))
    checks.append(("two_tone_bound_value", abs(q1 - 0.15865525393145707) < 1e-15))
    ray = bnd.union_bound_rayleigh(4, 2, 10.0)
    ric0 = bnd.union_bound_rician(4, 2, 0.0, 10.0)
    checks.append(("rayleigh_k0_identity", abs(ray - ric0) <= 1e-12 * ray))

    lines = [f"{name}: {'ok' if ok else 'FAILED'}" for name, ok in checks]
    with _open_out(args.out) as fh:
        _write(fh, [("command", "selftest")], lines)
    if not all(ok for _, ok in checks):
        raise NumericError("selftest failed", failed=[n for n, ok in checks if not ok])
    return 0


def _config_defaults(path: str) -> dict:
    """Parse a flat key=value file into typed simulate defaults."""
    converters = {
        "m": int,
        "n": int,
        "channel": str,
        "rician_k": float,
        "snr_db": _float_list,
        "trials": int,
        "target_errors": int,
        "seed": int,
        "receiver": str,
        "mode": str,
        "energy": float,
        "workers": int,
        "t_sec": float,
        "delta_f_hz": float,
        "f0_hz": float,
        "oversampling": int,
        "out": str,
    }
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            key = _CONFIG_ALIASES.get(key, key)
            if key not in converters:
                raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = converters[key](value.strip())
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            defaults = _config_defaults(args.config)
            parser, subs = build_parser()
            subs["simulate"].set_defaults(**defaults)
            args = parser.parse_args(argv)
        return args.handler(args)
    except NumericError as exc:
        sys.stderr.write(f"numeric error: {exc}\n")
        if exc.details:
            sys.stderr.write(f"details: {exc.details}\n")
        return 2
    except (ValidationError, CapabilityError, PermradError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
