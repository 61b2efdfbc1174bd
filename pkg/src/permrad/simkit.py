"""Deterministic Monte Carlo engine for block error rate sweeps.

Trials are processed in fixed-size blocks; every block draws from its own
generator seeded by (master_seed, point_index, block_index), so results
are bit-identical for any worker count and blocks can run in parallel
with plain integer-sum reduction.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import factorial, sqrt
from typing import Iterable

import numpy as np

from .channel import CHANNEL_KINDS, ChannelParams, draw_fading_batch
from .errors import ValidationError
from .lehmer import MAX_M, rank_to_permutation
from .receiver import (
    MAX_EXHAUSTIVE_M,
    hungarian_detect,
    permutation_table,
    statistic_matrices,
)
from .waveform import WaveformParams

RECEIVERS = ("hungarian", "exhaustive")
MODES = ("statistic", "sampled")

# Fixed block sizes keep the RNG block structure independent of trial count
# and worker count.  Sampled mode materializes per-antenna sample arrays,
# hence the smaller block.
_STATISTIC_BLOCK = 8192
_SAMPLED_BLOCK = 1024

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SimConfig:
    """Full description of one BLER sweep.

    snr is energy / n0 per receive antenna; the grid is given in dB.
    ``trials`` is the per-point trial budget; with ``target_errors`` set,
    a point stops at the first block boundary where the error target has
    been met (still deterministic for any worker count).
    """

    m: int
    n: int
    snr_db: tuple[float, ...]
    channel: str = "awgn"
    k: float = 0.0
    trials: int = 100_000
    target_errors: int | None = None
    master_seed: int = 0
    receiver: str = "hungarian"
    mode: str = "statistic"
    energy: float = 1.0
    workers: int = 1
    # waveform geometry, used by sampled mode only
    t: float = 1.0
    delta_f: float | None = None
    f0: float = 0.0
    oversampling: int | None = None

    def __post_init__(self):
        if not 1 <= self.m <= MAX_M:
            raise ValidationError(f"m must be in [1, {MAX_M}], got {self.m}")
        if self.n < 1:
            raise ValidationError(f"n must be at least 1, got {self.n}")
        if len(self.snr_db) == 0:
            raise ValidationError("snr grid must not be empty")
        if self.trials < 1:
            raise ValidationError(f"trials must be at least 1, got {self.trials}")
        if self.target_errors is not None and self.target_errors < 1:
            raise ValidationError("target_errors must be at least 1 when set")
        if self.channel not in CHANNEL_KINDS:
            raise ValidationError(f"channel must be one of {CHANNEL_KINDS}, got {self.channel!r}")
        if self.receiver not in RECEIVERS:
            raise ValidationError(f"receiver must be one of {RECEIVERS}, got {self.receiver!r}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.receiver == "exhaustive" and self.m > min(8, MAX_EXHAUSTIVE_M):
            raise ValidationError(
                f"exhaustive receiver sweeps are limited to m <= 8, got m={self.m}"
            )
        if not self.energy > 0:
            raise ValidationError(f"energy must be positive, got {self.energy}")
        if self.workers < 1:
            raise ValidationError(f"workers must be at least 1, got {self.workers}")
        if self.master_seed < 0:
            raise ValidationError("master_seed must be non-negative")

    def waveform_params(self) -> WaveformParams:
        delta_f = self.delta_f if self.delta_f is not None else 1.0 / self.t
        return WaveformParams(
            m=self.m,
            t=self.t,
            delta_f=delta_f,
            f0=self.f0,
            energy=self.energy,
            oversampling=self.oversampling,
        )

    def channel_params(self, n0: float, snr_db: float) -> ChannelParams:
        k = 0.0 if self.channel == "rayleigh" else self.k
        return ChannelParams(n=self.n, k=k, n0=n0, kind=self.channel, snr_db=snr_db)

    @property
    def block_size(self) -> int:
        return _STATISTIC_BLOCK if self.mode == "statistic" else _SAMPLED_BLOCK


@dataclass(frozen=True)
class BlerPoint:
    """One sweep point with its Wilson 95% interval."""

    snr_db: float
    bler: float
    ci_lo: float
    ci_hi: float
    trials: int
    errors: int


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval; well behaved at zero and small error counts."""
    if trials < 1:
        raise ValidationError("interval needs at least one trial")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    # rounding can land a boundary an ulp inside the point estimate; the
    # interval must always contain it
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def run_bler_sweep(cfg: SimConfig) -> list[BlerPoint]:
    """Monte Carlo BLER at every SNR point of the config."""
    if cfg.mode == "sampled":
        cfg.waveform_params()  # validate geometry up front
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        return [
            _run_point(cfg, idx, pool) for idx in range(len(cfg.snr_db))
        ]
    finally:
        if pool is not None:
            pool.shutdown()


def _blocks(cfg: SimConfig) -> list[tuple[int, int]]:
    size = cfg.block_size
    full, rest = divmod(cfg.trials, size)
    out = [(i, size) for i in range(full)]
    if rest:
        out.append((full, rest))
    return out


def _run_point(cfg: SimConfig, point_idx: int, pool) -> BlerPoint:
    blocks = _blocks(cfg)
    errors = 0
    trials = 0
    if cfg.target_errors is None:
        if pool is None:
            results: Iterable[int] = (
                _run_block(cfg, point_idx, b_idx, b_size) for b_idx, b_size in blocks
            )
        else:
            results = pool.map(
                _block_worker, [(cfg, point_idx, b_idx, b_size) for b_idx, b_size in blocks]
            )
        for (_, b_size), err in zip(blocks, results):
            errors += err
            trials += b_size
    else:
        # include block k iff the error target was not met over blocks 0..k-1;
        # this prefix rule keeps the stop point worker-count independent
        wave = max(1, cfg.workers)
        pos = 0
        while pos < len(blocks) and errors < cfg.target_errors:
            batch = blocks[pos : pos + wave]
            if pool is None:
                outs = [_run_block(cfg, point_idx, b, s) for b, s in batch]
            else:
                outs = list(pool.map(_block_worker, [(cfg, point_idx, b, s) for b, s in batch]))
            for (_, b_size), err in zip(batch, outs):
                errors += err
                trials += b_size
                if errors >= cfg.target_errors:
                    break
            pos += len(batch)
        if errors < cfg.target_errors:
            warnings.warn(
                f"snr point {cfg.snr_db[point_idx]} dB: reached the {cfg.trials}-trial cap "
                f"with {errors} < {cfg.target_errors} target errors",
                stacklevel=2,
            )
    lo, hi = wilson_interval(errors, trials)
    return BlerPoint(
        snr_db=cfg.snr_db[point_idx],
        bler=errors / trials,
        ci_lo=lo,
        ci_hi=hi,
        trials=trials,
        errors=errors,
    )


def _block_worker(args) -> int:
    return _run_block(*args)


def _run_block(cfg: SimConfig, point_idx: int, block_idx: int, size: int) -> int:
    """Simulate one block of trials; returns the error count."""
    rng = np.random.default_rng([cfg.master_seed, point_idx, block_idx])
    snr = 10.0 ** (cfg.snr_db[point_idx] / 10.0)
    n0 = cfg.energy / snr
    m = cfg.m

    symbols = rng.integers(0, factorial(m), size=size)
    if m <= 8:  # table lookup; beyond this the m! table outgrows its usefulness
        perms = permutation_table(m)[symbols]
    else:
        perms = np.array([rank_to_permutation(int(s), m) for s in symbols])

    ch = cfg.channel_params(n0, cfg.snr_db[point_idx])
    h = draw_fading_batch(ch, rng, size)
    gains = np.sum(np.abs(h) ** 2, axis=1)

    if cfg.mode == "statistic":
        r_all = statistic_matrices(perms, gains, cfg.energy, n0, rng)
    else:
        r_all = _sampled_matrices(cfg, perms, h, n0, rng)

    if cfg.receiver == "exhaustive":
        detected = _exhaustive_ranks(r_all, m)
        return int(np.count_nonzero(detected != symbols))
    errors = 0
    for i in range(size):
        if hungarian_detect(r_all[i]) != list(perms[i]):
            errors += 1
    return errors


def _exhaustive_ranks(r_all: np.ndarray, m: int) -> np.ndarray:
    """Vectorized argmax over all permutations; returns Lehmer ranks."""
    table = permutation_table(m)
    batch = r_all.shape[0]
    rows = np.arange(m)[None, :]
    out = np.empty(batch, dtype=np.int64)
    # keep the (chunk, m!, m) gather below ~5e7 elements
    chunk = max(1, int(5e7 / (table.shape[0] * m)))
    for lo in range(0, batch, chunk):
        part = r_all[lo : lo + chunk]
        scores = part[:, rows, table].sum(axis=2)
        out[lo : lo + part.shape[0]] = np.argmax(scores, axis=1)
    return out


def _sampled_matrices(
    cfg: SimConfig, perms: np.ndarray, h: np.ndarray, n0: float, rng: np.random.Generator
) -> np.ndarray:
    """Full waveform-level simulation of one block's correlation matrices."""
    wf = cfg.waveform_params()
    size, m = perms.shape
    spp = wf.samples_per_pulse
    total = m * spp
    tt = np.arange(spp) * wf.dt

    freqs = wf.f0 + perms.astype(float) * wf.delta_f            # (size, m)
    tx = wf.amplitude * np.exp(2j * np.pi * freqs[:, :, None] * tt)  # (size, m, spp)
    tx = tx.reshape(size, total)

    sigma = sqrt(n0 * wf.sample_rate / 2.0)
    noise = sigma * (
        rng.standard_normal((size, cfg.n, total))
        + 1j * rng.standard_normal((size, cfg.n, total))
    )
    rx = h[:, :, None] * tx[:, None, :] + noise                  # (size, n, total)
    combined = np.einsum("bn,bns->bs", h.conj(), rx)

    tone_f = wf.f0 + np.arange(m) * wf.delta_f
    basis = np.exp(2j * np.pi * np.outer(tone_f, tt)) / sqrt(wf.t)  # (m, spp)
    pulses = combined.reshape(size, m, spp)
    return np.einsum("bps,ms->bpm", pulses, basis.conj()).real * wf.dt
