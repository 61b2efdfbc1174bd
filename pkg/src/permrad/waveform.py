"""Complex-baseband synthesis of stepped-frequency pulse trains.

Each waveform is M back-to-back rectangular pulses of width T; pulse m
carries the tone selected by the permutation entry perm[m].  Tones are
spaced by an integer number of cycles per pulse so that distinct tones
are orthogonal over a single pulse.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .lehmer import validate_permutation


@dataclass(frozen=True)
class WaveformParams:
    """Geometry and scaling of one waveform.

    m            number of pulses / tones
    t            pulse width in seconds
    delta_f      tone spacing in Hz; delta_f * t must be a positive integer
    f0           lowest tone frequency in Hz
    energy       total waveform energy
    oversampling samples per pulse; defaults to 8 * m * (delta_f * t),
                 four times the Nyquist floor for the swept band
    """

    m: int
    t: float
    delta_f: float
    f0: float = 0.0
    energy: float = 1.0
    oversampling: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"m must be at least 1, got {self.m}")
        if not self.t > 0:
            raise ValidationError(f"pulse width must be positive, got {self.t}")
        if not self.energy > 0:
            raise ValidationError(f"energy must be positive, got {self.energy}")
        if self.f0 < 0:
            raise ValidationError(f"base frequency must be non-negative, got {self.f0}")
        q = self.delta_f * self.t
        if abs(q - round(q)) > 1e-9 * max(1.0, abs(q)) or round(q) < 1:
            raise ValidationError(
                f"delta_f * t must be a positive integer for tone orthogonality, got {q}"
            )
        if self.samples_per_pulse < 2 * self.m * self.spacing_periods:
            raise ValidationError(
                f"oversampling {self.samples_per_pulse} is below the Nyquist floor "
                f"{2 * self.m * self.spacing_periods} for the swept band"
            )

    @property
    def spacing_periods(self) -> int:
        """delta_f * t as an exact integer (cycles of the tone spacing per pulse)."""
        return int(round(self.delta_f * self.t))

    @property
    def samples_per_pulse(self) -> int:
        if self.oversampling is not None:
            return int(self.oversampling)
        return 8 * self.m * self.spacing_periods

    @property
    def dt(self) -> float:
        return self.t / self.samples_per_pulse

    @property
    def sample_rate(self) -> float:
        return self.samples_per_pulse / self.t

    @property
    def duration(self) -> float:
        return self.m * self.t

    @property
    def amplitude(self) -> float:
        """Constant envelope value sqrt(energy / (m t))."""
        return sqrt(self.energy / (self.m * self.t))


@dataclass(frozen=True)
class ComplexSignal:
    """Uniformly sampled complex baseband signal."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def energy(self) -> float:
        """Discrete energy sum(|s|^2) * dt."""
        return float(np.sum(np.abs(self.samples) ** 2)) / self.sample_rate


def tone_frequencies(perm: Sequence[int], params: WaveformParams) -> np.ndarray:
    """Per-pulse tone frequencies f0 + perm[m] * delta_f in Hz."""
    _check_perm(perm, params)
    return params.f0 + np.asarray(perm, dtype=float) * params.delta_f


def synthesize(perm: Sequence[int], params: WaveformParams) -> ComplexSignal:
    """Sample the waveform for ``perm`` on a uniform grid over [0, m*t).

    Pulse boundaries are left-closed: the sample at t = m*t belongs to
    pulse m, which keeps pulse supports disjoint and the discrete energy
    exactly equal to params.energy for this constant-modulus signal.
    """
    freqs = tone_frequencies(perm, params)
    spp = params.samples_per_pulse
    # time within the owning pulse for every sample
    tt = np.tile(np.arange(spp) * params.dt, params.m)
    f_per_sample = np.repeat(freqs, spp)
    samples = params.amplitude * np.exp(2j * np.pi * f_per_sample * tt)
    return ComplexSignal(samples=samples, sample_rate=params.sample_rate)


def _check_perm(perm: Sequence[int], params: WaveformParams) -> None:
    if len(perm) != params.m:
        raise ValidationError(
            f"permutation length {len(perm)} does not match m={params.m}"
        )
    validate_permutation(perm)
