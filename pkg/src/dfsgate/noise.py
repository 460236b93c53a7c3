"""1/f charge-noise synthesis and its mapping onto exchange amplitudes.

Barrier-gate voltage noise with one-sided spectral density S(f) = N^2/f
perturbs each exchange junction multiplicatively: Omega -> Omega (1 +
deltaV/I), where the insensitivity I = Omega/|dOmega/dV| is treated as
constant.  Traces are synthesized spectrally (Gaussian coefficients
with amplitudes sqrt(S df)) on a coarse grid -- charge noise is slow
compared with the dressed-level splittings, so one sample per
``sample_interval`` time units suffices -- and attached to a schedule
as a piecewise-constant overlay.

Every trace is a pure function of (seed, trial, junction), so trials
are reproducible independent of execution order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .engine import INTRA_JUNCTIONS, NoiseOverlay, Schedule

__all__ = [
    "NoiseParams",
    "NoiseTrace",
    "dump_traces",
    "noise_traces",
    "noisy_trials",
    "perturb_schedule",
    "sample_one_over_f",
]

#: fixed per-junction substream indices; stable no matter which
#: junctions a particular schedule activates
_STREAM_INDEX = {name: i for i, name in enumerate(INTRA_JUNCTIONS)}
_STREAM_INDEX["cross"] = len(INTRA_JUNCTIONS)

#: substream index used when all junctions share one correlated trace
_SHARED_STREAM = len(INTRA_JUNCTIONS) + 1

#: log-spaced components injected per decade below the FFT fundamental
_SUB_BINS_PER_DECADE = 8


@dataclass(frozen=True)
class NoiseParams:
    """Charge-noise model parameters.

    amplitude_N and insensitivity_I are in volts; only their ratio
    enters the dynamics (fractional exchange noise N/I).  The synthesis
    band is [f_min_factor / duration, f_max_factor / (2 dt_noise)] with
    dt_noise = sample_interval rounded to a whole number of schedule
    steps.  correlated=True feeds every junction the identical trace
    (shared gate electrode); the default is independent electrodes.
    """

    amplitude_N: float = 1e-4
    insensitivity_I: float = 1.0
    f_min_factor: float = 0.1
    f_max_factor: float = 1.0
    seed: int = 0
    trials: int = 20
    sample_interval: float = 0.5
    correlated: bool = False

    def __post_init__(self):
        if self.amplitude_N < 0:
            raise ValueError("noise amplitude N must be nonnegative")
        if self.insensitivity_I <= 0:
            raise ValueError("insensitivity I must be positive")
        if self.f_min_factor <= 0 or self.f_max_factor <= 0:
            raise ValueError("band factors must be positive")
        if self.f_max_factor > 1.0:
            raise ValueError("f_max cannot exceed the sampling Nyquist")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.sample_interval <= 0:
            raise ValueError("sample interval must be positive")


@dataclass
class NoiseTrace:
    """One junction's voltage fluctuation series on a uniform grid."""

    values: np.ndarray
    dt: float
    f_min: float
    f_max: float

    def __len__(self) -> int:
        return len(self.values)


def sample_one_over_f(
    params: NoiseParams, duration: float, dt: float, rng: np.random.Generator
) -> NoiseTrace:
    """Draw one Gaussian 1/f trace of n = duration/dt samples.

    The spectrum is built twice over: FFT-grid components cover
    [1/duration, f_max] exactly (amplitude sqrt(S(f) df) per bin, then
    an inverse real FFT), and a handful of log-spaced sub-fundamental
    harmonics extend the band down to f_min, where the quasistatic
    weight that the echo has to fight lives.  Total variance comes out
    at the PSD integral N^2 ln(f_max/f_min).

    Draw order (sub-harmonic pairs first, FFT coefficients second) is
    part of the determinism contract; do not reorder.
    """
    if duration <= 0 or dt <= 0:
        raise ValueError("duration and dt must be positive")
    n = max(int(round(duration / dt)), 1)
    f_min = params.f_min_factor / duration
    f_max = params.f_max_factor / (2.0 * dt)
    if f_min >= f_max:
        raise ValueError(
            f"noise band is empty: f_min {f_min:.3g} >= f_max {f_max:.3g} "
            "(duration too short for this sample interval)"
        )
    if params.amplitude_N == 0.0:
        return NoiseTrace(np.zeros(n), dt, f_min, f_max)

    n_sq = params.amplitude_N**2
    f_fund = 1.0 / (n * dt)

    # sub-fundamental log-spaced harmonics, evaluated directly
    values = np.zeros(n)
    if f_min < f_fund:
        decades = math.log10(f_fund / f_min)
        n_sub = max(int(math.ceil(_SUB_BINS_PER_DECADE * decades)), 1)
        edges = np.geomspace(f_min, f_fund, n_sub + 1)
        centers = np.sqrt(edges[:-1] * edges[1:])
        amps = np.sqrt(n_sq / centers * np.diff(edges))
        coeff = rng.standard_normal((2, n_sub))
        t = np.arange(n) * dt
        phase = 2.0 * math.pi * np.outer(t, centers)
        values += np.cos(phase) @ (amps * coeff[0])
        values += np.sin(phase) @ (amps * coeff[1])

    # FFT comb from the fundamental up to f_max
    freqs = np.fft.rfftfreq(n, dt)
    live = (freqs > 0) & (freqs >= f_min) & (freqs <= f_max)
    amps = np.zeros_like(freqs)
    amps[live] = np.sqrt(n_sq / freqs[live] / (n * dt))
    coeff = rng.standard_normal((2, len(freqs)))
    spec = (n / 2.0) * amps * (coeff[0] - 1j * coeff[1])
    if n % 2 == 0:
        # the Nyquist bin of irfft is real-only and enters once, not twice
        spec[-1] = n * amps[-1] * coeff[0, -1]
    spec[0] = 0.0
    values += np.fft.irfft(spec, n)
    return NoiseTrace(values, dt, f_min, f_max)


def _stream(params: NoiseParams, trial: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((params.seed, trial, index)))


def active_junctions(schedule: Schedule) -> list[str]:
    """Junctions that carry exchange in this schedule (noise targets)."""
    names = [j for j in INTRA_JUNCTIONS if schedule.intra.get(j, 0.0) != 0.0]
    if np.any(schedule.cross != 0.0):
        names.append("cross")
    return names


def noise_traces(
    params: NoiseParams, schedule: Schedule, trial: int
) -> dict[str, NoiseTrace]:
    """Per-junction voltage traces for one trial, on the coarse noise grid.

    The grid holds one sample per sample_interval (rounded to whole
    schedule steps), long enough to cover the schedule.  Junctions with
    zero nominal amplitude get no trace: multiplicative noise cannot
    act through a closed junction.
    """
    stride = max(int(round(params.sample_interval / schedule.dt)), 1)
    dt_n = stride * schedule.dt
    n_runs = (schedule.n_steps - 1) // stride + 1
    duration = n_runs * dt_n
    names = active_junctions(schedule)
    if params.correlated:
        shared = sample_one_over_f(params, duration, dt_n, _stream(params, trial, _SHARED_STREAM))
        return {name: shared for name in names}
    return {
        name: sample_one_over_f(params, duration, dt_n, _stream(params, trial, _STREAM_INDEX[name]))
        for name in names
    }


def perturb_schedule(
    schedule: Schedule, traces: dict[str, NoiseTrace], params: NoiseParams
) -> Schedule:
    """Attach voltage traces as multiplicative amplitude noise.

    Each junction's amplitude becomes Omega(t) (1 + deltaV(t)/I),
    piecewise constant over the trace's sample interval.  Zero nominal
    amplitudes stay exactly zero (the overlay is multiplicative).
    """
    if not traces:
        return schedule
    strides = set()
    multipliers = {}
    for name, trace in traces.items():
        ratio = trace.dt / schedule.dt
        stride = int(round(ratio))
        if stride < 1 or abs(ratio - stride) > 1e-9 * ratio:
            raise ValueError(
                f"trace for {name!r} has dt {trace.dt} that is not a whole "
                f"number of schedule steps (dt {schedule.dt})"
            )
        strides.add(stride)
        multipliers[name] = 1.0 + trace.values / params.insensitivity_I
    if len(strides) != 1:
        raise ValueError(f"traces disagree on sample interval: {sorted(strides)}")
    return schedule.with_noise(NoiseOverlay(stride=strides.pop(), multipliers=multipliers))


def noisy_trials(params: NoiseParams, schedule: Schedule):
    """Yield params.trials perturbed copies of the schedule."""
    for trial in range(params.trials):
        yield perturb_schedule(schedule, noise_traces(params, schedule, trial), params)


def dump_traces(traces: dict[str, NoiseTrace], path) -> None:
    """Write traces to CSV (time plus one column per junction)."""
    names = sorted(traces)
    if not names:
        raise ValueError("no traces to dump")
    n = max(len(traces[name]) for name in names)
    dt = traces[names[0]].dt
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time"] + names)
        for k in range(n):
            row = [f"{k * dt:.9g}"]
            for name in names:
                vals = traces[name].values
                row.append(repr(float(vals[k])) if k < len(vals) else "")
            writer.writerow(row)
