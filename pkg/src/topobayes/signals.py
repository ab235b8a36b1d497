"""Band-limited synthetic test signals and signal file loading.

The generator produces EEG-like oscillatory signals as random sums of
sinusoids inside a frequency band, normalized to unit RMS power. White
Gaussian noise can be added at a requested SNR in dB (0 dB means equal
signal and noise power). Recorded signals can be loaded from CSV or JSON.
All randomness is seeded, so every function here is a pure function of its
arguments and safe to call concurrently.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFileError, ValidationError


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real time series.

    samples -- 1-D float array, at least 2 finite values
    sample_rate -- sampling frequency in Hz, > 0
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValidationError("signal needs at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("signal contains a non-finite sample")
        rate = float(self.sample_rate)
        if not (np.isfinite(rate) and rate > 0):
            raise ValidationError("sample_rate must be a positive finite number")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def power(self) -> float:
        """Mean squared amplitude."""
        return float(np.mean(self.samples**2))


@dataclass(frozen=True)
class BandSpec:
    """Frequency band for the sinusoid-sum generator.

    The Nyquist constraint f_high < sample_rate / 2 is checked at generation
    time, when the sample rate is known.
    """

    f_low: float
    f_high: float
    n_components: int = 3

    def __post_init__(self):
        if not (0 < self.f_low < self.f_high):
            raise ValidationError(
                f"band needs 0 < f_low < f_high, got [{self.f_low}, {self.f_high}]"
            )
        if self.n_components < 1:
            raise ValidationError("band needs at least one sinusoid component")


ALPHA_BAND = BandSpec(8.0, 13.0)
BETA_BAND = BandSpec(13.0, 30.0)


def generate_band_signal(band: BandSpec, duration: float, sample_rate: float,
                         seed: int) -> Signal:
    """Random sum of sinusoids with frequencies inside the band.

    Frequencies are drawn uniformly in [f_low, f_high], phases uniformly in
    [0, 2*pi), amplitudes uniformly in [0.5, 1.5] (unit mean). The sum is
    rescaled to unit RMS power. Deterministic for a fixed seed.
    """
    if sample_rate <= 0:
        raise ValidationError("sample_rate must be positive")
    if band.f_high >= sample_rate / 2:
        raise ValidationError(
            f"f_high {band.f_high} Hz is not below the Nyquist rate "
            f"{sample_rate / 2} Hz"
        )
    n = int(round(duration * sample_rate))
    if n < 2:
        raise ValidationError("duration * sample_rate must yield at least 2 samples")
    rng = np.random.default_rng(seed)
    freqs = rng.uniform(band.f_low, band.f_high, band.n_components)
    phases = rng.uniform(0.0, 2.0 * np.pi, band.n_components)
    amps = rng.uniform(0.5, 1.5, band.n_components)
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    for f, ph, a in zip(freqs, phases, amps):
        x += a * np.sin(2.0 * np.pi * f * t + ph)
    rms = np.sqrt(np.mean(x**2))
    if rms == 0.0:  # degenerate draw, cannot normalize
        raise ValidationError("generated signal is identically zero")
    return Signal(x / rms, sample_rate)


def add_noise(signal: Signal, snr_db: float, seed: int) -> Signal:
    """Add zero-mean white Gaussian noise at the requested SNR.

    Noise variance is signal_power / 10**(snr_db / 10), so 0 dB gives equal
    signal and noise power. The standard-normal draw depends only on the
    seed and the sample count; the signal content enters through the scale
    factor alone.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(len(signal.samples))
    sigma = np.sqrt(signal.power() / 10.0 ** (snr_db / 10.0))
    return Signal(signal.samples + sigma * z, signal.sample_rate)


def load_signal(path, format: str = "csv", rate: float | None = None) -> Signal:
    """Read a signal from disk.

    CSV files hold one amplitude per line with an optional single header
    line; the sample rate must be supplied via `rate`. JSON files look like
    {"rate": <Hz>, "samples": [...]} and carry their own rate, so `rate`
    must be omitted.
    """
    p = Path(path)
    if not p.exists():
        raise DataFileError(f"{p}: no such file")
    if format == "csv":
        if rate is None:
            raise ValidationError("csv signals need an explicit sample rate")
        values = _parse_csv(p)
    elif format == "json":
        if rate is not None:
            raise ValidationError("json signals carry their own sample rate")
        rate, values = _parse_json(p)
    else:
        raise ValidationError(f"unknown signal format {format!r}")
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise DataFileError(f"{p}: too few samples (need at least 2)")
    if not np.all(np.isfinite(arr)):
        raise DataFileError(f"{p}: non-finite sample")
    try:
        return Signal(arr, rate)
    except ValidationError as e:
        raise DataFileError(f"{p}: {e}") from None


def _parse_csv(p: Path) -> list:
    values = []
    seen_data = False
    for ln, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            values.append(float(line))
            seen_data = True
        except ValueError:
            if not seen_data and ln == 1:
                continue  # single optional header line
            raise DataFileError(f"{p}: malformed line {ln}: {line!r}") from None
    return values


def _parse_json(p: Path):
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise DataFileError(f"{p}: malformed JSON ({e})") from None
    if not isinstance(obj, dict) or "rate" not in obj or "samples" not in obj:
        raise DataFileError(f"{p}: expected an object with 'rate' and 'samples'")
    try:
        rate = float(obj["rate"])
        values = [float(v) for v in obj["samples"]]
    except (TypeError, ValueError):
        raise DataFileError(f"{p}: malformed 'rate' or 'samples'") from None
    return rate, values
