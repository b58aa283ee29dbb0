"""
Resonance Data Handling

Measured resonance frequencies (GHz) are converted to wavenumbers,
screened for missing levels with the fluctuating part of the counting
function, and corrupted on purpose for robustness studies.

Functions:
- load_resonances(): dataset -> Spectrum with k_n = 2 pi nu_n / c
- spectrum_to_resonances(): Spectrum -> dataset (inverse conversion)
- read_resonance_file() / write_resonance_file(): "index,nu_ghz" files
- counting_fluctuation(): N_fl = N - (a k + b) with a least-squares Weyl line
- flag_gaps(): persistent drops of N_fl, candidate missing levels
- perturb(): seeded level drops and multiplicative jitter
- optical_length(), level_density(): unit helpers
"""

import io
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd
from scipy.stats import linregress

from modules.errors import FileFormatError, ParameterError
from modules.fileio import atomic_write_text
from modules.settings import FILE_FORMATS, GAP_SCREENING, PHYSICS
from modules.spectrum_solver import Spectrum

logger = logging.getLogger(__name__)

# k = WAVENUMBER_PER_GHZ * nu[GHz]
WAVENUMBER_PER_GHZ = 2.0 * math.pi * PHYSICS["ghz"] / PHYSICS["speed_of_light"]


@dataclass(frozen=True, eq=False)
class ResonanceDataset:
    """Measured resonance positions in GHz, with the dielectric of the medium as metadata."""

    frequencies: np.ndarray
    dielectric: float = 1.0
    label: str = ""

    def __post_init__(self):
        frequencies = np.array(self.frequencies, dtype=float).reshape(-1)
        if frequencies.size == 0:
            raise FileFormatError("resonance list is empty")
        if not np.all(np.isfinite(frequencies)) or np.any(frequencies <= 0):
            raise FileFormatError("resonance frequencies must be finite and positive")
        steps = np.diff(frequencies)
        if np.any(steps <= 0):
            first = int(np.flatnonzero(steps <= 0)[0]) + 2
            raise FileFormatError(f"resonance frequencies must be strictly increasing (entry {first})")
        if not self.dielectric >= 1.0:
            raise ParameterError(f"dielectric constant must be >= 1, got {self.dielectric}")
        frequencies.setflags(write=False)
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "dielectric", float(self.dielectric))
        object.__setattr__(self, "label", " ".join(str(self.label).split()))

    def __len__(self):
        return int(self.frequencies.size)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"index": np.arange(1, len(self) + 1), "nu_ghz": self.frequencies})


@dataclass(frozen=True)
class PerturbPolicy:
    drop_probability: float = 0.0
    drop_min_index: int = 1
    jitter_relative_sigma: float = 0.0
    seed: int = 0
    drop_count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_probability < 1.0:
            raise ParameterError(f"drop_probability must lie in [0, 1), got {self.drop_probability}")
        if self.drop_min_index < 1:
            raise ParameterError(f"drop_min_index is 1-based, got {self.drop_min_index}")
        if not self.jitter_relative_sigma >= 0.0:
            raise ParameterError(f"jitter_relative_sigma must be >= 0, got {self.jitter_relative_sigma}")
        if self.drop_count < 0:
            raise ParameterError(f"drop_count must be >= 0, got {self.drop_count}")


@dataclass(frozen=True, eq=False)
class FluctuationSeries:
    k: np.ndarray
    n_fl: np.ndarray
    slope: float
    intercept: float

    @property
    def length_estimate(self) -> float:
        """Total length implied by the fitted Weyl slope, pi * a."""
        return math.pi * self.slope

    def __len__(self):
        return int(self.k.size)

    def __iter__(self):
        return iter(zip(self.k.tolist(), self.n_fl.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"k": self.k, "n_fl": self.n_fl})


def optical_length(physical: float, dielectric: float = PHYSICS["teflon_dielectric"]) -> float:
    """Length seen by the wave in a medium: sqrt(dielectric) * physical length."""
    if not dielectric >= 1.0:
        raise ParameterError(f"dielectric constant must be >= 1, got {dielectric}")
    return math.sqrt(dielectric) * physical


def load_resonances(dataset: ResonanceDataset) -> Spectrum:
    """Convert GHz resonances to wavenumbers; graph lengths are optical, so no dielectric scaling."""
    return Spectrum(dataset.frequencies * WAVENUMBER_PER_GHZ, provenance="ingested")


def spectrum_to_resonances(spectrum: Spectrum, dielectric: float = 1.0, label: str = "") -> ResonanceDataset:
    return ResonanceDataset(spectrum.values / WAVENUMBER_PER_GHZ, dielectric, label)


def level_density(dataset: ResonanceDataset) -> float:
    """Mean number of levels per GHz: least-squares slope of the level index against frequency."""
    if len(dataset) < 3:
        raise ParameterError("level density needs at least three resonances")
    fit = linregress(dataset.frequencies, np.arange(1, len(dataset) + 1))
    return float(fit.slope)


_HEADER = re.compile(r"#\s*unit=(?P<unit>[^,\s]+)\s*,\s*dielectric=(?P<dielectric>[^,\s]+)\s*,\s*label=(?P<label>.*)$")


def resonances_to_csv(dataset: ResonanceDataset) -> str:
    buffer = io.StringIO()
    buffer.write(f"# unit={FILE_FORMATS['resonance_unit']}, dielectric={dataset.dielectric!r}, label={dataset.label}\n")
    # default float formatting is repr, the shortest exact decimal
    dataset.to_frame().to_csv(buffer, header=False, index=False)
    return buffer.getvalue()


def write_resonance_file(dataset: ResonanceDataset, path) -> Path:
    return atomic_write_text(path, resonances_to_csv(dataset))


def read_resonance_file(path) -> ResonanceDataset:
    path = Path(path)
    try:
        with open(path) as handle:
            header = handle.readline().rstrip("\n")
    except FileNotFoundError as exc:
        raise FileFormatError(f"resonance file not found: {path}") from exc
    match = _HEADER.match(header.strip())
    if match is None:
        raise FileFormatError(
            f"{path}: expected header '# unit=GHz, dielectric=<real>, label=<text>', got {header.strip()!r}"
        )
    if match["unit"] != FILE_FORMATS["resonance_unit"]:
        raise FileFormatError(f"{path}: unsupported unit {match['unit']!r}")
    try:
        dielectric = float(match["dielectric"])
    except ValueError as exc:
        raise FileFormatError(f"{path}: dielectric {match['dielectric']!r} is not a number") from exc
    try:
        df = pd.read_csv(path, comment="#", header=None, names=["index", "nu_ghz"], float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    if df["nu_ghz"].isna().any() or not np.array_equal(df["index"].to_numpy(), np.arange(1, len(df) + 1)):
        raise FileFormatError(f"{path}: rows must be 'index,nu_ghz' with indices 1..N")
    try:
        return ResonanceDataset(df["nu_ghz"].to_numpy(dtype=float), dielectric, match["label"].strip())
    except FileFormatError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def counting_fluctuation(spectrum: Spectrum) -> FluctuationSeries:
    """
    Fluctuating part of the staircase N(k_i) = i around a fitted Weyl line.

    Args:
        spectrum: at least GAP_SCREENING["min_levels"] levels

    Returns:
        FluctuationSeries with residuals N_fl(k_i) and the fitted line
    """
    minimum = GAP_SCREENING["min_levels"]
    if len(spectrum) < minimum:
        raise ParameterError(f"counting fluctuation needs >= {minimum} levels, got {len(spectrum)}")
    k = np.asarray(spectrum.values, dtype=float)
    n = np.arange(1, k.size + 1, dtype=float)
    fit = linregress(k, n)
    residuals = n - (fit.slope * k + fit.intercept)
    logger.debug("Weyl line slope %.6g (length %.6g m), intercept %.4g", fit.slope, math.pi * fit.slope, fit.intercept)
    return FluctuationSeries(k=k, n_fl=residuals, slope=float(fit.slope), intercept=float(fit.intercept))


def gap_scores(series: FluctuationSeries, window: int = GAP_SCREENING["window"]) -> np.ndarray:
    """mean(N_fl[i:i+w]) - mean(N_fl[i-w:i]) for each admissible i, NaN elsewhere."""
    values = series.n_fl
    scores = np.full(values.size, np.nan)
    if values.size < 2 * window:
        return scores
    sums = np.concatenate(([0.0], np.cumsum(values)))
    i = np.arange(window, values.size - window + 1)
    scores[i] = ((sums[i + window] - sums[i]) - (sums[i] - sums[i - window])) / window
    return scores


def flag_gaps(series: FluctuationSeries, window: int = GAP_SCREENING["window"],
              threshold: float = GAP_SCREENING["drop_threshold"]) -> List[float]:
    """
    k locations where N_fl drops persistently by more than `threshold`.

    Each run of consecutive flagged positions is reported once, at its deepest drop.
    """
    scores = gap_scores(series, window)
    flagged = np.flatnonzero(np.nan_to_num(scores, nan=0.0) < -threshold)
    locations: List[float] = []
    if flagged.size == 0:
        return locations
    runs = np.split(flagged, np.flatnonzero(np.diff(flagged) > 1) + 1)
    for run in runs:
        deepest = run[np.argmin(scores[run])]
        locations.append(float(series.k[deepest]))
    logger.info("%d candidate missing-level location(s)", len(locations))
    return locations


def perturb(spectrum: Spectrum, policy: PerturbPolicy) -> Spectrum:
    """Drop and jitter levels deterministically per policy.seed; result provenance is 'perturbed'."""
    rng = np.random.default_rng(policy.seed)
    values = np.array(spectrum.values, dtype=float)
    index = np.arange(1, values.size + 1)
    eligible = index >= policy.drop_min_index
    keep = np.ones(values.size, dtype=bool)

    if policy.drop_count:
        candidates = np.flatnonzero(eligible)
        if policy.drop_count > candidates.size:
            raise ParameterError(
                f"cannot drop {policy.drop_count} levels: only {candidates.size} have index >= {policy.drop_min_index}"
            )
        keep[rng.choice(candidates, size=policy.drop_count, replace=False)] = False

    if policy.drop_probability > 0:
        keep &= ~(eligible & (rng.random(values.size) < policy.drop_probability))

    dropped = index[~keep]
    values = values[keep]
    if policy.jitter_relative_sigma > 0:
        values = values * np.exp(policy.jitter_relative_sigma * rng.standard_normal(values.size))
        values = np.sort(values)
    logger.info("perturbed spectrum: dropped levels %s, jitter sigma %g", dropped.tolist(), policy.jitter_relative_sigma)
    return Spectrum(values, spectrum.unit, provenance="perturbed")
