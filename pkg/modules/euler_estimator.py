"""
Euler Characteristic Estimator

Truncated spectral sums X_K(t) that converge to the Euler characteristic
for t >= t0 = 1/(2 l_min), the resonance count needed for a given error,
the truncation error bound, and integer-plateau detection.

Two estimators are provided:
- new: 2 + 8 pi^2 sum sin(x)/(x (4 pi^2 - x^2)), x = k_n/t (fast, ~1/x^3 terms)
- old: 2 + C sum cos(k_n/2t) sinc(k_n/4t)^2 (slow, ~1/x^2 terms)
"""

import io
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad

from modules.errors import BoundUndefinedError, FileFormatError, ParameterError
from modules.fileio import atomic_write_text
from modules.settings import ESTIMATOR_DEFAULTS, FILE_FORMATS, PLATEAU_RULES
from modules.spectrum_solver import Spectrum

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
FOUR_PI_SQ = TWO_PI ** 2

# Leading coefficient of the old series: 2 reproduces chi on the interval, 2 pi is the printed value
OLD_COEFFICIENTS = {"old": ESTIMATOR_DEFAULTS["old_coefficient"], "old-literal": TWO_PI}


def _sinc(u):
    return np.sinc(np.asarray(u, dtype=float) / math.pi)


def _phi_core(x: np.ndarray) -> np.ndarray:
    """-(sin x / x) 4 pi^2 / (x^2 - 4 pi^2), even in x, switching to the shifted form for |x| > pi."""
    ax = np.abs(x)
    inner = np.minimum(ax, math.pi)
    outer = np.maximum(ax, math.pi)
    near = _sinc(inner) * FOUR_PI_SQ / (FOUR_PI_SQ - inner ** 2)
    # sin(x)/(x^2 - 4 pi^2) = sinc(x - 2 pi)/(x + 2 pi)
    far = -_sinc(outer - TWO_PI) * FOUR_PI_SQ / (outer * (outer + TWO_PI))
    return np.where(ax <= math.pi, near, far)


def new_term(x):
    """
    Single term of the new series at x = k_n/t, finite at the removable point x = 2 pi.

    For x > pi the equivalent form -sinc(x - 2 pi) 8 pi^2 / (x (x + 2 pi)) is used.
    """
    return 2.0 * _phi_core(np.asarray(x, dtype=float))


def old_term(x, coefficient: float = OLD_COEFFICIENTS["old"]):
    """Single term of the old series at x = k_n/t."""
    x = np.asarray(x, dtype=float)
    return coefficient * np.cos(x / 2.0) * _sinc(x / 4.0) ** 2


def phi_hat_real(x):
    """Real part of sqrt(2 pi) times the Fourier transform of the test function."""
    value = _phi_core(np.asarray(x, dtype=float))
    return float(value) if value.ndim == 0 else value


def phi_window(x):
    """phi(x) = 1 - cos(2 pi x) on [0, 1], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0) & (x <= 1), 1.0 - np.cos(TWO_PI * x), 0.0)


def phi_hat_numeric(k: float) -> float:
    """Real part of sqrt(2 pi) phi_hat(k) by quadrature, cross-check for phi_hat_real."""
    value, _ = quad(lambda s: (1.0 - math.cos(TWO_PI * s)) * math.cos(k * s), 0.0, 1.0, limit=200)
    return value


def _check_t(t: float):
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")


def _series(values: np.ndarray, t: float, formula: str) -> float:
    x = values / t
    if formula == "new":
        terms = new_term(x)
        constant = 2.0
    elif formula in OLD_COEFFICIENTS:
        terms = old_term(x, OLD_COEFFICIENTS[formula])
        constant = 2.0
    else:
        raise ParameterError(f"unknown formula {formula!r}; expected one of {FILE_FORMATS['formulas']}")
    # ascending k_n, compensated
    return constant + math.fsum(np.atleast_1d(terms).tolist())


def x_new(spectrum: Spectrum, t: float) -> float:
    _check_t(t)
    return _series(spectrum.values, t, "new")


def x_old(spectrum: Spectrum, t: float, literal: bool = False) -> float:
    _check_t(t)
    return _series(spectrum.values, t, "old-literal" if literal else "old")


@dataclass(frozen=True, eq=False)
class ChiCurve:
    t: np.ndarray
    x: np.ndarray
    formula: str
    K: int

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.x.tolist()))

    def __len__(self):
        return int(self.t.size)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "x": self.x})


def chi_curve(
    spectrum: Spectrum,
    K: int,
    t_grid: Tuple[float, float, int] = (*ESTIMATOR_DEFAULTS["blind_grid"], ESTIMATOR_DEFAULTS["t_steps"]),
    formula: str = "new",
) -> ChiCurve:
    """
    Sample X_K(t) on a logarithmic t grid using the first K levels.

    Args:
        spectrum: levels k_n
        K: number of levels used, 1 <= K <= len(spectrum)
        t_grid: (t_lo, t_hi, steps) in 1/m
        formula: "new", "old" or "old-literal"

    Returns:
        ChiCurve
    """
    if not 1 <= K <= len(spectrum):
        raise ParameterError(f"K={K} outside 1..{len(spectrum)} (available levels)")
    t_lo, t_hi, steps = t_grid
    if not (0 < t_lo < t_hi) or int(steps) < 2:
        raise ParameterError(f"invalid t grid {t_grid!r}")
    t = np.geomspace(t_lo, t_hi, int(steps))
    values = spectrum.values[:K]
    x = np.array([_series(values, ti, formula) for ti in t])
    return ChiCurve(t=t, x=x, formula=formula, K=K)


def default_t_grid(t0: Optional[float] = None, steps: int = ESTIMATOR_DEFAULTS["t_steps"]):
    if t0 is None:
        return (*ESTIMATOR_DEFAULTS["blind_grid"], steps)
    lo, hi = ESTIMATOR_DEFAULTS["t0_grid"]
    return (lo * t0, hi * t0, steps)


@dataclass(frozen=True)
class PlateauReport:
    chi_estimate: Optional[int]
    t_interval: Optional[Tuple[float, float]]
    max_deviation: Optional[float]
    found: bool

    def contains(self, t: float) -> bool:
        return self.t_interval is not None and self.t_interval[0] <= t <= self.t_interval[1]

    def as_dict(self) -> dict:
        t_lo, t_hi = self.t_interval if self.t_interval else (None, None)
        return {
            "chi": self.chi_estimate,
            "t_lo": t_lo,
            "t_hi": t_hi,
            "max_deviation": self.max_deviation,
            "found": self.found,
        }


def detect_plateau(curve: ChiCurve, rules: Optional[dict] = None) -> PlateauReport:
    """
    Longest run of samples within max_deviation of one integer m <= 1.

    Integers above 1 are skipped: no connected graph has chi > 1, while the
    truncated sums tend to 2 for small t and to 2 + 2K for large t.
    """
    rules = {**PLATEAU_RULES, **(rules or {})}
    if len(curve) < rules["min_curve_samples"]:
        raise ParameterError(f"plateau detection needs >= {rules['min_curve_samples']} samples, got {len(curve)}")

    nearest = np.rint(curve.x)
    inside = (np.abs(curve.x - nearest) < rules["max_deviation"]) & (nearest <= 1)

    best = None
    start = None
    for i in range(len(curve) + 1):
        continues = i < len(curve) and inside[i] and start is not None and nearest[i] == nearest[start]
        if continues:
            continue
        if start is not None:
            span = curve.t[i - 1] / curve.t[start]
            if best is None or span > best[0]:
                best = (span, start, i)
            start = None
        if i < len(curve) and inside[i]:
            start = i

    if best is None:
        logger.info("no sample lies within %.2f of an admissible integer", rules["max_deviation"])
        return PlateauReport(None, None, None, False)

    span, lo, hi = best
    m = int(nearest[lo])
    deviation = float(np.max(np.abs(curve.x[lo:hi] - m)))
    found = span >= rules["min_span_ratio"] and (hi - lo) >= rules["min_samples"]
    logger.info(
        "plateau candidate chi=%d on t in [%.4g, %.4g] (span %.2f, %d samples): %s",
        m, curve.t[lo], curve.t[hi - 1], span, hi - lo, "accepted" if found else "too short",
    )
    if not found:
        return PlateauReport(None, (float(curve.t[lo]), float(curve.t[hi - 1])), deviation, False)
    return PlateauReport(m, (float(curve.t[lo]), float(curve.t[hi - 1])), deviation, True)


def _check_k_parameters(vertices: int, lt0: float, epsilon: Optional[float] = None):
    if vertices < 1:
        raise ParameterError(f"vertex count must be positive, got {vertices}")
    if not lt0 >= 0.5:
        raise ParameterError(f"lt0 = L t0 must be >= 1/2, got {lt0}")
    if epsilon is not None and not 0 < epsilon < 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {epsilon}")


def k_required(vertices: int, lt0: float, epsilon: float = ESTIMATOR_DEFAULTS["epsilon"], mode: str = "exact") -> int:
    """
    Number of lowest levels guaranteeing |X(t0) - X_K(t0)| < epsilon.

    Args:
        vertices: |V|
        lt0: L t0 = L/(2 l_min)
        epsilon: tolerated error, 0 < epsilon < 1/2
        mode: "exact", "approx" (large lt0 form) or "old" (old series)
    """
    _check_k_parameters(vertices, lt0, epsilon)
    if mode == "exact":
        tail = 2.0 * lt0 / math.sqrt(-math.expm1(-epsilon * math.pi / lt0))
    elif mode == "approx":
        tail = 2.0 / math.sqrt(epsilon * math.pi) * lt0 ** 1.5
    elif mode == "old":
        tail = 32.0 / (epsilon * math.pi ** 2) * lt0 ** 2
    else:
        raise ParameterError(f"unknown mode {mode!r}; expected exact, approx or old")
    return int(math.ceil(vertices - 1 + tail))


def denominator_condition(K: int, vertices: int, lt0: float) -> bool:
    """K + 1 - |V| > 2 lt0: every omitted term has a negative denominator."""
    return K + 1 - vertices > 2.0 * lt0


def min_K_for_denominator(vertices: int, lt0: float) -> int:
    _check_k_parameters(vertices, lt0)
    return int(math.floor(vertices - 1 + 2.0 * lt0)) + 1


def truncation_bound(K: int, vertices: int, lt0: float) -> float:
    """Upper bound on |X(t0) - X_K(t0)| for the new series."""
    _check_k_parameters(vertices, lt0)
    if not denominator_condition(K, vertices, lt0):
        raise BoundUndefinedError(
            f"bound undefined: K + 1 - |V| = {K + 1 - vertices} does not exceed 2 lt0 = {2 * lt0:.6g}"
        )
    m_sq = float(K + 1 - vertices) ** 2
    return lt0 / math.pi * math.log(m_sq / (m_sq - 4.0 * lt0 ** 2))


def curve_to_csv(curve: ChiCurve) -> str:
    buffer = io.StringIO()
    buffer.write(f"# formula={curve.formula}, K={curve.K}\n")
    curve.to_frame().to_csv(buffer, header=False, index=False, float_format="%.15g")
    return buffer.getvalue()


def write_curve(curve: ChiCurve, path) -> Path:
    return atomic_write_text(path, curve_to_csv(curve))


def read_curve(path) -> ChiCurve:
    path = Path(path)
    try:
        with open(path) as handle:
            header = handle.readline().strip()
    except FileNotFoundError as exc:
        raise FileFormatError(f"curve file not found: {path}") from exc
    try:
        fields = dict(part.strip().split("=", 1) for part in header.lstrip("#").split(","))
        formula, K = fields["formula"], int(fields["K"])
    except (ValueError, KeyError) as exc:
        raise FileFormatError(f"{path}: expected header '# formula=<name>, K=<int>'") from exc
    df = pd.read_csv(path, comment="#", header=None, names=["t", "x"], float_precision="round_trip")
    return ChiCurve(df["t"].to_numpy(), df["x"].to_numpy(), formula, K)


def plateau_to_json(report: PlateauReport) -> str:
    return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
