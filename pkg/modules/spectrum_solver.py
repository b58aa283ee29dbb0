"""
Spectrum Solver for Quantum Graphs with Standard Vertex Conditions

The positive eigenvalue square roots k_n of the graph Laplacian are the
points where the bond evolution matrix U(k) = D(k) S has eigenvalue 1.
All 2|E| eigenphases of U(k) move counterclockwise as k grows and their
unwrapped sum equals 2*L*k + const, so the number of levels below k follows
from the reduced eigenphases at k alone. Levels are bracketed with that
count and refined on the real secular function.

Functions:
- bond_evolution(): U(k) for a graph
- counting_function(): N(k) with multiplicity
- secular_function() / kernel_dimension(): root sign test and multiplicity
- solve(): first `count` levels, completeness certified
- verify_weyl(): Weyl residual, lower bound and index drift checks
- read_spectrum() / write_spectrum(): spectrum files
"""

import io
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.optimize import brentq

from modules.errors import (
    AmbiguousCountError,
    FileFormatError,
    ParameterError,
    SolverIncompleteError,
)
from modules.fileio import atomic_write_text
from modules.graph_model import MetricGraph, require_valid
from modules.settings import FILE_FORMATS, SOLVER_DEFAULTS

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Nudges tried when a probe lands on an eigenvalue
_PROBE_FRACTIONS = (0.5, 0.382, 0.618, 0.25, 0.75, 0.1, 0.9)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ordered positive wavenumbers k_n (1/m), repeated per multiplicity."""

    values: np.ndarray
    unit: str = FILE_FORMATS["spectrum_unit"]
    provenance: str = "solved"

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size:
            if not np.all(np.isfinite(values)) or np.any(values <= 0):
                raise ParameterError("spectrum values must be finite and positive")
            if np.any(np.diff(values) < 0):
                raise ParameterError("spectrum values must be non-decreasing")
        if self.provenance not in FILE_FORMATS["provenances"]:
            raise ParameterError(f"unknown provenance {self.provenance!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return int(self.values.size)

    def head(self, K: int) -> "Spectrum":
        return Spectrum(self.values[:K], self.unit, self.provenance)

    def without(self, indices: Iterable[int]) -> "Spectrum":
        """Copy with the given 1-based level indices removed."""
        drop = np.asarray(list(indices), dtype=int) - 1
        return Spectrum(np.delete(self.values, drop), self.unit, self.provenance)

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.values * factor, self.unit, self.provenance)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"index": np.arange(1, len(self) + 1), "k": self.values})


@dataclass(frozen=True)
class SolverConfig:
    k_max_hint: Optional[float] = None
    scan_step_factor: float = SOLVER_DEFAULTS["scan_step_factor"]
    refine_tolerance: float = SOLVER_DEFAULTS["refine_tolerance"]
    max_refine_iterations: int = SOLVER_DEFAULTS["max_refine_iterations"]
    degeneracy_threshold: float = SOLVER_DEFAULTS["degeneracy_threshold"]

    def __post_init__(self):
        if not self.refine_tolerance > 0:
            raise ParameterError(f"refine_tolerance must be > 0, got {self.refine_tolerance}")
        if not 0 < self.scan_step_factor <= 1:
            raise ParameterError(f"scan_step_factor must lie in (0, 1], got {self.scan_step_factor}")
        if self.max_refine_iterations < 1:
            raise ParameterError("max_refine_iterations must be positive")
        if self.k_max_hint is not None and not self.k_max_hint > 0:
            raise ParameterError(f"k_max_hint must be > 0, got {self.k_max_hint}")


@dataclass(frozen=True)
class WeylReport:
    weyl_residual: float
    residual_bound: float
    residual_bounded: bool
    lower_bound_ok: bool
    lower_bound_failures: Tuple[int, ...]
    drift: np.ndarray
    drift_flagged: bool
    first_drift_level: Optional[int]

    @property
    def passed(self) -> bool:
        return self.residual_bounded and self.lower_bound_ok and not self.drift_flagged


class SpectrumSolver:
    """Secular machinery of one metric graph; cheap to query at many k."""

    def __init__(self, graph: MetricGraph, config: Optional[SolverConfig] = None):
        self.graph = require_valid(graph)
        self.config = config or SolverConfig()
        self.total_length = graph.total_length
        self.l_min = graph.l_min
        self.bond_lengths = graph.bond_lengths()
        self.scattering = self._vertex_scattering(graph)
        # S is real orthogonal, det S = +-1
        self._half_det_phase = 0.5 * float(np.angle(linalg.det(self.scattering)))
        self.k_floor = SOLVER_DEFAULTS["k_floor"] * math.pi / self.total_length
        self._base_phase_sum = float(self.eigenphases(self.k_floor).sum())

    @staticmethod
    def _vertex_scattering(graph: MetricGraph) -> np.ndarray:
        n_bonds = 2 * graph.edge_count
        tails = np.empty(n_bonds, dtype=int)
        heads = np.empty(n_bonds, dtype=int)
        for e, edge in enumerate(graph.edges):
            tails[2 * e], heads[2 * e] = edge.u, edge.v
            tails[2 * e + 1], heads[2 * e + 1] = edge.v, edge.u
        degrees = graph.degrees
        # S[b_out, b_in] = 2/deg(v) - [b_out reverses b_in], v = head of b_in = tail of b_out
        connects = tails[:, None] == heads[None, :]
        scattering = connects * (2.0 / degrees[heads])[None, :]
        reversal = np.arange(n_bonds) ^ 1
        scattering[reversal, np.arange(n_bonds)] -= 1.0
        return scattering

    def bond_evolution(self, k: float) -> np.ndarray:
        if not k > 0:
            raise ParameterError(f"k must be positive, got {k}")
        return np.exp(1j * k * self.bond_lengths)[:, None] * self.scattering

    def eigenphases(self, k: float) -> np.ndarray:
        """Eigenphases of U(k) reduced to [0, 2*pi)."""
        return np.mod(np.angle(linalg.eigvals(self.bond_evolution(k))), TWO_PI)

    def counting_function(self, k: float) -> int:
        """
        Number of positive levels k_n <= k, counted with multiplicity.

        Raises:
            AmbiguousCountError: k within refine_tolerance of a level
        """
        if not k > self.k_floor:
            return 0
        phases = self.eigenphases(k)
        distance = float(np.minimum(phases, TWO_PI - phases).min())
        tolerance = max(self.config.refine_tolerance * k * self.l_min, 1e-11)
        if distance < tolerance:
            raise AmbiguousCountError(k, distance)
        winding = (2.0 * self.total_length * (k - self.k_floor) - (phases.sum() - self._base_phase_sum)) / TWO_PI
        count = round(winding)
        if abs(winding - count) > 1e-6:
            raise SolverIncompleteError(f"eigenphase winding {winding:.9f} at k={k} is not integral")
        return int(count)

    def secular_function(self, k: float) -> float:
        """Real secular function; its sign changes at every simple level."""
        n_bonds = self.bond_lengths.size
        value = linalg.det(np.eye(n_bonds) - self.bond_evolution(k))
        value *= np.exp(-1j * (k * self.total_length + self._half_det_phase))
        return float(value.real)

    def kernel_dimension(self, k: float) -> int:
        """dim ker(I - U(k)) from singular values below the relative degeneracy cut."""
        n_bonds = self.bond_lengths.size
        singular = linalg.svdvals(np.eye(n_bonds) - self.bond_evolution(k))
        return int(np.sum(singular < self.config.degeneracy_threshold * max(singular.max(), 1.0)))

    def probe(self, lo: float, hi: float) -> Optional[Tuple[float, int]]:
        """Count at some point strictly inside (lo, hi) that is not on a level."""
        for fraction in _PROBE_FRACTIONS:
            k = lo + fraction * (hi - lo)
            try:
                return k, self.counting_function(k)
            except AmbiguousCountError:
                continue
        return None

    def _count_near(self, k: float, spread: float) -> Tuple[float, int]:
        found = self.probe(k - spread, k + spread)
        if found is None:
            raise SolverIncompleteError(f"no unambiguous probe near k={k}")
        return found

    def _cluster_width(self, k: float) -> float:
        return 4.0 * self.config.refine_tolerance * k

    def _refine_simple(self, lo: float, hi: float) -> Optional[float]:
        f_lo, f_hi = self.secular_function(lo), self.secular_function(hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if np.sign(f_lo) == np.sign(f_hi):
            return None
        tol = self.config.refine_tolerance
        try:
            return brentq(
                self.secular_function, lo, hi,
                xtol=1e-15, rtol=max(tol, 4 * np.finfo(float).eps),
                maxiter=self.config.max_refine_iterations,
            )
        except RuntimeError as exc:
            raise SolverIncompleteError(f"refinement in [{lo}, {hi}] did not converge: {exc}") from exc

    def isolate(self, lo: float, n_lo: int, hi: float, n_hi: int) -> List[Tuple[float, int]]:
        """
        Resolve all levels in (lo, hi] given the counts at both ends.

        Returns:
            List of (k, multiplicity) whose multiplicities sum to n_hi - n_lo
        """
        roots: List[Tuple[float, int]] = []
        stack = [(lo, n_lo, hi, n_hi)]
        splits_left = self.config.max_refine_iterations * max(n_hi - n_lo, 1)
        while stack:
            a, n_a, b, n_b = stack.pop()
            jump = n_b - n_a
            if jump <= 0:
                continue
            if jump == 1:
                root = self._refine_simple(a, b)
                if root is not None:
                    roots.append((root, 1))
                    continue
            splits_left -= 1
            if splits_left < 0:
                raise SolverIncompleteError(
                    f"could not separate {jump} levels in [{a}, {b}] after "
                    f"{self.config.max_refine_iterations} splits per level"
                )
            inner = self.probe(a, b) if b - a > self._cluster_width(b) else None
            if inner is None:
                location = 0.5 * (a + b)
                multiplicity = self.kernel_dimension(location)
                if multiplicity != jump:
                    logger.warning(
                        "level at k=%.12g: kernel dimension %d but count jump %d; keeping the count",
                        location, multiplicity, jump,
                    )
                elif jump > 1:
                    logger.debug("degenerate level at k=%.12g with multiplicity %d", location, jump)
                roots.append((location, jump))
                continue
            m, n_m = inner
            stack.append((m, n_m, b, n_b))
            stack.append((a, n_a, m, n_m))
        return sorted(roots)

    def solve(self, count: int) -> Spectrum:
        """First `count` positive levels with multiplicity; never drops a level."""
        if count < 1:
            raise ParameterError(f"count must be >= 1, got {count}")
        cfg = self.config
        graph = self.graph

        # N(k) >= L k / pi - 2|E|, so the count-th level lies below this ceiling
        ceiling = 1.01 * math.pi * (count + 2 * graph.edge_count + 1) / self.total_length
        if cfg.k_max_hint is not None:
            ceiling = max(ceiling, cfg.k_max_hint)

        # within one step no eigenphase advances by more than pi / (2|E|)
        step = cfg.scan_step_factor * math.pi / (graph.l_max * 2 * graph.edge_count)
        levels: List[float] = []
        a, n_a = self.k_floor, 0
        cells = 0
        while n_a < count:
            if a > ceiling:
                raise SolverIncompleteError(f"only {n_a} of {count} levels found below k={ceiling:.6g}")
            b, n_b = self._count_near(a + step, 0.05 * step)
            cells += 1
            if n_b > n_a:
                for root, multiplicity in self.isolate(a, n_a, b, n_b):
                    levels.extend([root] * multiplicity)
            a, n_a = b, n_b

        values = np.sort(np.asarray(levels))
        if values.size != n_a:
            raise SolverIncompleteError(f"resolved {values.size} levels but the count below k={a} is {n_a}")
        self._certify(values, count, a)
        logger.info(
            "solved %d levels (k up to %.6g 1/m) over %d scan cells", count, values[count - 1], cells
        )
        return Spectrum(values[:count], provenance="solved")

    def _certify(self, values: np.ndarray, count: int, scan_end: float):
        top = values[count - 1]
        above = values[values > top]
        ceiling = above[0] if above.size else scan_end
        found = self.probe(top, ceiling)
        if found is None:
            raise SolverIncompleteError(f"no unambiguous probe above the top level k={top}")
        k_probe, n_probe = found
        expected = int(np.sum(values < k_probe))
        if n_probe != expected or expected < count:
            raise SolverIncompleteError(
                f"completeness check failed at k={k_probe}: counted {n_probe}, resolved {expected}"
            )

    def verify_weyl(self, spectrum: Spectrum) -> WeylReport:
        """Weyl residual, lower-bound check and exact index drift of a spectrum against this graph."""
        if spectrum.provenance != "solved":
            logger.debug("verifying a %s spectrum against the graph", spectrum.provenance)
        values = spectrum.values
        L = self.total_length
        V = self.graph.vertex_count
        n = np.arange(1, values.size + 1)
        scaled = values * L / math.pi
        residuals = scaled - n
        weyl_residual = float(np.max(np.abs(residuals))) if values.size else 0.0
        bound = 2.0 * self.graph.edge_count
        lower = n + 1 - V
        failures = tuple(int(i) for i in n[scaled < lower - 1e-9 * np.maximum(lower, 1)])

        # exact drift: N just above each level group minus the index of its last copy
        unique, counts = np.unique(values, return_counts=True)
        cumulative = np.cumsum(counts)
        drift = np.zeros(unique.size, dtype=int)
        for g in range(unique.size - 1):
            found = self.probe(unique[g], unique[g + 1])
            if found is None:
                continue
            drift[g] = found[1] - cumulative[g]
        flagged = np.flatnonzero(drift != 0)
        first = int(cumulative[flagged[0]]) if flagged.size else None
        if flagged.size:
            logger.info("level index drift from level %d on: %d missing level(s)", first, int(drift.max()))
        return WeylReport(
            weyl_residual=weyl_residual,
            residual_bound=bound,
            residual_bounded=weyl_residual <= bound,
            lower_bound_ok=not failures,
            lower_bound_failures=failures,
            drift=drift,
            drift_flagged=bool(flagged.size),
            first_drift_level=first,
        )


def bond_evolution(graph: MetricGraph, k: float) -> np.ndarray:
    return SpectrumSolver(graph).bond_evolution(k)


def counting_function(graph: MetricGraph, k: float, config: Optional[SolverConfig] = None) -> int:
    return SpectrumSolver(graph, config).counting_function(k)


def secular_function(graph: MetricGraph, k: float) -> float:
    return SpectrumSolver(graph).secular_function(k)


def kernel_dimension(graph: MetricGraph, k: float, config: Optional[SolverConfig] = None) -> int:
    return SpectrumSolver(graph, config).kernel_dimension(k)


def solve(graph: MetricGraph, count: int, config: Optional[SolverConfig] = None) -> Spectrum:
    return SpectrumSolver(graph, config).solve(count)


def verify_weyl(spectrum: Spectrum, graph: MetricGraph, config: Optional[SolverConfig] = None) -> WeylReport:
    return SpectrumSolver(graph, config).verify_weyl(spectrum)


_HEADER = re.compile(r"#\s*unit=(?P<unit>[^,\s]+)\s*,\s*provenance=(?P<provenance>\w+)")


def spectrum_to_csv(spectrum: Spectrum) -> str:
    buffer = io.StringIO()
    buffer.write(f"# unit={spectrum.unit}, provenance={spectrum.provenance}\n")
    spectrum.to_frame().to_csv(
        buffer, header=False, index=False, float_format=f"%.{FILE_FORMATS['spectrum_digits']}g"
    )
    return buffer.getvalue()


def write_spectrum(spectrum: Spectrum, path) -> Path:
    return atomic_write_text(path, spectrum_to_csv(spectrum))


def read_spectrum(path) -> Spectrum:
    path = Path(path)
    try:
        with open(path) as handle:
            header = handle.readline()
    except FileNotFoundError as exc:
        raise FileFormatError(f"spectrum file not found: {path}") from exc
    match = _HEADER.match(header.strip())
    if match is None:
        raise FileFormatError(f"{path}: expected header '# unit=..., provenance=...', got {header.strip()!r}")
    if match["unit"] != FILE_FORMATS["spectrum_unit"]:
        raise FileFormatError(f"{path}: unsupported unit {match['unit']!r}")
    try:
        df = pd.read_csv(path, comment="#", header=None, names=["index", "k"], float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    if df["k"].isna().any() or not np.array_equal(df["index"].to_numpy(), np.arange(1, len(df) + 1)):
        raise FileFormatError(f"{path}: rows must be 'index,k' with indices 1..N")
    try:
        return Spectrum(df["k"].to_numpy(dtype=float), match["unit"], match["provenance"])
    except ParameterError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
