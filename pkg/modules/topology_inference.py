"""
Topology Inference

Turns a recovered Euler characteristic into structural verdicts and
estimates the total length from the level staircase.

Functions:
- infer(): cycle count, planarity verdict, complete-graph check
- estimate_total_length(): pi times the staircase slope over the upper half of the levels
- complete_graph_chi(): chi of K_n, used for collision caveats
"""

import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.stats import linregress

from modules.errors import InconsistentInputError, ParameterError
from modules.settings import GAP_SCREENING
from modules.spectrum_solver import Spectrum

logger = logging.getLogger(__name__)

PLANAR = "planar"
UNKNOWN = "unknown"

# K_5 has 6 independent cycles and K_3,3 has 4
PLANAR_MAX_BETA = 3


def complete_graph_chi(n: int) -> int:
    return n - n * (n - 1) // 2


def complete_vertices(chi: int) -> Optional[int]:
    """n with chi(K_n) == chi, from n = (3 + sqrt(9 - 8 chi)) / 2, or None."""
    disc = 9 - 8 * chi
    if disc < 0:
        return None
    root = math.isqrt(disc)
    if root * root != disc or (3 + root) % 2:
        return None
    n = (3 + root) // 2
    return n if n >= 2 else None


@dataclass(frozen=True)
class TopologyReport:
    chi: int
    beta: int
    planarity: str
    complete_vertices: Optional[int]
    total_length_estimate: Optional[float] = None
    caveats: Tuple[str, ...] = ()

    @property
    def is_complete_candidate(self) -> bool:
        return self.complete_vertices is not None

    def as_dict(self) -> dict:
        return {
            "chi": self.chi,
            "beta": self.beta,
            "planarity": self.planarity,
            "completeness": (
                {"complete": True, "vertices": self.complete_vertices}
                if self.complete_vertices is not None
                else {"complete": False}
            ),
            "total_length_estimate": self.total_length_estimate,
            "caveats": list(self.caveats),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def infer(chi: int) -> TopologyReport:
    """
    Structural verdicts implied by chi alone.

    Args:
        chi: Euler characteristic, at most 1 for a connected graph

    Returns:
        TopologyReport without a length estimate
    """
    chi = int(chi)
    if chi > 1:
        raise InconsistentInputError(f"chi={chi} is impossible for a connected graph (chi <= 1)")

    beta = 1 - chi
    planarity = PLANAR if beta <= PLANAR_MAX_BETA else UNKNOWN
    n = complete_vertices(chi)

    caveats = []
    if planarity == UNKNOWN:
        caveats.append(
            f"beta={beta} admits both planar and non-planar graphs; planarity is only certified for beta <= {PLANAR_MAX_BETA}"
        )
    if n is not None:
        caveats.append(
            f"chi={chi} matches the complete graph K_{n}, but non-complete graphs can share this chi"
        )
    logger.debug("chi=%d -> beta=%d, %s, complete=%s", chi, beta, planarity, n)
    return TopologyReport(chi=chi, beta=beta, planarity=planarity, complete_vertices=n, caveats=tuple(caveats))


def estimate_total_length(spectrum: Spectrum) -> float:
    """pi times the least-squares slope of n against k_n over the upper half of the levels."""
    minimum = GAP_SCREENING["min_levels"]
    if len(spectrum) < minimum:
        raise ParameterError(f"total length estimate needs >= {minimum} levels, got {len(spectrum)}")
    k = spectrum.values
    n = np.arange(1, k.size + 1)
    half = k.size // 2
    fit = linregress(k[half:], n[half:])
    return float(math.pi * fit.slope)


def with_length(report: TopologyReport, spectrum: Spectrum) -> TopologyReport:
    return replace(report, total_length_estimate=estimate_total_length(spectrum))
