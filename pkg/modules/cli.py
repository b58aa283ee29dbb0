"""
GraphEcho Command Line

Batch pipeline: generate -> solve -> estimate -> infer -> report, plus
ingestion of measured resonances and robustness experiments.

Commands:
- gen:      generate a graph file
- spectrum: solve a graph to a spectrum file (optionally export GHz resonances)
- chi:      estimator curve and plateau from a spectrum file
- ingest:   resonance file -> spectrum file, with gap flags
- analyze:  full pipeline from a graph file or a spectrum file
- perturb:  drop/jitter levels of a spectrum file

Exit status: 0 success, 1 parameter/validation/format error, 2 no plateau.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from modules import euler_estimator as ee
from modules import figures
from modules import graph_model as gm
from modules import resonance_io as rio
from modules import spectrum_solver as ss
from modules import topology_inference as ti
from modules.errors import BoundUndefinedError, GraphEchoError, ParameterError
from modules.fileio import atomic_write_text
from modules.settings import ESTIMATOR_DEFAULTS, FILE_FORMATS, GAP_SCREENING

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_PLATEAU = 2


class UsageError(GraphEchoError):
    pass


class GraphEchoParser(argparse.ArgumentParser):
    """ArgumentParser whose grammar errors surface as exceptions instead of exit status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class AnalyzeResult:
    plateau: ee.PlateauReport
    topology: Optional[ti.TopologyReport]
    curve_path: Optional[str]
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "plateau": self.plateau.as_dict(),
            "topology": self.topology.as_dict() if self.topology else None,
            "curve_file": self.curve_path,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def _write_or_print(text: str, path: Optional[str]):
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _t_grid(args, t0: Optional[float]):
    lo, hi, steps = ee.default_t_grid(t0, args.t_steps)
    return (args.t_lo if args.t_lo is not None else lo, args.t_hi if args.t_hi is not None else hi, steps)


def _resolve_K(requested: Optional[int], available: int, fallback: int) -> int:
    K = requested if requested is not None else fallback
    if K > available:
        logger.warning("K=%d exceeds the %d available levels; using K=%d", K, available, available)
        K = available
    return K


def analyze(
    spectrum: ss.Spectrum,
    summary: Optional[gm.GraphSummary] = None,
    K: Optional[int] = None,
    epsilon: float = ESTIMATOR_DEFAULTS["epsilon"],
    formula: str = "new",
    t_grid=None,
    curve_path: Optional[str] = None,
) -> AnalyzeResult:
    """
    Estimator curve, plateau, topology verdicts and diagnostics for one spectrum.

    With a known graph summary, K defaults to k_required(exact) and the t grid
    is centred on t0; otherwise all levels and the absolute grid are used.
    """
    diagnostics = {"levels_available": len(spectrum), "epsilon": epsilon, "formula": formula}
    t0 = summary.t0 if summary else None
    if summary is not None:
        required = {
            mode: ee.k_required(summary.vertex_count, summary.lt0, epsilon, mode)
            for mode in ("exact", "approx", "old")
        }
        diagnostics["k_required"] = required
        diagnostics["t0"] = t0
        diagnostics["lt0"] = summary.lt0
        K = _resolve_K(K, len(spectrum), required["exact"])
        try:
            diagnostics["truncation_bound"] = ee.truncation_bound(K, summary.vertex_count, summary.lt0)
        except BoundUndefinedError as exc:
            logger.info("%s", exc)
            diagnostics["truncation_bound"] = None
    else:
        diagnostics["k_required"] = None
        diagnostics["truncation_bound"] = None
        K = _resolve_K(K, len(spectrum), len(spectrum))
    diagnostics["K"] = K

    grid = t_grid or ee.default_t_grid(t0)
    curve = ee.chi_curve(spectrum, K, grid, formula)
    plateau = ee.detect_plateau(curve)
    if curve_path:
        ee.write_curve(curve, curve_path)

    if len(spectrum) >= GAP_SCREENING["min_levels"]:
        series = rio.counting_fluctuation(spectrum)
        diagnostics["gap_flags"] = rio.flag_gaps(series)
        diagnostics["weyl_length_estimate"] = series.length_estimate
    else:
        diagnostics["gap_flags"] = []

    topology = None
    if plateau.found:
        topology = ti.infer(plateau.chi_estimate)
        if len(spectrum) >= GAP_SCREENING["min_levels"]:
            topology = ti.with_length(topology, spectrum)
    return AnalyzeResult(plateau=plateau, topology=topology, curve_path=curve_path, diagnostics=diagnostics)


def cmd_gen(args) -> int:
    lmin, total = args.lmin, args.total
    if args.dielectric != 1.0:
        lmin, total = rio.optical_length(lmin, args.dielectric), rio.optical_length(total, args.dielectric)
        logger.info("optical lengths: l_min=%.6g m, total=%.6g m", lmin, total)
    if args.complete is not None:
        graph = gm.gen_complete(args.complete, (lmin, total), args.seed)
    else:
        n, m = args.random
        graph = gm.gen_random_connected(n, m, (lmin, total), args.seed)
    gm.save_graph(graph, args.output)
    summary = gm.summarize(graph)
    print(f"[OK] {args.output}: |V|={summary.vertex_count} |E|={summary.edge_count} "
          f"chi={summary.chi} L={summary.total_length:.6g} m t0={summary.t0:.6g} 1/m")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    graph = gm.load_graph(args.graph)
    solver = ss.SpectrumSolver(graph)
    spectrum = solver.solve(args.count)
    report = solver.verify_weyl(spectrum)
    if not report.passed:
        logger.warning("Weyl check failed: residual %.3g (bound %g), lower-bound failures %s",
                       report.weyl_residual, report.residual_bound, list(report.lower_bound_failures))
    ss.write_spectrum(spectrum, args.output)
    if args.resonances:
        dataset = rio.spectrum_to_resonances(spectrum, args.dielectric, label=Path(args.graph).stem)
        rio.write_resonance_file(dataset, args.resonances)
    print(f"[OK] {args.output}: {len(spectrum)} levels, k_max={spectrum.values[-1]:.6g} 1/m")
    return EXIT_OK


def _no_plateau(K: int) -> int:
    sys.stderr.write(f"no plateau within 1/4 of an integer for K={K}; supply more resonances\n")
    return EXIT_NO_PLATEAU


def cmd_chi(args) -> int:
    spectrum = ss.read_spectrum(args.spectrum)
    K = args.K if args.K is not None else len(spectrum)
    if K > len(spectrum):
        raise ParameterError(f"--K {K} exceeds the {len(spectrum)} levels in {args.spectrum}")
    t0 = None
    if args.graph:
        t0 = gm.summarize(gm.load_graph(args.graph)).t0
    curve = ee.chi_curve(spectrum, K, _t_grid(args, t0), args.formula)
    plateau = ee.detect_plateau(curve)
    if args.output:
        ee.write_curve(curve, args.output)
    _write_or_print(ee.plateau_to_json(plateau), args.report)
    if args.figure:
        figures.write_figure(figures.chi_curve_figure([curve], plateau, t0), args.figure)
    return EXIT_OK if plateau.found else _no_plateau(K)


def cmd_ingest(args) -> int:
    dataset = rio.read_resonance_file(args.input)
    spectrum = rio.load_resonances(dataset)
    ss.write_spectrum(spectrum, args.output)
    flags: List[float] = []
    if len(spectrum) >= GAP_SCREENING["min_levels"]:
        series = rio.counting_fluctuation(spectrum)
        flags = rio.flag_gaps(series)
        if args.figure:
            figures.write_figure(figures.fluctuation_figure(series, flags), args.figure)
    else:
        logger.warning("only %d levels; gap screening skipped", len(spectrum))
    report = {
        "levels": len(spectrum),
        "density_per_ghz": rio.level_density(dataset) if len(dataset) > 2 else None,
        "dielectric": dataset.dielectric,
        "label": dataset.label,
        "gap_flags": flags,
    }
    _write_or_print(json.dumps(report, indent=2, sort_keys=True) + "\n", args.report)
    return EXIT_OK


def cmd_analyze(args) -> int:
    summary = None
    if args.graph:
        graph = gm.load_graph(args.graph)
        summary = gm.summarize(graph)
        K_default = ee.k_required(summary.vertex_count, summary.lt0, args.epsilon, "exact")
        count = args.count if args.count is not None else max(K_default, args.K or 0)
        spectrum = ss.solve(graph, count)
    else:
        spectrum = ss.read_spectrum(args.spectrum)

    curve_path = args.curve
    if curve_path is None and args.output:
        curve_path = str(Path(args.output).with_suffix(".curve.csv"))
    t_grid = _t_grid(args, summary.t0 if summary else None)
    result = analyze(spectrum, summary, args.K, args.epsilon, args.formula, t_grid, curve_path)
    _write_or_print(result.to_json(), args.output)
    if args.figure:
        curve = ee.read_curve(curve_path) if curve_path else ee.chi_curve(
            spectrum, result.diagnostics["K"], t_grid, args.formula)
        figures.write_figure(
            figures.chi_curve_figure([curve], result.plateau, summary.t0 if summary else None), args.figure
        )
    return EXIT_OK if result.plateau.found else _no_plateau(result.diagnostics["K"])


def cmd_perturb(args) -> int:
    spectrum = ss.read_spectrum(args.spectrum)
    policy = rio.PerturbPolicy(
        drop_probability=args.drop_probability,
        drop_min_index=args.drop_min_index,
        jitter_relative_sigma=args.jitter,
        seed=args.seed,
        drop_count=args.drop_count,
    )
    perturbed = rio.perturb(spectrum, policy)
    ss.write_spectrum(perturbed, args.output)
    print(f"[OK] {args.output}: {len(perturbed)} of {len(spectrum)} levels kept")
    return EXIT_OK


def _add_estimator_flags(parser):
    parser.add_argument("--formula", choices=FILE_FORMATS["formulas"], default="new", help="Estimator series.")
    parser.add_argument("--t-lo", type=float, default=None, help="Lower end of the t grid (1/m).")
    parser.add_argument("--t-hi", type=float, default=None, help="Upper end of the t grid (1/m).")
    parser.add_argument("--t-steps", type=int, default=ESTIMATOR_DEFAULTS["t_steps"], help="Logarithmic t samples.")
    parser.add_argument("--K", type=int, default=None, help="Number of lowest levels used.")
    parser.add_argument("--figure", default=None, help="Write an HTML figure to this path.")


def build_parser() -> GraphEchoParser:
    parser = GraphEchoParser(prog="graphecho", description="Topology of metric graphs from their spectra.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    gen = sub.add_parser("gen", help="Generate a graph file.")
    family = gen.add_mutually_exclusive_group(required=True)
    family.add_argument("--complete", type=int, metavar="N", help="Complete graph K_N.")
    family.add_argument("--random", type=int, nargs=2, metavar=("N", "M"), help="Random connected graph.")
    gen.add_argument("--lmin", type=float, required=True, help="Shortest edge length (m).")
    gen.add_argument("--total", type=float, required=True, help="Total length (m).")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--dielectric", type=float, default=1.0, help="Treat lengths as physical in this medium.")
    gen.add_argument("-o", "--output", required=True)
    gen.set_defaults(handler=cmd_gen)

    solve_p = sub.add_parser("spectrum", help="Solve a graph for its lowest levels.")
    solve_p.add_argument("--graph", required=True)
    solve_p.add_argument("--count", type=int, required=True, help="Number of levels.")
    solve_p.add_argument("--resonances", default=None, help="Also export the levels as a GHz resonance file.")
    solve_p.add_argument("--dielectric", type=float, default=1.0, help="Metadata for the resonance export.")
    solve_p.add_argument("-o", "--output", required=True)
    solve_p.set_defaults(handler=cmd_spectrum)

    chi = sub.add_parser("chi", help="Estimator curve and plateau from a spectrum file.")
    chi.add_argument("--spectrum", required=True)
    chi.add_argument("--graph", default=None, help="Reference graph; centres the t grid on t0.")
    chi.add_argument("--report", default=None, help="Plateau report path (default: stdout).")
    chi.add_argument("-o", "--output", default=None, help="Curve file path.")
    _add_estimator_flags(chi)
    chi.set_defaults(handler=cmd_chi)

    ingest = sub.add_parser("ingest", help="Convert a resonance file to a spectrum file.")
    ingest.add_argument("--in", dest="input", required=True)
    ingest.add_argument("--report", default=None, help="Ingest report path (default: stdout).")
    ingest.add_argument("--figure", default=None, help="Write the N_fl figure to this path.")
    ingest.add_argument("-o", "--output", required=True)
    ingest.set_defaults(handler=cmd_ingest)

    analyze_p = sub.add_parser("analyze", help="Full pipeline to a topology report.")
    source = analyze_p.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", default=None)
    source.add_argument("--spectrum", default=None)
    analyze_p.add_argument("--count", type=int, default=None, help="Levels to solve (graph input).")
    analyze_p.add_argument("--epsilon", type=float, default=ESTIMATOR_DEFAULTS["epsilon"])
    analyze_p.add_argument("--curve", default=None, help="Curve file path (default: next to the report).")
    analyze_p.add_argument("-o", "--output", default=None, help="Report path (default: stdout).")
    _add_estimator_flags(analyze_p)
    analyze_p.set_defaults(handler=cmd_analyze)

    pert = sub.add_parser("perturb", help="Drop and jitter levels of a spectrum file.")
    pert.add_argument("--spectrum", required=True)
    pert.add_argument("--drop-probability", type=float, default=0.0)
    pert.add_argument("--drop-min-index", type=int, default=1)
    pert.add_argument("--drop-count", type=int, default=0)
    pert.add_argument("--jitter", type=float, default=0.0, help="Relative Gaussian sigma.")
    pert.add_argument("--seed", type=int, default=0)
    pert.add_argument("-o", "--output", required=True)
    pert.set_defaults(handler=cmd_perturb)
    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_ERROR
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except GraphEchoError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


def main():
    sys.exit(run())
