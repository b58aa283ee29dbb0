"""
Centralized configuration for the GraphEcho toolkit.
All tunable constants live here so solver, estimator and CLI stay consistent.
"""

# Physical constants
PHYSICS = {
    "speed_of_light": 299792458.0,  # m/s
    "ghz": 1.0e9,
    "teflon_dielectric": 2.06,
}

# Spectrum solver defaults
SOLVER_DEFAULTS = {
    "scan_step_factor": 0.25,
    "refine_tolerance": 1e-10,
    "max_refine_iterations": 200,
    # relative singular-value cut for kernel dimension
    "degeneracy_threshold": 1e-8,
    # zero-mode floor, in units of pi / total_length
    "k_floor": 1e-6,
}

# Euler characteristic estimator
ESTIMATOR_DEFAULTS = {
    "epsilon": 0.25,
    "t_steps": 60,
    # t grid relative to t0 when the graph is known
    "t0_grid": (0.5, 8.0),
    # absolute t grid (1/m) when only a spectrum is available
    "blind_grid": (0.5, 20.0),
    "old_coefficient": 2.0,
}

# Plateau detection thresholds
PLATEAU_RULES = {
    "max_deviation": 0.25,
    "min_span_ratio": 1.3,
    "min_samples": 10,
    "min_curve_samples": 20,
}

# Missing-level screening on the fluctuating counting function
GAP_SCREENING = {
    "window": 10,
    "drop_threshold": 0.5,
    "min_levels": 20,
}

# File format conventions
FILE_FORMATS = {
    "spectrum_digits": 15,
    "spectrum_unit": "k_per_m",
    "resonance_unit": "GHz",
    "provenances": ("solved", "ingested", "perturbed"),
    "formulas": ("new", "old", "old-literal"),
}
