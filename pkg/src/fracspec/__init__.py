"""Spectral decimation toolkit: graph approximations of self-similar
fractals, their Laplacian spectra, renormalised limits and spacing
criteria."""
from .decimation import (
    BranchInverse,
    DecimationSystem,
    apply_inverse,
    backward_images,
    check_contraction,
    closed_form_spectrum,
    critical_points,
    extremum_of_derivative,
    fixed_points,
    get_system,
    load_registry,
    preimage_set,
)
from .graphs import FractalSpec, LevelGraph, build_level, get_fractal
from .laplacian import assemble, level_spectrum, spectrum, verify_decimation
from .limits import eigenvalue_limit, generate_spectrum, truncated_spectrum
from .perturbation import make_admissible_perturbation, run_trials, spectral_projectors, wielandt_check
from .rational import Polynomial, RationalFunction, RealRoot, real_roots
from .spacing import (
    gap_ratios,
    lemma_bound_check,
    min_spacing,
    positive_criterion,
    spacing_report,
    suggest_D0,
    witness_sequence,
    zero_criterion,
    zero_spacing_witness,
)

__version__ = "0.1.0"
