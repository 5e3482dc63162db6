"""Phase-type survival laws driven by a two-speed Markov mixture."""

from .errors import (
    ComplexResidueError,
    DegenerateInformationError,
    InsufficientSampleError,
    ModelValidationError,
    OutOfSupportError,
    PhasemixError,
    QuadratureError,
    RepeatedEigenvalueError,
    SingularMatrixError,
)
from .markov import (
    Generator,
    block_exponential,
    classical_ph_density,
    classical_ph_survival,
    transition_matrix,
    validate_generator,
)
from .mixture import (
    GeneratorEstimate,
    InformationState,
    MixtureModel,
    PathRecord,
    build_mixture,
    conditional_transition,
    estimate_generator,
    format_path_line,
    information_state,
    mixture_transition,
    parse_path_line,
    path_likelihood,
    posterior_current,
    posterior_endpoints,
    posterior_full,
    posterior_limit,
)
from .gph import (
    ClassicalPH,
    ErlangMixtureApproximation,
    GPHDistribution,
    convolve,
    dense_approximation,
    erlang_mixture,
    mix,
)
from .hazard import (
    baseline_intensity,
    forward_intensity,
    instantaneous_intensity,
    longrun_baseline_intensity,
    longrun_forward_intensity,
    longrun_instantaneous_intensity,
    survival_from_intensity,
)
from .sojourn import OccupationQuery, expected_occupation, residual_lifetime
from .competing import (
    absorption_probability,
    cause_forward_intensity,
    cause_instantaneous_intensity,
    conditional_on_cause,
    future_cause_share,
    longrun_cause_intensity,
    sub_density,
    sub_distribution,
    sub_survival,
    ultimate_absorption,
)
from .montecarlo import (
    EnsembleSample,
    SimulatedPath,
    SimulationConfig,
    empirical_cause_cdf,
    empirical_posterior,
    empirical_survival,
    sample_path,
    simulate_ensemble,
    simulate_paths,
)
from .curves import CurveGrid
from .modelfile import ModelLabels, load_model, write_model
from .marriage import marriage_competing_model, marriage_model

__version__ = "0.1.0"
