"""Exact rational realizations of continuous-time recurrent neural networks."""
from .activation import (
    IDENTITY,
    SIGMOID,
    TANH,
    A1Data,
    ActivationSpec,
    a2_to_a1,
    builtin,
    check_a1,
    sigma_eval,
    xi_eval,
)
from .algebra import (
    CompiledPolys,
    EchelonBasis,
    MultiPoly,
    RationalFunc,
    degree_cap,
    exact_rank,
    parse_poly,
    poly_arith,
    poly_eval,
    poly_partial,
    rat_combine,
    rat_eval,
)
from .analysis import (
    AnalysisOptions,
    Certificate,
    CertificateReport,
    accessibility_larc,
    coordinate_obs_subspace,
    existence_necessary_check,
    hankel_minimality,
    lie_bracket,
    lie_derivative,
    minimality_certificate,
    observability_rank,
    rnn_property_report,
)
from .embedding import (
    IndexMap,
    build_r_aux,
    build_r_sigma,
    embed_state,
    phi_index,
    phi_inverse,
    verify_aux,
    verify_embedding,
)
from .errors import *  # noqa: F401,F403
from .systems import (
    PwcInput,
    RationalSystemSpec,
    RnnSystem,
    Trajectory,
    simulate_rational,
    simulate_rnn,
)

__version__ = "0.1.0"
