"""Sphere, king and king sphere decoders for MIMO maximum-likelihood detection."""

from .channel import (
    ChannelSpec,
    Fading,
    NoiseSpec,
    RngStream,
    add_noise,
    draw_channel,
    draw_iid_channel,
    draw_kronecker_channel,
    eta0_for_snr,
    kronecker_correlation,
)
from .detection import (
    DecodeResult,
    Enumeration,
    Node,
    SearchConfig,
    Traversal,
    babai_point,
    enumerate_children,
    ml_exhaustive,
    partial_distance,
    sphere_decode,
    tree_search,
)
from .dominance import (
    DominanceContext,
    DominanceDecision,
    discrete_difference,
    discrete_difference_k,
    dominance_check,
    flip,
    king_decode,
    king_sphere_decode,
)
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    KingSphereError,
    NoSolution,
    NotPSD,
    NotSymmetric,
    RankDeficient,
    TooLarge,
)
from .harness import SimConfig, SweepRow, emit_csv, read_csv, run_sweep, run_trial
from .modulation import (
    Modulation,
    ModulationKind,
    build_problem,
    expand_16qam,
    lift_4qam,
    lift_16qam,
    normalize_energy,
    recompose_16qam,
)
from .numerics import complex_to_real_model, gram_and_matched_filter, psd_sqrt, ql_factorize
from .problem import DetectionProblem

__version__ = "0.1.0"
