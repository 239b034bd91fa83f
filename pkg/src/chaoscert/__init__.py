"""Exact certification of coupled-expanding interval maps and
distributional-chaos evidence over block-encoded symbol sequences."""

from .dfmetrics import (
    DFCurve,
    FarRegime,
    NearRegime,
    OrbitPair,
    PairVerdict,
    Regime,
    Thresholds,
    classify_pair,
    df_n,
    df_seq,
    orbit,
    symbolic_df_bounds,
)
from .piecewise import (
    AffinePiece,
    CertificateReport,
    IntervalSet,
    Partition,
    PiecewiseAffineMap,
    RationalInterval,
    cylinder,
    cylinder_diameters,
    pick_representative,
    singleton_evidence,
    verify_strict_coupled_expanding,
)
from .pipeline import RunConfig, run_build, run_check, run_df
from .scrambled import (
    Phi1Context,
    Phi2Context,
    Schedule,
    ScheduleEntry,
    build_phi1_context,
    build_phi2_context,
    disagreement_positions,
    p_sequence,
    phi1,
    phi2,
    recurrence_indices,
    scrambled_params,
)
from .symbolic import (
    Block,
    BlockSequence,
    PeriodicStream,
    PrefixStream,
    SequencePrefix,
    concat,
    is_admissible,
    power,
    rho,
    shift,
)
from .transition import (
    TransitionMatrix,
    WordPairGadget,
    count_admissible_words,
    enumerate_admissible_words,
    find_connector,
    find_equal_length_pair,
    is_irreducible,
    star_row,
    validate_matrix,
)

__version__ = "0.1.0"
