"""Joint decoding and error estimation for the bee-identification problem."""

__version__ = "0.1.0"

from .channels import TransmissionRecord, absentee_drop, bec_transmit, bsc_transmit, substream, transmit
from .codes import (
    Codebook,
    DistanceEnumerator,
    ErasedWord,
    build_linear_code,
    build_reed_muller,
    distance_enumerator,
    erasure_matches,
    evaluate_enumerator,
    fht,
    hamming_distance,
    list_decode,
)
from .errors import BeeIDError
from .estimation import (
    ErrorBounds,
    PairwiseMatrix,
    TrellisStats,
    barg_forney_sandwich_check,
    build_pairwise_matrix,
    closed_form_upper_bound,
    error_bounds,
    estimate_U,
    estimate_V,
    permanent,
    second_order_permanent,
    trellis_stats,
)
from .identifiers import IdentificationResult, Outcome, identify_with_absentees, jedi, jldi, jmdi, ml_identify
from .matching import (
    Assignment,
    BipartiteGraph,
    NoPerfectMatching,
    hopcroft_karp,
    hungarian,
    is_unique_matching,
    pma,
    sparse_min_cost_matching,
)
from .scaled import ScaledReal
from .simulate import SimResult, run_trials, sweep

__all__ = [name for name in dir() if not name.startswith("_")]
