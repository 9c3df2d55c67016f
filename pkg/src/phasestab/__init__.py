"""Stability and instability of phase retrieval for finite and countable frames."""

__version__ = "0.1.0"

from .hilbert import (
    HermitianOperator,
    ScalarField,
    inner,
    lift,
    lifted_pair_opnorm,
    quotient_distance,
    quotient_vs_lift_bound,
)
from .frames import (
    FiniteFrame,
    FrameFileError,
    MeasurementSeq,
    analysis,
    frame_bounds,
    lifted_analysis,
    load_frame,
    measure,
    onb_frame,
    perturb_destroy_pr,
    riesz_frame,
    save_frame,
    sinc_frame,
)
from .stability import (
    complement_property,
    does_phase_retrieval,
    empirical_lower_lipschitz,
    holder_constants,
    lipschitz_constant,
    min_lifted_gain,
    select_pr_subset,
    strong_cp_sigma,
)
from .instability import (
    build_witness,
    growth_table,
    lemma_search,
    s_k_eval,
    sinc_gap,
    sinc_pair,
)
from .kernels import BACKEND

__all__ = [name for name in dir() if not name.startswith("_")]
