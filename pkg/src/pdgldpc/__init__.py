"""Protograph-based partially doped GLDPC codes over the binary erasure channel."""

__version__ = "0.1.0"

from .component import ComponentCode, exit_closed_form, exit_oracle, hamming, ml_erase_decode, spc
from .design import (DeConfig, RegularDesign, construct_regular, optimize_ensemble, realize_and_sweep)
from .doping import (DopingSpec, PdGldpcCode, degree_transform, dope_conventional, dope_partial,
                     inverse_degree_transform, typical_dmin_check)
from .lifting import LiftedPcm, lift
from .peg import PegConfig, peg_build
from .pexit import CodeDescription, ThresholdResult, de_threshold, pexit_run, threshold
from .protograph import (BaseMatrix, DegreeCountVector, EnsembleDistribution, InfeasibleDesignError,
                         InvalidProtographError, column_degrees, design_rate, validate_ensemble)
from .sim import SimConfig, SimResult, decode_block, erasure_rank_oracle, run_bler
