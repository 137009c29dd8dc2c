"""Approximating linear reservoirs by simple cycle reservoirs.

A contractive linear reservoir is dilated to one with an orthogonal
coupling, the orthogonal coupling is perturbed into a scaled full-cycle
permutation, and the input coupling is binarized, each step keeping the
output within a prescribed tolerance without retraining the readout.
"""

from .binarize import Binarization, SCRSystem, binarize, block_cycle, scr_construct
from .cyclic import (
    CyclicApproximation,
    CycleEmbedding,
    cyclic_approximate,
    embed_in_cycle,
    l0_bound,
    match_roots,
    min_cycle_dimension,
    theoretical_dimension,
)
from .dilation import choose_order, dilate_system, dilate_with_order, egervary_dilation
from .errors import IngestionError, InvalidInputError, NumericalFailureError, ResourceLimitError, SCRError
from .linalg import (
    CanonicalForm,
    canonical_form,
    check_full_cycle,
    cycle_matrix,
    is_full_cycle,
    operator_norm,
    psd_sqrt,
    random_orthogonal,
)
from .pipeline import ApproximationReport, Limits, approximate_scr
from .reservoir import InputStream, LinearReadout, LinearReservoir, drive, output_distance, run, train_ridge

__version__ = "0.1.0"

__all__ = [
    "Binarization", "SCRSystem", "binarize", "block_cycle", "scr_construct",
    "CyclicApproximation", "CycleEmbedding", "cyclic_approximate", "embed_in_cycle", "l0_bound",
    "match_roots", "min_cycle_dimension", "theoretical_dimension",
    "choose_order", "dilate_system", "dilate_with_order", "egervary_dilation",
    "IngestionError", "InvalidInputError", "NumericalFailureError", "ResourceLimitError", "SCRError",
    "CanonicalForm", "canonical_form", "check_full_cycle", "cycle_matrix", "is_full_cycle", "operator_norm",
    "psd_sqrt", "random_orthogonal",
    "ApproximationReport", "Limits", "approximate_scr",
    "InputStream", "LinearReadout", "LinearReservoir", "drive", "output_distance", "run", "train_ridge",
]
