"""Pressure, equilibrium states, entropy brackets and the Dini-type candidate."""

from ..markov import MarkovMeasure, markov_entropy
from .compensation import (
    CompensationReport,
    TSelection,
    compensation_check,
    pair_sum,
    parse_grid,
    phi_family,
    relative_pressure_bound,
    select_t,
    tangent_bound,
)
from .dini import (
    DiniReport,
    DiniVerdict,
    VariationSequence,
    dini_potential,
    g_value,
    p_dini_report,
    tail_integral,
    tail_model,
    variation,
    variation_sequence,
)
from .entropy import EntropyBracket, pushforward_entropy_bracket, relative_entropy_bracket, shannon
from .perron import PerronResult, perron
from .potential import Potential, label_space
from .pressure import (
    TransferMatrix,
    equilibrium_markov,
    integrate,
    pressure_sft,
    pressure_sofic,
    transfer_matrix,
)

__all__ = [
    "CompensationReport",
    "DiniReport",
    "DiniVerdict",
    "EntropyBracket",
    "MarkovMeasure",
    "PerronResult",
    "Potential",
    "TSelection",
    "TransferMatrix",
    "VariationSequence",
    "compensation_check",
    "dini_potential",
    "equilibrium_markov",
    "g_value",
    "integrate",
    "label_space",
    "markov_entropy",
    "p_dini_report",
    "pair_sum",
    "parse_grid",
    "perron",
    "phi_family",
    "pressure_sft",
    "pressure_sofic",
    "pushforward_entropy_bracket",
    "relative_entropy_bracket",
    "relative_pressure_bound",
    "select_t",
    "shannon",
    "tail_integral",
    "tail_model",
    "tangent_bound",
    "transfer_matrix",
    "variation",
    "variation_sequence",
]
