"""Compensation functions, clothespinning and pressure for factor maps of SFTs."""

from .clothespin import (
    NValue,
    PinSequence,
    ReturnStatistics,
    all_pinnings,
    count_pinnings,
    n_of,
    pin_process,
    pin_word_counts,
    pinning_classes,
    return_statistics,
)
from .errors import DegenerateSample, InvalidArgument, PreconditionViolation, RequiresIrreducible
from .factor import (
    Diamond,
    FactorType,
    Minimality,
    MPWOrder,
    SubshiftApprox,
    SwapPair,
    classify_factor,
    fiber_count,
    find_diamond,
    find_swap_pair,
    is_mpw_minimal,
    mpw_forbidden,
    relative_entropy_profile,
)
from .markov import MarkovMeasure, markov_entropy, rng_stream
from .shift import (
    FactorCode,
    ShiftSpace,
    SoficPresentation,
    Word,
    apply_code,
    as_word,
    enumerate_words,
    is_irreducible,
    recode_higher_block,
    sofic_presentation,
    word_array,
)
from .systems import System, load_system, parse_system

__version__ = "0.1.0"

__all__ = [
    "DegenerateSample",
    "Diamond",
    "FactorCode",
    "FactorType",
    "InvalidArgument",
    "MPWOrder",
    "MarkovMeasure",
    "Minimality",
    "NValue",
    "PinSequence",
    "PreconditionViolation",
    "RequiresIrreducible",
    "ReturnStatistics",
    "ShiftSpace",
    "SoficPresentation",
    "SubshiftApprox",
    "SwapPair",
    "System",
    "Word",
    "all_pinnings",
    "apply_code",
    "as_word",
    "classify_factor",
    "count_pinnings",
    "enumerate_words",
    "fiber_count",
    "find_diamond",
    "find_swap_pair",
    "is_irreducible",
    "is_mpw_minimal",
    "load_system",
    "markov_entropy",
    "mpw_forbidden",
    "n_of",
    "parse_system",
    "pin_process",
    "pin_word_counts",
    "pinning_classes",
    "recode_higher_block",
    "relative_entropy_profile",
    "return_statistics",
    "rng_stream",
    "sofic_presentation",
    "word_array",
]
