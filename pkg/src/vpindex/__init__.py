"""Exact solver, verifier and code constructions for very-pliable index coding."""

from .bounds import (
    BoundReport,
    all_bounds,
    chained_decoding_bound,
    check_fibers_against_bound,
    generic_bound,
    singleton_bound,
)
from .constructions import concat_double, concat_general, pliable_power, xor_chain_decode, xor_chain_encode
from .cover import CodingHypergraph, CoverSolution, build_codebook, enumerate_maximal_edges, min_cover, solve
from .decodability import (
    FiberViolation,
    SliceWitness,
    is_maximal_fiber,
    is_valid_fiber,
    slice_witnesses,
    verify_codebook,
)
from .linear import (
    LinearEncoder,
    PrimeField,
    decodable_indices,
    is_vp_linear,
    linear_encode,
    linear_min_T,
    linear_to_codebook,
)
from .model import (
    CapacityError,
    CodebookStructureError,
    InputError,
    ProblemInstance,
    VPCodebook,
    canonical_index,
    parse_instance,
    rate_of,
    realisation,
)
from .pliable import pliable_min_t, pliable_valid_fiber

__version__ = "0.1.0"
