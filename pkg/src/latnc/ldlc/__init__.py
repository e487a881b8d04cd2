from .bp import DiscretizedDensity, LdlcBpDecoder, bp_decode
from .construction import (
    SAMPLE_PARITY,
    SAMPLE_SEQUENCE,
    LdlcCode,
    build_parity,
    degree7_sequence,
    from_parity,
    is_latin_square,
    ldlc_encode,
)
from .mapping import (
    CheckConstellation,
    RateDiverseMapping,
    build_mapping,
    cancel_side_info,
    centered_residue,
    mapping_lattices,
    recover_message,
    recover_symbols,
)
from .shaping import ShapingResult, exhaustive_shaping, m_algorithm, network_encode_shape, single_user_shape, unshaped
