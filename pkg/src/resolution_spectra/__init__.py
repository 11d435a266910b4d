"""Exact continued fractions, the resolution map r_a and the locking
spectrum of an open-loop mixer/low-pass detector."""

from .exact import (
    INF,
    ContinuedFraction,
    ConvergentTable,
    ProjectiveRational,
    QuadraticIrrational,
    cf_from_rational,
    cf_of_decimal,
    convergents,
    parse_rational,
    rational_from_cf,
    surd_expand,
    surd_value,
    to_minimal_form,
    to_word_form,
)
from .resolution import (
    Basin,
    LockingZone,
    ZoneClass,
    basin,
    classify,
    error_profile,
    functional_check,
    in_invariant_set,
    nu_minus,
    nu_plus,
    orbit,
    r_a,
    resolution_tree,
    truncate_word,
    zone,
)
from .spectrum import (
    DetectorConfig,
    EmptyZone,
    Spectrum,
    admissible,
    beat_frequency,
    brjuno,
    build_spectrum,
    jump_scan,
    spectrum_zone,
    stability_profile,
)
from .words import (
    GeneratorWord,
    IntMatrix2,
    LatticePoint,
    apply_point,
    build_farey_tree,
    cf_from_word,
    daughter_slope,
    mobius,
    mother_origin,
    mother_slope,
    word_from_cf,
    word_to_matrix,
)

__version__ = "0.1.0"
