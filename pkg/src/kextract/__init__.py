"""Desk-scale workbench for Kolmogorov extraction from dependent sources."""
from .core import (RainbowParams, binom_sum, decode_pair, encode_pair,
                   rainbow_feasible)
from .errors import KextractError
from .oracle import (BOTTOM, DescriptionSystem, complexity, dep, literal_system,
                     load_system, profile_set, random_system, soi_slack)
from .tables import (ColorSetFamily, ColorTable, column_strip_max, monte_carlo_rainbow,
                     random_table, smallest_rainbow, verify_rainbow)
from .extractor import (ExtractorParams, audit_extraction, bad_columns, derive_params,
                        extract)
from .adversary import (AdvisedFamily, FiniteDistribution, FunctionGrid,
                        amplification_harness, frequent_range, greedy_range_cover,
                        min_entropy, min_entropy_adversary, most_popular_output,
                        one_source_witness, range_of, two_source_witness)

__version__ = "0.1.0"

__all__ = [
    "RainbowParams", "binom_sum", "decode_pair", "encode_pair", "rainbow_feasible",
    "KextractError",
    "BOTTOM", "DescriptionSystem", "complexity", "dep", "literal_system", "load_system",
    "profile_set", "random_system", "soi_slack",
    "ColorSetFamily", "ColorTable", "column_strip_max", "monte_carlo_rainbow",
    "random_table", "smallest_rainbow", "verify_rainbow",
    "ExtractorParams", "audit_extraction", "bad_columns", "derive_params", "extract",
    "AdvisedFamily", "FiniteDistribution", "FunctionGrid", "amplification_harness",
    "frequent_range", "greedy_range_cover", "min_entropy", "min_entropy_adversary",
    "most_popular_output", "one_source_witness", "range_of", "two_source_witness",
]
