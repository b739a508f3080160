"""Python access to the qdmeta C++ core."""

from ._core import (
    ConfigError,
    adaptation_test,
    decode,
    evaluate_landscape,
    genotype_size,
    map_features,
    rastrigin,
    run_baseline,
    run_meta_evolution,
)

__all__ = [
    "ConfigError",
    "adaptation_test",
    "decode",
    "evaluate_landscape",
    "genotype_size",
    "map_features",
    "rastrigin",
    "run_baseline",
    "run_meta_evolution",
]
