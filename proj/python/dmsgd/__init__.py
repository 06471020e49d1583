"""Distributed momentum SGD simulation toolkit."""

try:
    from ._dmsgd import (  # installed layout: extension lives in the package
        BadConfig,
        BadParam,
        MixingMatrix,
        NumericalDivergence,
        ObjectiveSpec,
        SpectralViolation,
        StepSchedule,
        count_comm_rounds,
        exhaustive_expectation,
        run,
        run_campaign_from_json,
        spectral_gap,
        validate_campaign_from_json,
    )
except ImportError:  # build-tree layout: extension on sys.path
    from _dmsgd import (
    BadConfig,
    BadParam,
    MixingMatrix,
    NumericalDivergence,
    ObjectiveSpec,
    SpectralViolation,
    StepSchedule,
    count_comm_rounds,
    exhaustive_expectation,
    run,
    run_campaign_from_json,
    spectral_gap,
        validate_campaign_from_json,
    )

__all__ = [
    "BadConfig",
    "BadParam",
    "MixingMatrix",
    "NumericalDivergence",
    "ObjectiveSpec",
    "SpectralViolation",
    "StepSchedule",
    "count_comm_rounds",
    "exhaustive_expectation",
    "run",
    "run_campaign_from_json",
    "spectral_gap",
    "validate_campaign_from_json",
]
