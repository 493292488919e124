from ddshaper.verify.suites import (
    ALL_SUITES,
    CHECK_COLUMNS,
    CheckResult,
    DEFAULT_GRIDS,
    edge_harmonic_bound,
    localization_ratio,
    random_signal,
    run_suites,
    smooth_atoms,
    SUITES,
    suite_names,
)
