"""citefit: fit and compare heavy-tailed count models for citation data.

The package fits the discretised lognormal and the hooked (offset) power law
to per-journal citation counts by maximum likelihood, compares the fits with
the Vuong test, diagnoses shape mismatches over log-spaced segments, and
renders per-journal report tables and cumulative-distribution plots.
"""

from .distributions import (
    DEFAULT_ALPHA_CAP,
    DEFAULT_TRUNCATION,
    SIGMA_MIN,
    DiscretisedLognormalParams,
    HookedPowerLawParams,
    cdf_values,
    dln_cdf,
    dln_log_pmf,
    dln_quantile,
    hooked_cdf,
    hooked_log_norm,
    hooked_log_pmf,
    hooked_quantile,
    log_pmf_values,
)
from .fitting import (
    CitationDataset,
    FitConfig,
    FitResult,
    Model,
    fit_hooked,
    fit_lognormal,
    init_hooked,
    init_lognormal,
    shift_counts,
)
from .numerics import (
    LOG_ZERO,
    UnderflowReport,
    UnderflowRisk,
    extended_sum_oracle,
    log_sum_exp,
    predict_underflow,
    std_normal_cdf,
    std_normal_log_cdf,
)
from .selection import (
    DEFAULT_Z_THRESHOLD,
    ComparisonResult,
    Winner,
    aic,
    classify_winner,
    total_log_likelihood,
    vuong_test,
)
from .diagnostics import (
    SegmentDiagnostics,
    SegmentSpec,
    empirical_cdf,
    make_segments,
    plot_series,
    segment_differences,
)
from .synthesis import (
    MixtureSpec,
    SeededGenerator,
    mixture_experiment,
    recovery_experiment,
    sample,
)
from .data_io import (
    ResultDocument,
    parse_counts,
    read_result,
    render_table,
    write_result,
)

__version__ = "0.1.0"
