"""Studentized permutation tests for serial correlation."""
from .classic import box_pierce, chi_square_upper_tail, ljung_box
from .errors import (
    DataError,
    DegenerateSeriesError,
    DomainError,
    EnumerationTooLargeError,
    SeriesTooShortError,
)
from .multiple import bonferroni, holm, sidak
from .permutation import (
    PermutationDistribution,
    PermutationScheme,
    TestResult,
    p_values,
    permutation_distribution,
    permutation_test,
    randomized_test,
)
from .processes import ProcessSpec
from .series import TimeSeries, autocorrelation, autocovariance, sample_mean, sample_variance
from .studentizer import (
    LagStatistic,
    StudentizerConfig,
    TruncationRule,
    studentized_cov_statistic,
    studentized_rho_statistic,
    variance_components,
)

__version__ = "0.1.0"
