"""Sequential distributed hypothesis testing over a zero-rate link.

A sensor compresses blocks of observations into zero-rate messages; a
decision center combines them with its own observations and a one-bit
stop-feedback channel to test a null joint against an alternative. The
package solves for the optimal type-II error exponent (a constrained
I-projection), simulates the protocol, evaluates its errors exactly by type
enumeration or by Monte Carlo, and verifies the stopped-process identities
the analysis rests on.
"""

from .errors import (
    AlphabetMismatch,
    BadLength,
    HorizonTooLarge,
    InconsistentMessages,
    InvalidConfig,
    InvalidDistribution,
    LengthMismatch,
    NotStrictlyPositive,
    SeqHTError,
    TooLarge,
    UnsupportedAlphabetSize,
    UnsupportedMass,
)
from .exponent import (
    ExponentResult,
    SolverOptions,
    chernoff_stein_baseline,
    grid_oracle_exponent,
    ipf_iterates,
    relaxed_exponent_oracle,
    solve_exponent,
)
from .harness import (
    ERROR_CSV_HEADER,
    FIT_CSV_HEADER,
    ErrorReport,
    ExponentFit,
    AcceptanceBoundReport,
    WaldReport,
    error_report_csv_row,
    exact_errors,
    exponent_fit_csv_rows,
    exponent_fit_summary,
    fit_exponent,
    format_float,
    monte_carlo_errors,
    verify_acceptance_bound,
    verify_wald_identity,
    wilson_halfwidth,
)
from .prob import (
    Alphabet,
    EmpiricalType,
    JointPmf,
    Pmf,
    binary_alphabet,
    count_type_vectors,
    empirical_type,
    iter_count_vectors,
    kl_divergence,
    linf_distance,
    log_multinomial_weight,
    marginals,
)
from .protocol import (
    ACCEPT,
    CONTINUE,
    REJECT,
    EncoderKind,
    Hypothesis,
    Message,
    PolicyKind,
    ProtocolConfig,
    SourceModel,
    Trace,
    acceptance_region_membership,
    decide,
    default_eta,
    encode,
    message_rate,
    run_protocol,
    simulate_batch,
    trace_record,
)

__version__ = "0.1.0"

__all__ = [
    "ACCEPT",
    "Alphabet",
    "AlphabetMismatch",
    "BadLength",
    "CONTINUE",
    "ERROR_CSV_HEADER",
    "EmpiricalType",
    "EncoderKind",
    "ErrorReport",
    "ExponentFit",
    "ExponentResult",
    "FIT_CSV_HEADER",
    "HorizonTooLarge",
    "Hypothesis",
    "InconsistentMessages",
    "InvalidConfig",
    "InvalidDistribution",
    "JointPmf",
    "AcceptanceBoundReport",
    "LengthMismatch",
    "Message",
    "NotStrictlyPositive",
    "Pmf",
    "PolicyKind",
    "ProtocolConfig",
    "REJECT",
    "SeqHTError",
    "SolverOptions",
    "SourceModel",
    "TooLarge",
    "Trace",
    "UnsupportedAlphabetSize",
    "UnsupportedMass",
    "WaldReport",
    "acceptance_region_membership",
    "binary_alphabet",
    "chernoff_stein_baseline",
    "count_type_vectors",
    "decide",
    "default_eta",
    "empirical_type",
    "encode",
    "error_report_csv_row",
    "exact_errors",
    "exponent_fit_csv_rows",
    "exponent_fit_summary",
    "fit_exponent",
    "format_float",
    "grid_oracle_exponent",
    "ipf_iterates",
    "iter_count_vectors",
    "kl_divergence",
    "linf_distance",
    "log_multinomial_weight",
    "marginals",
    "message_rate",
    "monte_carlo_errors",
    "relaxed_exponent_oracle",
    "run_protocol",
    "simulate_batch",
    "solve_exponent",
    "trace_record",
    "verify_acceptance_bound",
    "verify_wald_identity",
    "wilson_halfwidth",
]
