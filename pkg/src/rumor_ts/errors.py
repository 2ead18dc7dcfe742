"""Error taxonomy shared across the package.

Exit codes mirror the CLI contract: 1 usage/configuration, 2 data, 3 training.
"""


class RumorTsError(Exception):
    """Base class for errors that the CLI maps to an exit code."""

    exit_code = 1


class ConfigError(RumorTsError):
    """Invalid option value, unknown learner name, out-of-range rank, and similar."""

    exit_code = 1


class DataError(RumorTsError):
    """Unusable input data: empty roots, degenerate datasets, non-finite matrices."""

    exit_code = 2


class TrainingError(RumorTsError):
    """Training diverged or gradients became non-finite."""

    exit_code = 3
