"""Error types mapped to CLI exit codes (config 2, data 3, numerics 4)."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


class DataError(Exception):
    """Missing, malformed or anomalous input data."""


class ConvergenceError(Exception):
    """A numerical scheme failed to reach its requested tolerance."""
