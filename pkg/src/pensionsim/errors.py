"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(EngineError):
    """Invalid model, strategy or solver parameters (non-PSD correlations, bad grids, ...)."""


class DomainError(EngineError):
    """An input left the mathematical domain of an operation (t out of range, z <= 0, ...)."""


class SchemaError(EngineError):
    """A data file does not match the expected schema."""


class ShapeError(SchemaError):
    """Tabular data is ragged or otherwise mis-shaped."""


class ScheduleError(EngineError):
    """Career-schedule lookup outside the covered age range, or an inconsistent schedule."""


class EstimatorError(EngineError):
    """A fitted estimator produced values outside its admissible range."""


class ContractError(EngineError):
    """A caller violated an internal contract (e.g. an allocation outside [0, 1])."""


class ConfigError(EngineError):
    """A run-configuration file is invalid."""
