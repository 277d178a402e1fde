#!/usr/bin/env python3

from .config_handler import ConfigHandler, Settings
from .formatters import CsvFormatter, JsonFormatter
from .errors import DivergenceError, ModelValidationError, PolicyError, RiskSpecError, Violation
from .iteration import IterationMonitor, Status, weighted_norm
from .log_handler import LogHandler, LogLevel
from .solver_warning import ComplexityWarning, ConvergenceWarning, SolverWarning
from .utils import (
    console,
    convert,
    fmt,
    get_resource_path,
    is_distribution
)

# should be imported last to avoid a circular import error
from .metadata import (
    __package__,
    __version__,
    __license__,
    __credits__
)
