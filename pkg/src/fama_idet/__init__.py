"""Fluid-antenna multiple access with integrated data and energy transfer.

Closed-form and quadrature evaluators, a reproducible Monte Carlo simulator
and a sweep/figure command-line harness.
"""

from .channel import (
    ChannelRealization,
    PortCorrelation,
    SystemParams,
    harvest_power_per_port,
    port_correlation,
    sample_channel,
    select_wdt_port,
    select_wet_port,
    sir_per_port,
)
from .errors import ConfigError, DomainError, NumericError, RangeError

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "ConfigError",
    "DomainError",
    "NumericError",
    "PortCorrelation",
    "RangeError",
    "SystemParams",
    "harvest_power_per_port",
    "port_correlation",
    "sample_channel",
    "select_wdt_port",
    "select_wet_port",
    "sir_per_port",
]
