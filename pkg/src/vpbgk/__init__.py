"""Particle-in-cell Vlasov-Poisson-BGK solver with robust magnetic feedback
under an uncertain initial temperature, estimated by stochastic collocation."""

from .config import load_config
from .domain import ConfigError, ScenarioConfig
from .ensemble import RunResult, simulate

__version__ = "0.1.0"

__all__ = ["ConfigError", "RunResult", "ScenarioConfig", "load_config", "simulate", "__version__"]
