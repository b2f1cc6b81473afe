"""NDN forwarding simulator with FITT interest-flooding traceback and throttling."""

from .names import Data, FittNackPayload, Interest, MalformedName, Nack, Name, Reason, parse_name
from .runner import RunResult, run_scenario
from .scenario import BUILTINS, ScenarioConfig, ScenarioError, load_scenario

__all__ = [
    "BUILTINS", "Data", "FittNackPayload", "Interest", "MalformedName", "Nack", "Name",
    "Reason", "RunResult", "ScenarioConfig", "ScenarioError", "load_scenario", "parse_name",
    "run_scenario",
]
__version__ = "0.1.0"
