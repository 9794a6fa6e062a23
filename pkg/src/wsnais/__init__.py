"""Immune-inspired intrusion detection for simulated wireless sensor networks.

Submodules:

``world``      discrete-tick network model, credentials, packet scripts
``tracking``   binary proximity sensing and particle reweighting
``admission``  credential checks and honeypot probes
``ais``        bitstring affinity, negative selection, clonal selection
``response``   mode machine, team formation, energy-drain confrontation
``optimizer``  clonal selection on a continuous two-peak landscape
``scenario``   TOML scenario loading and the seeded benchmark network
``harness``    the end-to-end event loop and CSV metrics
"""

from .harness import RunReport, emit_metrics, run_scenario
from .scenario import ScenarioConfig, ScenarioError, load_scenario

__version__ = "0.1.0"

__all__ = ["RunReport", "ScenarioConfig", "ScenarioError", "emit_metrics", "load_scenario",
           "run_scenario", "__version__"]
