"""ridesim: a deterministic micromobility riding simulator.

Sensor frames stream in over a framed wire protocol, per-vehicle control
mappings turn them into normalized commands, and a fixed-timestep kinematic
model drives a coin-collection trial. Everything the engine does is logged
and bit-exactly replayable.
"""

from .config import EngineConfig, load_config
from .session import Engine
from .wire import WireMessage, decode, encode

__version__ = "0.1.0"

__all__ = ["Engine", "EngineConfig", "WireMessage", "decode", "encode",
           "load_config", "__version__"]
