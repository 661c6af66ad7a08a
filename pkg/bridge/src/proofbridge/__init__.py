"""Model server and training scripts behind the proofsearch wire protocol."""

from .config import BridgeConfig, DecodeSettings
from .server import create_app
from .training import TrainSettings, finetune

__version__ = "0.1.0"

__all__ = ["BridgeConfig", "DecodeSettings", "TrainSettings", "create_app", "finetune"]
