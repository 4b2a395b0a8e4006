"""backchirp: baseband simulation and decoding of OOK backscatter on LoRa chirps."""

from backchirp.chirp import C_LIGHT, ConfigurationError, IqBuffer, LoRaParams

__all__ = ["C_LIGHT", "ConfigurationError", "IqBuffer", "LoRaParams"]
__version__ = "0.1.0"
