"""voxkit: speech corpus annotation, transcript cleaning, codec quantizer
primitives, and TTS prompt-sequence serialization."""

from ._accel import backend, set_backend, use_numba

__version__ = "0.1.0"

__all__ = ["backend", "set_backend", "use_numba", "__version__"]
