"""Two devices on different bands swapping data through one RIS: channels, optimizers, sweeps."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
