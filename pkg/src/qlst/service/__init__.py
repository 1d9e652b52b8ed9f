"""HTTP inference service over loaded checkpoints."""

from .app import create_app
from .registry import ModelRegistry, RegistryEntry

__all__ = ["create_app", "ModelRegistry", "RegistryEntry"]
