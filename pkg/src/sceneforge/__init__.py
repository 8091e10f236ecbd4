"""sceneforge: interactive text-to-3D-scene generation and editing."""

__version__ = "0.1.0"
