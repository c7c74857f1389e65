"""Image embedding sidecar: directories of images -> DEMB vector files."""

__version__ = "0.1.0"
