"""Language-model-guided task and motion planning in a 2D kitchen."""

__version__ = "0.1.0"
