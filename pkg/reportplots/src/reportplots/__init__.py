"""Static report figures for run-artifact directories."""

from .plots import plot_run
from .reader import RunArtifactView, SchemaError

__all__ = ["RunArtifactView", "SchemaError", "plot_run"]
