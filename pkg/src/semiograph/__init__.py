"""Conceptual-graph toolkit for modeling knowledge domains, annotating
stratified media corpora and compiling branching narrative publications."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def sample_workspace(name: str) -> Path:
    """Path of a shipped sample workspace ("memomines" or "language")."""
    return Path(str(resources.files("semiograph") / "sampledata" / name))
