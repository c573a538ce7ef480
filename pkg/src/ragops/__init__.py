"""RAG experimentation toolkit for long-tail entity question answering."""

from pathlib import Path

__version__ = "0.1.0"

PACKAGE_ROOT = Path(__file__).resolve().parent

__all__ = ["PACKAGE_ROOT", "__version__"]
