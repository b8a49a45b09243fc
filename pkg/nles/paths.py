# =============================================================================
# PATHS - Centralised file-system path definitions
# =============================================================================
"""
Centralised file-system path definitions for simulation runs.

``BASE_DIR`` points at the project root and ``OUTPUT_DIR`` at the directory
that receives error series, spectra and checkpoints when a command is not
given ``--out``.

Environment Variables:
- NLES_OUTPUT_DIR: Override the default output directory (useful for testing)
"""

import os


# =============================================================================
# BASE DIRECTORIES
# =============================================================================

BASE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")


def get_output_dir() -> str:
    """Return the default output directory, honouring ``NLES_OUTPUT_DIR``."""
    out = os.environ.get("NLES_OUTPUT_DIR")
    if out is None:
        out = os.path.join(BASE_DIR, "runs")
    return out


# =============================================================================
# DIRECTORY INITIALISATION
# =============================================================================


def ensure_dir(path: str) -> str:
    """Create ``path`` (and parents) if missing and return it."""
    os.makedirs(path, exist_ok=True)
    return path


def run_path(out_dir: str, filename: str) -> str:
    """Join ``filename`` onto ``out_dir`` after making sure the directory exists."""
    return os.path.join(ensure_dir(out_dir), filename)
