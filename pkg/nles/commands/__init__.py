"""Command groups of the ``app.py`` CLI; each module exposes ``register(subparsers)``."""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DIVERGED = 2
