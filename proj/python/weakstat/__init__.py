"""Weak measurement statistics toolkit.

Exact conditional states, negative joint quasi-probabilities, Bell/CHSH
numbers, and seeded Monte Carlo reconstruction, backed by the C++ core.
"""

try:
    from ._weakstat import *  # noqa: F401,F403
    from ._weakstat import __version__  # noqa: F401
except ImportError:  # development layout: extension next to the package
    from _weakstat import *  # noqa: F401,F403
    from _weakstat import __version__  # noqa: F401
