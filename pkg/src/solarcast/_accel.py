"""Numba on/off switch for the hot kernels.

Set ``SOLARCAST_NUMBA=0`` in the environment to run every kernel as plain
Python/NumPy. The same flag is honoured when numba is not importable, so the
package works (slowly) without it.
"""

import os

_flag = os.environ.get("SOLARCAST_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _flag not in ("0", "false", "off", "no")

if NUMBA_ENABLED:
    try:
        from numba import njit  # noqa: F401
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit: returns the function unchanged."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
