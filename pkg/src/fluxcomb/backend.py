"""Stepper backend selection.

The compiled extension is preferred when importable; FLUXCOMB_BACKEND=python
forces the numpy fallback, FLUXCOMB_BACKEND=cython demands the extension and
fails loudly when it is missing. Both expose an identical step_block."""

import os

_requested = os.environ.get("FLUXCOMB_BACKEND", "auto").strip().lower()

if _requested in ("python", "numpy"):
    from . import _step_numpy as _impl
    BACKEND = "python"
elif _requested in ("auto", "", "c", "cython"):
    try:
        from . import _step_cy as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        if _requested in ("c", "cython"):
            raise
        from . import _step_numpy as _impl
        BACKEND = "python"
else:
    raise RuntimeError(
        f"FLUXCOMB_BACKEND={_requested!r} not recognized "
        "(use 'auto', 'python', or 'cython')")

step_block = _impl.step_block
SRC_CW = _impl.SRC_CW
SRC_PULSE = _impl.SRC_PULSE
PORT_LEFT = _impl.PORT_LEFT
PORT_RIGHT = _impl.PORT_RIGHT
