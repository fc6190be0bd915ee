"""Delay-integrator backend selection.

The hot method-of-steps loop exists twice: a compiled Cython core
(``jqfsim._stepper``) and a pure-Python twin (``jqfsim._stepper_py``).  The
compiled one is used when importable; set ``JQFSIM_FORCE_PY=1`` to force the
fallback (used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _stepper_py

if os.environ.get("JQFSIM_FORCE_PY") == "1":
    _impl = _stepper_py
else:
    try:
        from . import _stepper as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built; fall back
        _impl = _stepper_py

COMPILED: bool = bool(getattr(_impl, "COMPILED", False))
integrate = _impl.integrate


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
