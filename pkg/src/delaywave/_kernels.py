"""Backend selection for the inner loops.

The compiled extension is used when it imports and the environment
variable ``DELAYWAVE_PURE_PYTHON`` is unset or ``0``. Custom birth
functions (``kind_code == -1``) always run on the Python backend.
"""

from __future__ import annotations

import os

from . import _pykernels

_py = _pykernels
_c = None
if os.environ.get("DELAYWAVE_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _ckernels as _c
    except ImportError:  # extension not built
        _c = None

_active = _c if _c is not None else _py


def backend() -> str:
    return _active.BACKEND


def compiled_available() -> bool:
    return _c is not None


def use_backend(name: str) -> None:
    """Switch between ``"cython"`` and ``"python"`` at runtime."""
    global _active
    if name == "python":
        _active = _py
    elif name == "cython":
        if _c is None:
            raise RuntimeError("compiled kernels are not available")
        _active = _c
    else:
        raise ValueError(f"unknown backend {name!r}")


def _pick(kind: int):
    return _active if kind >= 0 else _py


def dde_run(kind, p, n, past_x, past_xp, m, dt, nsteps, scheme, gfun=None):
    return _pick(kind).dde_run(kind, p, n, past_x, past_xp, m, dt, nsteps, scheme, gfun)


def pde_advance(kind, p, n, ring, head, d, dt, dx, nsteps, bc, left_val, right_val, level, gfun=None):
    return _pick(kind).pde_advance(kind, p, n, ring, head, d, dt, dx, nsteps, bc,
                                   left_val, right_val, level, gfun)


def wave_sweeps(*args):
    return _active.wave_sweeps(*args)
