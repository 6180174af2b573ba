"""Backend selection for the simulation hot loops.

The compiled Cython kernels are preferred; the pure-Python twins are used
when the extension is unavailable or ``DPBANDIT_PURE_PYTHON`` is set to a
nonempty value other than ``0``.  Both backends replay the identical random
stream, so every result in this package is backend-independent bit for bit.
"""

from __future__ import annotations

import os

from . import _pykernels


def _want_pure_python() -> bool:
    return os.environ.get("DPBANDIT_PURE_PYTHON", "") not in ("", "0")


if _want_pure_python():
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

ts_run = _impl.ts_run
ucb1_run = _impl.ucb1_run
tape_trials = _impl.tape_trials


def backend() -> str:
    """Name of the active backend: 'cython' or 'python'."""
    return _impl.BACKEND_NAME


def available_backends() -> dict[str, object]:
    """All importable backends, keyed by name (for tests and benchmarks)."""
    backends: dict[str, object] = {_pykernels.BACKEND_NAME: _pykernels}
    try:
        from . import _ckernels

        backends[_ckernels.BACKEND_NAME] = _ckernels
    except ImportError:
        pass
    return backends
