"""Backend selection for the element-kernel hot path.

The compiled Cython core is used when available; the pure numpy fallback is
always present and produces the same matrices to round-off.  Set the
environment variable ``CUTNITSCHE_PURE_PYTHON=1`` (before import) or call
``use("python")`` to force the fallback, e.g. for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

if os.environ.get("CUTNITSCHE_PURE_PYTHON", "") in ("1", "true", "yes"):
    _active_name = "python"
else:
    _active_name = "compiled" if _compiled is not None else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active_name


def use(name: str) -> None:
    """Select the kernel backend ("compiled" or "python") process-wide."""
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    _active_name = name


def get(name: str | None = None):
    """Return the backend module (active one if ``name`` is None)."""
    return _BACKENDS[_active_name if name is None else name]


def _c64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def stiffness_batch(coords):
    return get().stiffness_batch(_c64(coords))


def edge_forms_batch(coords, edges):
    return get().edge_forms_batch(_c64(coords),
                                  np.ascontiguousarray(edges, dtype=np.int64))


def cut_forms_batch(coords, n_neg, subs, seg_p, seg_q, seg_n, kappa, alpha1, alpha2):
    return get().cut_forms_batch(
        _c64(coords), np.ascontiguousarray(n_neg, dtype=np.int64), _c64(subs),
        _c64(seg_p), _c64(seg_q), _c64(seg_n), _c64(kappa),
        float(alpha1), float(alpha2))


def lift_stab_batch(A, K, Nc):
    return get().lift_stab_batch(_c64(A), _c64(K), _c64(Nc))
