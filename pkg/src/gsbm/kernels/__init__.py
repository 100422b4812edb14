"""Kernel backend selection.

The hot loops (edge sampling, radius-pair enumeration, score
accumulation) exist twice: a Cython extension (gsbm.kernels._fast) and
a NumPy fallback (gsbm.kernels._ref).  The compiled backend is used
when importable unless GSBM_PURE_PYTHON is set.  Both produce
bit-identical graphs; see benchmarks/bench_backends.py for a speed
comparison.
"""

from __future__ import annotations

import os

from . import _ref

try:
    from . import _fast
except ImportError:  # extension not built; fall back silently
    _fast = None

_FORCE_PY = os.environ.get("GSBM_PURE_PYTHON", "") not in ("", "0")
_impl = _ref if (_fast is None or _FORCE_PY) else _fast


def backend_name() -> str:
    return "compiled" if _impl is _fast else "python"


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _fast is not None else ("python",)


def set_backend(name: str) -> None:
    """Switch the active backend ('python' or 'compiled'); test/bench hook."""
    global _impl
    if name == "python":
        _impl = _ref
    elif name == "compiled":
        if _fast is None:
            raise RuntimeError("compiled backend is not available")
        _impl = _fast
    else:
        raise ValueError(f"unknown backend {name!r}")


def pair_uniforms(seed, lo, hi):
    return _impl.pair_uniforms(seed, lo, hi)


def sample_edges(*args):
    return _impl.sample_edges(*args)


def collect_pairs(*args):
    return _impl.collect_pairs(*args)


def tau_accumulate(*args):
    return _impl.tau_accumulate(*args)


def visibility_components(*args):
    return _impl.visibility_components(*args)
