"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
fallback. ``use_backend`` switches explicitly (tests and the benchmark use it).
"""

from __future__ import annotations

from types import ModuleType

from . import _fallback

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _fallback


def has_compiled() -> bool:
    return _compiled is not None


def backend_name() -> str:
    return "compiled" if _active is _compiled else "python"


def use_backend(name: str) -> None:
    global _active
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled extension gwbox._core is not available")
        _active = _compiled
    elif name == "python":
        _active = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")


def get(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled extension gwbox._core is not available")
        return _compiled
    if name == "python":
        return _fallback
    raise ValueError(f"unknown backend {name!r}")


def sweep_top5(means, sigmas, k, z, min_size):
    return _active.sweep_top5(means, sigmas, k, z, min_size)


def solve_square(cost):
    return _active.solve_square(cost)
