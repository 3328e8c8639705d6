"""Training-kernel backend selection.

The compiled extension (``relbias._fastcore``) is preferred when it
imported cleanly; the pure-NumPy twin (:mod:`relbias._slowcore`) is the
fallback. Set ``RELBIAS_BACKEND=numpy`` or ``RELBIAS_BACKEND=fast`` to
force one (forcing ``fast`` raises if the extension is missing).

Only the hot kernel (``train_epochs``) is backend-dependent; forward
evaluation and gradient queries always use the NumPy reference path.
"""

from __future__ import annotations

import os

from . import _slowcore
from .errors import ConfigurationError

try:
    from . import _fastcore
except ImportError:  # pragma: no cover - depends on the build
    _fastcore = None


def available_backends() -> dict[str, object]:
    out = {"numpy": _slowcore}
    if _fastcore is not None:
        out["fast"] = _fastcore
    return out


def get_backend(name: str | None = None):
    """Resolve a backend module by name, env var, or availability."""
    if name is None:
        name = os.environ.get("RELBIAS_BACKEND", "").strip().lower() or None
    if name is None:
        return _fastcore if _fastcore is not None else _slowcore
    backends = available_backends()
    if name not in ("numpy", "fast"):
        raise ConfigurationError(f"unknown backend {name!r} (expected 'numpy' or 'fast')")
    if name not in backends:
        raise ConfigurationError("the compiled backend is not available in this install")
    return backends[name]


def active_backend_name() -> str:
    return get_backend().NAME
