"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the numpy
fallback takes over. Set ROBINHARDY_BACKEND=pure or =compiled to force a
choice (forcing "compiled" raises if the extension is unavailable, instead
of silently degrading).
"""

import os

from . import _pure

_requested = os.environ.get("ROBINHARDY_BACKEND", "auto").lower()

if _requested not in ("auto", "pure", "compiled"):
    raise ImportError(f"ROBINHARDY_BACKEND must be auto, pure, or compiled, not {_requested!r}")

if _requested == "pure":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _pure
        BACKEND = "pure"

seg_mass = _impl.seg_mass
seg_mass_grad = _impl.seg_mass_grad
seg_grad_energy = _impl.seg_grad_energy
seg_grad_energy_grad = _impl.seg_grad_energy_grad
tri_mass = _impl.tri_mass
tri_mass_grad = _impl.tri_mass_grad
tri_grad_energy = _impl.tri_grad_energy
tri_grad_energy_grad = _impl.tri_grad_energy_grad

__all__ = [
    "BACKEND",
    "seg_mass",
    "seg_mass_grad",
    "seg_grad_energy",
    "seg_grad_energy_grad",
    "tri_mass",
    "tri_mass_grad",
    "tri_grad_energy",
    "tri_grad_energy_grad",
]
