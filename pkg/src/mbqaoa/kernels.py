"""Kernel backend selection.

The compiled extension ``mbqaoa._ckernels`` is used when it was built;
otherwise the numpy versions in ``mbqaoa._pykernels`` are used.  Set
``MBQAOA_KERNELS`` to ``python`` or ``cython`` to force one (forcing
``cython`` when it is not built raises ``ImportError``).
"""

from __future__ import annotations

import os

from mbqaoa import _pykernels

_choice = os.environ.get("MBQAOA_KERNELS", "auto").lower()

if _choice == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from mbqaoa import _ckernels as _impl  # type: ignore[attr-defined, no-redef]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _pykernels
        BACKEND = "python"

z_diagonal = _impl.z_diagonal
apply_cz = _impl.apply_cz
apply_x = _impl.apply_x
apply_z = _impl.apply_z
apply_rx = _impl.apply_rx
apply_phase = _impl.apply_phase
project_out = _impl.project_out
cut_values = _impl.cut_values


def available_backends() -> dict[str, object]:
    """Name -> kernel module for every backend importable in this process."""
    found: dict[str, object] = {"python": _pykernels}
    try:
        from mbqaoa import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
