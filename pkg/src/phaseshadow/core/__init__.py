"""Kernel backend selection.

The compiled Cython core is used when it has been built; otherwise the
pure numpy kernels take over. Set PHASESHADOW_BACKEND=pure|compiled to
force a choice (forcing "compiled" raises if the extension is missing).
Both backends are bit-for-bit equivalent given the same inputs.
"""

import os

from . import pure

_choice = os.environ.get("PHASESHADOW_BACKEND", "").strip().lower()

if _choice == "pure":
    _impl = pure
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "PHASESHADOW_BACKEND=compiled but the extension is not built; "
                "run: python setup.py build_ext --inplace"
            )
        _impl = pure

OP_H = pure.OP_H
OP_S = pure.OP_S
OP_SDG = pure.OP_SDG
OP_X = pure.OP_X
OP_Y = pure.OP_Y
OP_Z = pure.OP_Z
OP_CZ = pure.OP_CZ
OP_CNOT = pure.OP_CNOT

nwords = pure.nwords

mul_rows = _impl.mul_rows
apply_gates = _impl.apply_gates
conjugate_fold = _impl.conjugate_fold
conjugate_fold_rows = _impl.conjugate_fold_rows
fold_product = _impl.fold_product
ge = _impl.ge
measure_all = _impl.measure_all
apply_phase_circuit = _impl.apply_phase_circuit


def backend_name() -> str:
    return _impl.BACKEND_NAME


def get_backend(name: str):
    """Return the raw kernel module for an explicit backend name."""
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _speedups  # type: ignore[attr-defined]

        return _speedups
    raise ValueError(f"unknown backend {name!r}")
