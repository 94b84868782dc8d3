"""Backend selection for the numerical hot kernels.

Imports the compiled extension when it is available and falls back to
the pure-Python implementation otherwise. Setting the environment
variable ``CIRCULANT3_PURE_PYTHON=1`` forces the fallback, which the
parity tests and the benchmark use to compare the two backends.
"""

from __future__ import annotations

import os

from circulant3 import _pykernels

if os.environ.get("CIRCULANT3_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from circulant3 import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.BACKEND

eval_form = _impl.eval_form
apply_power = _impl.apply_power
power_jacobian = _impl.power_jacobian
kkt_newton = _impl.kkt_newton
minimize_from = _impl.minimize_from
minimize_batch = _impl.minimize_batch
scan_two_equal = _impl.scan_two_equal
