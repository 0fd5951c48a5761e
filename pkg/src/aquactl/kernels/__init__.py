"""Numeric kernel backend selection.

The compiled extension is used when present; the pure-Python reference
backend is the fallback.  Set AQUACTL_PURE_PYTHON=1 to force the fallback.
Both backends are bit-compatible, see tests/test_kernels.py.
"""

import os

from aquactl.kernels import _reference

if os.environ.get("AQUACTL_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _reference
else:
    try:
        from aquactl.kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _reference

BACKEND = _impl.BACKEND
PARAM_LAYOUT = _reference.PARAM_LAYOUT

tau = _impl.tau
v_uia = _impl.v_uia
sigma_do = _impl.sigma_do
kcat = _impl.kcat
k1_mortality = _impl.k1_mortality
psi = _impl.psi
rhs = _impl.rhs
step_w = _impl.step_w
stage_cost = _impl.stage_cost
rollout = _impl.rollout
horizon_costs = _impl.horizon_costs


def available_backends():
    """Importable backend modules keyed by name (for parity tests and bench)."""
    found = {"python": _reference}
    try:
        from aquactl.kernels import _core
        found["compiled"] = _core
    except ImportError:
        pass
    return found
