"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
twin. ``MAGPILOT_PURE=1`` forces the fallback (useful for parity tests and
benchmarks).
"""

import os

if os.environ.get("MAGPILOT_PURE") == "1":
    from magpilot.sim import _pure as _impl
else:
    try:
        from magpilot.sim import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from magpilot.sim import _pure as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND
nearest_on_polyline = _impl.nearest_on_polyline
magnet_force = _impl.magnet_force
sim_step = _impl.sim_step
rasterize_points = _impl.rasterize_points
