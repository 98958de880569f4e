"""Compiled and pure kernel backends must agree bit-for-bit."""

import numpy as np
import pytest

from magpilot.sim import _pure

try:
    from magpilot.sim import _core
except ImportError:
    _core = None

pytestmark = pytest.mark.skipif(_core is None, reason="compiled core not built")


def random_poly(rng):
    n = rng.integers(2, 6)
    return (np.cumsum(rng.uniform(50, 300, n)), rng.uniform(100, 800, n))


def test_nearest_on_polyline_parity(rng):
    for _ in range(500):
        xs, ys = random_poly(rng)
        px, py = rng.uniform(-100, 1400), rng.uniform(-100, 1100)
        assert _core.nearest_on_polyline(xs, ys, px, py) == \
            _pure.nearest_on_polyline(xs, ys, px, py)


def test_magnet_force_parity(rng):
    for _ in range(500):
        args = (*rng.uniform(0, 1280, 4), *rng.uniform(0, 960, 2),
                3.5e5, rng.uniform(1.0, 3.0), 1.0)
        assert _core.magnet_force(*args) == _pure.magnet_force(*args)


def test_sim_step_parity(rng):
    from magpilot.sim import build_workspace
    ws = build_workspace("C")
    for trial in range(300):
        state = (*rng.uniform(0, 1280, 2), *rng.uniform(0, 960, 2),
                 *(ws.cargo_start + rng.uniform(-30, 30, 2)),
                 *(ws.cargo_start + rng.uniform(-15, 15, 2)),
                 int(rng.integers(0, 2)))
        action = tuple(rng.uniform(-60, 60, 4))
        cfgargs = (ws.poly_xs, ws.poly_ys, ws.half_width, ws.width, ws.height,
                   0.1, 3.5e5, 2.0, 1.0, 50.0, 20.0, 12.0, 1.0)
        out_c = _core.sim_step(*state, *action, *cfgargs)
        out_p = _pure.sim_step(*state, *action, *cfgargs)
        assert out_c == out_p


def test_full_trajectory_parity():
    import os
    import subprocess
    import sys
    # run the same seeded expert rollout under both backends in subprocesses
    snippet = (
        "import numpy as np\n"
        "from magpilot.sim import *\n"
        "ws = build_workspace('B'); cfg = SimConfig()\n"
        "rng = np.random.Generator(np.random.PCG64(5))\n"
        "st = init_state(ws, rng)\n"
        "for _ in range(200):\n"
        "    a, _ = expert_action(st, ws, cfg)\n"
        "    st = step_sim(st, a, ws, cfg)\n"
        "print(repr(st.bead.tobytes() + st.cargo.tobytes() + st.arms.tobytes()))\n"
    )
    outs = []
    for pure in ("0", "1"):
        env = dict(os.environ, MAGPILOT_PURE=pure)
        res = subprocess.run([sys.executable, "-c", snippet], env=env,
                             capture_output=True, text=True, check=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1]


def test_rasterize_parity(rng):
    for _ in range(100):
        g1 = np.zeros((4, 32, 32))
        g2 = np.zeros((4, 32, 32))
        pts = rng.uniform(-50, 1350, 8)
        _core.rasterize_points(g1, 1280.0, 960.0, *pts)
        _pure.rasterize_points(g2, 1280.0, 960.0, *pts)
        assert np.array_equal(g1, g2)
