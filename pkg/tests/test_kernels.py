import subprocess
import sys

import numpy as np

from affectseq import kernels


def _point(seed, B=3, H=5):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(B, 4 * H))
    c_prev = rng.normal(size=(B, H))
    dh = rng.normal(size=(B, H))
    dc_out = rng.normal(size=(B, H))
    return z, c_prev, dh, dc_out


def test_backends_agree_forward_and_backward():
    for seed in range(5):
        z, c_prev, dh, dc_out = _point(seed)
        ref = kernels._gates_forward_numpy(z, c_prev)
        loop = kernels._gates_forward_loop(z, c_prev)
        for a, b in zip(ref, loop):
            assert np.allclose(a, b, atol=1e-15)
        i, f, g, o, c, _ = ref
        dz_r, dcp_r = kernels._gates_backward_numpy(dh, dc_out, i, f, g, o, c, c_prev)
        dz_l, dcp_l = kernels._gates_backward_loop(dh, dc_out, i, f, g, o, c, c_prev)
        assert np.allclose(dz_r, dz_l, atol=1e-15)
        assert np.allclose(dcp_r, dcp_l, atol=1e-15)


def test_active_backend_matches_numpy_reference():
    z, c_prev, dh, dc_out = _point(9)
    ref = kernels._gates_forward_numpy(z, c_prev)
    got = kernels.gates_forward(z, c_prev)
    for a, b in zip(ref, got):
        assert np.allclose(a, b, atol=1e-15)


def test_gate_values_in_range():
    z, c_prev, _, _ = _point(2)
    i, f, g, o, _, _ = kernels._gates_forward_numpy(z, c_prev)
    for gate in (i, f, o):
        assert np.all((gate > 0.0) & (gate < 1.0))
    assert np.all((g > -1.0) & (g < 1.0))


def test_env_flag_selects_numpy_backend():
    code = (
        "import os; os.environ['AFFECTSEQ_BACKEND']='numpy'; "
        "from affectseq import kernels; print(kernels.BACKEND)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"
