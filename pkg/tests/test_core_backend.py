import os
import subprocess
import sys

import numpy as np

from rsaalab import _core
from rsaalab._core import _fallback


def test_pure_python_switch():
    env = dict(os.environ, RSAA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import rsaalab._core as c; print(c.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True).stdout.strip()
    assert out == "python"


def test_cn_kernel_matches_fallback():
    n = 101
    h = 4.0 / (n + 1)
    x = np.linspace(-2 + h, 2 - h, n)
    psi = np.exp(-x**2).astype(complex)
    psi /= np.linalg.norm(psi)
    args = (np.full(n, 2.0 / h**2), -1.0 / h**2, x**4 - x**2, 9.0, np.linspace(0, 1, 301), 5.0)
    a = _core.cn_tridiag_evolve(psi, *args)
    b = _fallback.cn_tridiag_evolve(psi, *args)
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert abs(np.linalg.norm(a) - 1) < 1e-12
