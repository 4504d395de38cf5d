import subprocess
import sys
from pathlib import Path

import numpy as np

from torsionlab import _kernels

SRC = str(Path(__file__).resolve().parent.parent / "src")


def _reference(points, sources, coeffs):
    """Straightforward per-point loop, the kernel oracle."""
    n = points.shape[0]
    u = np.zeros(n)
    grad = np.zeros((n, 2))
    hess = np.zeros((n, 3))
    for i in range(n):
        for j in range(sources.shape[0]):
            d = points[i] - sources[j]
            r2 = float(d @ d)
            a = coeffs[j] / (2.0 * np.pi)
            u[i] += 0.5 * a * np.log(r2)
            grad[i] += a * d / r2
            hess[i, 0] += a * (1.0 / r2 - 2.0 * d[0] * d[0] / r2**2)
            hess[i, 1] += a * (-2.0 * d[0] * d[1] / r2**2)
            hess[i, 2] += a * (1.0 / r2 - 2.0 * d[1] * d[1] / r2**2)
    return u, grad, hess


def test_active_backend_matches_reference(rng):
    pts = rng.uniform(-0.7, 0.7, size=(40, 2))
    src = 2.0 * rng.standard_normal((15, 2))
    src[np.hypot(src[:, 0], src[:, 1]) < 1.2] += 3.0
    coeffs = rng.standard_normal(15)
    u, g, h = _kernels.log_source_fields(pts, src, coeffs)
    ur, gr, hr = _reference(pts, src, coeffs)
    assert np.max(np.abs(u - ur)) <= 1e-13
    assert np.max(np.abs(g - gr)) <= 1e-13
    assert np.max(np.abs(h - hr)) <= 1e-12


def test_numpy_fallback_matches_active_backend(rng):
    pts = rng.uniform(-0.7, 0.7, size=(200, 2))
    src = np.stack([3.0 + rng.uniform(0, 1, 30), rng.uniform(-2, 2, 30)], axis=-1)
    coeffs = rng.standard_normal(30)
    u1, g1, h1 = _kernels.log_source_fields(pts, src, coeffs)
    u2, g2, h2 = _kernels.log_source_fields_numpy(pts, src, coeffs)
    assert np.max(np.abs(u1 - u2)) <= 1e-12
    assert np.max(np.abs(g1 - g2)) <= 1e-12
    assert np.max(np.abs(h1 - h2)) <= 1e-12


def test_empty_source_set():
    u, g, h = _kernels.log_source_fields(np.zeros((5, 2)), np.zeros((0, 2)), np.zeros(0))
    assert not u.any() and not g.any() and not h.any()


def test_log_part_is_harmonic(rng):
    pts = rng.uniform(-0.5, 0.5, size=(100, 2))
    src = np.stack([2.5 * np.cos(np.linspace(0, 6, 20)), 2.5 * np.sin(np.linspace(0, 6, 20))], axis=-1)
    coeffs = rng.standard_normal(20)
    _, _, h = _kernels.log_source_fields(pts, src, coeffs)
    assert np.max(np.abs(h[:, 0] + h[:, 2])) <= 1e-12  # trace of the log part vanishes


def test_env_flag_selects_numpy_backend():
    code = (
        "import os; os.environ['TORSIONLAB_NO_NUMBA'] = '1';\n"
        f"import sys; sys.path.insert(0, {SRC!r});\n"
        "from torsionlab import _kernels; print(_kernels.BACKEND)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"
