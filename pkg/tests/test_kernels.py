"""The compiled and pure-Python kernels must agree bitwise."""

import numpy as np
import pytest

from gwbox import _kernels
from gwbox.matching import hungarian
from gwbox.uncertainty import localization_uncertainty_batch

needs_compiled = pytest.mark.skipif(not _kernels.has_compiled(), reason="compiled extension not built")


@needs_compiled
def test_backend_selected_at_import():
    assert _kernels.backend_name() == "compiled"


@needs_compiled
def test_sweep_bitwise_equal(rng):
    py, cc = _kernels.get("python"), _kernels.get("compiled")
    for k in (5, 6, 17, 300, 601):
        n = 400
        means = np.column_stack([rng.uniform(0, 1, (n, 2)), rng.uniform(1e-3, 1, (n, 2))])
        sig = rng.uniform(1e-9, 1, (n, 4))
        a = py.sweep_top5(means, sig, k, 1.96, 1e-6)
        b = cc.sweep_top5(means, sig, k, 1.96, 1e-6)
        np.testing.assert_array_equal(a, b)


@needs_compiled
def test_solver_bitwise_equal(rng):
    py, cc = _kernels.get("python"), _kernels.get("compiled")
    for _ in range(100):
        n = int(rng.integers(1, 30))
        c = rng.normal(size=(n, n))
        if rng.uniform() < 0.3:
            c = np.round(c)
        for x, y in zip(py.solve_square(c), cc.solve_square(c)):
            np.testing.assert_array_equal(x, y)


def test_duals_feasible_and_tight(rng):
    for name in ("python", "compiled"):
        mod = _kernels.get(name)
        for _ in range(50):
            n = int(rng.integers(1, 20))
            c = rng.normal(size=(n, n))
            rc, u, v = mod.solve_square(c)
            red = c - u[:, None] - v[None, :]
            assert red.min() >= -1e-12
            np.testing.assert_allclose(red[np.arange(n), rc], 0.0, atol=1e-12)


def test_public_api_identical_across_backends(backend, rng):
    c = rng.normal(size=(6, 4))
    means = np.column_stack([rng.uniform(0, 1, (50, 2)), rng.uniform(0.01, 1, (50, 2))])
    sig = rng.uniform(1e-4, 0.5, (50, 4))
    out = (hungarian(c), localization_uncertainty_batch(means, sig, 100).tolist())
    _kernels.use_backend("python")
    ref = (hungarian(c), localization_uncertainty_batch(means, sig, 100).tolist())
    _kernels.use_backend(backend)
    assert out == ref


def test_use_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.use_backend("fortran")
    with pytest.raises(ValueError):
        _kernels.get("fortran")


def test_fallback_selected_when_extension_missing():
    import subprocess
    import sys

    code = (
        "import sys; sys.modules['gwbox._core'] = None\n"
        "import gwbox\n"
        "from gwbox.uncertainty import localization_uncertainty_batch as f\n"
        "print(gwbox.backend_name(), gwbox.has_compiled(), repr(float(f([(0.5,0.5,0.4,0.4)], [(0.05,)*4], 5)[0])))\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout.split()
    assert out[:2] == ["python", "False"]
    assert float(out[2]) == localization_uncertainty_batch([(0.5, 0.5, 0.4, 0.4)], [(0.05,) * 4], 5)[0]
