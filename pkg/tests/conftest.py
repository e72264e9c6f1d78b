import numpy as np
import pytest

from proccontext import _pykernels, linalg, quantum
from proccontext.quantum import RegionSpec

try:
    from proccontext import _kernels
except ImportError:  # extension not built
    _kernels = None

KERNEL_BACKENDS = [pytest.param(_pykernels, id="python")]
if _kernels is not None:
    KERNEL_BACKENDS.append(pytest.param(_kernels, id="cython"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=KERNEL_BACKENDS)
def backend(request):
    return request.param


def random_valid_process(rng, n_regions=None):
    """Random valid process on 1 or 2 regions with every dimension <= 2.

    Two-region processes are mixtures of the two causal orders.
    """
    if n_regions is None:
        n_regions = int(rng.integers(1, 3))
    if n_regions == 1:
        di, do = (int(v) for v in rng.integers(1, 3, size=2))
        rho = linalg.random_density_matrix(di, rng)
        return quantum.ProcessMatrix((RegionSpec("A", di, do),), np.kron(rho.T, np.eye(do)))
    a = RegionSpec("A", *(int(v) for v in rng.integers(1, 3, size=2)))
    b = RegionSpec("B", *(int(v) for v in rng.integers(1, 3, size=2)))
    ab = quantum.sequential_process(
        linalg.random_density_matrix(a.dim_in, rng),
        quantum.random_cptp(a.dim_out, b.dim_in, rng).choi,
        a,
        b,
    )
    ba = quantum.sequential_process(
        linalg.random_density_matrix(b.dim_in, rng),
        quantum.random_cptp(b.dim_out, a.dim_in, rng).choi,
        b,
        a,
    )
    p = float(rng.uniform())
    return quantum.convex_mix([ab, ba], [p, 1 - p])
