import numpy as np
import pytest


def taylor_exp(M, terms=20):
    """Independent series oracle sum_{k<=terms} M^k / k!."""
    M = np.asarray(M)
    out = np.eye(M.shape[0], dtype=M.dtype)
    term = np.eye(M.shape[0], dtype=M.dtype)
    for k in range(1, terms + 1):
        term = term @ M / k
        out = out + term
    return out


def random_sl2(rng, norm=None):
    """Random traceless 2x2 complex matrix, spectral norm `norm` (or in (0,2])."""
    A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    A[1, 1] = -A[0, 0]
    target = rng.uniform(0.05, 2.0) if norm is None else norm
    return A * (target / max(np.linalg.norm(A, 2), 1e-12))


def random_gl3(rng, norm=None):
    A = rng.standard_normal((3, 3))
    target = rng.uniform(0.05, 2.0) if norm is None else norm
    return A * (target / max(np.linalg.norm(A, 2), 1e-12))


def cap_product(A, t, cap=2.75):
    """Rescale t so ||A t|| stays where the 20-term oracle is itself accurate."""
    nrm = float(np.linalg.norm(A, 2)) * abs(t)
    if nrm > cap:
        t *= cap / nrm
    return t


@pytest.fixture
def rng():
    return np.random.default_rng(20240808)
