import itertools

import numpy as np
import pytest

from jsrbound.linalg import NormKind, _mul_parts, _norm_parts
from jsrbound.semigroup import MatrixSet


def unit_disc(rng, shape):
    return np.sqrt(rng.random(shape)) * np.exp(2j * np.pi * rng.random(shape))


def random_set(rng, d, r):
    return MatrixSet(unit_disc(rng, (r, d, d)))


def levelwise_max_norm(S, n, kind):
    """Unpruned brute force: all r**n products built level by level."""
    st = S.stacked()
    pr, pi = st.real, st.imag
    for _ in range(n - 1):
        cr, ci = _mul_parts(st.real[None], st.imag[None], pr[:, None], pi[:, None])
        pr = cr.reshape(-1, S.dim, S.dim)
        pi = ci.reshape(-1, S.dim, S.dim)
    return float(_norm_parts(pr, pi, NormKind.parse(kind)).max())


def numpy_max_norm(S, n, kind):
    """Independent brute force with numpy matmul and LAPACK norms."""
    ords = {"one": 1, "inf": np.inf, "two": 2}
    best = 0.0
    for word in itertools.product(range(S.r), repeat=n):
        p = np.eye(S.dim, dtype=complex)
        for i in word:
            p = S[i] @ p
        best = max(best, np.linalg.norm(p, ords[kind]))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


DIAG21 = MatrixSet([np.diag([2.0, 1.0])])
NILPAIR = MatrixSet([[[0, 1], [0, 0]], [[0, 2], [0, 0]]])
