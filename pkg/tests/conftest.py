import json

import numpy as np
import pytest

from decomap import modular


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def md_skew():
    """Modular data for the diag(0.8, 0.2) state."""
    return modular.build_modular(np.diag([0.8, 0.2]))


@pytest.fixture
def md_tracial2():
    return modular.build_modular(np.eye(2) / 2)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def matrix_json(m):
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
