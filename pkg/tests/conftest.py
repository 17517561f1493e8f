import json

import numpy as np
import pytest

from expectation_atlas import OperatorSet, build_basis


@pytest.fixture
def ops_pair():
    """The reference 3-dim operator pair used throughout the tests."""
    O1 = np.diag([-1.0, -1.0, 2.0])
    O2 = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=float)
    return OperatorSet.from_matrices([O1, O2], labels=["O1", "O2"])


@pytest.fixture
def pauli_set():
    return OperatorSet.from_matrices(list(build_basis(2).elements))


def matrix_json(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


@pytest.fixture
def ops_pair_file(tmp_path, ops_pair):
    path = tmp_path / "ops.json"
    path.write_text(
        json.dumps(
            {
                "dim": 3,
                "operators": [matrix_json(M) for M in ops_pair.ops],
                "labels": ["O1", "O2"],
            }
        )
    )
    return str(path)
