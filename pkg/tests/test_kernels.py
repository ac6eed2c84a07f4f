import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demest import _kernels_py as py

compiled = pytest.importorskip("demest._kernels", reason="compiled extension not built")


def _words(rng, rows, shots):
    w = (shots + 63) // 64
    words = rng.integers(0, 2**63, size=(rows, w), dtype=np.uint64) | (
        rng.integers(0, 2, size=(rows, w), dtype=np.uint64) << np.uint64(63))
    rem = shots & 63
    if rem:
        words[:, -1] &= np.uint64((1 << rem) - 1)
    return np.ascontiguousarray(words)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 700))
def test_xor_bits(seed, shots):
    rng = np.random.default_rng(seed)
    row = _words(rng, 1, shots)[0]
    pos = np.ascontiguousarray(rng.integers(0, shots, size=int(rng.integers(0, 50))), dtype=np.int64)
    a, b = row.copy(), row.copy()
    py.xor_bits(a, pos)
    compiled.xor_bits(b, pos)
    assert np.array_equal(a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 700))
def test_coincidence_counts(seed, shots):
    rng = np.random.default_rng(seed)
    words = _words(rng, 6, shots)
    sets = np.full((5, 4), -1, dtype=np.int64)
    for s in range(5):
        k = int(rng.integers(2, 5))
        sets[s, :k] = np.sort(rng.choice(6, k, replace=False))
    assert np.array_equal(py.coincidence_counts(words, sets), compiled.coincidence_counts(words, sets))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 700))
def test_pattern_counts(seed, shots):
    rng = np.random.default_rng(seed)
    words = _words(rng, 5, shots)
    idx = np.ascontiguousarray(rng.choice(5, int(rng.integers(1, 5)), replace=False), dtype=np.int64)
    a = py.pattern_counts(words, idx, shots)
    b = compiled.pattern_counts(words, idx, shots)
    assert np.array_equal(a, b)
    assert a.sum() == shots


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 10))
def test_match_dp(seed, k):
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.1, 5.0, size=(k, k))
    dist = np.ascontiguousarray((d + d.T) / 2)
    bdist = np.ascontiguousarray(rng.uniform(0.1, 5.0, size=k))
    pa, wa = py.match_dp(dist, bdist)
    pb, wb = compiled.match_dp(dist, bdist)
    assert wa == pytest.approx(wb, rel=1e-12)
    assert np.array_equal(pa, pb)


def test_env_forces_python_backend():
    code = "from demest import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, DEMEST_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    env.pop("DEMEST_PURE_PYTHON")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"
