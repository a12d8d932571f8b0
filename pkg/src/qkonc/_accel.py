"""Numerical hot paths with a numba-jitted fast backend and a pure-numpy fallback.

Every operation here exists twice: a vectorized numpy implementation and a
loop-based twin that numba compiles. The active backend is chosen at import
time from the ``QKONC_BACKEND`` environment variable:

* ``QKONC_BACKEND=numba``  -- require the jitted backend (error if numba is missing)
* ``QKONC_BACKEND=numpy``  -- force the pure-numpy fallback
* unset                    -- numba when importable, numpy otherwise

State batches are C-contiguous ``(m, 2**n)`` complex128 arrays using the
little-endian qubit convention: qubit ``k`` is bit ``k`` of the amplitude
index (stride ``2**k``). All ``apply_*`` functions mutate their batch in
place; the remaining functions return fresh arrays.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

_requested = os.environ.get("QKONC_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"QKONC_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False
    if _requested == "numba":
        raise ImportError("QKONC_BACKEND=numba but numba is not importable")

ACTIVE_BACKEND = "numba" if (HAS_NUMBA and _requested != "numpy") else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _apply_1q_uniform_np(states, g00, g01, g10, g11, target):
    m, dim = states.shape
    low = 1 << target
    v = states.reshape(m, dim >> (target + 1), 2, low)
    a = v[:, :, 0, :].copy()
    b = v[:, :, 1, :]
    v[:, :, 0, :] = g00 * a + g01 * b
    v[:, :, 1, :] = g10 * a + g11 * b


def _apply_1q_rows_np(states, gates, target):
    m, dim = states.shape
    low = 1 << target
    v = states.reshape(m, dim >> (target + 1), 2, low)
    a = v[:, :, 0, :].copy()
    b = v[:, :, 1, :].copy()
    g00 = gates[:, 0, 0].reshape(m, 1, 1)
    g01 = gates[:, 0, 1].reshape(m, 1, 1)
    g10 = gates[:, 1, 0].reshape(m, 1, 1)
    g11 = gates[:, 1, 1].reshape(m, 1, 1)
    v[:, :, 0, :] = g00 * a + g01 * b
    v[:, :, 1, :] = g10 * a + g11 * b


def _apply_phase_np(states, mask):
    states *= mask


def _apply_perm_np(states, src):
    states[:] = states[:, src]


def _pair_absq_np(bra, ket):
    t = np.einsum("ij,ij->i", bra.conj(), ket)
    return (t.real * t.real + t.imag * t.imag).astype(np.float64)


def _bloch_batch_np(states, num_qubits):
    m, dim = states.shape
    out = np.empty((m, num_qubits, 3), dtype=np.float64)
    for k in range(num_qubits):
        low = 1 << k
        v = states.reshape(m, dim >> (k + 1), 2, low)
        a = v[:, :, 0, :]
        b = v[:, :, 1, :]
        t = np.einsum("ijk,ijk->i", a.conj(), b)
        out[:, k, 0] = 2.0 * t.real
        out[:, k, 1] = 2.0 * t.imag
        out[:, k, 2] = np.einsum("ijk,ijk->i", a, a.conj()).real - np.einsum(
            "ijk,ijk->i", b, b.conj()
        ).real
    return out


def _product_cos2_np(x, y):
    c = np.cos(0.5 * (x - y))
    return np.prod(c * c, axis=1)


# ---------------------------------------------------------------------------
# loop twins (numba-compiled when available)
# ---------------------------------------------------------------------------


def _apply_1q_uniform_loop(states, g00, g01, g10, g11, target):
    m, dim = states.shape
    low = 1 << target
    step = low << 1
    for r in range(m):
        for base in range(0, dim, step):
            for i in range(base, base + low):
                a = states[r, i]
                b = states[r, i + low]
                states[r, i] = g00 * a + g01 * b
                states[r, i + low] = g10 * a + g11 * b


def _apply_1q_rows_loop(states, gates, target):
    m, dim = states.shape
    low = 1 << target
    step = low << 1
    for r in range(m):
        g00 = gates[r, 0, 0]
        g01 = gates[r, 0, 1]
        g10 = gates[r, 1, 0]
        g11 = gates[r, 1, 1]
        for base in range(0, dim, step):
            for i in range(base, base + low):
                a = states[r, i]
                b = states[r, i + low]
                states[r, i] = g00 * a + g01 * b
                states[r, i + low] = g10 * a + g11 * b


def _apply_phase_loop(states, mask):
    m, dim = states.shape
    for r in range(m):
        for i in range(dim):
            states[r, i] = states[r, i] * mask[i]


def _apply_perm_loop(states, src):
    m, dim = states.shape
    buf = np.empty(dim, dtype=np.complex128)
    for r in range(m):
        for i in range(dim):
            buf[i] = states[r, src[i]]
        for i in range(dim):
            states[r, i] = buf[i]


def _pair_absq_loop(bra, ket):
    m, dim = bra.shape
    out = np.empty(m, dtype=np.float64)
    for r in range(m):
        acc = 0.0 + 0.0j
        for i in range(dim):
            acc += np.conj(bra[r, i]) * ket[r, i]
        out[r] = acc.real * acc.real + acc.imag * acc.imag
    return out


def _bloch_batch_loop(states, num_qubits):
    m, dim = states.shape
    out = np.empty((m, num_qubits, 3), dtype=np.float64)
    for r in range(m):
        for k in range(num_qubits):
            low = 1 << k
            step = low << 1
            tre = 0.0
            tim = 0.0
            zac = 0.0
            for base in range(0, dim, step):
                for i in range(base, base + low):
                    a = states[r, i]
                    b = states[r, i + low]
                    t = np.conj(a) * b
                    tre += t.real
                    tim += t.imag
                    zac += (a.real * a.real + a.imag * a.imag) - (
                        b.real * b.real + b.imag * b.imag
                    )
            out[r, k, 0] = 2.0 * tre
            out[r, k, 1] = 2.0 * tim
            out[r, k, 2] = zac
    return out


def _product_cos2_loop(x, y):
    m, d = x.shape
    out = np.empty(m, dtype=np.float64)
    for r in range(m):
        acc = 1.0
        for k in range(d):
            c = np.cos(0.5 * (x[r, k] - y[r, k]))
            acc *= c * c
        out[r] = acc
    return out


_NUMPY_IMPLS = {
    "apply_1q_uniform": _apply_1q_uniform_np,
    "apply_1q_rows": _apply_1q_rows_np,
    "apply_phase": _apply_phase_np,
    "apply_perm": _apply_perm_np,
    "pair_absq": _pair_absq_np,
    "bloch_batch": _bloch_batch_np,
    "product_cos2": _product_cos2_np,
}

if HAS_NUMBA:
    _jit = njit(cache=True, nogil=True)
    _NUMBA_IMPLS = {
        "apply_1q_uniform": _jit(_apply_1q_uniform_loop),
        "apply_1q_rows": _jit(_apply_1q_rows_loop),
        "apply_phase": _jit(_apply_phase_loop),
        "apply_perm": _jit(_apply_perm_loop),
        "pair_absq": _jit(_pair_absq_loop),
        "bloch_batch": _jit(_bloch_batch_loop),
        "product_cos2": _jit(_product_cos2_loop),
    }
else:  # pragma: no cover
    _NUMBA_IMPLS = None

IMPLEMENTATIONS = {"numpy": _NUMPY_IMPLS, "numba": _NUMBA_IMPLS}

_active = IMPLEMENTATIONS[ACTIVE_BACKEND]
apply_1q_uniform = _active["apply_1q_uniform"]
apply_1q_rows = _active["apply_1q_rows"]
apply_phase = _active["apply_phase"]
apply_perm = _active["apply_perm"]
pair_absq = _active["pair_absq"]
bloch_batch = _active["bloch_batch"]
product_cos2 = _active["product_cos2"]


def active_backend() -> str:
    """Name of the backend selected at import time ("numba" or "numpy")."""
    return ACTIVE_BACKEND


# ---------------------------------------------------------------------------
# cached mask / permutation builders (cheap, shared by both backends)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def cz_pair_mask(num_qubits: int, qubit_a: int, qubit_b: int) -> np.ndarray:
    """Diagonal of CZ between two qubits: -1 where both bits are set."""
    idx = np.arange(1 << num_qubits)
    both = ((idx >> qubit_a) & 1) & ((idx >> qubit_b) & 1)
    mask = np.where(both == 1, -1.0, 1.0)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=None)
def cz_ladder_mask(num_qubits: int) -> np.ndarray:
    """Diagonal of the CZ ladder over adjacent pairs (k, k+1), k = 0..n-2."""
    mask = np.ones(1 << num_qubits)
    for k in range(num_qubits - 1):
        mask = mask * cz_pair_mask(num_qubits, k, k + 1)
    mask.flags.writeable = False
    return mask


def _cnot_sources(num_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    return idx ^ (((idx >> control) & 1) << target)


@lru_cache(maxsize=None)
def cnot_pair_perm(num_qubits: int, control: int, target: int) -> np.ndarray:
    """Source-index permutation of a single CNOT: new[i] = old[perm[i]]."""
    perm = _cnot_sources(num_qubits, control, target)
    perm.flags.writeable = False
    return perm


@lru_cache(maxsize=None)
def cnot_ladder_perm(num_qubits: int) -> np.ndarray:
    """Composed source permutation of CNOTs on (k, k+1), applied k = 0 first."""
    total = np.arange(1 << num_qubits, dtype=np.int64)
    for k in range(num_qubits - 1):
        total = total[_cnot_sources(num_qubits, k, k + 1)]
    total.flags.writeable = False
    return total
