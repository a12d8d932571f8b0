"""Statevector and density-matrix primitives.

Qubit convention is little-endian throughout: qubit ``k`` is bit ``k`` of the
amplitude index, so ``|q_{n-1} ... q_1 q_0>`` has index ``sum_k q_k 2**k`` and
qubit 0 flips fastest. Entropic quantities use base-2 logarithms (bits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel

STATE_ATOL = 1e-10
HERM_ATOL = 1e-8
EIG_FLOOR = -1e-9
MAX_UNITARY_QUBITS = 8

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on ``num_qubits`` qubits; amplitudes are kept read-only."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if amps.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > STATE_ATOL:
            raise ValueError(f"state is not normalized: |psi| = {norm!r}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state on ``num_qubits`` qubits (hermitian, unit trace, PSD)."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        dim = 1 << self.num_qubits
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if mat.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got shape {mat.shape}")
        if not np.allclose(mat, mat.conj().T, atol=HERM_ATOL, rtol=0.0):
            raise ValueError("matrix is not hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > HERM_ATOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < EIG_FLOOR:
            raise ValueError(f"matrix is not positive semidefinite (min eig {lo!r})")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits


@dataclass(frozen=True)
class BlochVector:
    """Bloch coordinates of a single-qubit state, rho = (1 + c.sigma)/2."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1.0 + 1e-9:
            raise ValueError(f"Bloch vector lies outside the unit ball: {self}")

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


_GATE_KINDS = ("rx", "ry", "rz", "h", "cz", "cnot", "u1q", "u2q")


@dataclass(frozen=True, eq=False)
class Gate:
    """One circuit gate; ``targets`` holds (target,) or (first, second).

    For two-qubit matrices, ``targets[0]`` is the low bit of the 4x4 basis
    index: row ``m`` of the matrix addresses ``|b a>`` with ``a`` on
    ``targets[0]``, ``b`` on ``targets[1]`` and ``m = 2*b + a``.
    """

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind in ("cz", "cnot", "u2q") else 1
        if len(self.targets) != want or len(set(self.targets)) != len(self.targets):
            raise ValueError(f"gate {self.kind!r} needs {want} distinct targets")
        if self.kind in ("rx", "ry", "rz") and self.angle is None:
            raise ValueError(f"gate {self.kind!r} needs an angle")
        if self.kind in ("u1q", "u2q"):
            dim = 2 if self.kind == "u1q" else 4
            mat = np.asarray(self.matrix, dtype=np.complex128)
            if mat.shape != (dim, dim):
                raise ValueError(f"gate {self.kind!r} needs a {dim}x{dim} matrix")
            if not np.allclose(mat @ mat.conj().T, np.eye(dim), atol=1e-10):
                raise ValueError(f"gate {self.kind!r} matrix is not unitary")
            object.__setattr__(self, "matrix", mat)

    # -- constructors -------------------------------------------------
    @staticmethod
    def rx(angle: float, target: int) -> "Gate":
        return Gate("rx", (target,), angle=float(angle))

    @staticmethod
    def ry(angle: float, target: int) -> "Gate":
        return Gate("ry", (target,), angle=float(angle))

    @staticmethod
    def rz(angle: float, target: int) -> "Gate":
        return Gate("rz", (target,), angle=float(angle))

    @staticmethod
    def h(target: int) -> "Gate":
        return Gate("h", (target,))

    @staticmethod
    def cz(qubit_a: int, qubit_b: int) -> "Gate":
        return Gate("cz", (qubit_a, qubit_b))

    @staticmethod
    def cnot(control: int, target: int) -> "Gate":
        return Gate("cnot", (control, target))

    @staticmethod
    def unitary1(matrix: np.ndarray, target: int) -> "Gate":
        return Gate("u1q", (target,), matrix=matrix)

    @staticmethod
    def unitary2(matrix: np.ndarray, first: int, second: int) -> "Gate":
        return Gate("u2q", (first, second), matrix=matrix)

    def matrix_1q(self) -> np.ndarray:
        """The 2x2 matrix of a single-qubit gate."""
        if self.kind == "rx":
            c, s = math.cos(self.angle / 2.0), math.sin(self.angle / 2.0)
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
        if self.kind == "ry":
            c, s = math.cos(self.angle / 2.0), math.sin(self.angle / 2.0)
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        if self.kind == "rz":
            p = np.exp(-0.5j * self.angle)
            return np.array([[p, 0.0], [0.0, np.conj(p)]], dtype=np.complex128)
        if self.kind == "h":
            return _HADAMARD.copy()
        if self.kind == "u1q":
            return self.matrix.copy()
        raise ValueError(f"gate {self.kind!r} is not single-qubit")


def computational_basis_state(num_qubits: int, index: int = 0) -> StateVector:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def ghz_state(num_qubits: int) -> StateVector:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return StateVector(num_qubits, amps)


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    dim = 1 << num_qubits
    return DensityMatrix(num_qubits, np.eye(dim, dtype=np.complex128) / dim)


def _as_dm_array(obj) -> tuple[np.ndarray, int]:
    if isinstance(obj, DensityMatrix):
        return obj.matrix, obj.num_qubits
    if isinstance(obj, StateVector):
        return np.outer(obj.amplitudes, obj.amplitudes.conj()), obj.num_qubits
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(obj)!r}")


# ---------------------------------------------------------------------------
# gate application
# ---------------------------------------------------------------------------


def apply_gate_batch(states: np.ndarray, gate: Gate, num_qubits: int) -> None:
    """Apply one gate in place to a C-contiguous (m, 2**n) batch."""
    for t in gate.targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"gate target {t} out of range for {num_qubits} qubits")
    if gate.kind in ("rx", "ry", "rz", "h", "u1q"):
        g = gate.matrix_1q()
        _accel.apply_1q_uniform(
            states, g[0, 0], g[0, 1], g[1, 0], g[1, 1], gate.targets[0]
        )
    elif gate.kind == "cz":
        _accel.apply_phase(states, _accel.cz_pair_mask(num_qubits, *gate.targets))
    elif gate.kind == "cnot":
        _accel.apply_perm(states, _accel.cnot_pair_perm(num_qubits, *gate.targets))
    elif gate.kind == "u2q":
        _apply_2q_dense(states, gate.matrix, gate.targets[0], gate.targets[1])
    else:  # pragma: no cover
        raise ValueError(f"unknown gate kind {gate.kind!r}")


def _apply_2q_dense(states: np.ndarray, u4: np.ndarray, qa: int, qb: int) -> None:
    # Cold path: gather the four sub-blocks with both target bits cleared,
    # recombine through the 4x4 matrix (basis index m = 2*bit_qb + bit_qa).
    m, dim = states.shape
    idx = np.arange(dim)
    base0 = idx[(((idx >> qa) & 1) == 0) & (((idx >> qb) & 1) == 0)]
    offs = [base0 + (mm & 1) * (1 << qa) + (mm >> 1) * (1 << qb) for mm in range(4)]
    blocks = [states[:, o].copy() for o in offs]
    for mp in range(4):
        acc = u4[mp, 0] * blocks[0]
        for ms in range(1, 4):
            acc = acc + u4[mp, ms] * blocks[ms]
        states[:, offs[mp]] = acc


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    buf = state.amplitudes.copy().reshape(1, -1)
    apply_gate_batch(buf, gate, state.num_qubits)
    return StateVector(state.num_qubits, buf[0])


def apply_gate_dm(rho: DensityMatrix, gate: Gate) -> DensityMatrix:
    """Conjugate a density matrix by one gate: rho -> G rho G^dag."""
    # G @ M for the full matrix = gate applied independently to each column,
    # i.e. to the rows of M^T; G rho G^dag = G (G rho)^dag for hermitian rho.
    def lmul(mat: np.ndarray) -> np.ndarray:
        cols = np.ascontiguousarray(mat.T)
        apply_gate_batch(cols, gate, rho.num_qubits)
        return cols.T

    out = lmul(lmul(rho.matrix).conj().T)
    return DensityMatrix(rho.num_qubits, out)


# ---------------------------------------------------------------------------
# inner products, reductions, norms
# ---------------------------------------------------------------------------


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 between pure states."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states act on different qubit counts")
    ov = np.vdot(a.amplitudes, b.amplitudes)
    return float(ov.real * ov.real + ov.imag * ov.imag)


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product Tr[rho sigma] (real for hermitian args)."""
    ra, na = _as_dm_array(a)
    rb, nb = _as_dm_array(b)
    if na != nb:
        raise ValueError("states act on different qubit counts")
    return float(np.einsum("ij,ji->", ra, rb).real)


def purity(rho) -> float:
    mat, _ = _as_dm_array(rho)
    return float(np.einsum("ij,ji->", mat, mat).real)


def reduce_to_qubit(obj, qubit: int) -> DensityMatrix:
    """Partial trace down to one qubit."""
    if isinstance(obj, StateVector):
        n = obj.num_qubits
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range")
        low = 1 << qubit
        v = obj.amplitudes.reshape(obj.dim >> (qubit + 1), 2, low)
        red = np.einsum("hbl,hcl->bc", v, v.conj())
    else:
        mat, n = _as_dm_array(obj)
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range")
        low = 1 << qubit
        hi = (1 << n) >> (qubit + 1)
        arr = mat.reshape(hi, 2, low, hi, 2, low)
        red = np.einsum("hblhcl->bc", arr)
    return DensityMatrix(1, red)


def bloch_vector(rho: DensityMatrix) -> BlochVector:
    """Bloch coordinates of a single-qubit density matrix."""
    if rho.num_qubits != 1:
        raise ValueError("bloch_vector expects a single-qubit state")
    m = rho.matrix
    return BlochVector(
        float(2.0 * m[0, 1].real), float(-2.0 * m[0, 1].imag), float((m[0, 0] - m[1, 1]).real)
    )


def bloch_vectors(state: StateVector) -> np.ndarray:
    """All single-qubit Bloch vectors of a pure state, shape (n, 3)."""
    batch = state.amplitudes.reshape(1, -1).copy()
    return _accel.bloch_batch(batch, state.num_qubits)[0]


def schatten2_distance(a, b) -> float:
    """Frobenius (Schatten 2-norm) distance ||rho - sigma||_2."""
    ra, na = _as_dm_array(a)
    rb, nb = _as_dm_array(b)
    if na != nb:
        raise ValueError("states act on different qubit counts")
    return float(np.linalg.norm(ra - rb))


def trace_norm(mat: np.ndarray) -> float:
    """Schatten 1-norm of a hermitian matrix (sum of |eigenvalues|)."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(mat))))


def trace_distance(a, b) -> float:
    ra, na = _as_dm_array(a)
    rb, nb = _as_dm_array(b)
    if na != nb:
        raise ValueError("states act on different qubit counts")
    return trace_norm(ra - rb)


def _clip_spectrum(vals: np.ndarray, what: str) -> np.ndarray:
    if float(vals.min(initial=0.0)) < EIG_FLOOR:
        raise ValueError(f"{what} has eigenvalue {vals.min()!r} below {EIG_FLOOR}")
    return np.clip(vals, 0.0, None)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Umegaki relative entropy S(rho || sigma) in bits.

    Returns +inf when rho has support outside the support of sigma.
    """
    if rho.num_qubits != sigma.num_qubits:
        raise ValueError("states act on different qubit counts")
    rvals, rvecs = np.linalg.eigh(rho.matrix)
    svals, svecs = np.linalg.eigh(sigma.matrix)
    rvals = _clip_spectrum(rvals, "rho")
    svals = _clip_spectrum(svals, "sigma")

    ent = 0.0
    for lam in rvals:
        if lam > 0.0:
            ent += float(lam) * math.log2(float(lam))

    # overlap of rho with eigenvectors of sigma: w_j = <s_j| rho |s_j>
    w = np.einsum("ij,jk,ki->i", svecs.conj().T, rho.matrix, svecs).real
    cross = 0.0
    for wj, sj in zip(w, svals):
        if sj <= 0.0:
            if wj > 1e-12:
                return math.inf
            continue
        cross += float(wj) * math.log2(float(sj))
    return ent - cross


def sandwiched_renyi2_vs_maxmixed(rho) -> float:
    """Sandwiched 2-Renyi relative entropy to the maximally mixed state, in bits.

    Equals log2(2**n * Tr[rho^2]).
    """
    mat, n = _as_dm_array(rho)
    pur = float(np.einsum("ij,ji->", mat, mat).real)
    return math.log2((1 << n) * pur)


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------


def haar_random_unitary(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if num_qubits > MAX_UNITARY_QUBITS:
        raise ValueError(
            f"haar_random_unitary supports at most {MAX_UNITARY_QUBITS} qubits"
        )
    dim = 1 << num_qubits
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_random_states(num_qubits: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` states drawn from the Haar measure, as a (count, 2**n) batch.

    A normalized complex-Gaussian vector has exactly the distribution of
    U|0> for Haar-random U, without the QR cost.
    """
    dim = 1 << num_qubits
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return np.ascontiguousarray(z, dtype=np.complex128)


def haar_random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    return StateVector(num_qubits, haar_random_states(num_qubits, 1, rng)[0])
