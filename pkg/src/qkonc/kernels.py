"""Kernel functions and Gram-matrix assembly.

Two kernels are supported between embedded states rho(x), rho(x'):

* fidelity:  kappa_FQ = Tr[rho(x) rho(x')]  (= |<psi(x)|psi(x')>|^2 for pure states)
* projected: kappa_PQ = exp(-gamma * sum_k ||rho_k(x) - rho_k(x')||_2^2)
  over single-qubit reduced states; for pure global states each term equals
  half the squared Bloch-vector difference.

The tensor-Ry product family additionally has closed forms valid at any
qubit count (no statevector is ever materialized):

  kappa_FQ = prod_k cos^2((x_k - x'_k)/2)
  kappa_PQ = exp(-gamma * sum_k (1 - cos(x_k - x'_k)))
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .core import StateVector, fidelity, hs_inner
from .embeddings import EmbeddingSpec, embed_batch
from .estimators import (
    EstimatorSpec,
    loschmidt_record,
    projected_estimate_from_bloch,
    swap_record,
)

KERNEL_VARIANTS = ("fidelity", "projected")


@dataclass(frozen=True)
class KernelKind:
    variant: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.variant not in KERNEL_VARIANTS:
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")

    @staticmethod
    def fidelity() -> "KernelKind":
        return KernelKind("fidelity")

    @staticmethod
    def projected(gamma: float = 1.0) -> "KernelKind":
        return KernelKind("projected", gamma=gamma)


def fidelity_kernel(a, b) -> float:
    """Tr[rho sigma]; reduces to the squared overlap for pure states."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return fidelity(a, b)
    return hs_inner(a, b)


def projected_sq_distance(a: StateVector, b: StateVector) -> float:
    """Sum over qubits of the squared 2-norm distance of reduced states."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states act on different qubit counts")
    ca = _accel.bloch_batch(a.amplitudes.reshape(1, -1).copy(), a.num_qubits)[0]
    cb = _accel.bloch_batch(b.amplitudes.reshape(1, -1).copy(), b.num_qubits)[0]
    return 0.5 * float(np.sum((ca - cb) ** 2))


def projected_kernel(a: StateVector, b: StateVector, gamma: float = 1.0) -> float:
    return math.exp(-gamma * projected_sq_distance(a, b))


# ---------------------------------------------------------------------------
# tensor-Ry closed forms
# ---------------------------------------------------------------------------


def closed_form_product_fidelity(x, y) -> float:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    return float(_accel.product_cos2(x, y)[0])


def closed_form_product_fidelity_batch(xs, ys) -> np.ndarray:
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    return _accel.product_cos2(xs, ys)


def closed_form_product_projected(x, y, gamma: float = 1.0) -> float:
    return float(closed_form_product_projected_batch(
        np.atleast_2d(x), np.atleast_2d(y), gamma
    )[0])


def closed_form_product_projected_batch(xs, ys, gamma: float = 1.0) -> np.ndarray:
    # Ry(x)|0> has Bloch vector (sin x, 0, cos x), so each qubit contributes
    # ||rho_k - rho'_k||_2^2 = 1 - cos(x_k - x'_k).
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    d = np.sum(1.0 - np.cos(xs - ys), axis=1)
    return np.exp(-gamma * d)


def product_bloch_vectors(xs) -> np.ndarray:
    """(m, n, 3) Bloch vectors of tensor-Ry states, any qubit count."""
    xs = np.asarray(xs, dtype=np.float64)
    return np.stack([np.sin(xs), np.zeros_like(xs), np.cos(xs)], axis=2)


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GramMatrix:
    matrix: np.ndarray
    kind: KernelKind
    estimator: EstimatorSpec | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @property
    def num_points(self) -> int:
        return self.matrix.shape[0]

    def to_csv(self, path) -> None:
        meta = {"variant": self.kind.variant, "gamma": self.kind.gamma}
        if self.estimator is not None:
            meta["strategy"] = self.estimator.strategy
            meta["shots"] = self.estimator.shots
            meta["seed"] = self.estimator.seed
        with open(path, "w", newline="\n") as fh:
            fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            for row in self.matrix:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @staticmethod
    def from_csv(path) -> "GramMatrix":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    meta = json.loads(line[1:])
                    continue
                rows.append([float(v) for v in line.split(",")])
        kind = KernelKind(meta.get("variant", "fidelity"), meta.get("gamma", 1.0))
        est = None
        if "strategy" in meta:
            est = EstimatorSpec(meta["strategy"], meta.get("shots", 1000), meta.get("seed", 0))
        return GramMatrix(np.array(rows), kind, est)


def _exact_kernel_matrix(
    spec: EmbeddingSpec, xs: np.ndarray, ys: np.ndarray | None, kind: KernelKind, theta
) -> np.ndarray:
    """Exact kernel values between two point sets (ys=None means xs vs xs)."""
    if spec.family == "tensor_ry":
        b = xs if ys is None else ys
        diff = xs[:, None, :] - b[None, :, :]
        if kind.variant == "fidelity":
            c = np.cos(0.5 * diff)
            return np.prod(c * c, axis=2)
        return np.exp(-kind.gamma * np.sum(1.0 - np.cos(diff), axis=2))
    psi_a = embed_batch(spec, xs, theta=theta)
    psi_b = psi_a if ys is None else embed_batch(spec, ys, theta=theta)
    if kind.variant == "fidelity":
        ov = psi_a @ psi_b.conj().T
        return (ov.real**2 + ov.imag**2)
    ca = _accel.bloch_batch(psi_a, spec.num_qubits).reshape(len(xs), -1)
    cb = ca if ys is None else _accel.bloch_batch(psi_b, spec.num_qubits).reshape(len(psi_b), -1)
    sq_a = np.sum(ca * ca, axis=1)
    sq_b = np.sum(cb * cb, axis=1)
    d = 0.5 * (sq_a[:, None] + sq_b[None, :] - 2.0 * (ca @ cb.T))
    return np.exp(-kind.gamma * d)


def _all_bloch(spec: EmbeddingSpec, xs: np.ndarray, theta) -> np.ndarray:
    if spec.family == "tensor_ry":
        return product_bloch_vectors(xs)
    return _accel.bloch_batch(embed_batch(spec, xs, theta=theta), spec.num_qubits)


def _entry_rng(seed: int, i: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, i, j)))


def gram(
    spec: EmbeddingSpec,
    xs,
    kind: KernelKind,
    estimator: EstimatorSpec | None = None,
    theta=None,
) -> GramMatrix:
    """Assemble a Gram matrix over a point set.

    The diagonal is fixed to exactly 1 without evaluation. With a finite-shot
    estimator, every strict-upper-triangle entry is an independent estimator
    run whose generator derives from SeedSequence((seed, i, j)); the matrix is
    then symmetrized. Estimator/kernel compatibility is enforced (loschmidt
    and swap estimate fidelity kernels; tomography and local_swap estimate
    projected kernels).
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != spec.num_qubits:
        raise ValueError(f"expected (m, {spec.num_qubits}) inputs, got {xs.shape}")
    npts = xs.shape[0]
    exact_needed = estimator is None or estimator.strategy in ("exact", "loschmidt", "swap")

    if estimator is not None and estimator.strategy != "exact":
        if kind.variant == "fidelity" and estimator.strategy in ("tomography", "local_swap"):
            raise ValueError(
                f"estimator {estimator.strategy!r} is incompatible with the fidelity kernel"
            )
        if kind.variant == "projected" and estimator.strategy in ("loschmidt", "swap"):
            raise ValueError(
                f"estimator {estimator.strategy!r} is incompatible with the projected kernel"
            )

    out = np.eye(npts)
    if estimator is None or estimator.strategy == "exact":
        exact = _exact_kernel_matrix(spec, xs, None, kind, theta)
        iu = np.triu_indices(npts, k=1)
        out[iu] = exact[iu]
        out.T[iu] = exact[iu]
        return GramMatrix(out, kind, estimator)

    if exact_needed:
        exact = _exact_kernel_matrix(spec, xs, None, kind, theta)
        for i in range(npts):
            for j in range(i + 1, npts):
                rng = _entry_rng(estimator.seed, i, j)
                if estimator.strategy == "loschmidt":
                    val = loschmidt_record(exact[i, j], estimator.shots, rng).estimate
                else:
                    val = swap_record(exact[i, j], estimator.shots, rng).estimate
                out[i, j] = out[j, i] = val
        return GramMatrix(out, kind, estimator)

    bloch = _all_bloch(spec, xs, theta)
    for i in range(npts):
        for j in range(i + 1, npts):
            rng = _entry_rng(estimator.seed, i, j)
            out[i, j] = out[j, i] = projected_estimate_from_bloch(
                bloch[i], bloch[j], estimator.strategy, estimator.shots, rng, kind.gamma
            )
    return GramMatrix(out, kind, estimator)


def kernel_matrix(
    spec: EmbeddingSpec,
    xs,
    ys,
    kind: KernelKind,
    estimator: EstimatorSpec | None = None,
    theta=None,
    seed_offset: int = 1 << 20,
) -> np.ndarray:
    """Rectangular kernel matrix between two point sets (e.g. test vs train).

    Estimated entries get streams SeedSequence((seed, seed_offset + i, j)) so
    they never collide with the square Gram streams of the same seed.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if estimator is None or estimator.strategy == "exact":
        return _exact_kernel_matrix(spec, xs, ys, kind, theta)
    if kind.variant == "fidelity" and estimator.strategy in ("tomography", "local_swap"):
        raise ValueError(
            f"estimator {estimator.strategy!r} is incompatible with the fidelity kernel"
        )
    if kind.variant == "projected" and estimator.strategy in ("loschmidt", "swap"):
        raise ValueError(
            f"estimator {estimator.strategy!r} is incompatible with the projected kernel"
        )
    out = np.empty((xs.shape[0], ys.shape[0]))
    if estimator.strategy in ("loschmidt", "swap"):
        exact = _exact_kernel_matrix(spec, xs, ys, kind, theta)
        for i in range(xs.shape[0]):
            for j in range(ys.shape[0]):
                rng = _entry_rng(estimator.seed, seed_offset + i, j)
                if estimator.strategy == "loschmidt":
                    out[i, j] = loschmidt_record(exact[i, j], estimator.shots, rng).estimate
                else:
                    out[i, j] = swap_record(exact[i, j], estimator.shots, rng).estimate
        return out
    ba = _all_bloch(spec, xs, theta)
    bb = _all_bloch(spec, ys, theta)
    for i in range(xs.shape[0]):
        for j in range(ys.shape[0]):
            rng = _entry_rng(estimator.seed, seed_offset + i, j)
            out[i, j] = projected_estimate_from_bloch(
                ba[i], bb[j], estimator.strategy, estimator.shots, rng, kind.gamma
            )
    return out
