"""Kernel models: ridge regression, hard-margin SVM dual, target alignment,
and the train-size generalization experiment for product-state kernels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSpec
from .estimators import EstimatorSpec
from .kernels import KernelKind, gram, kernel_matrix

MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class KrrResult:
    coefficients: np.ndarray
    condition_number: float


def krr_fit(K: np.ndarray, y: np.ndarray, lam: float = 0.0, sign: str = "minus") -> KrrResult:
    """Kernel ridge coefficients a = (K -+ lam)^-1 y.

    The default regularization sign is "minus" (a = (K - lam 1)^-1 y, so a
    Gram matrix estimated as the identity gives a = y / (1 - lam)); pass
    sign="plus" for the conventional (K + lam 1)^-1 y. Raises when the
    regularized matrix is numerically singular, reporting its condition
    number.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: K {K.shape}, y {y.shape}")
    if sign not in ("minus", "plus"):
        raise ValueError("sign must be 'minus' or 'plus'")
    s = -1.0 if sign == "minus" else 1.0
    a_mat = K + s * lam * np.eye(K.shape[0])
    cond = float(np.linalg.cond(a_mat))
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        raise ValueError(
            f"regularized kernel matrix is numerically singular (condition number {cond:.3e})"
        )
    coeff = np.linalg.solve(a_mat, y)
    return KrrResult(coeff, cond)


@dataclass(frozen=True, eq=False)
class SvmResult:
    coefficients: np.ndarray
    iterations: int
    objective: float
    converged: bool


def svm_fit(
    K: np.ndarray,
    y: np.ndarray,
    max_iter: int = 100_000,
    tol: float = 1e-8,
) -> SvmResult:
    """Hard-margin SVM dual by projected gradient ascent.

    Maximizes sum(a) - (1/2) a^T Q a with Q = (y y^T) * K subject to a >= 0
    (no upper box constraint); fixed step 1/(lambda_max(K) + 1); stops when
    the relative objective change drops below ``tol``.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if K.shape[0] != K.shape[1] or K.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: K {K.shape}, y {y.shape}")
    q_mat = np.outer(y, y) * K
    step = 1.0 / (float(np.linalg.eigvalsh(K)[-1]) + 1.0)
    a = np.zeros(K.shape[0])
    obj = 0.0
    for it in range(1, max_iter + 1):
        a = np.maximum(0.0, a + step * (1.0 - q_mat @ a))
        new_obj = float(np.sum(a) - 0.5 * (a @ q_mat @ a))
        if abs(new_obj - obj) <= tol * max(1.0, abs(obj)):
            return SvmResult(a, it, new_obj, True)
        obj = new_obj
    return SvmResult(a, max_iter, obj, False)


def kernel_target_alignment(K: np.ndarray, y: np.ndarray) -> float:
    """TA = sum_ij y_i y_j K_ij / sqrt(sum_ij K_ij^2 * sum_ij (y_i y_j)^2),
    diagonal included."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    num = float(y @ K @ y)
    den = float(np.linalg.norm(K)) * float(np.sum(y * y))
    if den == 0.0:
        raise ValueError("degenerate alignment denominator")
    return num / den


# ---------------------------------------------------------------------------
# trained models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: EmbeddingSpec
    kind: KernelKind
    algorithm: str  # "krr" | "svm"
    anchors: np.ndarray
    coefficients: np.ndarray
    lam: float = 0.0
    theta: np.ndarray | None = None
    labels: np.ndarray | None = None  # training labels (svm decision function)

    def to_json(self) -> str:
        payload = {
            "spec": {
                "num_qubits": self.spec.num_qubits,
                "family": self.spec.family,
                "layers": self.spec.layers,
                "entangler": self.spec.entangler,
                "seed": self.spec.seed,
            },
            "kind": {"variant": self.kind.variant, "gamma": self.kind.gamma},
            "algorithm": self.algorithm,
            "anchors": self.anchors.tolist(),
            "coefficients": self.coefficients.tolist(),
            "lam": self.lam,
            "theta": None if self.theta is None else self.theta.tolist(),
            "labels": None if self.labels is None else self.labels.tolist(),
        }
        return json.dumps(payload, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "TrainedModel":
        d = json.loads(text)
        return TrainedModel(
            spec=EmbeddingSpec(**d["spec"]),
            kind=KernelKind(**d["kind"]),
            algorithm=d["algorithm"],
            anchors=np.asarray(d["anchors"], dtype=np.float64),
            coefficients=np.asarray(d["coefficients"], dtype=np.float64),
            lam=d["lam"],
            theta=None if d["theta"] is None else np.asarray(d["theta"]),
            labels=None if d["labels"] is None else np.asarray(d["labels"]),
        )


def train_krr(
    spec: EmbeddingSpec,
    xs,
    y,
    kind: KernelKind,
    lam: float = 0.0,
    estimator: EstimatorSpec | None = None,
    theta=None,
    sign: str = "minus",
) -> tuple[TrainedModel, KrrResult]:
    gm = gram(spec, xs, kind, estimator=estimator, theta=theta)
    fit = krr_fit(gm.matrix, y, lam=lam, sign=sign)
    model = TrainedModel(
        spec,
        kind,
        "krr",
        np.asarray(xs, dtype=np.float64),
        fit.coefficients,
        lam=lam,
        theta=None if theta is None else np.asarray(theta, dtype=np.float64),
    )
    return model, fit


def train_svm(
    spec: EmbeddingSpec,
    xs,
    y,
    kind: KernelKind,
    estimator: EstimatorSpec | None = None,
    theta=None,
) -> tuple[TrainedModel, SvmResult]:
    gm = gram(spec, xs, kind, estimator=estimator, theta=theta)
    fit = svm_fit(gm.matrix, y)
    model = TrainedModel(
        spec,
        kind,
        "svm",
        np.asarray(xs, dtype=np.float64),
        fit.coefficients,
        theta=None if theta is None else np.asarray(theta, dtype=np.float64),
        labels=np.asarray(y, dtype=np.float64),
    )
    return model, fit


def predict(
    model: TrainedModel,
    xs,
    estimator: EstimatorSpec | None = None,
) -> np.ndarray:
    """Model values at new points: sum_i a_i kappa(x_new, x_i) (times y_i for SVM).

    All-zero kernel estimates give predictions of exactly 0.
    """
    kmat = kernel_matrix(model.spec, xs, model.anchors, model.kind, estimator, model.theta)
    weights = model.coefficients
    if model.algorithm == "svm":
        if model.labels is None:
            raise ValueError("SVM model is missing training labels")
        weights = weights * model.labels
    return kmat @ weights


# ---------------------------------------------------------------------------
# alignment scan over embedding parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KtaScan:
    ta_values: np.ndarray  # (num_thetas,)
    kernel_values: np.ndarray  # (num_thetas, n_pts, n_pts)
    ta_variance: float
    kernel_variances: np.ndarray  # (n_pts, n_pts), variance over theta per entry


def kta_variance_over_theta(
    spec: EmbeddingSpec,
    xs,
    y,
    num_thetas: int,
    rng: np.random.Generator,
    kind: KernelKind = KernelKind.fidelity(),
    low: float = 0.0,
    high: float = 2.0 * math.pi,
) -> KtaScan:
    """Sample random parameter vectors and record alignment + per-entry kernel
    variability (everything evaluated exactly)."""
    xs = np.asarray(xs, dtype=np.float64)
    npts = xs.shape[0]
    tas = np.empty(num_thetas)
    kvals = np.empty((num_thetas, npts, npts))
    for t in range(num_thetas):
        theta = rng.uniform(low, high, spec.theta_dim)
        gm = gram(spec, xs, kind, theta=theta)
        kvals[t] = gm.matrix
        tas[t] = kernel_target_alignment(gm.matrix, y)
    return KtaScan(
        tas,
        kvals,
        float(tas.var(ddof=1)),
        kvals.var(axis=0, ddof=1),
    )


# ---------------------------------------------------------------------------
# generalization experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeneralizationResult:
    train_sizes: tuple[int, ...]
    loss_exact: np.ndarray  # (repeats, sizes) test MSE, exact kernel
    loss_estimated: np.ndarray  # (repeats, sizes) test MSE, finite shots
    train_error_exact: np.ndarray  # (repeats, sizes) max train residual
    train_error_estimated: np.ndarray

    def eta(self, which: str = "exact") -> np.ndarray:
        """Per-size generalization ratio L(test | S_N) / L(test | S_first),
        averaged over repeats."""
        losses = self.loss_exact if which == "exact" else self.loss_estimated
        return np.mean(losses / losses[:, :1], axis=0)


def generalization_experiment(
    rng: np.random.Generator,
    num_qubits: int = 40,
    train_sizes=(10, 25, 50, 75, 100, 125, 150),
    num_test: int = 20,
    shots: int = 1000,
    lam: float = 0.0,
    repeats: int = 10,
    low: float = 0.0,
    high: float = 2.0 * math.pi,
) -> GeneralizationResult:
    """Train-size scan of kernel ridge regression on engineered labels.

    Per repeat: a pool of max(train_sizes) uniform points gets labels
    y(x) = sum_i w_i kappa_FQ(x_i, x) with w_i ~ U[0,1] over the whole pool;
    training subsets are nested prefixes; the exact arm solves on the exact
    Gram matrix while the estimated arm re-measures every kernel entry with
    ``shots`` single-shot overlap tests (sampled once per repeat for the full
    pool and sliced per subset). Losses are test-set MSE.
    """
    spec = EmbeddingSpec(num_qubits, "tensor_ry")
    kind = KernelKind.fidelity()
    sizes = tuple(int(s) for s in train_sizes)
    pool = max(sizes)
    if min(sizes) < 1 or num_test < 1:
        raise ValueError("sizes must be positive")

    loss_ex = np.empty((repeats, len(sizes)))
    loss_est = np.empty((repeats, len(sizes)))
    terr_ex = np.empty((repeats, len(sizes)))
    terr_est = np.empty((repeats, len(sizes)))
    eye = np.eye(pool)

    for r in range(repeats):
        xs = rng.uniform(low, high, (pool, num_qubits))
        w = rng.uniform(0.0, 1.0, pool)
        ts = rng.uniform(low, high, (num_test, num_qubits))
        k_pool = kernel_matrix(spec, xs, xs, kind)
        np.fill_diagonal(k_pool, 1.0)
        k_test = kernel_matrix(spec, ts, xs, kind)
        y_pool = k_pool @ w
        y_test = k_test @ w

        # one finite-shot re-measurement of every entry, sliced per subset
        k_pool_hat = rng.binomial(shots, np.clip(k_pool, 0.0, 1.0)) / shots
        k_pool_hat = np.triu(k_pool_hat, k=1)
        k_pool_hat = k_pool_hat + k_pool_hat.T + eye
        k_test_hat = rng.binomial(shots, np.clip(k_test, 0.0, 1.0)) / shots

        for si, ns in enumerate(sizes):
            ys = y_pool[:ns]
            fit = krr_fit(k_pool[:ns, :ns], ys, lam=lam)
            preds = k_test[:, :ns] @ fit.coefficients
            loss_ex[r, si] = float(np.mean((preds - y_test) ** 2))
            terr_ex[r, si] = float(
                np.max(np.abs(k_pool[:ns, :ns] @ fit.coefficients - ys))
            )

            fit_hat = krr_fit(k_pool_hat[:ns, :ns], ys, lam=lam)
            preds_hat = k_test_hat[:, :ns] @ fit_hat.coefficients
            loss_est[r, si] = float(np.mean((preds_hat - y_test) ** 2))
            terr_est[r, si] = float(
                np.max(np.abs(k_pool_hat[:ns, :ns] @ fit_hat.coefficients - ys))
            )

    return GeneralizationResult(sizes, loss_ex, loss_est, terr_ex, terr_est)
