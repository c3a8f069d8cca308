"""Kernel generalized discriminant analysis.

Class scatter is expressed entirely through the training kernel matrix:
columns of K play the role of mapped samples, class/global kernel means
replace feature-space means, and discriminant directions are coefficient
vectors solving the generalized eigenproblem of the between-class against
the (regularized) within-class kernel scatter. Discriminants are extracted
sequentially under a scatter-metric orthogonality constraint; a one-shot
batch extraction is provided as an independent route for verification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._eig import (
    LD,
    orthonormal_complement,
    refine_pencil_eigenpair,
    top_pencil_eigenpairs,
)
from .errors import (
    CsvParse,
    DegenerateKernel,
    DimensionMismatch,
    EmptyClass,
    InvalidDataset,
    ZeroVector,
)

__all__ = [
    "LabeledDataset",
    "KernelSpec",
    "ScatterMatrices",
    "GdaModel",
    "compute_kernel_matrix",
    "kernel_class_means",
    "scatter_matrices",
    "fisher_criterion",
    "train_gda",
    "project",
    "classify_nearest_mean",
    "load_dataset_csv",
    "save_dataset_csv",
    "save_model",
    "load_model",
    "regularization_epsilon",
]


@dataclass(frozen=True)
class LabeledDataset:
    """M real sample vectors of dimension n with integer class labels."""

    samples: np.ndarray  # (M, n) float64
    labels: np.ndarray  # (M,) int

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[0] == 0:
            raise InvalidDataset("samples must be a non-empty (M, n) array")
        if y.shape != (x.shape[0],):
            raise DimensionMismatch("one label per sample required")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "labels", y)

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel function: linear u.v, rbf exp(-gamma ||u-v||^2), or
    polynomial (u.v + coef)^degree. gamma defaults to 1/n at evaluation."""

    kind: str = "rbf"
    gamma: Optional[float] = None
    degree: int = 2
    coef: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf", "polynomial"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")


def _cross_kernel(x: np.ndarray, y: np.ndarray, spec: KernelSpec) -> np.ndarray:
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"feature dims differ: {x.shape[1]} vs {y.shape[1]}")
    if spec.kind == "linear":
        return x @ y.T
    if spec.kind == "polynomial":
        return (x @ y.T + spec.coef) ** spec.degree
    gamma = spec.gamma if spec.gamma is not None else 1.0 / x.shape[1]
    sq = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-gamma * sq)


def compute_kernel_matrix(data: LabeledDataset, spec: KernelSpec) -> np.ndarray:
    """M x M training kernel matrix, exactly symmetric (upper triangle mirrored)."""
    k = _cross_kernel(data.samples, data.samples, spec)
    return np.triu(k) + np.triu(k, 1).T


def kernel_class_means(k: np.ndarray, labels) -> tuple:
    """Per-class and global averages of kernel-matrix columns.

    Returns (deltas, delta0): deltas has one row per class in ascending
    label order; delta0 is the global column mean.
    """
    labels = np.asarray(labels)
    classes = np.unique(labels)
    deltas = []
    for c in classes:
        cols = k[:, labels == c]
        if cols.shape[1] == 0:
            raise EmptyClass(f"class {c} has no samples")
        deltas.append(cols.mean(axis=1))
    return np.stack(deltas), k.mean(axis=1)


@dataclass(frozen=True)
class ScatterMatrices:
    """Between/within/total kernel scatter with the kernel mean vectors."""

    u_b: np.ndarray
    u_w: np.ndarray
    u_t: np.ndarray
    class_means: np.ndarray  # (Z, M)
    global_mean: np.ndarray  # (M,)


def _scatter(k: np.ndarray, labels: np.ndarray) -> ScatterMatrices:
    m = k.shape[0]
    labels = np.asarray(labels)
    classes, inverse = np.unique(labels, return_inverse=True)
    deltas, delta0 = kernel_class_means(k, labels)
    counts = np.bincount(inverse).astype(k.dtype)
    centered_b = (deltas - delta0) * np.sqrt(counts / m)[:, None]
    u_b = centered_b.T @ centered_b
    dev_w = k - deltas[inverse].T  # column j minus its class mean
    u_w = dev_w @ dev_w.T / m
    dev_t = k - delta0[:, None]
    u_t = dev_t @ dev_t.T / m
    sym = lambda a: (a + a.T) / 2
    return ScatterMatrices(sym(u_b), sym(u_w), sym(u_t), deltas, delta0)


def scatter_matrices(k: np.ndarray, labels) -> ScatterMatrices:
    """Kernel scatter matrices; satisfies u_t = u_b + u_w and all three PSD."""
    return _scatter(np.asarray(k, dtype=np.float64), np.asarray(labels))


def regularization_epsilon(u_w: np.ndarray) -> float:
    """Trace-scaled ridge added to the within-class scatter (floor 1e-12)."""
    m = u_w.shape[0]
    return max(1e-8 * float(np.trace(u_w.astype(np.float64))) / m, 1e-12)


def fisher_criterion(sigma: np.ndarray, s: ScatterMatrices, eps: Optional[float] = None) -> float:
    """Rayleigh quotient of between- over regularized within-class scatter."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (s.u_b.shape[0],):
        raise DimensionMismatch("sigma length must match scatter dimension")
    if not np.any(sigma):
        raise ZeroVector("sigma must be nonzero")
    if eps is None:
        eps = regularization_epsilon(s.u_w)
    num = sigma @ s.u_b @ sigma
    den = sigma @ s.u_w @ sigma + eps * (sigma @ sigma)
    return float(num / den)


@dataclass(frozen=True)
class GdaModel:
    """Trained discriminant model; immutable and safe for concurrent use."""

    samples: np.ndarray  # (M, n) training samples
    labels: np.ndarray  # (M,)
    spec: KernelSpec
    sigmas: np.ndarray  # (M, d) discriminant coefficient columns
    etas: np.ndarray  # (d,) nonincreasing eigenvalues
    eps: float
    classes: np.ndarray  # (Z,) ascending class labels
    class_means: np.ndarray  # (Z, d) class means in discriminant space
    achieved_all: bool = True  # False when rank limited the discriminant count

    @property
    def n_discriminants(self) -> int:
        return self.sigmas.shape[1]


def _normalize_sign(sigma_ld: np.ndarray, uwe: np.ndarray) -> np.ndarray:
    sigma_ld = sigma_ld / np.sqrt(sigma_ld @ uwe @ sigma_ld)
    s64 = sigma_ld.astype(np.float64)
    if s64[int(np.argmax(np.abs(s64)))] < 0:
        sigma_ld = -sigma_ld
    return sigma_ld


def _extract_sequential(u_b, uwe, d: int):
    sigmas, etas = [], []
    for s in range(d):
        if s == 0:
            lams, vecs = top_pencil_eigenpairs(u_b, uwe, 1)
            sig, eta = vecs[:, 0], lams[0]
        else:
            constraints = np.column_stack([uwe @ sg for sg in sigmas])
            basis = orthonormal_complement(constraints)
            a_r = basis.T @ u_b @ basis
            b_r = basis.T @ uwe @ basis
            lams, vecs = top_pencil_eigenpairs((a_r + a_r.T) / 2, (b_r + b_r.T) / 2, 1)
            sig, eta = basis @ vecs[:, 0], lams[0]
            # polish against the full pencil; in exact arithmetic the
            # constrained maximizer is the next full-pencil eigenvector
            sig, eta, _ = refine_pencil_eigenpair(u_b, uwe, sig, eta)
        sigmas.append(_normalize_sign(sig, uwe))
        etas.append(eta)
    return sigmas, etas


def _extract_batch(u_b, uwe, d: int):
    lams, vecs = top_pencil_eigenpairs(u_b, uwe, d)
    sigmas = [_normalize_sign(vecs[:, k], uwe) for k in range(d)]
    return sigmas, list(lams)


def train_gda(
    data: LabeledDataset,
    spec: KernelSpec = KernelSpec(),
    d: Optional[int] = None,
    extraction: str = "sequential",
) -> GdaModel:
    """Fit discriminant coefficient vectors from the kernel scatter pencil.

    `d` defaults to Z - 1; requesting more than the numerical rank of the
    between-class scatter yields fewer discriminants with achieved_all
    cleared rather than an error.
    """
    classes = data.classes
    z = len(classes)
    if z < 2:
        raise InvalidDataset(f"need at least 2 classes, got {z}")
    if extraction not in ("sequential", "batch"):
        raise ValueError(f"unknown extraction {extraction!r}")
    d_req = z - 1 if d is None else int(d)
    if d_req < 1:
        raise ValueError("d must be >= 1")

    k = compute_kernel_matrix(data, spec)
    if float(np.abs(k).max()) < 1e-30:
        raise DegenerateKernel("kernel matrix is numerically zero")
    scat = _scatter(k.astype(LD), data.labels)
    m = k.shape[0]
    eps = regularization_epsilon(scat.u_w.astype(np.float64))
    uwe = scat.u_w + LD(eps) * np.eye(m, dtype=LD)

    ev_b = np.linalg.eigvalsh(scat.u_b.astype(np.float64))
    rank_b = int(np.sum(ev_b > 1e-10 * max(ev_b[-1], 0.0))) if ev_b[-1] > 0 else 0
    d_eff = min(d_req, z - 1, rank_b)
    achieved_all = d_eff == d_req

    if d_eff == 0:
        sigmas64 = np.zeros((m, 0))
        etas64 = np.zeros(0)
    else:
        extract = _extract_sequential if extraction == "sequential" else _extract_batch
        sigmas, etas = extract(scat.u_b, uwe, d_eff)
        sigmas64 = np.column_stack([s.astype(np.float64) for s in sigmas])
        etas64 = np.array([float(e) for e in etas])

    proj = k @ sigmas64  # row j = projection of training sample j
    class_means = np.stack(
        [proj[data.labels == c].mean(axis=0) for c in classes]
    ) if d_eff else np.zeros((z, 0))
    return GdaModel(
        samples=data.samples,
        labels=data.labels,
        spec=spec,
        sigmas=sigmas64,
        etas=etas64,
        eps=eps,
        classes=classes,
        class_means=class_means,
        achieved_all=achieved_all,
    )


def project(model: GdaModel, u: np.ndarray) -> np.ndarray:
    """Discriminant-space coordinates of one sample (or a batch of rows)."""
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    batch = u[None, :] if single else u
    if batch.shape[1] != model.samples.shape[1]:
        raise DimensionMismatch(
            f"sample dim {batch.shape[1]} != model dim {model.samples.shape[1]}"
        )
    mu = _cross_kernel(batch, model.samples, model.spec)  # rows are mu_u
    out = mu @ model.sigmas
    return out[0] if single else out


def classify_nearest_mean(model: GdaModel, u: np.ndarray):
    """Class whose discriminant-space mean is nearest (smallest label on ties)."""
    p = project(model, u)
    single = p.ndim == 1
    pts = p[None, :] if single else p
    dists = np.linalg.norm(pts[:, None, :] - model.class_means[None, :, :], axis=2)
    idx = np.argmin(dists, axis=1)  # first occurrence = smallest class label
    out = model.classes[idx]
    return int(out[0]) if single else out


# --- file formats -----------------------------------------------------------

def load_dataset_csv(text: str, header: bool = False) -> LabeledDataset:
    """Parse 'f1,...,fn,label' rows; the last column is the integer label."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if header:
        lines = lines[1:]
    if not lines:
        raise CsvParse("no data rows")
    samples, labels = [], []
    for i, ln in enumerate(lines):
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) < 2:
            raise CsvParse(f"row {i}: need at least one feature and a label")
        try:
            samples.append([float(p) for p in parts[:-1]])
            labels.append(int(parts[-1]))
        except ValueError as exc:
            raise CsvParse(f"row {i}: {exc}") from None
        if len(samples[-1]) != len(samples[0]):
            raise CsvParse(f"row {i}: inconsistent column count")
    return LabeledDataset(np.array(samples), np.array(labels))


def save_dataset_csv(data: LabeledDataset, header: bool = False) -> str:
    """Inverse of load_dataset_csv; floats use shortest round-trip repr."""
    out = []
    if header:
        cols = [f"f{i}" for i in range(data.n_features)] + ["label"]
        out.append(",".join(cols))
    for row, lab in zip(data.samples, data.labels):
        out.append(",".join(repr(float(v)) for v in row) + f",{int(lab)}")
    return "\n".join(out) + "\n"


def save_model(model: GdaModel) -> str:
    """Serialize a model to deterministic JSON."""
    doc = {
        "kernel": {
            "kind": model.spec.kind,
            "gamma": model.spec.gamma,
            "degree": model.spec.degree,
            "coef": model.spec.coef,
        },
        "eps": model.eps,
        "samples": model.samples.tolist(),
        "labels": model.labels.tolist(),
        "sigmas": model.sigmas.tolist(),
        "etas": model.etas.tolist(),
        "classes": model.classes.tolist(),
        "class_means": model.class_means.tolist(),
        "achieved_all": model.achieved_all,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_model(text: str) -> GdaModel:
    doc = json.loads(text)
    kern = doc["kernel"]
    spec = KernelSpec(
        kind=kern["kind"], gamma=kern["gamma"], degree=kern["degree"], coef=kern["coef"]
    )
    m = len(doc["labels"])
    sig = np.array(doc["sigmas"], dtype=np.float64).reshape(m, -1)
    return GdaModel(
        samples=np.array(doc["samples"], dtype=np.float64),
        labels=np.array(doc["labels"], dtype=np.int64),
        spec=spec,
        sigmas=sig,
        etas=np.array(doc["etas"], dtype=np.float64),
        eps=float(doc["eps"]),
        classes=np.array(doc["classes"], dtype=np.int64),
        class_means=np.array(doc["class_means"], dtype=np.float64).reshape(
            len(doc["classes"]), -1
        ),
        achieved_all=bool(doc["achieved_all"]),
    )
