"""Multi-class classifiers over sparse TF-IDF features.

All trainers are deterministic: closed-form fits for the Naive Bayes
variants, full-batch gradient descent with backtracking line search for
logistic regression, an epoch-driven subgradient schedule for the linear
SVMs, and full-batch Adam for the MLP. A (data, spec, seed) triple fully
determines the fitted parameters, so serialized bundles are byte-stable.

Probability outputs: NB posteriors come from the smoothed Bayes scores;
linear SVM "probabilities" are a softmax over decision margins
(uncalibrated, monotone in the margins); the MLP emits its softmax layer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    ArgumentError,
    FormatError,
    ParseError,
    PredictError,
    TrainError,
)
from .textprep import PrepConfig, normalize_tokens
from .tfidf import FeatureVector, TfidfModel, vectorize, vectors_to_csr

FORMAT_VERSION = 1

KINDS = (
    "multinomial_nb",
    "complement_nb",
    "logreg",
    "linsvm_ovr",
    "linsvm_ovo",
    "mlp",
)

DEFAULT_HYPERPARAMS = {
    "multinomial_nb": {"alpha": 1.0},
    "complement_nb": {"alpha": 1.0},
    "logreg": {"l2": 1e-4, "tol": 1e-6, "max_epochs": 1000},
    "linsvm_ovr": {"c": 1.0, "epochs": 400, "lr0": 1.0, "lr_decay": 0.02},
    "linsvm_ovo": {"c": 1.0, "epochs": 400, "lr0": 1.0, "lr_decay": 0.02},
    "mlp": {
        "hidden": 100,
        "l2": 1e-4,
        "lr": 1e-3,
        "max_epochs": 200,
        "patience": 10,
        "val_fraction": 0.1,
    },
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    balanced: bool = False
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown classifier kind: {self.kind}")
        merged = dict(DEFAULT_HYPERPARAMS[self.kind])
        merged.update(self.hyperparams)
        object.__setattr__(self, "hyperparams", merged)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "balanced": self.balanced,
            "hyperparams": dict(sorted(self.hyperparams.items())),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSpec":
        return cls(
            kind=d["kind"],
            balanced=bool(d.get("balanced", False)),
            hyperparams=dict(d.get("hyperparams", {})),
            seed=int(d.get("seed", 0)),
        )


@dataclass
class ClassifierModel:
    spec: ClassifierSpec
    n_classes: int
    parameters: dict
    registry_fingerprint: str = ""
    tfidf: Optional[TfidfModel] = None
    prep: Optional[PrepConfig] = None
    format_version: int = FORMAT_VERSION

    @property
    def dim(self) -> int:
        if self.tfidf is not None:
            return self.tfidf.dim
        return int(self.parameters["dim"])


def compute_class_weights(class_counts, balanced: bool) -> np.ndarray:
    """Balanced: w_c = N / (C_present * n_c); absent classes weigh 0."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.min() < 0 or counts.sum() <= 0:
        raise ArgumentError("class counts must be non-negative with positive sum")
    if not balanced:
        return np.ones_like(counts)
    present = counts > 0
    weights = np.zeros_like(counts)
    n_total = counts.sum()
    n_present = int(present.sum())
    weights[present] = n_total / (n_present * counts[present])
    return weights


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    zmax = np.max(z, axis=1, keepdims=True)
    zmax = np.where(np.isfinite(zmax), zmax, 0.0)
    e = np.exp(z - zmax)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax_rows(z: np.ndarray) -> np.ndarray:
    zmax = np.max(z, axis=1, keepdims=True)
    s = z - zmax
    return s - np.log(np.exp(s).sum(axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# Naive Bayes (closed form, additive smoothing)
# ---------------------------------------------------------------------------


def _class_feature_counts(X, y, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.zeros((n_classes, X.shape[1]))
    n_c = np.bincount(y, minlength=n_classes).astype(np.float64)
    for c in np.unique(y):
        counts[c] = np.asarray(X[y == c].sum(axis=0)).ravel()
    return counts, n_c


def _fit_multinomial_nb(X, y, n_classes: int, hp: dict) -> dict:
    alpha = float(hp["alpha"])
    counts, n_c = _class_feature_counts(X, y, n_classes)
    with np.errstate(divide="ignore"):
        prior = np.log(n_c / n_c.sum())
    smoothed = counts + alpha
    log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return {"class_log_prior": prior, "feature_log_prob": log_prob}


def _fit_complement_nb(X, y, n_classes: int, hp: dict) -> dict:
    """Complement counts; weights are logs of the normalized complement
    distribution. The stored prior only marks absent classes (-inf), which
    are masked out at prediction time and so can never win."""
    alpha = float(hp["alpha"])
    counts, n_c = _class_feature_counts(X, y, n_classes)
    with np.errstate(divide="ignore"):
        prior = np.log(n_c / n_c.sum())
    comp = counts.sum(axis=0, keepdims=True) - counts + alpha
    theta = comp / comp.sum(axis=1, keepdims=True)
    return {"class_log_prior": prior, "weights": np.log(theta)}


# ---------------------------------------------------------------------------
# Logistic regression (softmax, full batch, Armijo line search)
# ---------------------------------------------------------------------------


def _logreg_loss_grad(X, y, sample_w, W, b, l2):
    """Weighted multinomial cross-entropy with L2 on W (not on b)."""
    n = X.shape[0]
    Z = X @ W + b
    logp = _log_softmax_rows(Z)
    loss = -(sample_w * logp[np.arange(n), y]).sum() / n
    loss += 0.5 * l2 * float((W * W).sum())
    P = np.exp(logp)
    G = P.copy()
    G[np.arange(n), y] -= 1.0
    G *= (sample_w / n)[:, None]
    gW = (X.T @ G) + l2 * W
    gb = G.sum(axis=0)
    return loss, np.asarray(gW), gb


def _gd_minimize(loss_grad, params, max_epochs: int, tol: float, history=None):
    """Gradient descent with backtracking; loss never increases.

    `history`, when given, collects the loss after every accepted step.
    """
    loss, grads = loss_grad(params)
    if history is not None:
        history.append(loss)
    eta = 1.0
    for _ in range(max_epochs):
        gnorm2 = sum(float((g * g).sum()) for g in grads)
        if gnorm2 == 0.0:
            break
        accepted = None
        while eta >= 1e-14:
            cand = [p - eta * g for p, g in zip(params, grads)]
            cand_loss, cand_grads = loss_grad(cand)
            if cand_loss <= loss - 1e-4 * eta * gnorm2:
                accepted = (cand, cand_loss, cand_grads)
                break
            eta *= 0.5
        if accepted is None:
            break
        delta = loss - accepted[1]
        params, loss, grads = accepted
        if history is not None:
            history.append(loss)
        eta = min(eta * 2.0, 1e6)
        if delta < tol:
            break
    return params, loss


def _fit_logreg(X, y, n_classes: int, hp: dict, sample_w: np.ndarray) -> dict:
    d = X.shape[1]
    W0 = np.zeros((d, n_classes))
    b0 = np.zeros(n_classes)
    l2 = float(hp["l2"])

    def lg(params):
        loss, gW, gb = _logreg_loss_grad(X, y, sample_w, params[0], params[1], l2)
        return loss, [gW, gb]

    (W, b), _ = _gd_minimize(lg, [W0, b0], int(hp["max_epochs"]), float(hp["tol"]))
    return {"coef": W.T.copy(), "intercept": b}


# ---------------------------------------------------------------------------
# Linear SVM (hinge loss, epoch-driven subgradient schedule)
# ---------------------------------------------------------------------------


def _svm_objective(X, ysign, sample_w, W, b, lam):
    margins = X @ W + b
    hinge = np.maximum(0.0, 1.0 - ysign * margins)
    per_col = (sample_w[:, None] * hinge).sum(axis=0) / X.shape[0]
    return 0.5 * lam * (W * W).sum(axis=0) + per_col


def _fit_linear_svm_columns(X, ysign, sample_w, hp: dict):
    """Minimize per-column 0.5*lam*||w||^2 + mean weighted hinge.

    lam = 1 / (c * n) makes this the usual sum-form objective with
    penalty c, rescaled. Fixed decaying step sizes; the best iterate per
    column (by objective) is kept, so the schedule needs no tuning per
    dataset.
    """
    n, d = X.shape
    k = ysign.shape[1]
    lam = 1.0 / (float(hp["c"]) * n)
    lr0, decay = float(hp["lr0"]), float(hp["lr_decay"])
    W = np.zeros((d, k))
    b = np.zeros(k)
    best_obj = _svm_objective(X, ysign, sample_w, W, b, lam)
    best_W, best_b = W.copy(), b.copy()
    for t in range(int(hp["epochs"])):
        margins = X @ W + b
        viol = (ysign * margins) < 1.0
        coef = -(viol * ysign * sample_w[:, None]) / n
        gW = lam * W + np.asarray(X.T @ coef)
        gb = coef.sum(axis=0)
        eta = lr0 / (1.0 + decay * t)
        W = W - eta * gW
        b = b - eta * gb
        obj = _svm_objective(X, ysign, sample_w, W, b, lam)
        better = obj < best_obj
        if better.any():
            best_W[:, better] = W[:, better]
            best_b[better] = b[better]
            best_obj = np.minimum(best_obj, obj)
    return best_W, best_b


def _fit_linsvm_ovr(X, y, n_classes: int, hp: dict, sample_w: np.ndarray) -> dict:
    ysign = -np.ones((X.shape[0], n_classes))
    ysign[np.arange(X.shape[0]), y] = 1.0
    W, b = _fit_linear_svm_columns(X, ysign, sample_w, hp)
    return {"coef": W.T.copy(), "intercept": b}


def _fit_linsvm_ovo(X, y, n_classes: int, hp: dict, sample_w: np.ndarray) -> dict:
    present = sorted(int(c) for c in np.unique(y))
    pairs = [(a, c) for i, a in enumerate(present) for c in present[i + 1 :]]
    d = X.shape[1]
    W = np.zeros((d, len(pairs)))
    b = np.zeros(len(pairs))
    for p, (ci, cj) in enumerate(pairs):
        mask = (y == ci) | (y == cj)
        Xp = X[mask]
        ysign = np.where(y[mask] == ci, 1.0, -1.0)[:, None]
        Wp, bp = _fit_linear_svm_columns(Xp, ysign, sample_w[mask], hp)
        W[:, p] = Wp[:, 0]
        b[p] = bp[0]
    return {
        "pairs": np.asarray(pairs, dtype=np.int64).reshape(len(pairs), 2),
        "coef": W.T.copy(),
        "intercept": b,
    }


# ---------------------------------------------------------------------------
# MLP (one hidden ReLU layer, full-batch Adam, early stopping)
# ---------------------------------------------------------------------------


def _mlp_forward(X, params):
    A = X @ params["w1"] + params["b1"]
    np.maximum(A, 0.0, out=A)
    Z = A @ params["w2"] + params["b2"]
    return A, Z


def _mlp_loss_grad(X, y, params, l2):
    n = X.shape[0]
    A, Z = _mlp_forward(X, params)
    logp = _log_softmax_rows(Z)
    loss = -logp[np.arange(n), y].mean()
    loss += 0.5 * l2 * (
        float((params["w1"] ** 2).sum()) + float((params["w2"] ** 2).sum())
    )
    G = np.exp(logp)
    G[np.arange(n), y] -= 1.0
    G /= n
    gw2 = A.T @ G + l2 * params["w2"]
    gb2 = G.sum(axis=0)
    dA = G @ params["w2"].T
    dA[A <= 0.0] = 0.0
    gw1 = np.asarray(X.T @ dA) + l2 * params["w1"]
    gb1 = dA.sum(axis=0)
    return loss, {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}


def _mlp_monitor_loss(X, y, params) -> float:
    _, Z = _mlp_forward(X, params)
    logp = _log_softmax_rows(Z)
    return float(-logp[np.arange(X.shape[0]), y].mean())


def _stratified_holdout(y: np.ndarray, fraction: float, rng) -> np.ndarray:
    """Boolean mask of validation rows; singleton classes stay in train."""
    val = np.zeros(len(y), dtype=bool)
    for c in np.unique(y):
        members = np.where(y == c)[0]
        n_val = int(math.floor(len(members) * fraction))
        if len(members) < 2 or n_val == 0:
            continue
        picked = rng.permutation(len(members))[:n_val]
        val[members[picked]] = True
    return val


def _fit_mlp(X, y, n_classes: int, hp: dict, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    d, h = X.shape[1], int(hp["hidden"])
    s1 = math.sqrt(6.0 / (d + h))
    s2 = math.sqrt(6.0 / (h + n_classes))
    params = {
        "w1": rng.uniform(-s1, s1, size=(d, h)),
        "b1": np.zeros(h),
        "w2": rng.uniform(-s2, s2, size=(h, n_classes)),
        "b2": np.zeros(n_classes),
    }
    val_mask = _stratified_holdout(y, float(hp["val_fraction"]), rng)
    if val_mask.any() and (~val_mask).any():
        X_tr, y_tr = X[~val_mask], y[~val_mask]
        X_val, y_val = X[val_mask], y[val_mask]
    else:
        X_tr, y_tr = X, y
        X_val, y_val = X, y
    l2, lr = float(hp["l2"]), float(hp["lr"])
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    best = {k: p.copy() for k, p in params.items()}
    best_loss = _mlp_monitor_loss(X_val, y_val, params)
    patience, stale = int(hp["patience"]), 0
    for t in range(1, int(hp["max_epochs"]) + 1):
        _, grads = _mlp_loss_grad(X_tr, y_tr, params, l2)
        for k in params:
            m[k] = beta1 * m[k] + (1 - beta1) * grads[k]
            v[k] = beta2 * v[k] + (1 - beta2) * grads[k] ** 2
            mhat = m[k] / (1 - beta1**t)
            vhat = v[k] / (1 - beta2**t)
            params[k] = params[k] - lr * mhat / (np.sqrt(vhat) + eps)
        val_loss = _mlp_monitor_loss(X_val, y_val, params)
        if val_loss < best_loss - 1e-9:
            best_loss = val_loss
            best = {k: p.copy() for k, p in params.items()}
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    return best


# ---------------------------------------------------------------------------
# Train / predict
# ---------------------------------------------------------------------------


def train(
    features,
    labels,
    spec: ClassifierSpec,
    *,
    n_classes: int | None = None,
    tfidf: TfidfModel | None = None,
    prep: PrepConfig | None = None,
    registry_fingerprint: str = "",
) -> ClassifierModel:
    """Fit a classifier; the result depends only on (data, spec)."""
    X = features if sparse.issparse(features) else vectors_to_csr(features)
    X = X.tocsr().astype(np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise TrainError("features and labels must be equal-length and non-empty")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if y.min() < 0 or y.max() >= n_classes:
        raise TrainError("label index out of range")
    if tfidf is not None and tfidf.dim != X.shape[1]:
        raise TrainError("feature dimension does not match the vectorizer")
    counts = np.bincount(y, minlength=n_classes)
    sample_w = compute_class_weights(counts, spec.balanced)[y]
    hp = spec.hyperparams
    if spec.kind == "multinomial_nb":
        params = _fit_multinomial_nb(X, y, n_classes, hp)
    elif spec.kind == "complement_nb":
        params = _fit_complement_nb(X, y, n_classes, hp)
    elif spec.kind == "logreg":
        params = _fit_logreg(X, y, n_classes, hp, sample_w)
    elif spec.kind == "linsvm_ovr":
        params = _fit_linsvm_ovr(X, y, n_classes, hp, sample_w)
    elif spec.kind == "linsvm_ovo":
        params = _fit_linsvm_ovo(X, y, n_classes, hp, sample_w)
    else:
        params = _fit_mlp(X, y, n_classes, hp, spec.seed)
    params["dim"] = X.shape[1]
    return ClassifierModel(
        spec=spec,
        n_classes=n_classes,
        parameters=params,
        registry_fingerprint=registry_fingerprint,
        tfidf=tfidf,
        prep=prep,
    )


def _proba_matrix(model: ClassifierModel, X) -> np.ndarray:
    p = model.parameters
    kind = model.spec.kind
    if kind == "multinomial_nb":
        scores = X @ p["feature_log_prob"].T + p["class_log_prior"]
    elif kind == "complement_nb":
        # complement match only; the prior would swamp the score spread
        # across many classes. Absent classes (prior -inf) stay at 0.
        scores = np.asarray(-(X @ p["weights"].T))
        scores[:, np.isneginf(p["class_log_prior"])] = -np.inf
    elif kind in ("logreg", "linsvm_ovr"):
        scores = X @ p["coef"].T + p["intercept"]
    elif kind == "linsvm_ovo":
        margins = X @ p["coef"].T + p["intercept"]
        scores = np.zeros((X.shape[0], model.n_classes))
        for idx, (ci, cj) in enumerate(p["pairs"]):
            scores[:, int(ci)] += margins[:, idx]
            scores[:, int(cj)] -= margins[:, idx]
    else:  # mlp
        _, scores = _mlp_forward(X, p)
    probs = _softmax_rows(np.asarray(scores, dtype=np.float64))
    return probs / probs.sum(axis=1, keepdims=True)


def predict_proba_batch(model: ClassifierModel, features) -> np.ndarray:
    X = features if sparse.issparse(features) else vectors_to_csr(features)
    if X.shape[1] != model.dim:
        raise PredictError(
            f"feature dim {X.shape[1]} does not match model dim {model.dim}"
        )
    return _proba_matrix(model, X.tocsr().astype(np.float64))


def predict_proba(model: ClassifierModel, vector: FeatureVector) -> np.ndarray:
    """Probability over the registry's class ordering for one document."""
    if vector.dim != model.dim:
        raise PredictError(
            f"feature dim {vector.dim} does not match model dim {model.dim}"
        )
    return predict_proba_batch(model, [vector])[0]


def top_k_from_probs(probs: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Descending by probability, ties broken by ascending class index."""
    n = len(probs)
    if not (1 <= k <= n):
        raise ArgumentError(f"k must be in [1, {n}]")
    order = np.lexsort((np.arange(n), -probs))
    return [(int(i), float(probs[i])) for i in order[:k]]


def predict_top_k(
    model: ClassifierModel, vector: FeatureVector, k: int
) -> list[tuple[int, float]]:
    return top_k_from_probs(predict_proba(model, vector), k)


# ---------------------------------------------------------------------------
# Text pipeline helpers (prep + tfidf embedded in the model bundle)
# ---------------------------------------------------------------------------


def vectorize_texts(model: ClassifierModel, texts: Sequence[str]) -> list[FeatureVector]:
    if model.tfidf is None or model.prep is None:
        raise PredictError("model bundle does not embed a text pipeline")
    return [vectorize(model.tfidf, normalize_tokens(t, model.prep)) for t in texts]


def predict_proba_texts(model: ClassifierModel, texts: Sequence[str]) -> np.ndarray:
    return predict_proba_batch(model, vectorize_texts(model, texts))


# ---------------------------------------------------------------------------
# Serialization: decimal strings, 17 significant digits
# ---------------------------------------------------------------------------


def _encode_array(a: np.ndarray):
    if a.dtype.kind in "iu":
        return a.tolist()
    flat = [format(x, ".17g") for x in a.ravel()]
    out = np.array(flat, dtype=object).reshape(a.shape)
    return out.tolist()


def _decode_array(v, dtype=np.float64) -> np.ndarray:
    a = np.asarray(v)
    if a.dtype.kind in "iu":
        return a.astype(np.int64)
    return a.astype(np.float64)


def model_to_dict(model: ClassifierModel) -> dict:
    params = {}
    for key, value in model.parameters.items():
        if isinstance(value, np.ndarray):
            params[key] = _encode_array(value)
        else:
            params[key] = value
    return {
        "format_version": model.format_version,
        "registry_fingerprint": model.registry_fingerprint,
        "spec": model.spec.to_dict(),
        "prep": model.prep.to_dict() if model.prep is not None else None,
        "tfidf": _tfidf_to_dict(model.tfidf) if model.tfidf is not None else None,
        "n_classes": model.n_classes,
        "parameters": params,
    }


def _tfidf_to_dict(tfidf: TfidfModel) -> dict:
    return {
        "config": tfidf.config.to_dict(),
        "vocabulary": list(tfidf.vocabulary),
        "idf": [format(x, ".17g") for x in tfidf.idf],
        "fitted_on": tfidf.fitted_on,
    }


def _tfidf_from_dict(d: dict) -> TfidfModel:
    from .tfidf import VectorizerConfig

    return TfidfModel(
        config=VectorizerConfig.from_dict(d["config"]),
        vocabulary=tuple(d["vocabulary"]),
        idf=np.array([float(x) for x in d["idf"]], dtype=np.float64),
        fitted_on=d.get("fitted_on", ""),
    )


_INT_PARAM_KEYS = {"pairs", "dim"}


def model_from_dict(doc: dict) -> ClassifierModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model format_version: {version!r}")
    try:
        spec = ClassifierSpec.from_dict(doc["spec"])
        params = {}
        for key, value in doc["parameters"].items():
            if isinstance(value, list):
                params[key] = _decode_array(
                    value, np.int64 if key in _INT_PARAM_KEYS else np.float64
                )
            else:
                params[key] = value
        return ClassifierModel(
            spec=spec,
            n_classes=int(doc["n_classes"]),
            parameters=params,
            registry_fingerprint=doc.get("registry_fingerprint", ""),
            tfidf=_tfidf_from_dict(doc["tfidf"]) if doc.get("tfidf") else None,
            prep=PrepConfig.from_dict(doc["prep"]) if doc.get("prep") else None,
            format_version=version,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"model bundle is malformed: {exc}") from exc


def model_to_bytes(model: ClassifierModel) -> bytes:
    return json.dumps(
        model_to_dict(model), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def save_model(model: ClassifierModel, path) -> None:
    with open(path, "wb") as f:
        f.write(model_to_bytes(model))


def load_model(path) -> ClassifierModel:
    with open(path, "rb") as f:
        raw = f.read()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"model bundle is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("model bundle is not a JSON object")
    return model_from_dict(doc)
