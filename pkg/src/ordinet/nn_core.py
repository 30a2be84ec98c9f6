"""Minimal trainable dense network with pluggable ordinal heads.

Parameters live in one flat float64 vector addressed through a layout map,
which keeps optimizers and checkpointing trivial and makes the
finite-difference gradient check a straight loop over entries. The trunk
is plain matmul + activation (BLAS territory); head and loss fusions are
delegated to :mod:`ordinet.kernels`.

Head/loss compatibility: the soft-label cross-entropy and the weighted
kappa loss pair with any probability-producing head (softmax, clm,
stick_breaking); the template MSE pairs with the obd head only.
"""

import json
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .dropout import (
    HybridDropoutConfig,
    dropout_scale_vector,
    hybrid_drop_probabilities,
    neuron_target_correlation,
)
from .losses import WK, EcocMse, SoftCE, ecoc_mse_loss, penalization_matrix
from .output_layers import (
    ClmParams,
    clm_backward,
    clm_forward,
    ecoc_templates,
    obd_forward,
    stick_breaking_backward,
    stick_breaking_forward,
)
from .soft_labels import blend

ACTIVATIONS = ("relu", "tanh")
HEADS = ("softmax", "clm", "stick_breaking", "obd")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class ModelSpec:
    input_dim: int
    hidden_dims: tuple
    num_classes: int
    activation: str = "relu"
    head: str = "softmax"
    link: str = "logit"
    dropout: HybridDropoutConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError("hidden_dims must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}")
        if self.dropout is not None and not self.hidden_dims:
            raise ValueError("dropout needs at least one hidden layer")

    @property
    def head_width(self) -> int:
        if self.head == "softmax":
            return self.num_classes
        if self.head == "clm":
            return 1
        return self.num_classes - 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 100
    patience: int = 40
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if not 0 <= self.patience <= self.max_epochs:
            raise ValueError("patience must lie in [0, max_epochs]")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be 'sgd' or 'adam'")


def _build_layout(spec: ModelSpec):
    dims = [spec.input_dim, *spec.hidden_dims, spec.head_width]
    blocks = []
    offset = 0
    for i in range(len(dims) - 1):
        blocks.append((f"W{i}", offset, (dims[i], dims[i + 1])))
        offset += dims[i] * dims[i + 1]
        blocks.append((f"b{i}", offset, (dims[i + 1],)))
        offset += dims[i + 1]
    if spec.head == "clm":
        blocks.append(("clm_base", offset, (1,)))
        offset += 1
        blocks.append(("clm_raw", offset, (spec.num_classes - 2,)))
        offset += spec.num_classes - 2
    return blocks, offset


class Model:
    """Network parameters plus spec and training history."""

    def __init__(self, spec: ModelSpec, params: np.ndarray, seed: int, history=None):
        layout, total = _build_layout(spec)
        if params.shape != (total,):
            raise ValueError(f"expected {total} parameters, got {params.shape}")
        self.spec = spec
        self.params = params
        self.seed = seed
        self.history = history if history is not None else {
            "train_loss": [],
            "val_loss": [],
            "best_epoch": -1,
        }
        self.layout = layout

    @property
    def num_params(self) -> int:
        return self.params.shape[0]

    def block(self, name: str) -> np.ndarray:
        for bname, offset, shape in self.layout:
            if bname == name:
                size = int(np.prod(shape))
                return self.params[offset : offset + size].reshape(shape)
        raise KeyError(name)

    def clm_params(self) -> ClmParams:
        return ClmParams(
            float(self.block("clm_base")[0]), self.block("clm_raw"), self.spec.link
        )


def build_model(spec: ModelSpec, seed: int = 0) -> Model:
    """Fresh parameters: uniform(+-1/sqrt(fan_in)) weights, zero biases,
    CLM thresholds evenly spaced on [-2, 2]."""
    layout, total = _build_layout(spec)
    params = np.zeros(total)
    model = Model(spec, params, seed)
    rng = np.random.default_rng(seed)
    for name, _, shape in layout:
        if name.startswith("W"):
            bound = 1.0 / np.sqrt(shape[0])
            model.block(name)[:] = rng.uniform(-bound, bound, shape)
    if spec.head == "clm":
        init = ClmParams.evenly_spaced(spec.num_classes, spec.link)
        model.block("clm_base")[0] = init.base_threshold
        model.block("clm_raw")[:] = init.raw_increments
    return model


# ---------------------------------------------------------------------------
# forward / backward
# ---------------------------------------------------------------------------


def _activate(z, kind):
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _trunk_forward(model, X, train, labels, rng):
    """Hidden-layer pass. Returns (per-layer inputs, pre-activations, scale).

    ``scale`` is the per-neuron dropout multiplier applied to the last
    hidden activation, or None when dropout is off.
    """
    spec = model.spec
    a = X
    inputs = [X]
    pres = []
    for i in range(len(spec.hidden_dims)):
        z = a @ model.block(f"W{i}") + model.block(f"b{i}")
        pres.append(z)
        a = _activate(z, spec.activation)
        inputs.append(a)
    scale = None
    if train and spec.dropout is not None:
        cfg = spec.dropout
        if labels is not None and X.shape[0] >= cfg.min_batch:
            corr = neuron_target_correlation(a, labels)
            q = hybrid_drop_probabilities(corr, cfg)
        else:
            q = np.full(a.shape[1], cfg.base_rate)
        scale, _ = dropout_scale_vector(q, rng)
        a = a * scale[None, :]
        inputs[-1] = a
    return inputs, pres, scale


def _head_output(model, projection):
    head = model.spec.head
    if head == "softmax":
        return kernels.softmax(projection)
    if head == "clm":
        return clm_forward(projection[:, 0], model.clm_params())
    if head == "stick_breaking":
        return stick_breaking_forward(projection)
    return obd_forward(projection)


def forward(model: Model, X, mode: str = "eval", labels=None, rng=None) -> np.ndarray:
    """Head output for a batch: probabilities, or sigmoids for the obd head.

    Train mode applies hybrid dropout when the spec configures it; without
    labels the correlation signal is unavailable and the uniform rate is
    used.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    X = _check_inputs(model, X)
    inputs, _, _ = _trunk_forward(model, X, mode == "train", labels, rng)
    last = len(model.spec.hidden_dims)
    projection = inputs[-1] @ model.block(f"W{last}") + model.block(f"b{last}")
    return _head_output(model, projection)


def _check_inputs(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.spec.input_dim:
        raise ValueError(
            f"X must be (N, {model.spec.input_dim}), got {X.shape}"
        )
    return X


@lru_cache(maxsize=64)
def _blended_rows(table, eta):
    return blend(table, eta).rows


def _loss_on_head(model, projection, labels, loss):
    """Loss value and gradient wrt the head projection (plus clm params).

    Returns (value, grad_projection, clm_grads or None).
    """
    spec = model.spec
    head = spec.head
    j = spec.num_classes
    if isinstance(loss, SoftCE):
        if head == "obd":
            raise ValueError("soft cross-entropy needs a probability head")
        if loss.table.num_classes != j:
            raise ValueError("soft-label table and model disagree on classes")
        targets = _blended_rows(loss.table, loss.eta)[labels]
        if head == "softmax":
            value, dz = kernels.softmax_xent(projection, targets)
            return value, dz, None
        probs = _head_output(model, projection)
        value, dp = kernels.xent_on_probs(probs, targets)
        return value, *_prob_head_backward(model, projection, dp)
    if isinstance(loss, WK):
        if head == "obd":
            raise ValueError("weighted-kappa loss needs a probability head")
        omega = penalization_matrix(j, loss.power).entries
        probs = _head_output(model, projection)
        value, dp = kernels.wk_value_grad(probs, labels, omega, loss.epsilon)
        if head == "softmax":
            inner = np.sum(dp * probs, axis=1, keepdims=True)
            return value, probs * (dp - inner), None
        return value, *_prob_head_backward(model, projection, dp)
    if isinstance(loss, EcocMse):
        if head != "obd":
            raise ValueError("template MSE pairs with the obd head only")
        outputs = obd_forward(projection)
        res = ecoc_mse_loss(outputs, labels, ecoc_templates(j))
        dz = res.gradient * outputs * (1.0 - outputs)
        return res.value, dz, None
    raise ValueError(f"unknown loss specification {loss!r}")


def _prob_head_backward(model, projection, dp):
    head = model.spec.head
    if head == "clm":
        grad_proj, grad_base, grad_raw = clm_backward(
            projection[:, 0], model.clm_params(), dp
        )
        return grad_proj[:, None], (grad_base, grad_raw)
    return stick_breaking_backward(projection, dp), None


def loss_and_grad(model: Model, X, labels, loss, train: bool = False, rng=None):
    """Loss value and full parameter gradient for one batch.

    ``train=True`` activates dropout (mask drawn from ``rng`` and replayed
    in the backward pass; the drop probabilities are treated as constants).
    """
    X = _check_inputs(model, X)
    labels = _check_batch_labels(model, labels)
    spec = model.spec
    inputs, pres, scale = _trunk_forward(model, X, train, labels, rng)
    last = len(spec.hidden_dims)
    w_out = model.block(f"W{last}")
    projection = inputs[-1] @ w_out + model.block(f"b{last}")

    value, dz, clm_grads = _loss_on_head(model, projection, labels, loss)

    grad = np.zeros_like(model.params)
    gmodel = Model(spec, grad, model.seed, history={})
    gmodel.block(f"W{last}")[:] = inputs[-1].T @ dz
    gmodel.block(f"b{last}")[:] = dz.sum(axis=0)
    if clm_grads is not None:
        grad_base, grad_raw = clm_grads
        gmodel.block("clm_base")[0] = grad_base
        gmodel.block("clm_raw")[:] = grad_raw
    da = dz @ w_out.T
    if scale is not None:
        da = da * scale[None, :]
    for i in range(last - 1, -1, -1):
        if spec.activation == "relu":
            dpre = da * (pres[i] > 0.0)
        else:
            dpre = da * (1.0 - np.tanh(pres[i]) ** 2)
        gmodel.block(f"W{i}")[:] = inputs[i].T @ dpre
        gmodel.block(f"b{i}")[:] = dpre.sum(axis=0)
        if i > 0:
            da = dpre @ model.block(f"W{i}").T
    return value, grad


def _check_batch_labels(model, labels):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("empty batch")
    if labels.min() < 0 or labels.max() >= model.spec.num_classes:
        raise ValueError(f"labels must lie in [0, {model.spec.num_classes})")
    return labels


def loss_value(model: Model, X, labels, loss) -> float:
    """Eval-mode loss value (no dropout, no parameter gradient)."""
    X = _check_inputs(model, X)
    labels = _check_batch_labels(model, labels)
    inputs, _, _ = _trunk_forward(model, X, False, None, None)
    last = len(model.spec.hidden_dims)
    projection = inputs[-1] @ model.block(f"W{last}") + model.block(f"b{last}")
    value, _, _ = _loss_on_head(model, projection, labels, loss)
    return value


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def fit(
    model: Model,
    X_train,
    y_train,
    X_val,
    y_val,
    config: TrainConfig,
    loss,
) -> Model:
    """Mini-batch training with early stopping on the validation loss.

    Epoch order is reshuffled from the run seed. Stops after ``patience``
    epochs without an absolute validation improvement above 1e-6
    (patience 0 disables early stopping) and restores the parameters of
    the best validation epoch.
    """
    X_train = _check_inputs(model, X_train)
    y_train = np.asarray(y_train, dtype=np.int64)
    if X_train.shape[0] == 0:
        raise ValueError("empty training set")
    X_val = _check_inputs(model, X_val)
    y_val = np.asarray(y_val, dtype=np.int64)

    rng = np.random.default_rng(config.seed)
    n = X_train.shape[0]
    adam_m = np.zeros_like(model.params)
    adam_v = np.zeros_like(model.params)
    step = 0

    best_val = np.inf
    best_params = model.params.copy()
    best_epoch = -1
    stale = 0
    train_hist = []
    val_hist = []

    for epoch in range(config.max_epochs):
        perm = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            value, grad = loss_and_grad(
                model, X_train[idx], y_train[idx], loss, train=True, rng=rng
            )
            batch_losses.append(value)
            if config.optimizer == "sgd":
                model.params -= config.learning_rate * grad
            else:
                step += 1
                adam_m += (1.0 - ADAM_BETA1) * (grad - adam_m)
                adam_v += (1.0 - ADAM_BETA2) * (grad * grad - adam_v)
                m_hat = adam_m / (1.0 - ADAM_BETA1**step)
                v_hat = adam_v / (1.0 - ADAM_BETA2**step)
                model.params -= config.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        train_hist.append(float(np.mean(batch_losses)))
        val = loss_value(model, X_val, y_val, loss)
        val_hist.append(val)
        if val < best_val - 1e-6:
            best_val = val
            best_params = model.params.copy()
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if config.patience > 0 and stale >= config.patience:
                break

    if best_epoch >= 0:
        model.params[:] = best_params
    model.history = {
        "train_loss": train_hist,
        "val_loss": val_hist,
        "best_epoch": best_epoch,
    }
    return model


# ---------------------------------------------------------------------------
# inference
# ---------------------------------------------------------------------------


def predict_proba(model: Model, X) -> np.ndarray:
    """Class probabilities for any head.

    The obd head converts template distances into probabilities with a
    softmax over negative squared distances, so its argmax matches
    nearest-template decoding.
    """
    out = forward(model, X, mode="eval")
    if model.spec.head != "obd":
        return out
    templates = ecoc_templates(model.spec.num_classes).matrix
    diff = out[:, None, :] - templates[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return kernels.softmax(-d2)


def predict_labels(model: Model, X) -> np.ndarray:
    return np.argmax(predict_proba(model, X), axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# verification and persistence
# ---------------------------------------------------------------------------


def gradient_check(model: Model, X, labels, loss, step: float = 1e-6) -> dict:
    """Central finite differences against the analytic gradient.

    Costs two loss evaluations per parameter; meant for small models.
    Reports, per layout block, max |analytic - numeric| / max(1, |a|, |n|),
    plus the overall worst entry under "max".
    """
    _, analytic = loss_and_grad(model, X, labels, loss, train=False)
    numeric = np.empty_like(analytic)
    for i in range(model.num_params):
        orig = model.params[i]
        model.params[i] = orig + step
        hi = loss_value(model, X, labels, loss)
        model.params[i] = orig - step
        lo = loss_value(model, X, labels, loss)
        model.params[i] = orig
        numeric[i] = (hi - lo) / (2.0 * step)
    report = {}
    for name, offset, shape in model.layout:
        size = int(np.prod(shape))
        if size == 0:
            report[name] = 0.0
            continue
        a = analytic[offset : offset + size]
        f = numeric[offset : offset + size]
        denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(f)))
        report[name] = float(np.max(np.abs(a - f) / denom))
    report["max"] = max(report.values())
    return report


def save_model(model: Model, path) -> None:
    """Checkpoint spec, parameters, seed, and history; round-trips bit-exactly."""
    meta = {
        "spec": asdict(model.spec),
        "seed": model.seed,
        "history": model.history,
        "layout": [(n, o, list(s)) for n, o, s in model.layout],
    }
    with open(path, "wb") as fh:
        np.savez(fh, params=model.params, meta=np.array(json.dumps(meta)))


def load_model(path) -> Model:
    with np.load(path, allow_pickle=False) as data:
        params = data["params"].copy()
        meta = json.loads(data["meta"].item())
    spec_dict = meta["spec"]
    dropout = spec_dict.pop("dropout")
    spec = ModelSpec(
        input_dim=spec_dict["input_dim"],
        hidden_dims=tuple(spec_dict["hidden_dims"]),
        num_classes=spec_dict["num_classes"],
        activation=spec_dict["activation"],
        head=spec_dict["head"],
        link=spec_dict["link"],
        dropout=HybridDropoutConfig(**dropout) if dropout else None,
    )
    return Model(spec, params, meta["seed"], history=meta["history"])
