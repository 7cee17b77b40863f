"""Feature-gated feedforward binary classifier with sparse relevance.

Architecture: a softmax-with-temperature distribution over features (the
relevance of each input concept) gates the inputs, x~_j = x_j * r_j/max(r),
before a small ReLU MLP with a sigmoid output. Training minimizes binary
cross-entropy plus an entropy penalty on the relevance distribution, which
concentrates relevance mass onto few features. Gradients are hand-derived
and validated against central finite differences (see gradient_check).

By default both classes share one gate; with ``per_class_gates`` each class
owns a gate and the class logit is the difference of the two gated paths'
output units.
"""

import json
from dataclasses import dataclass

import numpy as np

from .data import BinaryDataset, DataSplit, FeatureSchema
from .errors import DimensionMismatch, NonFiniteLoss
from .metrics import MetricsReport, compute_metrics, confusion


@dataclass(frozen=True)
class LenConfig:
    hidden_sizes: tuple = (32, 16)
    entropy_weight: float = 0.2
    temperature: float = 0.7
    learning_rate: float = 0.05
    epochs: int = 300
    batch_size: int = 128
    seed: int = 0
    relevance_keep: int = 6
    relevance_floor: float = 0.05
    per_class_gates: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(self.hidden_sizes))
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be positive integers")
        if self.entropy_weight < 0:
            raise ValueError("entropy_weight must be >= 0")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1 or self.batch_size < 1 or self.relevance_keep < 1:
            raise ValueError("epochs, batch_size, relevance_keep must be >= 1")
        if not (0.0 <= self.relevance_floor < 1.0):
            raise ValueError("relevance_floor must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "hidden_sizes": list(self.hidden_sizes),
            "entropy_weight": self.entropy_weight,
            "temperature": self.temperature,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "relevance_keep": self.relevance_keep,
            "relevance_floor": self.relevance_floor,
            "per_class_gates": self.per_class_gates,
        }

    @classmethod
    def from_dict(cls, blob: dict) -> "LenConfig":
        blob = dict(blob)
        blob["hidden_sizes"] = tuple(blob["hidden_sizes"])
        return cls(**blob)


@dataclass(frozen=True)
class TrainReport:
    loss_per_epoch: list
    final_val: MetricsReport
    epochs_run: int

    def to_dict(self) -> dict:
        return {
            "loss_per_epoch": self.loss_per_epoch,
            "final_val": self.final_val.to_dict(),
            "epochs_run": self.epochs_run,
        }


@dataclass(frozen=True)
class LenModel:
    """Trained classifier; immutable, safe to share for prediction."""

    schema: FeatureSchema
    config: LenConfig
    gate_logits: np.ndarray  # [n_gates, d]
    layers: tuple  # ((W, b), ..., (W_out, b_out))

    @property
    def d(self) -> int:
        return len(self.schema)

    @property
    def n_gates(self) -> int:
        return self.gate_logits.shape[0]

    def _gate_index(self, class_id: int) -> int:
        return class_id if self.config.per_class_gates else 0

    def relevance(self, class_id: int = 1) -> np.ndarray:
        """Per-feature relevance distribution for the class (sums to 1)."""
        log_r = _log_softmax(self.gate_logits[self._gate_index(class_id)]
                             / self.config.temperature)
        return np.exp(log_r)

    def forward_proba(self, X) -> np.ndarray:
        """Probability of class 1 for each row, clipped into (0, 1)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise DimensionMismatch(self.d, X.shape)
        logit, _ = _forward_logit(self.gate_logits, self.layers, X,
                                  self.config)
        return np.clip(_sigmoid(logit), 1e-15, 1.0 - 1e-15)

    def predict_batch(self, X) -> np.ndarray:
        return (self.forward_proba(X) >= 0.5).astype(np.int8)


def predict(model: LenModel, sample):
    """(class id, probability); probability >= 0.5 maps to class 1."""
    sample = np.asarray(sample)
    if sample.shape != (model.d,):
        raise DimensionMismatch(model.d, sample.shape)
    proba = float(model.forward_proba(sample[np.newaxis, :])[0])
    return (1 if proba >= 0.5 else 0), proba


def relevant_features(model: LenModel, class_id: int = 1) -> list:
    """Indices the model deems relevant for the class, most relevant first.

    Keeps at most ``relevance_keep`` features, all within
    ``relevance_floor * max(relevance)``; never empty.
    """
    r = model.relevance(class_id)
    order = sorted(range(model.d), key=lambda j: (-r[j], j))
    floor = model.config.relevance_floor * r[order[0]]
    kept = [j for j in order[: model.config.relevance_keep] if r[j] >= floor]
    return kept if kept else [order[0]]


# ---------------------------------------------------------------------------
# numerics
# ---------------------------------------------------------------------------

def _log_softmax(v: np.ndarray) -> np.ndarray:
    shifted = v - v.max()
    return shifted - np.log(np.exp(shifted).sum())


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _gate_vector(gate_logits_row: np.ndarray, temperature: float):
    log_r = _log_softmax(gate_logits_row / temperature)
    r = np.exp(log_r)
    k_star = int(np.argmax(r))
    gate = r / r[k_star]
    return r, log_r, k_star, gate


def _forward_logit(gate_logits, layers, X, config):
    """Class-1 logit for every row plus the per-path caches for backprop."""
    paths = []
    n_paths = gate_logits.shape[0]
    z_units = []
    for p in range(n_paths):
        r, log_r, k_star, gate = _gate_vector(gate_logits[p],
                                              config.temperature)
        h = X * gate
        acts = [h]  # layer inputs
        zs = []
        for W, b in layers[:-1]:
            z = h @ W + b
            zs.append(z)
            h = np.maximum(z, 0.0)
            acts.append(h)
        W_out, b_out = layers[-1]
        z_unit = h @ W_out[:, p] + b_out[p]
        z_units.append(z_unit)
        paths.append({"r": r, "log_r": log_r, "k_star": k_star,
                      "gate": gate, "acts": acts, "zs": zs})
    logit = z_units[1] - z_units[0] if n_paths == 2 else z_units[0]
    return logit, paths


def _loss_and_grads(gate_logits, layers, X, y, config, want_grads=True):
    """Full loss (BCE + entropy penalty) and, optionally, all gradients."""
    n = X.shape[0]
    logit, paths = _forward_logit(gate_logits, layers, X, config)
    # stable BCE with logits: mean(softplus(logit) - y * logit)
    data_loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit))
    reg_loss = 0.0
    for path in paths:
        reg_loss += -float(np.sum(path["r"] * path["log_r"]))
    loss = data_loss + config.entropy_weight * reg_loss
    if not want_grads:
        return loss, None

    d_gate_logits = np.zeros_like(gate_logits)
    d_layers = [(np.zeros_like(W), np.zeros_like(b)) for W, b in layers]
    dlogit = (_sigmoid(logit) - y) / n

    n_paths = gate_logits.shape[0]
    W_out, _ = layers[-1]
    for p, path in enumerate(paths):
        dz = dlogit if (n_paths == 1 or p == 1) else -dlogit
        h_last = path["acts"][-1]
        d_layers[-1][0][:, p] += h_last.T @ dz
        d_layers[-1][1][p] += dz.sum()
        dh = np.outer(dz, W_out[:, p])
        for li in range(len(layers) - 2, -1, -1):
            dzl = dh * (path["zs"][li] > 0.0)
            d_layers[li][0][...] += path["acts"][li].T @ dzl
            d_layers[li][1][...] += dzl.sum(axis=0)
            dh = dzl @ layers[li][0].T
        # dh is now dL/d(gated input); gate = r / r[k*]
        u = (dh * X).sum(axis=0)
        r, k_star = path["r"], path["k_star"]
        m = r[k_star]
        dr = u / m
        dr[k_star] -= (u @ r) / (m * m)
        # entropy penalty: dH/dr_j = -(log r_j + 1)
        dr += config.entropy_weight * (-(path["log_r"] + 1.0))
        ds = r * (dr - (dr @ r))
        d_gate_logits[p] = ds / config.temperature
    return loss, (d_gate_logits, d_layers)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _init_params(d: int, config: LenConfig, rng):
    n_gates = 2 if config.per_class_gates else 1
    gate_logits = np.zeros((n_gates, d), dtype=np.float64)
    sizes = [d] + list(config.hidden_sizes) + [n_gates]
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-scale, scale, size=(fan_in, fan_out))
        b = rng.uniform(-scale, scale, size=fan_out)
        layers.append((W, b))
    return gate_logits, layers


def train(dataset: BinaryDataset, split: DataSplit, config: LenConfig):
    """Mini-batch gradient descent; returns (LenModel, TrainReport).

    Deterministic for fixed (dataset, split, config): shuffling and
    initialization come from one generator seeded with config.seed.
    """
    if dataset.d < 1:
        raise DimensionMismatch(1, dataset.d)
    for part in (split.train, split.val, split.test):
        if part.max() >= dataset.n:
            raise DimensionMismatch(dataset.n, int(part.max()))

    rng = np.random.default_rng(config.seed)
    gate_logits, layers = _init_params(dataset.d, config, rng)

    X_train = dataset.features[split.train].astype(np.float64)
    y_train = dataset.labels[split.train].astype(np.float64)
    n_train = X_train.shape[0]

    losses = []
    for epoch in range(config.epochs):
        perm = rng.permutation(n_train)
        batch_losses = []
        for start in range(0, n_train, config.batch_size):
            rows = perm[start : start + config.batch_size]
            loss, grads = _loss_and_grads(
                gate_logits, layers, X_train[rows], y_train[rows], config
            )
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, start // config.batch_size, loss)
            d_gate, d_layers = grads
            gate_logits -= config.learning_rate * d_gate
            for (W, b), (dW, db) in zip(layers, d_layers):
                W -= config.learning_rate * dW
                b -= config.learning_rate * db
            batch_losses.append(loss)
        losses.append(float(np.mean(batch_losses)))

    model = LenModel(
        schema=dataset.schema,
        config=config,
        gate_logits=gate_logits,
        layers=tuple((W, b) for W, b in layers),
    )
    val_preds = model.predict_batch(dataset.features[split.val])
    report = TrainReport(
        loss_per_epoch=losses,
        final_val=compute_metrics(
            confusion(val_preds, dataset.labels[split.val])
        ),
        epochs_run=config.epochs,
    )
    return model, report


# ---------------------------------------------------------------------------
# gradient validation
# ---------------------------------------------------------------------------

def gradient_check(model: LenModel, X, y, epsilon: float = 1e-4) -> float:
    """Max relative error between analytic gradients and central differences.

    Checks every parameter of the full loss, entropy penalty included.
    Meaningful away from the max-gate kink: models whose relevance
    distribution has a unique maximum (any generic parameter point).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("batch must be non-empty")

    gate_logits = model.gate_logits.copy()
    layers = [(W.copy(), b.copy()) for W, b in model.layers]
    _, grads = _loss_and_grads(gate_logits, layers, X, y, model.config)
    d_gate, d_layers = grads

    arrays = [gate_logits] + [a for W, b in layers for a in (W, b)]
    grad_arrays = [d_gate] + [a for dW, db in d_layers for a in (dW, db)]

    def loss_at():
        val, _ = _loss_and_grads(
            gate_logits, layers, X, y, model.config, want_grads=False
        )
        return val

    worst = 0.0
    for arr, grad in zip(arrays, grad_arrays):
        flat = arr.ravel()
        gflat = grad.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss_at()
            flat[i] = orig - epsilon
            down = loss_at()
            flat[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            denom = max(abs(numeric), abs(gflat[i]), 1e-6)
            worst = max(worst, abs(numeric - gflat[i]) / denom)
    return worst


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def model_to_json(model: LenModel) -> str:
    blob = {
        "schema": list(model.schema.names),
        "config": model.config.to_dict(),
        "gate_logits": model.gate_logits.tolist(),
        "layers": [
            {"weights": W.tolist(), "biases": b.tolist()}
            for W, b in model.layers
        ],
    }
    return json.dumps(blob, indent=2, sort_keys=True)


def save_model(model: LenModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))
        fh.write("\n")


def load_model(path) -> LenModel:
    with open(path, "r", encoding="utf-8") as fh:
        blob = json.load(fh)
    return LenModel(
        schema=FeatureSchema(tuple(blob["schema"])),
        config=LenConfig.from_dict(blob["config"]),
        gate_logits=np.array(blob["gate_logits"], dtype=np.float64),
        layers=tuple(
            (
                np.array(layer["weights"], dtype=np.float64),
                np.array(layer["biases"], dtype=np.float64),
            )
            for layer in blob["layers"]
        ),
    )
