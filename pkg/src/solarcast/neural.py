"""From-scratch forecasting networks: single-layer linear, two-hidden-layer
ReLU, and an LSTM, all trained by plain SGD on mean squared error with
exact hand-derived gradients (through time for the LSTM).

Weights start Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from a seeded
generator; biases start at zero except the LSTM forget gate at 1. A batch
is a list of (window, target) pairs; the batch loss is the mean squared
error over every output element, and one train_step applies a single
gradient-descent update, returning the pre-update loss.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import lstm_backward, lstm_forward

MODEL_KINDS = ("slfnn", "mlfnn", "lstm")
LEARNING_RATE_GRID = (1.0, 1e-1, 1e-2, 1e-3, 1e-4)
LSTM_FORGET_BIAS = 1.0


@dataclass(frozen=True)
class NetConfig:
    kind: str
    input_size: int
    output_size: int
    seed: int = 0
    hidden_size: int = 0            # 0 means "same as input"
    learning_rate: float = 1e-2
    batch_windows: int = 10
    lstm_step_mode: str = "per_value"   # or "single_step"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.lstm_step_mode not in ("per_value", "single_step"):
            raise ValueError(f"unknown lstm_step_mode {self.lstm_step_mode!r}")
        if self.input_size < 1 or self.output_size < 1:
            raise ValueError("input_size and output_size must be >= 1")
        if self.hidden_size == 0:
            object.__setattr__(self, "hidden_size", self.input_size)


def _uniform_fan_in(rng, shape, fan_in):
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class _Model:
    """Shared parameter plumbing: flat views, SGD update, checkpoints."""

    config: NetConfig

    def __init__(self, config: NetConfig):
        self.config = config
        self.params: dict[str, np.ndarray] = {}
        self.step_count = 0
        self.diverged = False

    # -- parameter vector ---------------------------------------------------

    def param_names(self) -> list[str]:
        return list(self.params.keys())

    def get_flat(self) -> np.ndarray:
        return np.concatenate([self.params[k].reshape(-1) for k in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        pos = 0
        for key, arr in self.params.items():
            n = arr.size
            self.params[key] = flat[pos:pos + n].reshape(arr.shape).copy()
            pos += n
        if pos != flat.size:
            raise ValueError("flat vector does not match parameter count")

    # -- training -----------------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _loss_and_grads(self, batch_x, batch_y):
        raise NotImplementedError

    def batch_loss(self, batch_x, batch_y) -> float:
        loss, _ = self._loss_and_grads(batch_x, batch_y)
        return loss

    def train_step(self, batch_x, batch_y) -> float:
        """One SGD update over the batch; returns the pre-update loss.

        A non-finite loss aborts the update and marks the model diverged.
        """
        loss, grads = self._loss_and_grads(batch_x, batch_y)
        if not np.isfinite(loss):
            self.diverged = True
            return loss
        lr = self.config.learning_rate
        for key in self.params:
            self.params[key] -= lr * grads[key]
        self.step_count += 1
        return loss

    # -- checkpoints ----------------------------------------------------------

    def save_checkpoint(self, path) -> None:
        """Flat little-endian float64 parameter dump plus a JSON sidecar."""
        path = Path(path)
        flat = self.get_flat().astype("<f8")
        path.write_bytes(flat.tobytes())
        sidecar = {
            "kind": self.config.kind,
            "config": {
                "input_size": self.config.input_size,
                "output_size": self.config.output_size,
                "hidden_size": self.config.hidden_size,
                "seed": self.config.seed,
                "learning_rate": self.config.learning_rate,
                "batch_windows": self.config.batch_windows,
                "lstm_step_mode": self.config.lstm_step_mode,
            },
            "shapes": {k: list(v.shape) for k, v in self.params.items()},
            "step_count": self.step_count,
            "diverged": self.diverged,
        }
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True))


def load_checkpoint(path):
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    cfg = NetConfig(kind=sidecar["kind"], **sidecar["config"])
    model = init_model(cfg)
    flat = np.frombuffer(path.read_bytes(), dtype="<f8").astype(np.float64)
    model.set_flat(flat)
    expected = {k: tuple(v) for k, v in sidecar["shapes"].items()}
    actual = {k: v.shape for k, v in model.params.items()}
    if expected != actual:
        raise ValueError(f"checkpoint shapes {expected} do not match {actual}")
    model.step_count = int(sidecar["step_count"])
    model.diverged = bool(sidecar["diverged"])
    return model


class SingleLayerNet(_Model):
    """y = W x + b, no activation."""

    def __init__(self, config: NetConfig):
        super().__init__(config)
        rng = np.random.default_rng(config.seed)
        n_in, n_out = config.input_size, config.output_size
        self.params = {
            "w": _uniform_fan_in(rng, (n_out, n_in), n_in),
            "b": np.zeros(n_out),
        }

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.config.input_size,):
            raise ValueError(f"expected input of shape ({self.config.input_size},)")
        return self.params["w"] @ x + self.params["b"]

    def _loss_and_grads(self, batch_x, batch_y):
        w, b = self.params["w"], self.params["b"]
        grads = {"w": np.zeros_like(w), "b": np.zeros_like(b)}
        n_total = len(batch_x) * self.config.output_size
        loss = 0.0
        for x, y in zip(batch_x, batch_y):
            x = np.asarray(x, dtype=np.float64)
            diff = (w @ x + b) - np.asarray(y, dtype=np.float64)
            loss += float(diff @ diff)
            dout = 2.0 * diff / n_total
            grads["w"] += np.outer(dout, x)
            grads["b"] += dout
        return loss / n_total, grads


class MultiLayerNet(_Model):
    """Two ReLU hidden layers of the input width, linear output."""

    def __init__(self, config: NetConfig):
        super().__init__(config)
        rng = np.random.default_rng(config.seed)
        n_in, n_h, n_out = config.input_size, config.hidden_size, config.output_size
        self.params = {
            "w1": _uniform_fan_in(rng, (n_h, n_in), n_in),
            "b1": np.zeros(n_h),
            "w2": _uniform_fan_in(rng, (n_h, n_h), n_h),
            "b2": np.zeros(n_h),
            "w3": _uniform_fan_in(rng, (n_out, n_h), n_h),
            "b3": np.zeros(n_out),
        }

    def _forward_cache(self, x):
        p = self.params
        z1 = p["w1"] @ x + p["b1"]
        a1 = np.maximum(z1, 0.0)
        z2 = p["w2"] @ a1 + p["b2"]
        a2 = np.maximum(z2, 0.0)
        y = p["w3"] @ a2 + p["b3"]
        return y, z1, a1, z2, a2

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.config.input_size,):
            raise ValueError(f"expected input of shape ({self.config.input_size},)")
        return self._forward_cache(x)[0]

    def _loss_and_grads(self, batch_x, batch_y):
        p = self.params
        grads = {k: np.zeros_like(v) for k, v in p.items()}
        n_total = len(batch_x) * self.config.output_size
        loss = 0.0
        for x, y in zip(batch_x, batch_y):
            x = np.asarray(x, dtype=np.float64)
            out, z1, a1, z2, a2 = self._forward_cache(x)
            diff = out - np.asarray(y, dtype=np.float64)
            loss += float(diff @ diff)
            dout = 2.0 * diff / n_total
            grads["w3"] += np.outer(dout, a2)
            grads["b3"] += dout
            da2 = p["w3"].T @ dout
            dz2 = da2 * (z2 > 0.0)
            grads["w2"] += np.outer(dz2, a1)
            grads["b2"] += dz2
            da1 = p["w2"].T @ dz2
            dz1 = da1 * (z1 > 0.0)
            grads["w1"] += np.outer(dz1, x)
            grads["b1"] += dz1
        return loss / n_total, grads


class LstmNet(_Model):
    """Gated recurrent forecaster over the window, with a linear read-out.

    In "per_value" mode each window element is one time step (scalar
    input); "single_step" feeds the whole window as one step.
    """

    _GATE_KEYS = ("wxi", "whi", "bi", "wxf", "whf", "bf",
                  "wxg", "whg", "bg", "wxo", "who", "bo")

    def __init__(self, config: NetConfig):
        super().__init__(config)
        rng = np.random.default_rng(config.seed)
        n_h = config.hidden_size
        n_step_in = 1 if config.lstm_step_mode == "per_value" else config.input_size
        fan_in = n_step_in + n_h
        params = {}
        for gate in "ifgo":
            params[f"wx{gate}"] = _uniform_fan_in(rng, (n_h, n_step_in), fan_in)
            params[f"wh{gate}"] = _uniform_fan_in(rng, (n_h, n_h), fan_in)
            params[f"b{gate}"] = np.zeros(n_h)
        params["bf"] = np.full(n_h, LSTM_FORGET_BIAS)
        params["wy"] = _uniform_fan_in(rng, (config.output_size, n_h), n_h)
        params["by"] = np.zeros(config.output_size)
        # fixed insertion order = checkpoint layout
        self.params = {k: params[k] for k in self._GATE_KEYS + ("wy", "by")}
        self._n_step_in = n_step_in

    def _as_steps(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.config.input_size,):
            raise ValueError(f"expected input of shape ({self.config.input_size},)")
        if self.config.lstm_step_mode == "per_value":
            return x.reshape(-1, 1)
        return x.reshape(1, -1)

    def _param_tuple(self):
        p = self.params
        return tuple(p[k] for k in self._GATE_KEYS) + (p["wy"], p["by"])

    def forward(self, x):
        return lstm_forward(self._as_steps(x), *self._param_tuple())[0]

    def _loss_and_grads(self, batch_x, batch_y):
        p = self.params
        grads = {k: np.zeros_like(v) for k, v in p.items()}
        n_total = len(batch_x) * self.config.output_size
        loss = 0.0
        for x, y in zip(batch_x, batch_y):
            steps = self._as_steps(x)
            out, *caches = lstm_forward(steps, *self._param_tuple())
            diff = out - np.asarray(y, dtype=np.float64)
            loss += float(diff @ diff)
            dy = 2.0 * diff / n_total
            gs = lstm_backward(steps, tuple(caches), dy,
                               p["whi"], p["whf"], p["whg"], p["who"], p["wy"])
            for key, g in zip(self._GATE_KEYS + ("wy", "by"), gs):
                grads[key] += g
        return loss / n_total, grads


def init_model(config: NetConfig) -> _Model:
    """Build a freshly initialized model of the configured kind."""
    cls = {"slfnn": SingleLayerNet, "mlfnn": MultiLayerNet, "lstm": LstmNet}
    return cls[config.kind](config)


def gradient_check(model: _Model, x, target, epsilon: float = 1e-5) -> float:
    """Max relative disagreement between analytic and central finite-difference
    gradients of the single-pair loss, over every parameter."""
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _, grads = model._loss_and_grads([x], [target])
    analytic = np.concatenate([grads[k].reshape(-1) for k in model.params])
    flat = model.get_flat()
    worst = 0.0
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + epsilon
        model.set_flat(flat)
        up = model.batch_loss([x], [target])
        flat[idx] = orig - epsilon
        model.set_flat(flat)
        down = model.batch_loss([x], [target])
        flat[idx] = orig
        numeric = (up - down) / (2.0 * epsilon)
        denom = max(1e-8, abs(analytic[idx]) + abs(numeric))
        worst = max(worst, abs(analytic[idx] - numeric) / denom)
    model.set_flat(flat)
    return worst
