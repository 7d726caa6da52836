"""Small fully-connected noise predictor with hand-rolled reverse-mode
gradients and an adaptive-moment optimizer.

The network eps_hat = phi(x_t, t) takes the noised point with the raw time
appended as one extra feature (an optional Fourier lift of t is available but
off by default) through five linear layers with SiLU activations; SiLU is
smooth, so finite-difference gradient checks hold to tight tolerances.

Training follows the denoising regression: draw t uniform on [0, 1], draw
eps ~ N(0, I), form x_t = (1 - t) x_0 + sigma * eps and minimise
mean squared error between eps and phi(x_t, t).  Everything is a pure
function of (initial parameters, data order, seed), so runs reproduce
bitwise in single-threaded mode.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DenoiserMLP",
    "AdamState",
    "adam_init",
    "adam_step",
    "denoising_batch",
    "loss_and_grads",
    "TrainConfig",
    "TrainResult",
    "train",
    "save_model",
    "load_model",
]

_CHECKPOINT_VERSION = 1


def _silu(z):
    s = 1.0 / (1.0 + np.exp(-z))
    return z * s


def _silu_prime(z):
    s = 1.0 / (1.0 + np.exp(-z))
    return s * (1.0 + z * (1.0 - s))


class DenoiserMLP:
    """eps_hat = phi(x_t, t): five linear layers, SiLU between them."""

    def __init__(self, dims: int, hidden: int = 128, n_layers: int = 5,
                 fourier_features: int = 0, seed: int = 0, dtype=np.float64):
        if n_layers < 2:
            raise ValueError("need at least 2 layers")
        self.dims = int(dims)
        self.hidden = int(hidden)
        self.n_layers = int(n_layers)
        self.fourier_features = int(fourier_features)
        self.dtype = np.dtype(dtype)
        in_dim = self.dims + 1 + 2 * self.fourier_features
        sizes = [in_dim] + [self.hidden] * (self.n_layers - 1) + [self.dims]
        rng = np.random.Generator(np.random.Philox(key=seed))
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)).astype(self.dtype))
            self.biases.append(rng.uniform(-bound, bound, fan_out).astype(self.dtype))

    # -- parameter plumbing --------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "DenoiserMLP":
        dup = object.__new__(DenoiserMLP)
        dup.__dict__.update({k: v for k, v in self.__dict__.items()
                             if k not in ("weights", "biases")})
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    # -- forward / backward --------------------------------------------

    def _features(self, x, t):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            x = x[:, None] if self.dims == 1 else x[None, :]
        tcol = np.broadcast_to(np.asarray(t, dtype=self.dtype), (x.shape[0],))[:, None]
        cols = [x, tcol]
        for k in range(self.fourier_features):
            freq = np.pi * 2.0**k
            cols.append(np.sin(freq * tcol))
            cols.append(np.cos(freq * tcol))
        return np.concatenate(cols, axis=1)

    def _forward(self, feats):
        a = feats
        pre, post = [], [a]
        for layer in range(self.n_layers):
            z = a @ self.weights[layer] + self.biases[layer]
            pre.append(z)
            a = _silu(z) if layer < self.n_layers - 1 else z
            post.append(a)
        return a, (pre, post)

    def predict_eps(self, x, t):
        """Noise prediction for a batch; t is a scalar or per-row array."""
        out, _ = self._forward(self._features(x, t))
        return out

    def backprop(self, cache, grad_out):
        """Parameter gradients given d(loss)/d(output); mirrors _forward."""
        pre, post = cache
        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        delta = grad_out
        for layer in range(self.n_layers - 1, -1, -1):
            grads_w[layer] = post[layer].T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * _silu_prime(pre[layer - 1])
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.extend((gw, gb))
        return out


def denoising_batch(x0, sigma: float, rng: np.random.Generator, *, t_mode: str = "continuous",
                    grid_steps: int = 40, dtype=np.float64):
    """Draw (t, eps, x_t) for one denoising step: x_t = (1 - t) x_0 + sigma eps.

    t_mode 'continuous' samples t ~ U([0, 1]); 'grid' samples t uniformly from
    the sampler's active nodes {1/T, ..., (T-1)/T}.
    """
    x0 = np.asarray(x0, dtype=dtype)
    n = x0.shape[0]
    if t_mode == "continuous":
        t = rng.uniform(size=n).astype(dtype)
    elif t_mode == "grid":
        t = (rng.integers(1, grid_steps, size=n) / grid_steps).astype(dtype)
    else:
        raise ValueError(f"unknown t_mode {t_mode!r}")
    eps = rng.standard_normal(x0.shape).astype(dtype)
    x_t = (1.0 - t)[:, None] * x0 + sigma * eps
    return t, eps, x_t


def loss_and_grads(model: DenoiserMLP, x0_batch, sigma: float, seed: int, *,
                   t_mode: str = "continuous", grid_steps: int = 40):
    """Mean-squared denoising error on one batch and its exact parameter
    gradients; randomness (t, eps) is a pure function of seed."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    t, eps, x_t = denoising_batch(x0_batch, sigma, rng, t_mode=t_mode,
                                  grid_steps=grid_steps, dtype=model.dtype)
    out, cache = model._forward(model._features(x_t, t))
    resid = out - eps
    loss = float(np.mean(resid**2))
    if not np.isfinite(loss):
        raise FloatingPointError("denoising loss went non-finite")
    grad_out = (2.0 / resid.size) * resid
    return loss, model.backprop(cache, grad_out)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_init(model, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
    params = model.parameters()
    return AdamState(lr, beta1, beta2, eps, 0,
                     [np.zeros_like(p) for p in params],
                     [np.zeros_like(p) for p in params])


def adam_step(model, grads, state: AdamState) -> AdamState:
    """Bias-corrected adaptive-moment update, applied in place."""
    params = model.parameters()
    if len(grads) != len(params):
        raise ValueError("gradient list does not match parameter list")
    state.step += 1
    b1c = 1.0 - state.beta1**state.step
    b2c = 1.0 - state.beta2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / b1c) / (np.sqrt(v / b2c) + state.eps)
    return state


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 2048
    lr: float = 1e-3
    sigma: float = 0.05
    seed: int = 0
    t_mode: str = "continuous"
    grid_steps: int = 40
    divergence_limit: float = 1e3


@dataclass
class TrainResult:
    model: DenoiserMLP
    epoch_losses: np.ndarray

    def smoothed_losses(self, window: int = 10) -> np.ndarray:
        w = min(window, len(self.epoch_losses))
        kernel = np.ones(w) / w
        return np.convolve(self.epoch_losses, kernel, mode="valid")


def train(model: DenoiserMLP, data, config: TrainConfig) -> TrainResult:
    """Denoising-regression training; mutates model, returns it with the
    per-epoch mean loss curve."""
    data = np.asarray(data, dtype=model.dtype)
    if data.ndim != 2 or data.shape[1] != model.dims:
        raise ValueError(f"data shape {data.shape} incompatible with dims={model.dims}")
    state = adam_init(model, lr=config.lr)
    order_rng = np.random.Generator(np.random.Philox(key=config.seed))
    losses = []
    batch_seed = config.seed
    for _ in range(config.epochs):
        perm = order_rng.permutation(data.shape[0])
        epoch_loss, n_batches = 0.0, 0
        for lo in range(0, data.shape[0], config.batch_size):
            idx = perm[lo : lo + config.batch_size]
            batch_seed += 1
            loss, grads = loss_and_grads(model, data[idx], config.sigma, batch_seed,
                                         t_mode=config.t_mode, grid_steps=config.grid_steps)
            if loss > config.divergence_limit:
                raise FloatingPointError(f"training diverged (loss={loss:.3g})")
            adam_step(model, grads, state)
            epoch_loss += loss
            n_batches += 1
        losses.append(epoch_loss / max(n_batches, 1))
    return TrainResult(model, np.asarray(losses))


# -- checkpoint container ---------------------------------------------------

def save_model(model: DenoiserMLP, path, train_config: TrainConfig | None = None) -> None:
    """Versioned checkpoint: layer dims, activation tag, parameters, config echo."""
    meta = {
        "version": _CHECKPOINT_VERSION,
        "dims": model.dims,
        "hidden": model.hidden,
        "n_layers": model.n_layers,
        "fourier_features": model.fourier_features,
        "dtype": model.dtype.name,
        "activation": "silu",
        "train_config": None if train_config is None else vars(train_config) | {},
    }
    arrays = {}
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
                 **arrays)


def load_model(path) -> DenoiserMLP:
    with np.load(path) as z:
        meta = json.loads(bytes(z["meta"]).decode())
        if meta["version"] != _CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        model = DenoiserMLP(meta["dims"], meta["hidden"], meta["n_layers"],
                            meta["fourier_features"], seed=0, dtype=np.dtype(meta["dtype"]))
        model.weights = [z[f"w{i}"].astype(model.dtype) for i in range(model.n_layers)]
        model.biases = [z[f"b{i}"].astype(model.dtype) for i in range(model.n_layers)]
    return model
