"""Feedforward network trained by mini-batch gradient descent with momentum.

Fixed shape input -> hidden layers (default 64 -> 32) -> 1 logistic output,
ReLU activations, binary cross-entropy loss. Weights initialize uniformly in
+-sqrt(6 / (fan_in + fan_out)), biases at zero. ``gradient_check`` verifies
the backpropagated gradients against central finite differences over every
parameter.
"""

from __future__ import annotations

import numpy as np

from .base import TrainedModel, sigmoid, softplus


def init_parameters(layer_sizes, rng):
    """Glorot-uniform weight matrices and zero biases for the given shape."""
    weights = []
    biases = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return weights, biases


def _forward_logits(weights, biases, X):
    """Raw output logits plus per-layer activations (for backprop)."""
    activations = [X]
    a = X
    last = len(weights) - 1
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        a = z if i == last else np.maximum(z, 0.0)
        activations.append(a)
    return activations[-1][:, 0], activations


def loss_and_gradients(weights, biases, X, y):
    """Mean BCE loss and its gradients w.r.t. every weight and bias."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    logits, activations = _forward_logits(weights, biases, X)
    loss = float(np.mean(softplus(logits) - y * logits))

    grad_w = [np.zeros_like(W) for W in weights]
    grad_b = [np.zeros_like(b) for b in biases]
    delta = ((sigmoid(logits) - y) / n)[:, None]
    for i in range(len(weights) - 1, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (activations[i] > 0.0)
    return loss, grad_w, grad_b


def bce_loss(weights, biases, X, y) -> float:
    logits, _ = _forward_logits(weights, biases, np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(softplus(logits) - y * logits))


class MlpModel(TrainedModel):
    def __init__(self, spec, feature_arity, weights, biases, loss_curve):
        super().__init__(spec, feature_arity)
        self.weights = weights
        self.biases = biases
        self.loss_curve = list(loss_curve)

    @classmethod
    def fit(cls, spec, X, y):
        hp = spec.hyperparameters
        n, d = X.shape
        sizes = [d, *hp["hidden_sizes"], 1]
        rng = np.random.default_rng(spec.seed)
        weights, biases = init_parameters(sizes, rng)
        vel_w = [np.zeros_like(W) for W in weights]
        vel_b = [np.zeros_like(b) for b in biases]
        lr = hp["learning_rate"]
        mu = hp["momentum"]
        batch = hp["batch_size"]

        loss_curve = [bce_loss(weights, biases, X, y)]
        for _ in range(hp["epochs"]):
            perm = rng.permutation(n)
            for start in range(0, n, batch):
                idx = perm[start:start + batch]
                _, grad_w, grad_b = loss_and_gradients(weights, biases, X[idx], y[idx])
                for i in range(len(weights)):
                    vel_w[i] = mu * vel_w[i] - lr * grad_w[i]
                    vel_b[i] = mu * vel_b[i] - lr * grad_b[i]
                    weights[i] = weights[i] + vel_w[i]
                    biases[i] = biases[i] + vel_b[i]
            loss_curve.append(bce_loss(weights, biases, X, y))
        return cls(spec, d, weights, biases, loss_curve)

    def predict_proba(self, X):
        X = self._check_arity(X)
        logits, _ = _forward_logits(self.weights, self.biases, X)
        return sigmoid(logits)

    def to_state(self):
        return {"weights": [W.tolist() for W in self.weights],
                "biases": [b.tolist() for b in self.biases],
                "loss_curve": list(self.loss_curve)}

    @classmethod
    def from_state(cls, spec, feature_arity, state):
        weights = [np.array(W, dtype=np.float64) for W in state["weights"]]
        biases = [np.array(b, dtype=np.float64) for b in state["biases"]]
        return cls(spec, feature_arity, weights, biases, state["loss_curve"])


def gradient_check(spec, dataset, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    The network is evaluated at a seeded generic point: Glorot weights plus
    small random nonzero biases. Nonzero biases matter because the training
    init (zero biases) can park a ReLU pre-activation exactly on its kink,
    where finite differences are meaningless. Relative error per parameter
    is |analytic - numeric| / max(|analytic| + |numeric|, 1e-8). Values
    below 1e-4 indicate a correct backward pass.
    """
    if spec.kind != "MLP":
        raise ValueError(f"gradient_check applies to MLP specs, got {spec.kind}")
    X = np.asarray(dataset.X, dtype=np.float64)
    y = np.asarray(dataset.y, dtype=np.float64)
    sizes = [X.shape[1], *spec.hyperparameters["hidden_sizes"], 1]
    rng = np.random.default_rng(spec.seed)
    weights, biases = init_parameters(sizes, rng)
    biases = [rng.uniform(-0.3, 0.3, size=b.shape) for b in biases]
    return max_gradient_error(weights, biases, X, y, step)


def max_gradient_error(weights, biases, X, y, step: float = 1e-5) -> float:
    """Finite-difference check of loss_and_gradients at the given parameters."""
    _, grad_w, grad_b = loss_and_gradients(weights, biases, X, y)
    worst = 0.0
    for params, grads in ((weights, grad_w), (biases, grad_b)):
        for tensor, grad in zip(params, grads):
            flat = tensor.reshape(-1)
            gflat = grad.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + step
                up = bce_loss(weights, biases, X, y)
                flat[j] = orig - step
                down = bce_loss(weights, biases, X, y)
                flat[j] = orig
                numeric = (up - down) / (2.0 * step)
                err = abs(gflat[j] - numeric) / max(abs(gflat[j]) + abs(numeric), 1e-8)
                worst = max(worst, err)
    return worst
