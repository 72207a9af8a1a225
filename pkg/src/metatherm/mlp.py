"""Small fully-connected network mapping Hamiltonian parameters to circuit angles.

Hidden layers use the logistic sigmoid, the output layer is linear.  The
network is deliberately tiny, so forward and backward passes are plain matrix
products and the whole parameter set flattens to one vector for the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class Mlp:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]  # per layer, shape [out, in]
    biases: list[np.ndarray]  # per layer, shape [out]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def forward(self, h: np.ndarray) -> np.ndarray:
        """Map inputs [p] or [p, m] to outputs [out] or [out, m]."""
        out, _ = self.forward_cached(h)
        return out

    def forward_cached(self, h: np.ndarray):
        """Forward pass keeping per-layer activations for backprop."""
        h = np.asarray(h, dtype=float)
        squeeze = h.ndim == 1
        x = h[:, None] if squeeze else h
        if x.shape[0] != self.layer_sizes[0]:
            raise ShapeMismatch(
                f"input width {x.shape[0]}, network expects {self.layer_sizes[0]}"
            )
        acts = [x]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = w @ x + b[:, None]
            x = z if i == last else _sigmoid(z)
            acts.append(x)
        return (x[:, 0] if squeeze else x), acts

    def backprop(self, acts: list[np.ndarray], upstream: np.ndarray) -> np.ndarray:
        """Flat parameter gradient for d(loss)/d(output) = upstream.

        upstream has the output shape of the cached forward pass ([out, m]);
        batch contributions are summed.
        """
        delta = upstream if upstream.ndim == 2 else upstream[:, None]
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = delta @ acts[i].T
            grads_b[i] = delta.sum(axis=1)
            if i > 0:
                a = acts[i]  # sigmoid output feeding layer i
                delta = (self.weights[i].T @ delta) * a * (1.0 - a)
        return np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(grads_w, grads_b)]
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)]
        )

    def from_vector(self, vec: np.ndarray) -> "Mlp":
        if vec.shape != (self.n_params,):
            raise ShapeMismatch(f"vector {vec.shape} for {self.n_params} parameters")
        weights, biases = [], []
        k = 0
        for w, b in zip(self.weights, self.biases):
            weights.append(vec[k : k + w.size].reshape(w.shape).copy())
            k += w.size
            biases.append(vec[k : k + b.size].copy())
            k += b.size
        return Mlp(layer_sizes=self.layer_sizes, weights=weights, biases=biases)

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @staticmethod
    def from_dict(d: dict) -> "Mlp":
        sizes = tuple(int(s) for s in d["layer_sizes"])
        weights = [np.asarray(w, dtype=float) for w in d["weights"]]
        biases = [np.asarray(b, dtype=float) for b in d["biases"]]
        net = Mlp(layer_sizes=sizes, weights=weights, biases=biases)
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise ShapeMismatch(f"layer {i} arrays do not chain with {sizes}")
        return net


def init_mlp(layer_sizes, rng: np.random.Generator) -> Mlp:
    """Weights uniform in +-1/sqrt(fan_in), biases zero."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ShapeMismatch(f"bad layer sizes {sizes}")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(layer_sizes=sizes, weights=weights, biases=biases)
