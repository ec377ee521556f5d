"""Layers with explicit forward/backward passes over float64 numpy arrays.

Each layer caches what its backward pass needs; backward accumulates into
``Param.grad`` and returns the gradient with respect to its input. Gate
derivations follow the standard LSTM cell equations; padded timesteps
(mask 0) carry hidden and cell state through unchanged in both directions.
"""

from __future__ import annotations

import numpy as np


class Param:
    """A named trainable tensor and its gradient accumulator."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    def __init__(self, rng: np.random.Generator, n_in: int, n_out: int, name: str):
        self.w = Param(f"{name}.w", _glorot(rng, n_in, n_out, (n_in, n_out)))
        self.b = Param(f"{name}.b", np.zeros(n_out))
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.w.value + self.b.value

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        self.w.grad += self._x.T @ d_out
        self.b.grad += d_out.sum(axis=0)
        return d_out @ self.w.value.T

    def params(self) -> list[Param]:
        return [self.w, self.b]


class ReLU:
    def __init__(self):
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        return d_out * self._mask

    def params(self) -> list[Param]:
        return []


class Dropout:
    """Inverted dropout: active only in train mode, scales kept units by
    1/(1-rate) so eval-mode activations equal the training expectation."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray, train_mode: bool, rng: np.random.Generator) -> np.ndarray:
        if not train_mode or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return d_out
        return d_out * self._mask

    def params(self) -> list[Param]:
        return []


class Embedding:
    """Token-id lookup into a trainable matrix; padding id 0 stays frozen at
    zero because masked timesteps never receive gradient."""

    def __init__(self, matrix: np.ndarray, name: str):
        self.table = Param(f"{name}.embedding", matrix)
        self._ids: np.ndarray | None = None

    def forward(self, ids: np.ndarray) -> np.ndarray:
        self._ids = ids
        return self.table.value[ids]

    def backward(self, d_out: np.ndarray) -> None:
        np.add.at(self.table.grad, self._ids, d_out)

    def params(self) -> list[Param]:
        return [self.table]


class LSTM:
    """Single-direction LSTM returning the final hidden state.

    Weights: ``w`` (input, 4 units), ``u`` (units, 4 units), ``b`` (4 units),
    gate blocks ordered input, forget, candidate, output.
    """

    def __init__(self, rng: np.random.Generator, n_in: int, units: int, name: str):
        self.units = units
        self.w = Param(f"{name}.w", _glorot(rng, n_in, units, (n_in, 4 * units)))
        self.u = Param(f"{name}.u", _glorot(rng, units, units, (units, 4 * units)))
        self.b = Param(f"{name}.b", np.zeros(4 * units))
        self._cache: dict | None = None

    def forward(self, x: np.ndarray, mask: np.ndarray) -> np.ndarray:
        batch, steps, _ = x.shape
        u = self.units
        h = np.zeros((batch, u))
        c = np.zeros((batch, u))
        gates, tanh_cs, h_prevs, c_prevs = [], [], [], []
        for t in range(steps):
            h_prevs.append(h)
            c_prevs.append(c)
            z = x[:, t] @ self.w.value + h @ self.u.value + self.b.value
            i = sigmoid(z[:, :u])
            f = sigmoid(z[:, u : 2 * u])
            g = np.tanh(z[:, 2 * u : 3 * u])
            o = sigmoid(z[:, 3 * u :])
            c_cand = f * c + i * g
            tanh_c = np.tanh(c_cand)
            h_cand = o * tanh_c
            m = mask[:, t : t + 1]
            c = m * c_cand + (1.0 - m) * c
            h = m * h_cand + (1.0 - m) * h
            gates.append((i, f, g, o))
            tanh_cs.append(tanh_c)
        self._cache = {
            "x": x,
            "mask": mask,
            "gates": gates,
            "tanh_cs": tanh_cs,
            "h_prevs": h_prevs,
            "c_prevs": c_prevs,
        }
        return h

    def backward(self, d_h: np.ndarray) -> np.ndarray:
        cache = self._cache
        x, mask = cache["x"], cache["mask"]
        batch, steps, _ = x.shape
        u = self.units
        d_x = np.zeros_like(x)
        d_h = d_h.copy()
        d_c = np.zeros((batch, u))
        for t in range(steps - 1, -1, -1):
            i, f, g, o = cache["gates"][t]
            tanh_c = cache["tanh_cs"][t]
            h_prev, c_prev = cache["h_prevs"][t], cache["c_prevs"][t]
            m = mask[:, t : t + 1]

            d_h_cand = m * d_h
            d_h_carry = (1.0 - m) * d_h
            d_c_cand = m * d_c + d_h_cand * o * (1.0 - tanh_c**2)
            d_c_carry = (1.0 - m) * d_c

            d_o = d_h_cand * tanh_c
            d_f = d_c_cand * c_prev
            d_i = d_c_cand * g
            d_g = d_c_cand * i

            d_z = np.concatenate(
                [
                    d_i * i * (1.0 - i),
                    d_f * f * (1.0 - f),
                    d_g * (1.0 - g**2),
                    d_o * o * (1.0 - o),
                ],
                axis=1,
            )
            self.w.grad += x[:, t].T @ d_z
            self.u.grad += h_prev.T @ d_z
            self.b.grad += d_z.sum(axis=0)
            d_x[:, t] = d_z @ self.w.value.T
            d_h = d_z @ self.u.value.T + d_h_carry
            d_c = d_c_cand * f + d_c_carry
        return d_x

    def params(self) -> list[Param]:
        return [self.w, self.u, self.b]


class BiLSTM:
    """Bidirectional wrapper: output is the concatenation of the two
    directions' final hidden states (2 x units)."""

    def __init__(self, rng: np.random.Generator, n_in: int, units: int, name: str):
        self.units = units
        self.fwd = LSTM(rng, n_in, units, f"{name}.fwd")
        self.bwd = LSTM(rng, n_in, units, f"{name}.bwd")

    def forward(self, x: np.ndarray, mask: np.ndarray) -> np.ndarray:
        h_f = self.fwd.forward(x, mask)
        h_b = self.bwd.forward(x[:, ::-1], mask[:, ::-1])
        return np.concatenate([h_f, h_b], axis=1)

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        u = self.units
        d_x = self.fwd.backward(d_out[:, :u])
        d_x_rev = self.bwd.backward(d_out[:, u:])
        return d_x + d_x_rev[:, ::-1]

    def params(self) -> list[Param]:
        return self.fwd.params() + self.bwd.params()


__all__ = ["BiLSTM", "Dense", "Dropout", "Embedding", "LSTM", "Param", "ReLU", "sigmoid"]
