"""Adam optimizer over named parameters."""

from __future__ import annotations

import numpy as np

from recaudit.netlab.layers import Param


class Adam:
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr < 0:
            raise ValueError("learning rate must be >= 0")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: list[Param]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p in params:
            m = self._m.setdefault(p.name, np.zeros_like(p.value))
            v = self._v.setdefault(p.name, np.zeros_like(p.value))
            m[...] = b1 * m + (1.0 - b1) * p.grad
            v[...] = b2 * v + (1.0 - b2) * p.grad**2
            m_hat = m / (1.0 - b1**self.t)
            v_hat = v / (1.0 - b2**self.t)
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


__all__ = ["Adam"]
