"""
First-order optimizers acting in place on autodiff parameters.
"""
from typing import Sequence

import numpy as np

from core.base.errors import ParameterError
from train.autodiff import Tensor


class Optimizer:
    def __init__(self, params: Sequence[Tensor], lr: float):
        if not lr > 0.0:
            raise ParameterError(f"learning rate must be > 0, got {lr}")
        self.params = list(params)
        self.lr = lr

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        raise NotImplementedError


class SGD(Optimizer):
    def step(self):
        for p in self.params:
            if p.grad is not None:
                p.data = p.data - self.lr * p.grad


class Adam(Optimizer):
    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        super().__init__(params, lr)
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise ParameterError(f"Adam betas must lie in [0, 1), got {beta1}, {beta2}")
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for k, p in enumerate(self.params):
            if p.grad is None:
                continue
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * p.grad
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * p.grad ** 2
            m_hat = self.m[k] / correction1
            v_hat = self.v[k] / correction2
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
