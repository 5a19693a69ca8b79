"""Layers: linear, dropout, and a bidirectional gated recurrent layer.

The recurrent cell is a standard GRU (reset/update gates plus candidate
state); the bidirectional layer runs one cell over the frame axis in each
direction with zero initial state and concatenates the per-frame states, so
its output width is twice the hidden width.

Parameters initialize uniformly in +-1/sqrt(fan_in) with zero biases.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor import DEFAULT_DTYPE, KernelError, Tensor, add, concat, dropout
from .tensor import matmul, mul, sigmoid, sub, tanh, transpose, zeros

CELL_TYPE = "gru"


def uniform_init(
    rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype=DEFAULT_DTYPE
) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class LinearLayer:
    """Affine map ``y = x @ W.T + b`` with weight stored as (out, in)."""

    def __init__(
        self,
        input_dim: int,
        output_dim: int,
        rng: np.random.Generator,
        name: str = "linear",
        dtype=DEFAULT_DTYPE,
    ) -> None:
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.weight = Tensor(
            uniform_init(rng, (output_dim, input_dim), input_dim, dtype),
            requires_grad=True,
            name=f"{name}.weight",
        )
        self.bias = Tensor(
            np.zeros(output_dim, dtype=dtype), requires_grad=True, name=f"{name}.bias"
        )

    def forward(self, x: Tensor) -> Tensor:
        if x.data.shape[1] != self.input_dim:
            raise KernelError(
                f"linear layer expects width {self.input_dim}, got {x.data.shape}"
            )
        return add(matmul(x, transpose(self.weight)), self.bias)

    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]


class Dropout:
    """Inverted dropout; identity when not training."""

    def __init__(self, rate: float) -> None:
        if not 0.0 <= rate < 1.0:
            raise KernelError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x: Tensor, rng: np.random.Generator | None, training: bool) -> Tensor:
        if not training or self.rate == 0.0:
            return x
        if rng is None:
            raise KernelError("training-mode dropout needs a random generator")
        return dropout(x, self.rate, rng)


class _GruDirection:
    """One direction of the recurrent layer: separate weights per gate."""

    GATES = ("reset", "update", "candidate")

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        name: str,
        dtype=DEFAULT_DTYPE,
    ) -> None:
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.w: dict[str, Tensor] = {}
        self.u: dict[str, Tensor] = {}
        self.b: dict[str, Tensor] = {}
        for gate in self.GATES:
            self.w[gate] = Tensor(
                uniform_init(rng, (input_dim, hidden_dim), input_dim, dtype),
                requires_grad=True,
                name=f"{name}.w_{gate}",
            )
            self.u[gate] = Tensor(
                uniform_init(rng, (hidden_dim, hidden_dim), hidden_dim, dtype),
                requires_grad=True,
                name=f"{name}.u_{gate}",
            )
            self.b[gate] = Tensor(
                np.zeros(hidden_dim, dtype=dtype),
                requires_grad=True,
                name=f"{name}.b_{gate}",
            )

    def step(self, x: Tensor, h: Tensor) -> Tensor:
        r = sigmoid(add(add(matmul(x, self.w["reset"]), matmul(h, self.u["reset"])), self.b["reset"]))
        z = sigmoid(add(add(matmul(x, self.w["update"]), matmul(h, self.u["update"])), self.b["update"]))
        n = tanh(
            add(
                add(matmul(x, self.w["candidate"]), mul(r, matmul(h, self.u["candidate"]))),
                self.b["candidate"],
            )
        )
        # h' = (1 - z) * n + z * h, written as n + z * (h - n)
        return add(n, mul(z, sub(h, n)))

    def run(self, inputs: Sequence[Tensor], reverse: bool) -> list[Tensor]:
        batch = inputs[0].data.shape[0]
        h = zeros((batch, self.hidden_dim), dtype=inputs[0].data.dtype)
        order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
        states: dict[int, Tensor] = {}
        for t in order:
            h = self.step(inputs[t], h)
            states[t] = h
        return [states[t] for t in range(len(inputs))]

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for gate in self.GATES:
            params.extend((self.w[gate], self.u[gate], self.b[gate]))
        return params


class RecurrentLayer:
    """Bidirectional gated recurrent layer over a frame sequence.

    ``forward`` takes the sequence as a list of (batch, input_dim) tensors and
    returns per-frame (batch, 2 * hidden_dim) tensors: forward-direction state
    concatenated with backward-direction state.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        name: str = "recurrent",
        dtype=DEFAULT_DTYPE,
    ) -> None:
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.fwd = _GruDirection(input_dim, hidden_dim, rng, f"{name}.fwd", dtype)
        self.bwd = _GruDirection(input_dim, hidden_dim, rng, f"{name}.bwd", dtype)

    @property
    def output_dim(self) -> int:
        return 2 * self.hidden_dim

    def forward(self, inputs: Sequence[Tensor]) -> list[Tensor]:
        if not inputs:
            raise KernelError("recurrent layer needs at least one frame")
        for x in inputs:
            if x.data.ndim != 2 or x.data.shape[1] != self.input_dim:
                raise KernelError(
                    f"recurrent layer expects (batch, {self.input_dim}) frames, "
                    f"got {x.data.shape}"
                )
        forward_states = self.fwd.run(inputs, reverse=False)
        backward_states = self.bwd.run(inputs, reverse=True)
        return [
            concat([f, b], axis=1) for f, b in zip(forward_states, backward_states)
        ]

    def parameters(self) -> list[Tensor]:
        return self.fwd.parameters() + self.bwd.parameters()
