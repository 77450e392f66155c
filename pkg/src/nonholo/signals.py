"""Piecewise input signals.

Each input channel is a sequence of pieces that partitions [0, T].  Piece
formulas run on local time tau = t - t0, so a piece can be relocated when
plans are concatenated.  Supported shapes:

- Constant: u = value
- Sinusoid: u = amplitude * cos(omega * tau + phase)
- Polynomial: u = sum_k coeffs[k] * tau^k

Each shape has a closed-form antiderivative, so base trajectories of the
integrator systems (whose base coordinates satisfy dx_i/dt = u_i) are
available exactly, independent of any ODE stepping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .quad import integrate_smooth

__all__ = [
    "Constant",
    "Sinusoid",
    "Polynomial",
    "Piece",
    "InputSignal",
    "constant_signal",
    "zero_signal",
]

_PARTITION_TOL = 1e-12


@dataclass(frozen=True)
class Constant:
    t0: float
    t1: float
    value: float

    def __call__(self, tau):
        return self.value + np.zeros_like(np.asarray(tau, dtype=float))

    def antiderivative(self, tau):
        return self.value * np.asarray(tau, dtype=float)


@dataclass(frozen=True)
class Sinusoid:
    t0: float
    t1: float
    amplitude: float
    omega: float
    phase: float = 0.0

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.amplitude * np.cos(self.omega * tau + self.phase)

    def antiderivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.omega == 0.0:
            return self.amplitude * np.cos(self.phase) * tau
        return (
            self.amplitude
            / self.omega
            * (np.sin(self.omega * tau + self.phase) - np.sin(self.phase))
        )


@dataclass(frozen=True)
class Polynomial:
    t0: float
    t1: float
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        for c in reversed(self.coeffs):
            out = out * tau + c
        return out

    def antiderivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        for k in range(len(self.coeffs) - 1, -1, -1):
            out = out * tau + self.coeffs[k] / (k + 1)
        return out * tau


Piece = Union[Constant, Sinusoid, Polynomial]


@dataclass(frozen=True)
class InputSignal:
    """Per-channel piecewise inputs on [0, duration]."""

    channels: tuple[tuple[Piece, ...], ...]
    duration: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "channels", tuple(tuple(ch) for ch in self.channels)
        )
        if self.duration < 0:
            raise ValueError("duration must be nonnegative")
        for k, ch in enumerate(self.channels):
            if not ch:
                raise ValueError(f"channel {k + 1} has no pieces")
            if abs(ch[0].t0) > _PARTITION_TOL:
                raise ValueError(f"channel {k + 1} does not start at t = 0")
            for piece in ch:
                if piece.t1 <= piece.t0:
                    raise ValueError(f"channel {k + 1} has an empty piece")
            for a, b in zip(ch, ch[1:]):
                if abs(a.t1 - b.t0) > _PARTITION_TOL:
                    raise ValueError(
                        f"channel {k + 1} pieces do not partition [0, T]: "
                        f"gap between t = {a.t1} and t = {b.t0}"
                    )
            if abs(ch[-1].t1 - self.duration) > _PARTITION_TOL:
                raise ValueError(
                    f"channel {k + 1} ends at t = {ch[-1].t1}, expected {self.duration}"
                )

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def _piece_at(self, k: int, t: float) -> Piece:
        ch = self.channels[k]
        for piece in ch:
            if t < piece.t1:
                return piece
        return ch[-1]

    def channel_value(self, k: int, t):
        """u_k(t); accepts a float or an array of times in [0, duration]."""
        ch = self.channels[k]
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            piece = self._piece_at(k, float(t_arr))
            return float(piece(float(t_arr) - piece.t0))
        out = np.empty_like(t_arr)
        for i, piece in enumerate(ch):
            hi = piece.t1 if i < len(ch) - 1 else np.inf
            mask = (t_arr >= piece.t0) & (t_arr < hi) if i > 0 else (t_arr < hi)
            out[mask] = piece(t_arr[mask] - piece.t0)
        return out

    def value(self, t: float) -> tuple[float, ...]:
        """All channel values at a scalar time."""
        return tuple(self.channel_value(k, t) for k in range(self.n_channels))

    def channel_integral(self, k: int, t):
        """Exact running integral of u_k from 0 to t (float or array)."""
        ch = self.channels[k]
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        out = np.zeros_like(t_arr)
        acc = 0.0
        for i, piece in enumerate(ch):
            width = piece.t1 - piece.t0
            hi = piece.t1 if i < len(ch) - 1 else np.inf
            mask = (t_arr >= piece.t0) & (t_arr < hi) if i > 0 else (t_arr < hi)
            if np.any(mask):
                out[mask] = acc + piece.antiderivative(t_arr[mask] - piece.t0)
            acc += float(piece.antiderivative(width))
        return float(out[0]) if scalar else out

    def piece_evaluators(self, k: int) -> list[tuple[float, float, object]]:
        """(t0, t1, f) triples per piece, f mapping local time to the value.

        The closures carry no interval logic, so a caller integrating
        across a discontinuity can take one-sided limits by picking the
        piece itself.
        """
        out: list[tuple[float, float, object]] = []
        for piece in self.channels[k]:
            if isinstance(piece, Constant):
                v = piece.value
                f = lambda tau, v=v: v
            elif isinstance(piece, Sinusoid):
                a, w, ph = piece.amplitude, piece.omega, piece.phase
                f = lambda tau, a=a, w=w, ph=ph: a * math.cos(w * tau + ph)
            else:
                coeffs = piece.coeffs

                def f(tau, coeffs=coeffs):
                    acc = 0.0
                    for c in reversed(coeffs):
                        acc = acc * tau + c
                    return acc

            out.append((piece.t0, piece.t1, f))
        return out

    def scalar_evaluator(self, k: int):
        """A fast ``u_k(t) -> float`` closure for integration hot loops.

        At interior piece boundaries the right-hand piece wins; past the
        final boundary the last piece extends.
        """
        pieces = self.piece_evaluators(k)
        if len(pieces) == 1:
            t00, _, f0 = pieces[0]
            return lambda t: f0(t - t00)
        starts = [p[0] for p in pieces]
        ends = [p[1] for p in pieces]
        funcs = [p[2] for p in pieces]

        def evaluate(t: float) -> float:
            for i in range(len(funcs) - 1):
                if t < ends[i]:
                    return funcs[i](t - starts[i])
            return funcs[-1](t - starts[-1])

        return evaluate

    def energy(self) -> float:
        """The integral of the squared input norm over [0, duration]."""
        total = 0.0
        for k in range(self.n_channels):
            for piece in self.channels[k]:
                total += integrate_smooth(
                    lambda tau, p=piece: np.asarray(p(tau)) ** 2,
                    0.0,
                    piece.t1 - piece.t0,
                    rtol=1e-12,
                )
        return total


def constant_signal(values: Sequence[float], duration: float) -> InputSignal:
    return InputSignal(
        tuple((Constant(0.0, duration, float(v)),) for v in values), duration
    )


def zero_signal(n_channels: int, duration: float) -> InputSignal:
    return constant_signal([0.0] * n_channels, duration)
