"""Band-limited fractional differ-integrators.

Oustaloup synthesis of ``s**gamma``, splitting of orders in ``(-2, 2)`` into
an exact integer part plus a fractional remainder, bilinear discretization
into a cascade of first-order sections, and a Grünwald-Letnikov reference
used to check the rational realizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_OMEGA_B = 1e-2
DEFAULT_OMEGA_H = 1e2
DEFAULT_N = 2


class DomainError(ValueError):
    """Raised when an argument lies outside an operator's domain."""


@dataclass(frozen=True)
class OustaloupFilter:
    """Zeros, poles and gain of the recursive approximation of ``s**gamma``.

    The transfer function is ``gain * prod((s + zeros[k]) / (s + poles[k]))``.
    """

    gamma: float
    omega_b: float
    omega_h: float
    N: int
    zeros: tuple[float, ...]
    poles: tuple[float, ...]
    gain: float

    @property
    def order(self) -> int:
        return 2 * self.N + 1

    def __call__(self, omega):
        return frequency_response(self, omega)


def synthesize_oustaloup(
    gamma: float,
    omega_b: float = DEFAULT_OMEGA_B,
    omega_h: float = DEFAULT_OMEGA_H,
    N: int = DEFAULT_N,
) -> OustaloupFilter:
    """Build the ``2N+1`` order Oustaloup filter for ``s**gamma`` on ``[omega_b, omega_h]``."""
    if not (omega_b > 0 and omega_h > omega_b):
        raise DomainError(f"need 0 < omega_b < omega_h, got {omega_b!r}, {omega_h!r}")
    if not -1.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (-1, 1), got {gamma!r}")
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    ratio = omega_h / omega_b
    n = 2 * N + 1
    k = np.arange(-N, N + 1, dtype=float)
    zeros = omega_b * ratio ** ((k + N + 0.5 * (1.0 - gamma)) / n)
    poles = omega_b * ratio ** ((k + N + 0.5 * (1.0 + gamma)) / n)
    return OustaloupFilter(
        gamma=float(gamma),
        omega_b=float(omega_b),
        omega_h=float(omega_h),
        N=N,
        zeros=tuple(zeros.tolist()),
        poles=tuple(poles.tolist()),
        gain=float(omega_h**gamma),
    )


def frequency_response(filt: OustaloupFilter, omega):
    """Complex gain ``K * prod((jw + z_k) / (jw + p_k))`` at ``omega`` rad/s."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be positive")
    s = 1j * w[..., None]
    h = filt.gain * np.prod((s + np.asarray(filt.zeros)) / (s + np.asarray(filt.poles)), axis=-1)
    return complex(h) if np.ndim(omega) == 0 else h


class DiscreteFilter:
    """Bilinear discretization of an Oustaloup filter as a cascade of first-order sections.

    Each section ``(s + a)/(s + b)`` becomes ``y = x + d*v``, ``x' = p*x + q*v``;
    sections are chained and the last output is multiplied by the filter gain.
    The equivalent state-space matrices are available from :meth:`state_space`.
    """

    def __init__(self, filt: OustaloupFilter, sample_time: float):
        if not sample_time > 0:
            raise DomainError(f"sample_time must be positive, got {sample_time!r}")
        c = 2.0 / sample_time
        self.source = filt
        self.sample_time = float(sample_time)
        self.gain = filt.gain
        p, q, d = [], [], []
        for a, b in zip(filt.zeros, filt.poles):
            b0 = (c + a) / (c + b)
            b1 = (a - c) / (c + b)
            a1 = (b - c) / (c + b)
            p.append(-a1)
            q.append(b1 - a1 * b0)
            d.append(b0)
        if max(abs(x) for x in p) >= 1.0:
            raise DomainError("discretization produced an unstable realization")
        self._p, self._q, self._d = p, q, d
        self.state = [0.0] * len(p)

    @property
    def dim(self) -> int:
        return len(self._p)

    def reset(self) -> None:
        self.state = [0.0] * len(self._p)

    def step(self, u: float) -> float:
        x = self.state
        v = u
        for i in range(len(x)):
            xi = x[i]
            y = xi + self._d[i] * v
            x[i] = self._p[i] * xi + self._q[i] * v
            v = y
        return self.gain * v

    def state_space(self):
        """Return ``(A, B, C, D)`` of the cascade (``x[k+1] = A x + B u``, ``y = C x + D u``)."""
        n = self.dim
        A = np.zeros((n, n))
        B = np.zeros(n)
        cv = np.zeros(n)
        dv = 1.0
        for i in range(n):
            A[i] = self._q[i] * cv
            A[i, i] += self._p[i]
            B[i] = self._q[i] * dv
            cv = self._d[i] * cv
            cv[i] += 1.0
            dv = self._d[i] * dv
        return A, B, self.gain * cv, self.gain * dv

    def response(self, omega):
        """Discrete frequency response ``H(exp(j w h))``."""
        z = np.exp(1j * np.asarray(omega, dtype=float) * self.sample_time)
        h = np.full(z.shape, self.gain, dtype=complex)
        for p, q, d in zip(self._p, self._q, self._d):
            h *= d + q / (z - p)
        return complex(h) if np.ndim(omega) == 0 else h


def discretize(filt: OustaloupFilter, sample_time: float) -> DiscreteFilter:
    return DiscreteFilter(filt, sample_time)


@dataclass
class FractionalOperator:
    """Stateful differ-integrator of real ``order`` (positive differentiates).

    The order is split as ``integer_part + gamma`` with ``integer_part`` in
    ``{-1, 0, 1}``. The integer part is exact (trapezoidal integral from
    ``t = 0`` or backward difference) and is applied after the fractional
    Oustaloup filter. The backward difference treats the first sample as
    the signal's initial value, so no impulse is produced at ``t = 0``.
    """

    order: float
    integer_part: int
    fractional_filter: OustaloupFilter | None
    sample_time: float | None = None
    _discrete: DiscreteFilter | None = field(default=None, repr=False)
    _prev: float | None = field(default=None, repr=False)
    _acc: float = field(default=0.0, repr=False)

    def initialize(self, sample_time: float) -> "FractionalOperator":
        if not sample_time > 0:
            raise DomainError(f"sample_time must be positive, got {sample_time!r}")
        self.sample_time = float(sample_time)
        self._discrete = (
            None if self.fractional_filter is None else DiscreteFilter(self.fractional_filter, sample_time)
        )
        self.reset()
        return self

    def reset(self) -> None:
        self._prev = None
        self._acc = 0.0
        if self._discrete is not None:
            self._discrete.reset()

    def step(self, x: float) -> float:
        if self._discrete is not None:
            x = self._discrete.step(x)
        ip = self.integer_part
        if ip == 0:
            return x
        prev = self._prev
        self._prev = x
        if prev is None:
            return 0.0
        if ip == 1:
            return (x - prev) / self.sample_time
        self._acc += 0.5 * self.sample_time * (x + prev)
        return self._acc

    def run(self, samples) -> np.ndarray:
        """Reset, then feed ``samples`` through the operator."""
        self.reset()
        return np.array([self.step(float(v)) for v in samples])


def split_order(
    order: float,
    omega_b: float = DEFAULT_OMEGA_B,
    omega_h: float = DEFAULT_OMEGA_H,
    N: int = DEFAULT_N,
    sample_time: float | None = None,
) -> FractionalOperator:
    """Split ``order`` into an exact integer part and an Oustaloup remainder.

    ``integer_part = floor(order)`` clamped to ``{-1, 0, 1}``; for ``order``
    in ``(-2, -1)`` the remainder is the negative ``order + 1``.
    """
    if not -2.0 < order < 2.0:
        raise DomainError(f"order must lie in (-2, 2), got {order!r}")
    ip = max(-1, min(1, math.floor(order)))
    gamma = order - ip
    # orders within rounding of an integer are treated as that integer
    if abs(order - round(order)) < 1e-12 and abs(round(order)) <= 1:
        ip, gamma = int(round(order)), 0.0
    filt = None if gamma == 0.0 else synthesize_oustaloup(gamma, omega_b, omega_h, N)
    op = FractionalOperator(order=float(order), integer_part=ip, fractional_filter=filt)
    if sample_time is not None:
        op.initialize(sample_time)
    return op


def gl_weights(order: float, n: int) -> np.ndarray:
    """Grünwald-Letnikov binomial weights ``(-1)**j * binom(order, j)`` for ``j < n``."""
    w = np.empty(n)
    w[0] = 1.0
    for j in range(1, n):
        w[j] = w[j - 1] * (1.0 - (order + 1.0) / j)
    return w


def gl_oracle(samples, order: float, sample_time: float) -> np.ndarray:
    """Full-history Grünwald-Letnikov differ-integral of uniformly sampled data.

    The signal is taken to be zero before the first sample.
    """
    f = np.asarray(samples, dtype=float)
    if order == 0:
        return f.copy()
    w = gl_weights(order, f.size)
    return np.convolve(w, f)[: f.size] * sample_time ** (-order)
