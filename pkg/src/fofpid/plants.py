"""Benchmark processes with input dead time, integrated by fixed-step RK4."""

from __future__ import annotations

from collections import deque

import numpy as np

BLOWUP = 1e6


class DelayLine:
    """FIFO of ``round(delay / h)`` samples, initially zero."""

    def __init__(self, delay: float, sample_time: float):
        if delay < 0:
            raise ValueError(f"delay must be non-negative, got {delay!r}")
        self.length = int(round(delay / sample_time))
        self.reset()

    def reset(self) -> None:
        self._buf = deque([0.0] * self.length)

    def push(self, x: float) -> float:
        """Insert ``x`` and return the sample from ``length`` steps ago."""
        if self.length == 0:
            return x
        self._buf.append(x)
        return self._buf.popleft()


class Plant:
    """Base for delayed plants: ``step(u, d)`` advances one sample and returns the new output."""

    variant = ""

    def __init__(self, delay: float, sample_time: float, substeps: int = 1,
                 blowup: float = BLOWUP, initial_state=None):
        if not sample_time > 0:
            raise ValueError(f"sample_time must be positive, got {sample_time!r}")
        if int(substeps) < 1:
            raise ValueError("substeps must be >= 1")
        self.delay = float(delay)
        self.sample_time = float(sample_time)
        self.substeps = int(substeps)
        self.blowup = float(blowup)
        self.initial_state = initial_state
        self.delay_line = DelayLine(self.delay, self.sample_time)
        self.reset()

    def reset(self) -> None:
        n = self.state_dim
        x0 = np.zeros(n) if self.initial_state is None else np.asarray(self.initial_state, dtype=float)
        if x0.shape != (n,):
            raise ValueError(f"initial_state must have {n} entries")
        self.state = [float(v) for v in x0]
        self.time = 0.0
        self.diverged = False
        self.delay_line.reset()

    @property
    def output(self) -> float:
        return self._output(self.state, 0.0)

    def step(self, u: float, d: float = 0.0) -> float:
        ud = self.delay_line.push(u + d)
        h = self.sample_time / self.substeps
        x = self.state
        f = self._deriv
        for _ in range(self.substeps):
            k1 = f(x, ud)
            k2 = f([a + 0.5 * h * b for a, b in zip(x, k1)], ud)
            k3 = f([a + 0.5 * h * b for a, b in zip(x, k2)], ud)
            k4 = f([a + h * b for a, b in zip(x, k3)], ud)
            x = [a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)]
        self.state = x
        self.time += self.sample_time
        y = self._output(x, ud)
        if not all(abs(v) <= self.blowup for v in x) or not abs(y) <= self.blowup:
            self.diverged = True
        return y

    def simulate(self, u, d=None) -> np.ndarray:
        """Open-loop response: ``y[0]`` is the initial output, ``y[k+1]`` follows input ``u[k]``."""
        self.reset()
        u = np.asarray(u, dtype=float)
        d = np.zeros_like(u) if d is None else np.asarray(d, dtype=float)
        y = [self.output]
        for uk, dk in zip(u.tolist(), d.tolist()):
            y.append(self.step(uk, dk))
        return np.array(y)

    def to_dict(self) -> dict:
        raise NotImplementedError


class NonlinearP1(Plant):
    """``y'' + damping*y' + nonlinear*y**2 = u(t - delay)``."""

    variant = "nonlinear_p1"
    state_dim = 2

    def __init__(self, damping=1.0, nonlinear=0.25, delay=0.5, sample_time=0.01, **kwargs):
        self.damping = float(damping)
        self.nonlinear = float(nonlinear)
        super().__init__(delay, sample_time, **kwargs)

    def _deriv(self, x, u):
        y, dy = x
        return [dy, u - self.damping * dy - self.nonlinear * y * y]

    def _output(self, x, u):
        return x[0]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "coefficients": {"damping": self.damping, "nonlinear": self.nonlinear},
            "delay_s": self.delay,
        }


class DelayedLTI(Plant):
    """Rational transfer function ``num(s)/den(s) * exp(-delay*s)`` in controllable canonical form."""

    variant = "delayed_lti"

    def __init__(self, num=(1.0,), den=(1.0, -1.0), delay=0.2, sample_time=0.005, **kwargs):
        num = np.trim_zeros(np.atleast_1d(np.asarray(num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(den, dtype=float)), "f")
        if den.size == 0 or num.size == 0:
            raise ValueError("numerator and denominator must be non-zero")
        if num.size > den.size:
            raise ValueError("denominator degree must be >= numerator degree")
        self.num = tuple(num.tolist())
        self.den = tuple(den.tolist())
        a = den / den[0]
        b = np.concatenate([np.zeros(den.size - num.size), num / den[0]])
        n = den.size - 1
        self.state_dim = n
        # x' = A x + B u with A companion (last row -a[n], ..., -a[1]); y = C x + D u
        self._a = (-a[1:][::-1]).tolist()
        self._D = float(b[0])
        self._C = (b[1:][::-1] - b[0] * a[1:][::-1]).tolist()
        super().__init__(delay, sample_time, **kwargs)

    def _deriv(self, x, u):
        out = x[1:]
        out.append(sum(c * v for c, v in zip(self._a, x)) + u)
        return out

    def _output(self, x, u):
        return sum(c * v for c, v in zip(self._C, x)) + self._D * u

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "coefficients": {"num": list(self.num), "den": list(self.den)},
            "delay_s": self.delay,
        }


def plant_p1(sample_time: float = 0.01, **kwargs) -> NonlinearP1:
    return NonlinearP1(sample_time=sample_time, **kwargs)


def plant_p2(sample_time: float = 0.005, **kwargs) -> DelayedLTI:
    return DelayedLTI(num=(1.0,), den=(1.0, -1.0), delay=0.2, sample_time=sample_time, **kwargs)


def plant_from_dict(doc, sample_time: float) -> Plant:
    """Build a plant from ``{variant, coefficients, delay_s}`` or the shorthands ``"p1"``/``"p2"``."""
    if isinstance(doc, str):
        key = doc.lower()
        if key == "p1":
            return plant_p1(sample_time)
        if key == "p2":
            return plant_p2(sample_time)
        raise ValueError(f"unknown plant {doc!r}")
    variant = doc.get("variant")
    coeffs = dict(doc.get("coefficients", {}))
    extra = {k: doc[k] for k in ("substeps", "blowup") if k in doc}
    if variant == "nonlinear_p1":
        return NonlinearP1(delay=doc.get("delay_s", 0.5), sample_time=sample_time, **coeffs, **extra)
    if variant == "delayed_lti":
        return DelayedLTI(num=coeffs.get("num", (1.0,)), den=coeffs.get("den", (1.0, -1.0)),
                          delay=doc.get("delay_s", 0.2), sample_time=sample_time, **extra)
    raise ValueError(f"plant variant must be 'nonlinear_p1' or 'delayed_lti', got {variant!r}")
