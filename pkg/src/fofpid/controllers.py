"""PID, FOPID, fuzzy PID and fuzzy FOPID controllers as discrete-time blocks.

Every controller maps a stream of error samples to control samples. They
follow the scikit-learn estimator conventions: constructor arguments are
the hyper-parameters (``get_params``/``set_params``/``clone`` work),
``fit`` builds the internal operators and ``transform`` runs a whole error
sequence from a zeroed state.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .fracops import DEFAULT_N, DEFAULT_OMEGA_B, DEFAULT_OMEGA_H, split_order
from .fuzzy import FuzzyEngine, build_standard_engine

KINDS = ("pid", "fopid", "fuzzy_pid", "fuzzy_fopid")

PARAM_NAMES = {
    "pid": ("Kp", "Ki", "Kd"),
    "fopid": ("Kp", "Ki", "Kd", "lam", "mu"),
    "fuzzy_pid": ("Ke", "Kd_sf", "alpha", "beta"),
    "fuzzy_fopid": ("Ke", "Kd_sf", "alpha", "beta", "lam", "mu"),
}

GAIN_BOUNDS = (0.0, 100.0)
LAMBDA_BOUNDS = (1e-3, 1.999)
MU_BOUNDS = (0.0, 1.999)

_BOUND_OF = {"lam": LAMBDA_BOUNDS, "mu": MU_BOUNDS}


# Gains are seeded in a unit box (the usual GA toolbox initial range); the
# search itself may still move them anywhere in GAIN_BOUNDS.
GAIN_INIT = (0.0, 1.0)


def default_bounds(kind: str) -> list[tuple[float, float]]:
    """Per-gene search interval in :func:`decode_parameter_vector` order."""
    return [_BOUND_OF.get(name, GAIN_BOUNDS) for name in _names(kind)]


def default_init_bounds(kind: str) -> list[tuple[float, float]]:
    """Per-gene interval for the GA's initial population."""
    return [_BOUND_OF.get(name, GAIN_INIT) for name in _names(kind)]


@dataclass(frozen=True)
class FopidParams:
    Kp: float
    Ki: float
    Kd: float
    lam: float = 1.0
    mu: float = 1.0


@dataclass(frozen=True)
class FuzzyFopidParams:
    Ke: float
    Kd_sf: float
    alpha: float
    beta: float
    lam: float = 1.0
    mu: float = 1.0


def _names(kind: str) -> tuple[str, ...]:
    try:
        return PARAM_NAMES[kind]
    except KeyError:
        raise ValueError(f"unknown controller kind {kind!r}; expected one of {KINDS}") from None


def decode_parameter_vector(kind: str, raw, bounds=None):
    """Map a flat gene vector onto the parameter record for ``kind``.

    Layouts: pid ``[Kp, Ki, Kd]``; fopid ``[Kp, Ki, Kd, lam, mu]``;
    fuzzy_pid ``[Ke, Kd, alpha, beta]``; fuzzy_fopid ``[Ke, Kd, alpha, beta, lam, mu]``.
    """
    names = _names(kind)
    values = [float(v) for v in np.ravel(raw)]
    if len(values) != len(names):
        raise ValueError(f"{kind} expects {len(names)} parameters, got {len(values)}")
    bounds = default_bounds(kind) if bounds is None else bounds
    for name, v, (lo, hi) in zip(names, values, bounds):
        if not (np.isfinite(v) and lo <= v <= hi):
            raise ValueError(f"parameter {name}={v!r} outside [{lo}, {hi}]")
    fields = dict(zip(names, values))
    if kind in ("pid", "fopid"):
        return FopidParams(**fields)
    return FuzzyFopidParams(**fields)


class ControllerBlock(BaseEstimator, TransformerMixin):
    """Common stepping and serialization logic; subclasses define ``_build`` and ``step``."""

    kind: str = ""

    def fit(self, X=None, y=None):
        if not self.sample_time > 0:
            raise ValueError(f"sample_time must be positive, got {self.sample_time!r}")
        self._build()
        self.is_fitted_ = True
        return self

    def reset(self) -> None:
        for op in self._operators():
            op.reset()

    def transform(self, X) -> np.ndarray:
        """Control sequence for the error sequence ``X`` starting from rest."""
        check_is_fitted(self, "is_fitted_")
        errors = np.asarray(X, dtype=float).ravel()
        self.reset()
        step = self.step
        return np.array([step(e) for e in errors.tolist()])

    @property
    def params(self):
        names = PARAM_NAMES[self.kind]
        p = self.get_params()
        fields = {n: float(p[n]) for n in names}
        return FopidParams(**fields) if self.kind in ("pid", "fopid") else FuzzyFopidParams(**fields)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": {n: float(getattr(self, n)) for n in PARAM_NAMES[self.kind]},
            "sample_time": float(self.sample_time),
        }

    def _order(self, order: float):
        return split_order(order, self.omega_b, self.omega_h, self.N, sample_time=self.sample_time)


class PIDController(ControllerBlock):
    """Parallel PID: ``Kp*e + Ki*integral(e) + Kd*de/dt``."""

    kind = "pid"

    def __init__(self, Kp=1.0, Ki=0.0, Kd=0.0, sample_time=0.01):
        self.Kp = Kp
        self.Ki = Ki
        self.Kd = Kd
        self.sample_time = sample_time

    omega_b, omega_h, N = DEFAULT_OMEGA_B, DEFAULT_OMEGA_H, DEFAULT_N
    lam = mu = 1.0

    def _build(self):
        self._I = self._order(-self.lam)
        self._D = self._order(self.mu)

    def _operators(self):
        return (self._I, self._D)

    def step(self, e: float) -> float:
        return self.Kp * e + self.Ki * self._I.step(e) + self.Kd * self._D.step(e)


class FOPIDController(PIDController):
    """``Kp + Ki / s**lam + Kd * s**mu`` with band-limited fractional parts."""

    kind = "fopid"

    def __init__(self, Kp=1.0, Ki=0.0, Kd=0.0, lam=1.0, mu=1.0, sample_time=0.01,
                 omega_b=DEFAULT_OMEGA_B, omega_h=DEFAULT_OMEGA_H, N=DEFAULT_N):
        self.Kp = Kp
        self.Ki = Ki
        self.Kd = Kd
        self.lam = lam
        self.mu = mu
        self.sample_time = sample_time
        self.omega_b = omega_b
        self.omega_h = omega_h
        self.N = N


class FuzzyPIDController(ControllerBlock):
    """Fuzzy PID: FLC on scaled error and error rate, output ``alpha*u + beta*integral(u)``."""

    kind = "fuzzy_pid"

    def __init__(self, Ke=1.0, Kd_sf=1.0, alpha=1.0, beta=0.0, sample_time=0.01, engine=None):
        self.Ke = Ke
        self.Kd_sf = Kd_sf
        self.alpha = alpha
        self.beta = beta
        self.sample_time = sample_time
        self.engine = engine

    omega_b, omega_h, N = DEFAULT_OMEGA_B, DEFAULT_OMEGA_H, DEFAULT_N
    lam = mu = 1.0

    def _build(self):
        self.engine_ = self.engine if self.engine is not None else _standard_engine()
        self._evaluate = self.engine_.evaluate
        self._D = self._order(self.mu)
        self._I = self._order(-self.lam)

    def _operators(self):
        return (self._I, self._D)

    def flc_output(self, e: float) -> float:
        """Advance the rate operator and return the defuzzified FLC output ``u_flc``."""
        v = self._D.step(e)
        x1 = self.Ke * e
        x2 = self.Kd_sf * v
        x1 = -1.0 if x1 < -1.0 else (1.0 if x1 > 1.0 else x1)
        x2 = -1.0 if x2 < -1.0 else (1.0 if x2 > 1.0 else x2)
        return self._evaluate(x1, x2)

    def step(self, e: float) -> float:
        u = self.flc_output(e)
        return self.alpha * u + self.beta * self._I.step(u)


class FuzzyFOPIDController(FuzzyPIDController):
    """Fuzzy PID with a fractional rate ``D**mu`` at the input and ``I**lam`` at the output."""

    kind = "fuzzy_fopid"

    def __init__(self, Ke=1.0, Kd_sf=1.0, alpha=1.0, beta=0.0, lam=1.0, mu=1.0,
                 sample_time=0.01, engine=None,
                 omega_b=DEFAULT_OMEGA_B, omega_h=DEFAULT_OMEGA_H, N=DEFAULT_N):
        self.Ke = Ke
        self.Kd_sf = Kd_sf
        self.alpha = alpha
        self.beta = beta
        self.lam = lam
        self.mu = mu
        self.sample_time = sample_time
        self.engine = engine
        self.omega_b = omega_b
        self.omega_h = omega_h
        self.N = N


_ENGINE = None


def _standard_engine() -> FuzzyEngine:
    # the engine is immutable after construction, so one instance is shared
    global _ENGINE
    if _ENGINE is None:
        _ENGINE = build_standard_engine()
    return _ENGINE


CONTROLLER_CLASSES = {
    "pid": PIDController,
    "fopid": FOPIDController,
    "fuzzy_pid": FuzzyPIDController,
    "fuzzy_fopid": FuzzyFOPIDController,
}


def make_controller(kind: str, params, sample_time: float, **options) -> ControllerBlock:
    """Build and fit a controller from a params record, a mapping or a raw gene vector."""
    names = _names(kind)
    if isinstance(params, (FopidParams, FuzzyFopidParams)):
        fields = {n: getattr(params, n) for n in names}
    elif isinstance(params, dict):
        missing = [n for n in names if n not in params]
        if missing:
            raise ValueError(f"{kind} parameters missing {missing}")
        fields = {n: float(params[n]) for n in names}
    else:
        fields = asdict(decode_parameter_vector(kind, params))
        fields = {n: fields[n] for n in names}
    return CONTROLLER_CLASSES[kind](sample_time=sample_time, **fields, **options).fit()


def controller_from_dict(doc: dict, sample_time: float | None = None) -> ControllerBlock:
    """Inverse of :meth:`ControllerBlock.to_dict`."""
    if "kind" not in doc:
        raise ValueError("controller document needs a 'kind' field")
    h = sample_time if sample_time is not None else doc.get("sample_time")
    if h is None:
        raise ValueError("controller document needs a 'sample_time' field")
    return make_controller(doc["kind"], doc.get("params", {}), float(h))
