"""Closed-loop simulation, integral performance indices and tuning objectives."""

from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .controllers import ControllerBlock, make_controller
from .plants import BLOWUP, Plant, plant_from_dict

INDEX_KINDS = ("ITAE", "ITSE", "ISTES", "ISTSE")
PENALTY = 10000.0

# Horizons are not published; 40 s reproduces the tabulated J values for both plants.
DEFAULT_HORIZON = {"p1": 40.0, "p2": 40.0}
DEFAULT_STEP = {"p1": 0.01, "p2": 0.005}


@dataclass
class Scenario:
    """Unit set-point step at ``t = 0`` plus an optional load-disturbance step."""

    horizon: float
    sample_time: float
    setpoint: float = 1.0
    disturbance_amplitude: float = 1.0
    disturbance_time: float | None = None
    blowup: float = BLOWUP

    def __post_init__(self):
        if not 0 < self.sample_time < self.horizon:
            raise ValueError("need 0 < sample_time < horizon")
        if self.disturbance_time is not None and not self.disturbance_time < self.horizon:
            raise ValueError("disturbance_time must precede the horizon")

    @property
    def n_samples(self) -> int:
        return int(round(self.horizon / self.sample_time)) + 1

    def signals(self):
        t = np.arange(self.n_samples) * self.sample_time
        r = np.full(t.size, float(self.setpoint))
        d = np.zeros(t.size)
        if self.disturbance_time is not None:
            d[t >= self.disturbance_time - 1e-9 * self.sample_time] = self.disturbance_amplitude
        return t, r, d

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        names = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in doc.items() if k in names})


def tuning_scenario(plant: str, horizon=None, sample_time=None) -> Scenario:
    """Set-point step only, as used while tuning."""
    key = plant.lower()
    return Scenario(horizon=horizon or DEFAULT_HORIZON[key], sample_time=sample_time or DEFAULT_STEP[key])


def evaluation_scenario(plant: str, horizon=None, sample_time=None) -> Scenario:
    """Set-point step at 0 and a unit load disturbance at half the horizon."""
    sc = tuning_scenario(plant, horizon, sample_time)
    sc.disturbance_time = sc.horizon / 2.0
    return sc


@dataclass
class SimulationTrace:
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    e: np.ndarray
    u: np.ndarray
    diverged: bool = False
    divergence_time: float | None = None

    def __len__(self):
        return len(self.t)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "r", "y", "e", "u"])
            for row in zip(self.t, self.r, self.y, self.e, self.u):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "SimulationTrace":
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        return cls(t=data["t"], r=data["r"], y=data["y"], e=data["e"], u=data["u"])


def run_closed_loop(controller: ControllerBlock, plant: Plant, scenario: Scenario,
                    abort=None) -> SimulationTrace:
    """Simulate the unity-feedback loop; stops early once a signal exceeds the blow-up threshold.

    ``abort(k, e_k, u_k)`` may return True to stop early as well (the trace is then flagged diverged).
    """
    if not math.isclose(controller.sample_time, scenario.sample_time) or not math.isclose(
        plant.sample_time, scenario.sample_time
    ):
        raise ValueError("controller, plant and scenario must share the sample time")
    t, r, d = scenario.signals()
    n = t.size
    y = np.zeros(n)
    e = np.zeros(n)
    u = np.zeros(n)
    controller.reset()
    plant.reset()
    blowup = scenario.blowup
    yk = plant.output
    cstep, pstep = controller.step, plant.step
    rl, dl = r.tolist(), d.tolist()
    last = n
    for k in range(n):
        ek = rl[k] - yk
        uk = cstep(ek)
        y[k], e[k], u[k] = yk, ek, uk
        if not (abs(uk) <= blowup and abs(yk) <= blowup) or (abort is not None and abort(k, ek, uk)):
            last = k + 1
            break
        if k + 1 < n:
            yk = pstep(uk, dl[k])
    diverged = last < n
    return SimulationTrace(
        t=t[:last], r=r[:last], y=y[:last], e=e[:last], u=u[:last],
        diverged=diverged, divergence_time=float(t[last - 1]) if diverged else None,
    )


@dataclass
class PerformanceReport:
    ITAE: float
    ITSE: float
    ISTES: float
    ISTSE: float
    ISCO: float
    IAE: float
    ISE: float
    overshoot_pct: float
    settling_time: float

    def objective(self, spec: "ObjectiveSpec") -> float:
        return spec.w1 * getattr(self, spec.index) + spec.w2 * self.ISCO

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def _trapz(f, t) -> float:
    return float(np.trapezoid(f, t))


def compute_indices(trace: SimulationTrace, settle_band: float = 0.02,
                    step_window: float | None = None) -> PerformanceReport:
    """Trapezoidal integrals of the error/control measures over the trace.

    Overshoot and settling time describe the set-point response; pass the
    disturbance onset as ``step_window`` to exclude the load response.
    """
    if trace.diverged:
        raise ValueError("indices are undefined for a diverged trace")
    t, e, u, y = trace.t, trace.e, trace.u, trace.y
    e2 = e * e
    target = float(trace.r[-1])
    if target != 0.0:
        n = t.size if step_window is None else max(1, int(np.searchsorted(t, step_window)))
        ys, ts = y[:n], t[:n]
        overshoot = max(0.0, (float(ys.max()) - target) / abs(target) * 100.0)
        outside = np.nonzero(np.abs(ys - target) > settle_band * abs(target))[0]
        settling = 0.0 if outside.size == 0 else float(ts[min(outside[-1] + 1, ts.size - 1)])
    else:
        overshoot = settling = 0.0
    return PerformanceReport(
        ITAE=_trapz(t * np.abs(e), t),
        ITSE=_trapz(t * e2, t),
        ISTES=_trapz((t * t * e) ** 2, t),
        ISTSE=_trapz(t * t * e2, t),
        ISCO=_trapz(u * u, t),
        IAE=_trapz(np.abs(e), t),
        ISE=_trapz(e2, t),
        overshoot_pct=overshoot,
        settling_time=settling,
    )


@dataclass(frozen=True)
class ObjectiveSpec:
    """``J = w1 * index + w2 * ISCO``; unstable runs score ``penalty``."""

    index: str = "ITAE"
    w1: float = 1.0
    w2: float = 1.0
    penalty: float = PENALTY

    def __post_init__(self):
        if self.index not in INDEX_KINDS:
            raise ValueError(f"index must be one of {INDEX_KINDS}, got {self.index!r}")
        if self.w1 < 0 or self.w2 < 0 or (self.w1 == 0 and self.w2 == 0):
            raise ValueError("weights must be non-negative and not both zero")
        if not self.penalty > 0:
            raise ValueError("penalty must be positive")


def _integrand(index: str):
    return {
        "ITAE": lambda t, e: t * abs(e),
        "ITSE": lambda t, e: t * e * e,
        "ISTES": lambda t, e: (t * t * e) ** 2,
        "ISTSE": lambda t, e: t * t * e * e,
    }[index]


def evaluate_objective(raw_params, kind: str, plant, objective: ObjectiveSpec,
                       scenario: Scenario, bounds=None) -> float:
    """Closed-loop cost of a parameter vector; ``objective.penalty`` if the loop is unstable.

    A run is unstable when a signal crosses the scenario blow-up threshold or
    the running cost exceeds the penalty; either way the simulation stops there.
    """
    if not isinstance(raw_params, dict):
        from .controllers import decode_parameter_vector

        raw_params = decode_parameter_vector(kind, raw_params, bounds)
    controller = make_controller(kind, raw_params, scenario.sample_time)
    plant = plant_from_dict(plant, scenario.sample_time) if not isinstance(plant, Plant) else copy.deepcopy(plant)
    f = _integrand(objective.index)
    w1, w2, h, limit = objective.w1, objective.w2, scenario.sample_time, objective.penalty
    running = [0.0]

    def abort(k, ek, uk):
        # left-endpoint running sum is a cheap upper bound check on the cost
        running[0] += (w1 * f(k * h, ek) + w2 * uk * uk) * h
        return not math.isfinite(running[0]) or running[0] > 2.0 * limit

    trace = run_closed_loop(controller, plant, scenario, abort=abort)
    if trace.diverged:
        return float(objective.penalty)
    J = compute_indices(trace).objective(objective)
    if not math.isfinite(J) or J >= objective.penalty:
        return float(objective.penalty)
    return float(J)


@dataclass
class ClosedLoopObjective:
    """Picklable ``genes -> J`` callable for the tuner."""

    kind: str
    plant: object
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    scenario: Scenario | None = None
    bounds: list | None = None

    def __post_init__(self):
        if self.scenario is None:
            if not isinstance(self.plant, str):
                raise ValueError("scenario required for a custom plant")
            self.scenario = tuning_scenario(self.plant)
        if self.bounds is None:
            from .controllers import default_bounds

            self.bounds = default_bounds(self.kind)

    def __call__(self, genes) -> float:
        return evaluate_objective(genes, self.kind, self.plant, self.objective, self.scenario, self.bounds)
