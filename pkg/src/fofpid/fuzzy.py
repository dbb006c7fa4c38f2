"""Mamdani fuzzy inference over two inputs with centroid defuzzification."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

LABELS = ("NL", "NM", "NS", "ZR", "PS", "PM", "PL")

# Rows: fractional rate of error, PL (top) down to NL.
# Columns: error, NL .. PL.
STANDARD_RULES = (
    ("ZR", "PS", "PM", "PL", "PL", "PL", "PL"),
    ("NS", "ZR", "PS", "PM", "PL", "PL", "PL"),
    ("NM", "NS", "ZR", "PS", "PM", "PL", "PL"),
    ("NL", "NM", "NS", "ZR", "PS", "PM", "PL"),
    ("NL", "NL", "NM", "NS", "ZR", "PS", "PM"),
    ("NL", "NL", "NL", "NM", "NS", "ZR", "PS"),
    ("NL", "NL", "NL", "NL", "NM", "NS", "ZR"),
)

STANDARD_CENTERS = tuple(k / 3.0 for k in range(-3, 4))


def negate(label: str) -> str:
    return LABELS[len(LABELS) - 1 - LABELS.index(label)]


@dataclass(frozen=True)
class TriangularMF:
    left: float
    center: float
    right: float

    def __post_init__(self):
        if not self.left <= self.center <= self.right:
            raise ValueError(f"need left <= center <= right, got {self}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        up = (x - self.left) / (self.center - self.left) if self.center > self.left else np.zeros_like(x)
        down = (self.right - x) / (self.right - self.center) if self.right > self.center else np.zeros_like(x)
        mu = np.where(x <= self.center, up, down)
        mu = np.where(x == self.center, 1.0, mu)
        return np.clip(mu, 0.0, 1.0)

    def scalar(self, x: float) -> float:
        if x == self.center:
            return 1.0
        if x < self.center:
            if x <= self.left:
                return 0.0
            return (x - self.left) / (self.center - self.left)
        if x >= self.right:
            return 0.0
        return (self.right - x) / (self.right - self.center)


class LinguisticPartition:
    """Ordered triangular fuzzy sets on ``[-1, 1]``, feet at neighbouring centers."""

    def __init__(self, centers=STANDARD_CENTERS, labels=LABELS):
        centers = [float(c) for c in centers]
        if len(centers) != len(labels):
            raise ValueError("one center per label required")
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError("centers must be strictly increasing")
        self.labels = tuple(labels)
        self.centers = tuple(centers)
        self.mfs = tuple(
            TriangularMF(
                centers[max(i - 1, 0)] if i > 0 else centers[0],
                c,
                centers[i + 1] if i + 1 < len(centers) else centers[-1],
            )
            for i, c in enumerate(centers)
        )

    def __len__(self):
        return len(self.mfs)

    def fuzzify(self, x: float) -> list[float]:
        return [mf.scalar(x) for mf in self.mfs]


def fuzzify(partition: LinguisticPartition, x: float) -> np.ndarray:
    """Membership degree of ``x`` in every label of ``partition``."""
    return np.array(partition.fuzzify(float(x)))


class RuleBase:
    """7x7 table of output labels; row = rate label (top row PL), column = error label."""

    def __init__(self, table=STANDARD_RULES, labels=LABELS):
        table = [tuple(row) for row in table]
        n = len(labels)
        if len(table) != n or any(len(row) != n for row in table):
            raise ValueError(f"rule table must be {n}x{n}")
        for row in table:
            for entry in row:
                if entry not in labels:
                    raise ValueError(f"unknown label {entry!r} in rule table")
        self.labels = tuple(labels)
        self.table = tuple(table)
        # index[rate_idx][err_idx] -> output label index, all indices in NL..PL order
        self.index = [
            [labels.index(table[n - 1 - r][c]) for c in range(n)] for r in range(n)
        ]

    def rule(self, rate: str, error: str) -> str:
        n = len(self.labels)
        return self.table[n - 1 - self.labels.index(rate)][self.labels.index(error)]


class FuzzyEngine(BaseEstimator):
    """Two-input Mamdani controller surface with centroid defuzzification.

    Defaults are min AND, product implication and sum aggregation. With the
    standard table, clipping (``implication="min"``) combined with max
    aggregation gives a surface that is not monotone where several rules
    share a saturated output label; the defaults keep it monotone.

    ``predict(X)`` evaluates rows ``[e_scaled, rate_scaled]``; inputs are
    clamped to ``[-1, 1]``.
    """

    def __init__(self, centers=STANDARD_CENTERS, rules=STANDARD_RULES, resolution=1001,
                 and_operator="min", implication="prod", aggregation="sum",
                 error_centers=None, rate_centers=None, output_centers=None):
        self.centers = centers
        self.rules = rules
        self.resolution = resolution
        self.and_operator = and_operator
        self.implication = implication
        self.aggregation = aggregation
        self.error_centers = error_centers
        self.rate_centers = rate_centers
        self.output_centers = output_centers
        self._build()

    def _build(self):
        if int(self.resolution) < 3:
            raise ValueError("resolution must be at least 3")
        for name, value, allowed in (
            ("and_operator", self.and_operator, ("min", "prod")),
            ("implication", self.implication, ("min", "prod")),
            ("aggregation", self.aggregation, ("max", "sum")),
        ):
            if value not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {value!r}")
        pick = lambda c: self.centers if c is None else c
        self.error_partition_ = LinguisticPartition(pick(self.error_centers))
        self.rate_partition_ = LinguisticPartition(pick(self.rate_centers))
        self.output_partition_ = LinguisticPartition(pick(self.output_centers))
        self.rule_base_ = RuleBase(self.rules)
        lo, hi = self.output_partition_.centers[0], self.output_partition_.centers[-1]
        self.grid_ = np.linspace(lo, hi, int(self.resolution))
        w = np.full(self.grid_.size, self.grid_[1] - self.grid_[0])
        w[0] = w[-1] = 0.5 * w[1]
        self._weights = w
        self._zweights = w * self.grid_
        self._mf_table = np.vstack([mf(self.grid_) for mf in self.output_partition_.mfs])
        # product implication + sum aggregation is linear in the strengths, so
        # the grid integrals of each output set can be taken once
        areas = self._mf_table @ w
        moments = self._mf_table @ self._zweights
        c = np.asarray(self.output_partition_.centers)
        if np.allclose(c, -c[::-1], rtol=0.0, atol=1e-12):
            # mirror-image labels get exactly opposite moments so F(0, 0) == 0
            areas = 0.5 * (areas + areas[::-1])
            moments = 0.5 * (moments - moments[::-1])
        self._areas = areas.tolist()
        self._moments = moments.tolist()
        self._linear = self.implication == "prod" and self.aggregation == "sum"
        return self

    def set_params(self, **params):
        super().set_params(**params)
        return self._build()

    def fit(self, X=None, y=None):
        return self._build()

    def strengths(self, e: float, rate: float) -> list[float]:
        """Aggregated firing strength of each output label."""
        me = self.error_partition_.fuzzify(e)
        mr = self.rate_partition_.fuzzify(rate)
        idx = self.rule_base_.index
        use_min = self.and_operator == "min"
        use_sum = self.aggregation == "sum"
        s = [0.0] * len(self.output_partition_)
        for r, wr in enumerate(mr):
            if wr == 0.0:
                continue
            row = idx[r]
            for c, wc in enumerate(me):
                if wc == 0.0:
                    continue
                k = row[c]
                w = (wr if wr < wc else wc) if use_min else wr * wc
                if use_sum:
                    s[k] += w
                elif w > s[k]:
                    s[k] = w
        return s

    def evaluate(self, e: float, rate: float) -> float:
        e = -1.0 if e < -1.0 else (1.0 if e > 1.0 else e)
        rate = -1.0 if rate < -1.0 else (1.0 if rate > 1.0 else rate)
        s = self.strengths(e, rate)
        if self._linear:
            area = moment = 0.0
            for k, v in enumerate(s):
                if v > 0.0:
                    area += v * self._areas[k]
                    moment += v * self._moments[k]
            return moment / area if area > 0.0 else 0.0
        active = [k for k, v in enumerate(s) if v > 0.0]
        if not active:
            return 0.0
        strength = np.array([s[k] for k in active])[:, None]
        table = self._mf_table[active]
        sets = np.minimum(table, strength) if self.implication == "min" else table * strength
        agg = sets.sum(axis=0) if self.aggregation == "sum" else sets.max(axis=0)
        area = float(agg @ self._weights)
        if area == 0.0:
            return 0.0
        return float(agg @ self._zweights) / area

    def predict(self, X) -> np.ndarray:
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (error, rate), got {X.shape[1]}")
        return np.array([self.evaluate(a, b) for a, b in X])

    def to_dict(self) -> dict:
        return {
            "labels": list(LABELS),
            "centers": list(self.centers),
            "rules": [list(row) for row in self.rules],
            "resolution": int(self.resolution),
            "and_operator": self.and_operator,
            "implication": self.implication,
            "aggregation": self.aggregation,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FuzzyEngine":
        labels = tuple(doc.get("labels", LABELS))
        if labels != LABELS:
            raise ValueError(f"labels must be {list(LABELS)}")
        return cls(
            centers=tuple(doc.get("centers", STANDARD_CENTERS)),
            rules=tuple(tuple(r) for r in doc.get("rules", STANDARD_RULES)),
            resolution=int(doc.get("resolution", 1001)),
            and_operator=doc.get("and_operator", "min"),
            implication=doc.get("implication", "prod"),
            aggregation=doc.get("aggregation", "sum"),
            error_centers=doc.get("error_centers"),
            rate_centers=doc.get("rate_centers"),
            output_centers=doc.get("output_centers"),
        )

    @classmethod
    def from_json(cls, path) -> "FuzzyEngine":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_standard_engine(resolution: int = 1001) -> FuzzyEngine:
    return FuzzyEngine(resolution=resolution)


def infer_and_defuzzify(engine: FuzzyEngine, e_scaled: float, rate_scaled: float) -> float:
    return engine.evaluate(e_scaled, rate_scaled)
