"""Seeded data generators and the repetition harness for simulation studies.

Every repetition draws from its own generator, seeded from the master seed
and the repetition index through :class:`numpy.random.SeedSequence`, so a
study is reproducible regardless of how repetitions are scheduled. Normal
variates come from numpy's PCG64 bit generator with the ziggurat sampler of
``Generator.standard_normal``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import numerics
from .estimators import EstimatorConfig, fit
from .exceptions import (
    AllRepsInfeasible,
    InvalidConfig,
    InvalidDimension,
    NumericalInfeasibility,
)
from .slicing import Dataset

MODELS = ("model1", "model2", "linear10")


def _padded(values, p):
    b = np.zeros(p)
    b[: len(values)] = values
    return b


def gen_model1(n, p, rng):
    """Single-index model ``y = u + (1 + 0.7 u + 0.6 e)^3`` with ``u = beta^T x``."""
    if p < 4:
        raise InvalidDimension("model1 needs p >= 4")
    beta = _padded([-1.0, 2.0, 0.0, -1.0], p)
    X = rng.standard_normal((n, p))
    e = rng.standard_normal(n)
    u = X @ beta
    y = u + (1.0 + 0.7 * u + 0.6 * e) ** 3
    return Dataset(X, y), beta[:, None]


def gen_model2(n, p, rng):
    """Two-index model ``y = 2 + b1^T x + (1 + 0.5 b2^T x)^3 + 0.3 e``."""
    if p < 4:
        raise InvalidDimension("model2 needs p >= 4")
    B = np.column_stack([_padded([1.0, 2.0, -3.0], p), _padded([1.0, 1.0, 0.0, -2.0], p)])
    X = rng.standard_normal((n, p))
    e = rng.standard_normal(n)
    U = X @ B
    y = 2.0 + U[:, 0] + (1.0 + 0.5 * U[:, 1]) ** 3 + 0.3 * e
    return Dataset(X, y), B


def gen_linear10(n, p, rng):
    """Linear model ``y = x_1 - x_2 + 0.5 e``."""
    if p < 2:
        raise InvalidDimension("linear10 needs p >= 2")
    beta = _padded([1.0, -1.0], p)
    X = rng.standard_normal((n, p))
    e = rng.standard_normal(n)
    return Dataset(X, X @ beta + 0.5 * e), beta[:, None]


GENERATORS = {"model1": gen_model1, "model2": gen_model2, "linear10": gen_linear10}


@dataclass
class Contamination:
    fraction: float = 0.02
    response_mean: float = 150.0
    response_sd: float = 30.0
    predictor_shift: float = -5.0
    tail: str = "lower"


def contaminate(
    data: Dataset, frac, rng, *, response_mean=150.0, response_sd=30.0, shift=-5.0, tail="lower"
):
    """Replace the ``ceil(frac * n)`` smallest-response observations with outliers.

    Replaced responses are drawn from ``N(response_mean, response_sd^2)`` and
    ``shift`` is added to every predictor of those rows. ``tail="upper"``
    replaces the largest responses instead.
    """
    if not 0 <= frac < 1:
        raise InvalidConfig(f"contamination fraction must lie in [0, 1), got {frac}")
    if tail not in ("lower", "upper"):
        raise InvalidConfig(f"tail must be 'lower' or 'upper', got {tail!r}")
    m = math.ceil(round(frac * data.n, 9))
    if m == 0:
        return data
    order = np.argsort(data.y, kind="stable")
    idx = order[:m] if tail == "lower" else order[-m:]
    X = data.X.copy()
    y = data.y.copy()
    y[idx] = rng.normal(response_mean, response_sd, size=m)
    X[idx] += shift
    return Dataset(X, y)


@dataclass
class SimConfig:
    model: str = "model1"
    n: int = 200
    p: int = 10
    H: list = field(default_factory=lambda: [2, 5])
    K: int = 1
    methods: list = field(default_factory=lambda: ["ols", "sir", "swar", "swar_w", "swar_t"])
    repetitions: int = 200
    seed: int = 0
    contamination: Contamination | None = None

    def __post_init__(self):
        if isinstance(self.contamination, dict):
            self.contamination = Contamination(**self.contamination)
        self.H = [int(h) for h in np.atleast_1d(self.H)]
        self.methods = [m.lower() for m in self.methods]

    def validate(self):
        if self.model not in MODELS:
            raise InvalidConfig(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.repetitions < 1:
            raise InvalidConfig("repetitions must be at least 1")
        if self.n < 2:
            raise InvalidConfig("n must be at least 2")
        if self.K < 1 or not self.H or min(self.H) < 1:
            raise InvalidConfig("H values and K must be positive")
        if self.contamination is not None and not 0 <= self.contamination.fraction < 1:
            raise InvalidConfig("contamination fraction must lie in [0, 1)")
        for cell in self.cells():
            EstimatorConfig(*cell)

    def cells(self):
        """Estimator settings ``(method, H, K)`` evaluated in each repetition."""
        out = []
        for m in self.methods:
            if m == "ols":
                out.append(("ols", 1, 1))
            else:
                out.extend((m, h, self.K) for h in self.H)
        return out

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def child_rng(seed, rep):
    """Generator for repetition ``rep`` of a study with master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def run_repetition(config: SimConfig, rep: int):
    """Squared canonical correlations of every cell for one repetition.

    Infeasible fits give ``None``.
    """
    rng = child_rng(config.seed, rep)
    data, B = GENERATORS[config.model](config.n, config.p, rng)
    if config.contamination is not None:
        c = config.contamination
        data = contaminate(
            data, c.fraction, rng,
            response_mean=c.response_mean, response_sd=c.response_sd,
            shift=c.predictor_shift, tail=c.tail,
        )
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for method, H, K in config.cells():
            try:
                basis = fit(data, EstimatorConfig(method, H, K))
                out.append(numerics.squared_canonical_correlations(B, basis.directions, data.X))
            except NumericalInfeasibility:
                out.append(None)
    return out


@dataclass
class Cell:
    method: str
    H: int
    n: int
    p: int
    direction: str
    mean: float
    sd: float
    infeasible: int
    repetitions: int = 0

    @property
    def feasible(self):
        return self.repetitions - self.infeasible


@dataclass
class StudyResult:
    """Summary of a simulation study, one :class:`Cell` per method, H and direction.

    ``direction`` is ``"1"``, ``"2"``, ... for the ordered canonical
    correlations and ``"all"`` for the values pooled over directions.
    """

    config: SimConfig
    cells: list

    CSV_FIELDS = ("method", "H", "n", "p", "direction", "mean", "sd", "infeasible")

    def get(self, method, H=None, direction="all"):
        for c in self.cells:
            if c.method == method and (H is None or c.H == H) and c.direction == direction:
                return c
        raise KeyError((method, H, direction))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for c in self.cells:
            w.writerow([c.method, c.H, c.n, c.p, c.direction, repr(c.mean), repr(c.sd), c.infeasible])
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = asdict(self.config)
        cells = [{k: getattr(c, k) for k in self.CSV_FIELDS} for c in self.cells]
        return json.dumps({"config": cfg, "cells": cells}, indent=2)


def _summary(values):
    if len(values) == 0:
        return math.nan, math.nan
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return float(np.mean(values)), sd


def default_workers():
    """Worker count from ``SWAR_THREADS`` (0 or unset means all CPUs)."""
    try:
        n = int(os.environ.get("SWAR_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def run_study(config: SimConfig, workers: int | None = None) -> StudyResult:
    """Run every repetition of ``config`` and summarize each cell.

    Infeasible fits are counted per cell and left out of the summaries.
    """
    config.validate()
    workers = default_workers() if workers is None else workers
    reps = range(config.repetitions)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(run_repetition, [config] * len(reps), reps, chunksize=4))
    else:
        results = [run_repetition(config, r) for r in reps]

    cells = []
    any_feasible = False
    for j, (method, H, K) in enumerate(config.cells()):
        vals = [r[j] for r in results if r[j] is not None]
        infeasible = config.repetitions - len(vals)
        any_feasible |= bool(vals)
        kdim = len(vals[0]) if vals else K
        for d in range(kdim):
            m, s = _summary([v[d] for v in vals])
            cells.append(Cell(method, H, config.n, config.p, str(d + 1), m, s, infeasible, config.repetitions))
        m, s = _summary(np.concatenate(vals) if vals else [])
        cells.append(Cell(method, H, config.n, config.p, "all", m, s, infeasible, config.repetitions))
    if not any_feasible:
        raise AllRepsInfeasible("no repetition produced a feasible fit")
    return StudyResult(config, cells)
