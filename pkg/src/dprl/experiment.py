"""End-to-end harness: ingest a table, privatize, train, evaluate.

A sweep runs every ``(epsilon, seed)`` cell independently: split the clean
data, privatize the training part with the Gaussian mechanism, train each
enabled estimator on it and score the models on the untouched clean test
part. Cells never share state, so they can run in worker processes.
"""

from __future__ import annotations

import configparser
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from ._descent import SolverConfig
from .ambiguity import ConcentrationConfig, radius
from .data import UNIT_BOUNDS, Dataset
from .erm import LossKind, LossSpec, Norm, evaluate, train_regularized
from .exceptions import (ConvergenceWarning, DomainError, EmptyDataError, ProvenanceError,
                         SchemaError, SplitError)
from .gauss_dro import train_gauss_dro
from .mechanisms import MechanismKind, PrivacyBudget, calibrate, privatize

log = logging.getLogger(__name__)

METHODS = ("PlainERM", "LipschitzReg", "GaussDRO")
MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null", "none"})


# -- configuration ---------------------------------------------------------

def read_config(path) -> Dict[str, str]:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",),
                                       interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return dict(parser["config"])


def _as_list(value: Optional[str]) -> List[str]:
    if value is None:
        return []
    return [v.strip() for v in value.split(",") if v.strip()]


def _as_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise SchemaError(f"not a boolean: {value!r}")


def _as_int_list(value: str) -> List[int]:
    out: List[int] = []
    for item in _as_list(value):
        lo, sep, hi = item.partition("-")
        if sep and lo:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(item))
    return out


@dataclass(frozen=True)
class SchemaConfig:
    output_column: str
    drop_columns: Tuple[str, ...] = ()
    categorical_columns: Tuple[str, ...] = ()
    scale_to_unit: bool = True

    def __post_init__(self):
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))
        object.__setattr__(self, "categorical_columns", tuple(self.categorical_columns))
        if self.output_column in self.drop_columns:
            raise SchemaError("output column is listed in drop_columns")

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, str]) -> "SchemaConfig":
        if "output_column" not in cfg:
            raise SchemaError("schema needs an output_column")
        return cls(
            cfg["output_column"].strip(),
            tuple(_as_list(cfg.get("drop_columns"))),
            tuple(_as_list(cfg.get("categorical_columns"))),
            _as_bool(cfg.get("scale_to_unit", "true")),
        )

    @classmethod
    def from_file(cls, path) -> "SchemaConfig":
        return cls.from_mapping(read_config(path))


def default_epsilons(p_x: int, count: int = 8) -> List[float]:
    """Log-spaced grid over ``[1, 100] / p_x``."""
    return list(np.logspace(0.0, 2.0, count) / p_x)


@dataclass(frozen=True)
class SweepConfig:
    """Privacy grid and estimator settings for :func:`run_sweep`.

    ``epsilons=None`` means :func:`default_epsilons` for the data's ``p_x``.
    ``rho_generic=None`` makes the Lipschitz estimator use the full
    ambiguity radius instead of a fixed weight.
    """

    epsilons: Optional[Tuple[float, ...]] = None
    delta: float = 1e-2
    n_train: int = 50
    seeds: Tuple[int, ...] = tuple(range(20))
    rho_generic: Optional[float] = 1e-2
    methods: Tuple[str, ...] = METHODS
    loss: LossKind = LossKind.QUADRATIC
    norm: Norm = Norm.L2
    beta: float = 0.05
    concentration: ConcentrationConfig = ConcentrationConfig()
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.epsilons is not None:
            eps = tuple(float(e) for e in self.epsilons)
            if not eps or min(eps) <= 0:
                raise DomainError("epsilons must be a nonempty list of positive numbers")
            object.__setattr__(self, "epsilons", eps)
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise DomainError("seeds must be nonempty")
        object.__setattr__(self, "seeds", seeds)
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise DomainError(f"methods must be a nonempty subset of {METHODS}")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "loss", LossKind(self.loss))
        object.__setattr__(self, "norm", Norm(self.norm))
        if self.rho_generic is not None and self.rho_generic < 0:
            raise DomainError("rho_generic must be nonnegative")

    def grid(self, p_x: int) -> Tuple[float, ...]:
        return self.epsilons if self.epsilons is not None else tuple(default_epsilons(p_x))

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, str]) -> "SweepConfig":
        kw: dict = {}
        if "epsilons" in cfg:
            kw["epsilons"] = tuple(float(v) for v in _as_list(cfg["epsilons"]))
        for key, conv in (("delta", float), ("n_train", int), ("beta", float)):
            if key in cfg:
                kw[key] = conv(cfg[key])
        if "seeds" in cfg:
            kw["seeds"] = tuple(_as_int_list(cfg["seeds"]))
        if "rho_generic" in cfg:
            v = cfg["rho_generic"].strip().lower()
            kw["rho_generic"] = None if v in ("", "none", "radius") else float(v)
        if "methods" in cfg:
            kw["methods"] = tuple(_as_list(cfg["methods"]))
        if "loss" in cfg:
            kw["loss"] = cfg["loss"].strip().lower()
        if "norm" in cfg:
            kw["norm"] = cfg["norm"].strip().lower()
        conc = {k: float(cfg[k]) for k in ("c1", "c2", "a") if k in cfg}
        if "big_data" in cfg:
            conc["big_data"] = _as_bool(cfg["big_data"])
        if conc:
            kw["concentration"] = ConcentrationConfig(**conc)
        solver = {}
        if "max_iters" in cfg:
            solver["max_iters"] = int(cfg["max_iters"])
        if "tol" in cfg:
            solver["tol"] = float(cfg["tol"])
        if "step_rule" in cfg:
            solver["step_rule"] = cfg["step_rule"].strip()
        if solver:
            kw["solver"] = SolverConfig(**solver)
        return cls(**kw)


# -- data ------------------------------------------------------------------

def read_table(path, schema: SchemaConfig) -> Tuple[Dataset, int]:
    """Load and encode a CSV file; returns the dataset and the dropped-row count."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    df.columns = [c.strip() for c in df.columns]
    named = {schema.output_column, *schema.drop_columns, *schema.categorical_columns}
    missing = sorted(named - set(df.columns))
    if missing:
        raise SchemaError(f"columns not in file: {', '.join(missing)}")
    keep = [c for c in df.columns if c not in schema.drop_columns]
    feature_cols = [c for c in keep if c != schema.output_column]
    if not feature_cols:
        raise SchemaError("schema leaves no feature columns")
    df = df[keep].apply(lambda s: s.str.strip())

    bad = df.apply(lambda s: s.str.lower().isin(MISSING_TOKENS)).any(axis=1)
    numeric_cols = [c for c in keep if c not in schema.categorical_columns]
    parsed = df[numeric_cols].apply(pd.to_numeric, errors="coerce")
    bad |= ~np.isfinite(parsed.to_numpy(dtype=float)).all(axis=1)
    n_dropped = int(bad.sum())
    df, parsed = df[~bad], parsed[~bad]
    if df.empty:
        raise EmptyDataError(f"{path}: no usable rows ({n_dropped} dropped)")

    table = pd.DataFrame(index=df.index)
    for c in keep:
        if c in schema.categorical_columns:
            codes, _ = pd.factorize(df[c], sort=False)
            table[c] = codes.astype(float)
        else:
            table[c] = parsed[c].astype(float)
    values = table.to_numpy(dtype=float)
    if schema.scale_to_unit:
        lo, hi = values.min(axis=0), values.max(axis=0)
        span = np.where(hi > lo, hi - lo, 1.0)
        values = (values - lo) / span
        table = pd.DataFrame(values, columns=keep, index=table.index)
    if n_dropped:
        log.warning("%s: dropped %d rows with missing or unparseable values", path, n_dropped)
    X = table[feature_cols].to_numpy()
    Y = table[[schema.output_column]].to_numpy()
    bounds = UNIT_BOUNDS if schema.scale_to_unit else None
    data = Dataset.from_arrays(X, Y, bounds, feature_names=feature_cols,
                               output_names=[schema.output_column])
    return data, n_dropped


def ingest_csv(path, schema: SchemaConfig) -> Dataset:
    """Categorical columns are coded ``0..k-1`` in order of first appearance,
    then every column is min-max scaled into ``[0, 1]`` if requested."""
    return read_table(path, schema)[0]


def split(data: Dataset, n_train: int, seed) -> Tuple[Dataset, Dataset]:
    """Seeded shuffle, then the first ``n_train`` rows train and the rest test."""
    if not 1 <= n_train < data.n:
        raise SplitError(f"n_train must be in [1, {data.n - 1}], got {n_train}")
    perm = np.random.default_rng(seed).permutation(data.n)
    return data.take(perm[:n_train]), data.take(perm[n_train:])


def gaussian_surrogate(n: int = 2000, p_x: int = 10, seed: int = 0,
                       noise: float = 0.5) -> Dataset:
    """Jointly Gaussian stand-in for a tabular regression set, scaled to ``[0, 1]``.

    Features have a random correlated covariance; the output is a random
    linear combination of them plus independent noise of std ``noise``
    (relative to a unit-variance signal).
    """
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((p_x, p_x)) / math.sqrt(p_x)
    cov = L @ L.T + 0.5 * np.eye(p_x)
    X = rng.multivariate_normal(np.zeros(p_x), cov, size=n)
    w = rng.standard_normal(p_x)
    signal = X @ w
    y = signal / signal.std() + noise * rng.standard_normal(n)
    values = np.column_stack([X, y])
    lo, hi = values.min(axis=0), values.max(axis=0)
    values = (values - lo) / (hi - lo)
    return Dataset(values[:, :p_x], values[:, p_x:], UNIT_BOUNDS,
                   feature_names=[f"x{i}" for i in range(p_x)], output_names=["y"])


# -- sweep -----------------------------------------------------------------

@dataclass(frozen=True)
class ResultRow:
    epsilon: float
    method: str
    seed: int
    test_loss: float
    train_objective: float
    rho_used: float
    converged: bool = True
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class ResultsTable:
    rows: List[ResultRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def sorted(self) -> "ResultsTable":
        return ResultsTable(sorted(self.rows, key=lambda r: (r.epsilon, r.method, r.seed)))

    @property
    def epsilons(self) -> List[float]:
        return sorted({r.epsilon for r in self.rows})

    @property
    def methods(self) -> List[str]:
        return sorted({r.method for r in self.rows})

    def mean_test_loss(self) -> Dict[str, Dict[float, float]]:
        """``{method: {epsilon: mean test loss over successful seeds}}``."""
        acc: Dict[str, Dict[float, List[float]]] = {}
        for r in self.rows:
            if r.ok and math.isfinite(r.test_loss):
                acc.setdefault(r.method, {}).setdefault(r.epsilon, []).append(r.test_loss)
        return {m: {e: float(np.mean(v)) for e, v in sorted(d.items())}
                for m, d in sorted(acc.items())}


def _noise_seed(seed: int, epsilon: float) -> np.random.SeedSequence:
    # keyed on the exact float so adding grid points leaves other cells alone
    bits = int(np.float64(epsilon).view(np.uint64))
    return np.random.SeedSequence([int(seed), bits & 0xFFFFFFFF, bits >> 32])


def _run_cell(args) -> List[ResultRow]:
    data, sweep, epsilon, seed = args
    train, test = split(data, sweep.n_train, seed)
    test.require_clean("evaluation")
    budget = PrivacyBudget(epsilon, sweep.delta)
    params = calibrate(MechanismKind.GAUSSIAN, data.bounds, data.p_x, budget)
    private = privatize(train, params, _noise_seed(seed, epsilon))
    if not private.is_private or test.is_private:
        raise ProvenanceError("sweep provenance audit failed")
    spec = LossSpec.from_bounds(sweep.loss, data.bounds, data.p_x, sweep.norm)
    p = data.p_x + data.p_y
    full = radius(MechanismKind.GAUSSIAN, budget, p, params.sensitivity, sweep.beta,
                  sweep.n_train, sweep.concentration).rho

    rows = []
    for method in sweep.methods:
        rho = math.nan
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", ConvergenceWarning)
                if method == "GaussDRO":
                    rho = full
                    model, obj = train_gauss_dro(private, rho, sweep.solver)
                    theta = model.to_theta()
                else:
                    if method == "PlainERM":
                        rho = 0.0
                    else:
                        rho = full if sweep.rho_generic is None else sweep.rho_generic
                    fit = train_regularized(private, spec, rho, sweep.solver)
                    theta, obj = fit.theta, fit.objective
            converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
            loss = evaluate(test, spec, theta)
            rows.append(ResultRow(epsilon, method, seed, loss, obj, rho, converged))
        except Exception as exc:  # one failed cell must not sink the sweep
            log.warning("cell eps=%g seed=%d %s failed: %s", epsilon, seed, method, exc)
            rows.append(ResultRow(epsilon, method, seed, math.nan, math.nan, rho,
                                  False, f"{type(exc).__name__}: {exc}"))
    return rows


def run_sweep(data: Dataset, sweep: SweepConfig, schema: Optional[SchemaConfig] = None,
              workers: int = 1) -> ResultsTable:
    """Train and score every method on every ``(epsilon, seed)`` cell.

    ``schema`` is accepted for provenance only; ``data`` must already be
    ingested. Rows come back sorted by ``(epsilon, method, seed)``
    regardless of ``workers``.
    """
    data.require_clean("run_sweep")
    if not 1 <= sweep.n_train < data.n:
        raise SplitError(f"n_train must be in [1, {data.n - 1}], got {sweep.n_train}")
    cells = [(data, sweep, eps, seed) for eps in sweep.grid(data.p_x) for seed in sweep.seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_cell, cells))
    else:
        chunks = [_run_cell(c) for c in cells]
    return ResultsTable([r for chunk in chunks for r in chunk]).sorted()
