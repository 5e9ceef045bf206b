"""Solver-agnostic MILP model with linear and indicator constraints."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix

INF = float("inf")
SENSES = ("<=", ">=", "=")


class ModelError(ValueError):
    pass


class MissingBigMError(KeyError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF
    kind: str = "continuous"

    @property
    def is_binary(self) -> bool:
        return self.kind == "binary"


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    coeffs: tuple[tuple[str, float], ...]
    sense: str
    rhs: float

    def activity(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values[v] for v, c in self.coeffs)

    def violation(self, values: Mapping[str, float]) -> float:
        act = self.activity(values)
        if self.sense == "<=":
            return max(0.0, act - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - act)
        return abs(act - self.rhs)


@dataclass(frozen=True)
class IndicatorConstraint:
    """``binary == trigger`` implies ``constraint``."""

    name: str
    binary: str
    trigger: int
    constraint: LinearConstraint


@dataclass
class Model:
    name: str = "model"
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[LinearConstraint] = field(default_factory=list)
    indicators: list[IndicatorConstraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    sense: str = "min"

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, kind: str = "continuous") -> str:
        if not name:
            raise ModelError("variable needs a name")
        if name in self.variables:
            raise ModelError(f"duplicate variable {name}")
        if kind == "binary":
            lb, ub = 0.0, 1.0
        elif kind != "continuous":
            raise ModelError(f"unknown variable kind {kind}")
        self.variables[name] = Variable(name, float(lb), float(ub), kind)
        return name

    def binary(self, name: str) -> str:
        return self.add_var(name, kind="binary")

    def _check_terms(self, coeffs) -> tuple[tuple[str, float], ...]:
        merged: dict[str, float] = {}
        for v, c in coeffs:
            if v not in self.variables:
                raise ModelError(f"unknown variable {v}")
            merged[v] = merged.get(v, 0.0) + float(c)
        return tuple((v, c) for v, c in merged.items() if c != 0.0)

    def _row(self, name, coeffs, sense, rhs) -> LinearConstraint:
        if sense not in SENSES:
            raise ModelError(f"bad sense {sense}")
        return LinearConstraint(name, self._check_terms(coeffs), sense, float(rhs))

    def add_constraint(self, name: str, coeffs, sense: str, rhs: float) -> LinearConstraint:
        row = self._row(name, coeffs, sense, rhs)
        self.constraints.append(row)
        return row

    def add_indicator(self, name: str, binary: str, trigger: int, coeffs, sense: str, rhs: float):
        if binary not in self.variables or not self.variables[binary].is_binary:
            raise ModelError(f"indicator variable {binary} must be a declared binary")
        if trigger not in (0, 1):
            raise ModelError("trigger must be 0 or 1")
        ind = IndicatorConstraint(name, binary, trigger, self._row(name, coeffs, sense, rhs))
        self.indicators.append(ind)
        return ind

    def set_objective(self, coeffs, sense: str = "min") -> None:
        self.objective = dict(self._check_terms(coeffs))
        self.sense = sense

    def copy(self) -> "Model":
        return copy.deepcopy(self)

    def objective_value(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values[v] for v, c in self.objective.items())

    def violations(self, values: Mapping[str, float], tol: float = 1e-7) -> list[str]:
        """Names of bounds, rows and indicators that ``values`` violates."""
        bad = []
        for var in self.variables.values():
            x = values[var.name]
            if x < var.lb - tol or x > var.ub + tol:
                bad.append(var.name)
            elif var.is_binary and min(abs(x), abs(1 - x)) > 1e-6:
                bad.append(var.name)
        bad += [row.name for row in self.constraints if row.violation(values) > tol]
        for ind in self.indicators:
            if round(values[ind.binary]) == ind.trigger and ind.constraint.violation(values) > tol:
                bad.append(ind.name)
        return bad

    def is_feasible(self, values: Mapping[str, float], tol: float = 1e-7) -> bool:
        return not self.violations(values, tol)

    def compile(self) -> "CompiledModel":
        return CompiledModel(self)


def _fmt(x: float) -> str:
    if math.isnan(x):
        raise ModelError("NaN coefficient")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _lin(coeffs) -> str:
    parts = []
    for k, (v, c) in enumerate(coeffs):
        mag = abs(c)
        sign = "-" if c < 0 else "+"
        term = v if mag == 1.0 else f"{_fmt(mag)} {v}"
        if k == 0:
            parts.append(term if sign == "+" else f"- {term}")
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts) if parts else "0"


def write_lp(model: Model) -> str:
    """Serialise ``model`` to LP text (indicators use ``b = 1 -> row`` syntax)."""
    for var in model.variables.values():
        if not var.name:
            raise ModelError("unnamed variable")
    rows = model.constraints
    for row in list(rows) + [ind.constraint for ind in model.indicators]:
        for _, c in row.coeffs:
            _fmt(c)
        _fmt(row.rhs)
    lines = [f"\\ Problem: {model.name}"]
    lines.append("Minimize" if model.sense == "min" else "Maximize")
    lines.append(f" obj: {_lin(tuple(model.objective.items()))}")
    if rows or model.indicators:
        lines.append("Subject To")
        for row in rows:
            lines.append(f" {row.name}: {_lin(row.coeffs)} {row.sense} {_fmt(row.rhs)}")
        for ind in model.indicators:
            row = ind.constraint
            lines.append(
                f" {ind.name}: {ind.binary} = {ind.trigger} -> {_lin(row.coeffs)} {row.sense} {_fmt(row.rhs)}"
            )
    lines.append("Bounds")
    binaries = []
    for var in model.variables.values():
        if var.is_binary:
            binaries.append(var.name)
        elif var.lb == -INF and var.ub == INF:
            lines.append(f" {var.name} free")
        elif var.ub == INF:
            lines.append(f" {var.name} >= {_fmt(var.lb)}")
        else:
            lines.append(f" {_fmt(var.lb)} <= {var.name} <= {_fmt(var.ub)}")
    if binaries:
        lines.append("Binaries")
        lines += [f" {name}" for name in binaries]
    lines.append("End")
    return "\n".join(lines) + "\n"


def lower_indicators(model: Model, big_m: Mapping[str, float]) -> Model:
    """Replace each indicator by a big-M row, keyed by indicator name."""
    out = model.copy()
    out.indicators = []
    for ind in model.indicators:
        if ind.name not in big_m:
            raise MissingBigMError(ind.name)
        m = float(big_m[ind.name])
        row = ind.constraint
        senses = ["<=", ">="] if row.sense == "=" else [row.sense]
        for sense in senses:
            # normalise to a.x <= b
            sign = 1.0 if sense == "<=" else -1.0
            coeffs = [(v, sign * c) for v, c in row.coeffs]
            rhs = sign * row.rhs
            if ind.trigger == 1:
                coeffs.append((ind.binary, m))
                rhs += m
            else:
                coeffs.append((ind.binary, -m))
            name = ind.name if len(senses) == 1 else f"{ind.name}_{'le' if sense == '<=' else 'ge'}"
            out.add_constraint(name, coeffs, "<=", rhs)
    return out


class CompiledModel:
    """Array form: ``row_lo <= A x <= row_hi``, ``lb <= x <= ub``, minimise ``c x``.

    Indicator rows are kept in a separate matrix with their own bounds.
    """

    def __init__(self, model: Model):
        self.model = model
        self.names = list(model.variables)
        self.col = {name: j for j, name in enumerate(self.names)}
        n = len(self.names)
        self.n = n
        sign = 1.0 if model.sense == "min" else -1.0
        self.c = np.zeros(n)
        for v, coef in model.objective.items():
            self.c[self.col[v]] = sign * coef
        self.lb = np.array([model.variables[v].lb for v in self.names])
        self.ub = np.array([model.variables[v].ub for v in self.names])
        self.binary = np.array([model.variables[v].is_binary for v in self.names], dtype=bool)
        self.A, self.row_lo, self.row_hi = self._rows(model.constraints)
        inds = model.indicators
        self.ind_A, self.ind_lo, self.ind_hi = self._rows([i.constraint for i in inds])
        self.ind_col = np.array([self.col[i.binary] for i in inds], dtype=int)
        self.ind_trigger = np.array([i.trigger for i in inds], dtype=int)
        self.row_names = [r.name for r in model.constraints]

    def _rows(self, rows: Sequence[LinearConstraint]):
        data, ri, ci = [], [], []
        lo = np.empty(len(rows))
        hi = np.empty(len(rows))
        for i, row in enumerate(rows):
            for v, coef in row.coeffs:
                data.append(coef)
                ri.append(i)
                ci.append(self.col[v])
            lo[i] = row.rhs if row.sense in (">=", "=") else -INF
            hi[i] = row.rhs if row.sense in ("<=", "=") else INF
        A = csr_matrix((data, (ri, ci)), shape=(len(rows), self.n))
        return A, lo, hi

    def values(self, x: np.ndarray) -> dict[str, float]:
        return {name: float(x[j]) for j, name in enumerate(self.names)}

    def vector(self, values: Mapping[str, float]) -> np.ndarray:
        return np.array([values[name] for name in self.names], dtype=float)

