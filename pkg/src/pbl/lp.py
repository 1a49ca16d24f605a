"""Exact rational linear programming.

Two-phase tableau simplex over ``fractions.Fraction`` with Bland's rule.
Every solve is self-certifying: optimal results carry dual multipliers,
infeasible ones a Farkas ray, unbounded ones a feasible point plus a primal
ray, and ``check_duality`` / ``check_farkas`` / ``check_unbounded`` verify
them without trusting the solver.

Dual sign convention (value = b . y in both senses):

* min: y >= 0 on ``>=`` rows, y <= 0 on ``<=`` rows; A^T y <= c on
  nonnegative variables, = c on free ones.
* max: y >= 0 on ``<=`` rows, y <= 0 on ``>=`` rows; A^T y >= c on
  nonnegative variables, = c on free ones.

A Farkas ray uses the min-sense signs with A^T y <= 0 (= 0 on free
variables) and b . y > 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

ZERO = Fraction(0)
ONE = Fraction(1)

SENSES = ("<=", "=", ">=")


@dataclass
class Constraint:
    id: str
    coeffs: dict[int, Fraction]     # variable index -> coefficient
    sense: str
    rhs: Fraction


@dataclass
class LPInstance:
    sense: str = "min"
    var_ids: list[str] = field(default_factory=list)
    free: list[bool] = field(default_factory=list)
    objective: list[Fraction] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)

    def add_var(self, vid: str, cost=0, free: bool = False) -> int:
        self.var_ids.append(vid)
        self.free.append(free)
        self.objective.append(Fraction(cost))
        return len(self.var_ids) - 1

    def add_constraint(self, cid: str, coeffs: Mapping[int, object], sense: str, rhs) -> int:
        if sense not in SENSES:
            raise ValueError(f"bad constraint sense {sense!r}")
        row = {j: Fraction(a) for j, a in coeffs.items() if a != 0}
        self.constraints.append(Constraint(cid, row, sense, Fraction(rhs)))
        return len(self.constraints) - 1

    @property
    def num_vars(self) -> int:
        return len(self.var_ids)

    def validate(self) -> None:
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be min or max")
        if len(set(self.var_ids)) != len(self.var_ids):
            raise ValueError("duplicate variable ids")
        if len({c.id for c in self.constraints}) != len(self.constraints):
            raise ValueError("duplicate constraint ids")
        n = self.num_vars
        if len(self.free) != n or len(self.objective) != n:
            raise ValueError("variable tables out of step")
        for c in self.constraints:
            if any(not 0 <= j < n for j in c.coeffs):
                raise ValueError(f"constraint {c.id} references unknown variable")

    def to_text(self) -> str:
        """Human-readable dump (debug aid; format not stable)."""
        def term(a, j):
            return f"{'+' if a >= 0 else '-'} {abs(a)} {self.var_ids[j]}"
        lines = [self.sense + ": " + " ".join(term(a, j) for j, a in enumerate(self.objective) if a)]
        for c in self.constraints:
            lhs = " ".join(term(a, j) for j, a in sorted(c.coeffs.items())) or "0"
            lines.append(f"  {c.id}: {lhs} {c.sense} {c.rhs}")
        free = [v for v, f in zip(self.var_ids, self.free) if f]
        if free:
            lines.append("  free: " + " ".join(free))
        return "\n".join(lines)


@dataclass
class LPSolution:
    status: str                                 # optimal | infeasible | unbounded
    value: Optional[Fraction] = None
    primal: list[Fraction] = field(default_factory=list)
    dual: list[Fraction] = field(default_factory=list)
    farkas: list[Fraction] = field(default_factory=list)
    ray: list[Fraction] = field(default_factory=list)
    pivots: int = 0

    def primal_by_id(self, inst: LPInstance) -> dict[str, Fraction]:
        return dict(zip(inst.var_ids, self.primal))

    def dual_by_id(self, inst: LPInstance) -> dict[str, Fraction]:
        return {c.id: y for c, y in zip(inst.constraints, self.dual)}


# ---------------------------------------------------------------- solver

class _Tableau:
    """Standard form A'x' = b' (b' >= 0), x' >= 0, with an artificial identity
    block kept for reading B^-1. Artificial columns never re-enter."""

    def __init__(self, inst: LPInstance):
        m = len(inst.constraints)
        # structural columns: (original var, sign)
        self.cols: list[tuple[int, int]] = []
        for j, free in enumerate(inst.free):
            self.cols.append((j, 1))
            if free:
                self.cols.append((j, -1))
        self.n_struct = len(self.cols)
        self.flip = []        # row sign sigma_i
        slack_of = []         # row -> (column, sign t_i) or None
        n_slack = 0
        for c in inst.constraints:
            sigma = -1 if c.rhs < 0 else 1
            self.flip.append(sigma)
            sense = c.sense
            if sigma < 0 and sense != "=":
                sense = "<=" if sense == ">=" else ">="
            if sense == "=":
                slack_of.append(None)
            else:
                slack_of.append((self.n_struct + n_slack, 1 if sense == "<=" else -1))
                n_slack += 1
        self.n_real = self.n_struct + n_slack
        self.art0 = self.n_real
        width = self.n_real + m + 1
        self.rows: list[list[Fraction]] = []
        self.basis: list[int] = []
        col_of_var = {}
        for k, (j, s) in enumerate(self.cols):
            col_of_var.setdefault(j, []).append((k, s))
        for i, c in enumerate(inst.constraints):
            row = [ZERO] * width
            sigma = self.flip[i]
            for j, a in c.coeffs.items():
                for k, s in col_of_var[j]:
                    row[k] = sigma * s * a
            if slack_of[i] is not None:
                k, t = slack_of[i]
                row[k] = Fraction(t)
            row[self.art0 + i] = ONE
            row[-1] = sigma * c.rhs
            self.rows.append(row)
            if slack_of[i] is not None and slack_of[i][1] == 1:
                self.basis.append(slack_of[i][0])
            else:
                self.basis.append(self.art0 + i)
        self.m = m
        self.width = width
        self.pivots = 0

    def pivot(self, r: int, k: int) -> None:
        prow = self.rows[r]
        p = prow[k]
        if p != 1:
            prow = [v / p if v else v for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[k]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        f = self.obj[k]
        if f:
            for j in nz:
                self.obj[j] -= f * prow[j]
        self.basis[r] = k
        self.pivots += 1

    def set_costs(self, cost: list[Fraction]) -> None:
        """Install reduced-cost row for ``cost`` (length width-1)."""
        obj = list(cost) + [ZERO]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                for j, v in enumerate(self.rows[i]):
                    if v:
                        obj[j] -= cb * v
        self.obj = obj
        self.cost = cost

    def run(self, allowed: int):
        """Bland's rule simplex over columns < allowed. Returns None at
        optimality or the entering column of an unbounded direction."""
        while True:
            k = next((j for j in range(allowed) if self.obj[j] < 0), None)
            if k is None:
                return None
            best, r = None, -1
            for i, row in enumerate(self.rows):
                a = row[k]
                if a > 0:
                    ratio = row[-1] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[r])):
                        best, r = ratio, i
            if r < 0:
                return k
            self.pivot(r, k)

    def duals(self) -> list[Fraction]:
        """y' = c_B^T B^-1 in standard-form rows."""
        y = [ZERO] * self.m
        for i, b in enumerate(self.basis):
            cb = self.cost[b]
            if cb:
                row = self.rows[i]
                for t in range(self.m):
                    v = row[self.art0 + t]
                    if v:
                        y[t] += cb * v
        return y

    def point(self) -> list[Fraction]:
        x = [ZERO] * self.width
        for i, b in enumerate(self.basis):
            x[b] = self.rows[i][-1]
        return x


def _to_original(tab: _Tableau, inst: LPInstance, xs: list[Fraction]) -> list[Fraction]:
    out = [ZERO] * inst.num_vars
    for k, (j, s) in enumerate(tab.cols):
        out[j] += s * xs[k]
    return out


def solve_lp(inst: LPInstance) -> LPSolution:
    """Solve exactly. Deterministic: Bland's rule over the fixed column order
    (structural, then slacks), ties in the ratio test to the lowest basic
    column index."""
    inst.validate()
    tab = _Tableau(inst)
    width = tab.width - 1
    # phase 1
    c1 = [ZERO] * width
    for b in tab.basis:
        if b >= tab.art0:
            c1[b] = ONE
    tab.set_costs(c1)
    tab.run(tab.n_real)
    infeas = -tab.obj[-1]       # current phase-1 objective value
    if infeas > 0:
        y1 = tab.duals()
        farkas = [s * v for s, v in zip(tab.flip, y1)]
        return LPSolution("infeasible", farkas=farkas, pivots=tab.pivots)
    # drive zero-level artificials out where a real column allows it
    for i in range(tab.m):
        if tab.basis[i] >= tab.art0:
            k = next((j for j in range(tab.n_real) if tab.rows[i][j] != 0), None)
            if k is not None:
                tab.obj = [ZERO] * tab.width
                tab.pivot(i, k)
    # phase 2
    sgn = -1 if inst.sense == "max" else 1
    c2 = [ZERO] * width
    for k, (j, s) in enumerate(tab.cols):
        c2[k] = sgn * s * inst.objective[j]
    tab.set_costs(c2)
    entering = tab.run(tab.n_real)
    xs = tab.point()
    primal = _to_original(tab, inst, xs)
    if entering is not None:
        d = [ZERO] * tab.width
        d[entering] = ONE
        for i, b in enumerate(tab.basis):
            d[b] = -tab.rows[i][entering]
        return LPSolution("unbounded", primal=primal, ray=_to_original(tab, inst, d),
                          pivots=tab.pivots)
    y = [sgn * s * v for s, v in zip(tab.flip, tab.duals())]
    value = sum((c * x for c, x in zip(inst.objective, primal)), ZERO)
    return LPSolution("optimal", value=value, primal=primal, dual=y, pivots=tab.pivots)


# ---------------------------------------------------------------- checkers

@dataclass(frozen=True)
class Violation:
    id: str
    kind: str       # sign | <= | = | >=
    slack: Fraction


def _row_value(c: Constraint, x) -> Fraction:
    return sum((a * x[j] for j, a in c.coeffs.items()), ZERO)


def check_feasible(inst: LPInstance, values) -> list[Violation]:
    """Exact feasibility check. ``values`` is a sequence aligned with the
    variables or a mapping keyed by variable id. Empty list iff feasible;
    slack is the signed amount by which the condition fails."""
    if isinstance(values, Mapping):
        unknown = set(values) - set(inst.var_ids)
        if unknown:
            raise KeyError(f"unknown variable ids: {sorted(unknown)}")
        x = [Fraction(values.get(v, 0)) for v in inst.var_ids]
    else:
        x = [Fraction(v) for v in values]
        if len(x) != inst.num_vars:
            raise ValueError("candidate length does not match variable count")
    out = []
    for vid, free, xv in zip(inst.var_ids, inst.free, x):
        if not free and xv < 0:
            out.append(Violation(vid, "sign", xv))
    for c in inst.constraints:
        lhs = _row_value(c, x)
        gap = lhs - c.rhs
        if (c.sense == "<=" and gap > 0) or (c.sense == ">=" and gap < 0) or \
                (c.sense == "=" and gap != 0):
            out.append(Violation(c.id, c.sense, gap))
    return out


def _column_products(inst: LPInstance, y) -> list[Fraction]:
    col = [ZERO] * inst.num_vars
    for c, yi in zip(inst.constraints, y):
        if yi:
            for j, a in c.coeffs.items():
                col[j] += a * yi
    return col


def dual_violations(inst: LPInstance, y) -> list[str]:
    """Dual-feasibility failures of multipliers y under the sense convention."""
    bad = []
    mx = inst.sense == "max"
    for c, yi in zip(inst.constraints, y):
        if c.sense == ">=" and (yi > 0 if mx else yi < 0):
            bad.append(c.id)
        if c.sense == "<=" and (yi < 0 if mx else yi > 0):
            bad.append(c.id)
    for vid, free, aty, cj in zip(inst.var_ids, inst.free, _column_products(inst, y),
                                  inst.objective):
        if free and aty != cj:
            bad.append(vid)
        elif not free and (aty < cj if mx else aty > cj):
            bad.append(vid)
    return bad


def check_duality(inst: LPInstance, sol: LPSolution) -> bool:
    """Primal feasible, dual feasible and equal objectives, all exact."""
    if sol.status != "optimal" or len(sol.dual) != len(inst.constraints):
        return False
    if check_feasible(inst, sol.primal):
        return False
    if dual_violations(inst, sol.dual):
        return False
    primal_obj = sum((c * x for c, x in zip(inst.objective, sol.primal)), ZERO)
    dual_obj = sum((c.rhs * y for c, y in zip(inst.constraints, sol.dual)), ZERO)
    return primal_obj == dual_obj == sol.value


def check_farkas(inst: LPInstance, y) -> bool:
    """y proves the constraint system infeasible."""
    if len(y) != len(inst.constraints):
        return False
    for c, yi in zip(inst.constraints, y):
        if (c.sense == ">=" and yi < 0) or (c.sense == "<=" and yi > 0):
            return False
    for free, aty in zip(inst.free, _column_products(inst, y)):
        if (free and aty != 0) or (not free and aty > 0):
            return False
    return sum((c.rhs * yi for c, yi in zip(inst.constraints, y)), ZERO) > 0


def check_unbounded(inst: LPInstance, point, ray) -> bool:
    """point is feasible and point + t*ray stays feasible with the objective
    improving without bound."""
    if check_feasible(inst, point):
        return False
    for free, d in zip(inst.free, ray):
        if not free and d < 0:
            return False
    for c in inst.constraints:
        a = _row_value(c, ray)
        if (c.sense == "<=" and a > 0) or (c.sense == ">=" and a < 0) or (c.sense == "=" and a != 0):
            return False
    gain = sum((c * d for c, d in zip(inst.objective, ray)), ZERO)
    return gain > 0 if inst.sense == "max" else gain < 0
