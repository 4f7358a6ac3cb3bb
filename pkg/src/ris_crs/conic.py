"""Minimal conic-program layer: linear objective, affine cone constraints.

A problem is a list of blocks, each an affine map `rows(x) in cone` with cone
tag zero / nonneg / soc / rsoc / exp. Everything is real-valued; complex
quantities must be pre-expanded by the caller (see complex_row_pair). The
solver backend is pluggable; the shipped backend adapts Clarabel.

Cone conventions (v = block row values):
  zero    v = 0
  nonneg  v >= 0
  soc     v[0] >= ||v[1:]||
  rsoc    2 v[0] v[1] >= ||v[2:]||^2, v[0], v[1] >= 0
  exp     v[1] * exp(v[0]/v[1]) <= v[2], v[1] > 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np
from scipy import sparse

ZERO = "zero"
NONNEG = "nonneg"
SOC = "soc"
RSOC = "rsoc"
EXP = "exp"
CONES = (ZERO, NONNEG, SOC, RSOC, EXP)

LN2 = math.log(2.0)

DEFAULT_TOL = 1e-8


class Lin:
    """Real affine expression: sum of coeff * x[i] plus a constant.

    Supports +, -, and scalar *; build variables with ConicProblem.add_var.
    """

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict[int, float] | None = None,
                 const: float = 0.0):
        self.coeffs = dict(coeffs) if coeffs else {}
        self.const = float(const)

    @classmethod
    def constant(cls, value: float) -> "Lin":
        return cls(None, value)

    def copy(self) -> "Lin":
        return Lin(self.coeffs, self.const)

    def __add__(self, other):
        out = self.copy()
        if isinstance(other, Lin):
            for i, c in other.coeffs.items():
                out.coeffs[i] = out.coeffs.get(i, 0.0) + c
            out.const += other.const
        elif isinstance(other, Real):
            out.const += float(other)
        else:
            return NotImplemented
        return out

    __radd__ = __add__

    def __neg__(self):
        return Lin({i: -c for i, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Lin) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        if not isinstance(s, Real):
            return NotImplemented
        s = float(s)
        return Lin({i: c * s for i, c in self.coeffs.items()}, self.const * s)

    __rmul__ = __mul__

    def evaluate(self, x: np.ndarray) -> float:
        return self.const + sum(c * x[i] for i, c in self.coeffs.items())

    def max_index(self) -> int:
        return max(self.coeffs, default=-1)


def lin_sum(terms) -> Lin:
    out = Lin()
    for t in terms:
        out = out + t
    return out


def complex_row_pair(coeffs: np.ndarray, re_vars: list[Lin],
                     im_vars: list[Lin], offset: complex = 0j) -> tuple[Lin, Lin]:
    """Expand the complex affine form sum_j coeffs[j] * z_j + offset, with
    z_j = re_vars[j] + i * im_vars[j], into its (real, imag) rows."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if len(coeffs) != len(re_vars) or len(coeffs) != len(im_vars):
        raise ValueError("coefficient/variable length mismatch")
    re = Lin.constant(offset.real)
    im = Lin.constant(offset.imag)
    for c, xr, xi in zip(coeffs, re_vars, im_vars):
        re = re + c.real * xr - c.imag * xi
        im = im + c.imag * xr + c.real * xi
    return re, im


@dataclass
class ConeBlock:
    cone: str
    rows: list[Lin]
    label: str = ""


@dataclass
class SolveResult:
    status: str  # optimal / infeasible / unbounded / max_iter / numerical_failure
    x: np.ndarray | None
    objective_value: float | None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class ConicProblem:
    """Builder for `maximize c^T x subject to cone blocks`."""

    def __init__(self):
        self.var_names: list[str] = []
        self.blocks: list[ConeBlock] = []
        self.objective: Lin = Lin()

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    def add_var(self, name: str = "") -> Lin:
        idx = len(self.var_names)
        self.var_names.append(name or f"x{idx}")
        return Lin({idx: 1.0})

    def add_vars(self, n: int, prefix: str) -> list[Lin]:
        return [self.add_var(f"{prefix}{j}") for j in range(n)]

    def set_objective(self, expr: Lin) -> None:
        """Objective to maximize."""
        self._check_rows([expr])
        self.objective = expr.copy()

    def add_block(self, cone: str, rows: list[Lin], label: str = "") -> int:
        """Constrain rows(x) to lie in the cone; returns the block handle."""
        if cone not in CONES:
            raise ValueError(f"unknown cone {cone!r}")
        rows = [r.copy() if isinstance(r, Lin) else Lin.constant(r)
                for r in rows]
        if not rows:
            raise ValueError("a cone block needs at least one row")
        if cone == SOC and len(rows) < 2:
            raise ValueError("second-order cone blocks need length >= 2")
        if cone == RSOC and len(rows) < 2:
            raise ValueError("rotated cone blocks need length >= 2")
        if cone == EXP and len(rows) != 3:
            raise ValueError("exponential cone blocks need length exactly 3")
        self._check_rows(rows)
        self.blocks.append(ConeBlock(cone, rows, label))
        return len(self.blocks) - 1

    def _check_rows(self, rows) -> None:
        for r in rows:
            if r.max_index() >= self.num_vars:
                raise ValueError("row references an undeclared variable")

    def block_values(self, handle: int, x: np.ndarray) -> np.ndarray:
        blk = self.blocks[handle]
        return np.array([r.evaluate(x) for r in blk.rows])

    def residuals(self, x: np.ndarray) -> list[float]:
        """Violation magnitude of every block at x (0 = satisfied)."""
        out = []
        for i, blk in enumerate(self.blocks):
            v = self.block_values(i, x)
            out.append(_cone_violation(blk.cone, v))
        return out


def _cone_violation(cone: str, v: np.ndarray) -> float:
    if cone == ZERO:
        return float(np.max(np.abs(v))) if v.size else 0.0
    if cone == NONNEG:
        return float(max(0.0, -np.min(v)))
    if cone == SOC:
        return float(max(0.0, np.linalg.norm(v[1:]) - v[0]))
    if cone == RSOC:
        miss = np.dot(v[2:], v[2:]) - 2.0 * v[0] * v[1]
        return float(max(0.0, miss, -v[0], -v[1]))
    # exp: v[1] e^{v[0]/v[1]} <= v[2]; boundary case v[1] -> 0 needs v[0] <= 0
    x, y, z = v
    if y > 0:
        return float(max(0.0, y * math.exp(min(x / y, 700.0)) - z, -z))
    return float(max(0.0, x, -z, -y))


def add_exp_rate_constraint(problem: ConicProblem, alpha_var: Lin,
                            rho_var: Lin, label: str = "") -> int:
    """Encode 2^alpha <= 1 + rho via the exponential cone: the triple
    (alpha ln 2, 1, 1 + rho) is constrained to exp-cone membership."""
    if not isinstance(alpha_var, Lin) or not isinstance(rho_var, Lin):
        raise ValueError("alpha_var and rho_var must be Lin expressions")
    return problem.add_block(
        EXP, [alpha_var * LN2, Lin.constant(1.0), rho_var + 1.0], label)


def add_quadratic_upper_bound(problem: ConicProblem, rows: list[Lin],
                              bound, label: str = "") -> int:
    """Constrain ||rows(x)||^2 <= bound (affine), as a rotated cone.

    A zero-length expression degenerates to 0 <= bound.
    """
    bound = bound if isinstance(bound, Lin) else Lin.constant(bound)
    if not rows:
        return problem.add_block(NONNEG, [bound], label)
    return problem.add_block(RSOC, [bound, Lin.constant(0.5), *rows], label)


class ClarabelBackend:
    """Adapter to the Clarabel interior-point solver."""

    name = "clarabel"

    def solve(self, problem: ConicProblem, tol: float) -> SolveResult:
        import clarabel

        n = problem.num_vars
        q = np.zeros(n)
        for i, c in problem.objective.coeffs.items():
            q[i] = -c  # clarabel minimizes

        # Clarabel form: A x + s = b, s in K  =>  rows F x + g in K give
        # A = -F, b = g.
        data, rind, cind = [], [], []
        b = []
        cones = []
        nrow = 0
        for blk in problem.blocks:
            rows = blk.rows
            if blk.cone == RSOC:
                u, v, w = rows[0], rows[1], rows[2:]
                rows = [u + v, u - v] + [r * math.sqrt(2.0) for r in w]
            for r in rows:
                for i, c in r.coeffs.items():
                    if c != 0.0:
                        data.append(-c)
                        rind.append(nrow)
                        cind.append(i)
                b.append(r.const)
                nrow += 1
            k = len(rows)
            if blk.cone == ZERO:
                cones.append(clarabel.ZeroConeT(k))
            elif blk.cone == NONNEG:
                cones.append(clarabel.NonnegativeConeT(k))
            elif blk.cone in (SOC, RSOC):
                cones.append(clarabel.SecondOrderConeT(k))
            else:
                cones.append(clarabel.ExponentialConeT())

        A = sparse.csc_matrix((data, (rind, cind)), shape=(nrow, n))
        P = sparse.csc_matrix((n, n))
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.tol_gap_abs = tol
        settings.tol_gap_rel = tol
        settings.tol_feas = tol
        # small static regularization: the SCA subproblems carry rate-scale
        # objectives far below the default regularization at low SNR
        settings.static_regularization_constant = 1e-10
        try:
            solver = clarabel.DefaultSolver(P, q, A, np.array(b), cones,
                                            settings)
            sol = solver.solve()
        except BaseException:
            return SolveResult("numerical_failure", None, None)
        status = _STATUS_MAP.get(str(sol.status), "numerical_failure")
        x = np.asarray(sol.x, dtype=float)
        if x.shape != (n,) or not np.all(np.isfinite(x)):
            x = None
        if status != "optimal":
            # keep the last iterate: callers with their own feasibility
            # checks may still be able to use it
            return SolveResult(status, x, None)
        return SolveResult("optimal", x, problem.objective.evaluate(x))


_STATUS_MAP = {
    "Solved": "optimal",
    "AlmostSolved": "optimal",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
    "MaxIterations": "max_iter",
    "MaxTime": "max_iter",
}

_DEFAULT_BACKEND = ClarabelBackend()


def solve(problem: ConicProblem, tol: float = DEFAULT_TOL,
          backend=None) -> SolveResult:
    """Solve the problem; failures are reported in the result status."""
    backend = backend or _DEFAULT_BACKEND
    return backend.solve(problem, tol)


def dump(problem: ConicProblem) -> str:
    """Text dump of variables, objective, and cone blocks (debug aid)."""
    lines = [f"vars ({problem.num_vars}): {' '.join(problem.var_names)}"]
    lines.append(f"maximize {_fmt_lin(problem, problem.objective)}")
    for i, blk in enumerate(problem.blocks):
        head = f"[{i}] {blk.cone}" + (f" '{blk.label}'" if blk.label else "")
        lines.append(head)
        for r in blk.rows:
            lines.append(f"    {_fmt_lin(problem, r)}")
    return "\n".join(lines)


def _fmt_lin(problem: ConicProblem, lin: Lin) -> str:
    parts = [f"{c:+.6g}*{problem.var_names[i]}"
             for i, c in sorted(lin.coeffs.items())]
    if lin.const or not parts:
        parts.append(f"{lin.const:+.6g}")
    return " ".join(parts)
