"""Exact rational linear programming.

A dense two-phase primal simplex working entirely in exact rational
arithmetic, plus the two conic primitives the rest of the package is built
on: membership of a vector in the nonnegative span of finitely many
generators (with a witness or a separating functional), and detection of a
vanishing nonnegative combination.

Every certificate returned by this module is re-checked by exact
substitution before it leaves; an unverifiable certificate is a solver bug
and raises, never a wrong answer.

The pivot kernel runs on gmpy2.mpq when available (same exact semantics as
Fraction, several times faster); the public interface speaks Fraction only.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .core import RationalLike, as_rational

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction

_ZERO = _Q(0)
_ONE = _Q(1)

# After this many consecutive pivots without objective progress the solver
# abandons the steepest-descent rule for Bland's rule, which cannot cycle.
_STALL_LIMIT = 40

_MAX_PIVOTS = 2_000_000


class LpError(RuntimeError):
    """Internal solver failure (certificate did not verify, pivot overrun)."""


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _to_frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _primitive(vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale a nonzero rational vector to coprime integers, preserving sign."""
    dens = 1
    for v in vec:
        dens = dens * v.denominator // gcd(dens, v.denominator)
    ints = [int(v * dens) for v in vec]
    g = 0
    for n in ints:
        g = gcd(g, abs(n))
    if g == 0:
        return tuple(Fraction(0) for _ in vec)
    return tuple(Fraction(n // g) for n in ints)


class _Tableau:
    """Simplex on min c.x s.t. A x = b, x >= 0, everything in mpq.

    Artificial columns are kept through phase 2 (banned from entering) so
    that they hold the basis inverse; duals and Farkas vectors are read off
    them directly.
    """

    def __init__(self, rows, rhs, cost):
        self.m = m = len(rows)
        self.n = n = len(cost)
        self.cost = cost
        self.flip = []
        self.tab = []
        for i in range(m):
            r = list(rows[i])
            b = rhs[i]
            if b < 0:
                r = [-v for v in r]
                b = -b
                self.flip.append(True)
            else:
                self.flip.append(False)
            r.extend([_ZERO] * m)
            r[n + i] = _ONE
            r.append(b)
            self.tab.append(r)
        self.width = n + m + 1
        self.basis = [n + i for i in range(m)]
        self.obj: list = []
        self.pivots = 0

    def _pivot(self, pr: int, pc: int) -> None:
        tab = self.tab
        prow = tab[pr]
        piv = prow[pc]
        if piv != 1:
            inv = _ONE / piv
            prow = [v * inv for v in prow]
            tab[pr] = prow
        for i in range(self.m):
            if i == pr:
                continue
            f = tab[i][pc]
            if f:
                row = tab[i]
                tab[i] = [a - f * b for a, b in zip(row, prow)]
        f = self.obj[pc]
        if f:
            self.obj = [a - f * b for a, b in zip(self.obj, prow)]
        self.basis[pr] = pc
        self.pivots += 1
        if self.pivots > _MAX_PIVOTS:
            raise LpError("pivot limit exceeded")

    def _set_objective(self, coeffs) -> None:
        # reduced-cost row for the current basis; last cell is -(value)
        obj = list(coeffs) + [_ZERO] * (self.width - len(coeffs))
        for i in range(self.m):
            cb = coeffs[self.basis[i]] if self.basis[i] < len(coeffs) else _ZERO
            if cb:
                row = self.tab[i]
                obj = [a - cb * b for a, b in zip(obj, row)]
        self.obj = obj

    def _run(self, ncols: int) -> Optional[int]:
        """Pivot to optimality over columns [0, ncols); None, or an entering
        column proving unboundedness."""
        bland = False
        stall = 0
        last = self.obj[-1]
        tab, basis = self.tab, self.basis
        while True:
            obj = self.obj
            pc = -1
            if bland:
                for j in range(ncols):
                    if obj[j] < 0:
                        pc = j
                        break
            else:
                best = _ZERO
                for j in range(ncols):
                    v = obj[j]
                    if v < best:
                        best = v
                        pc = j
            if pc < 0:
                return None
            pr = -1
            best_ratio = None
            for i in range(self.m):
                a = tab[i][pc]
                if a > 0:
                    ratio = tab[i][-1] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[pr])
                    ):
                        best_ratio = ratio
                        pr = i
            if pr < 0:
                return pc
            self._pivot(pr, pc)
            if self.obj[-1] == last:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                last = self.obj[-1]

    def solve(self):
        """Returns (status, x, y, ray).

        OPTIMAL: x primal solution, y row duals.
        INFEASIBLE: y is a Farkas vector (y.A <= 0 componentwise, y.b > 0).
        UNBOUNDED: ray r >= 0 with A r = 0 and c.r < 0.
        Duals refer to the rows as given (sign flips are undone).
        """
        m, n = self.m, self.n
        phase1 = [_ZERO] * n + [_ONE] * m
        self._set_objective(phase1)
        pc = self._run(n + m)
        if pc is not None:
            raise LpError("phase 1 cannot be unbounded")
        if -self.obj[-1] > 0:
            y = [_ONE - self.obj[n + i] for i in range(m)]
            y = [-v if f else v for v, f in zip(y, self.flip)]
            return LpStatus.INFEASIBLE, None, y, None
        # drive lingering artificials out of the (degenerate) basis
        for i in range(m):
            if self.basis[i] >= n:
                for j in range(n):
                    if self.tab[i][j] != 0:
                        self._pivot(i, j)
                        break
                # else: the row is redundant; its artificial stays basic at 0
        self._set_objective(list(self.cost))
        pc = self._run(n)
        if pc is not None:
            ray = [_ZERO] * n
            ray[pc] = _ONE
            for i in range(m):
                if self.basis[i] < n:
                    ray[self.basis[i]] = -self.tab[i][pc]
            return LpStatus.UNBOUNDED, None, None, ray
        x = [_ZERO] * n
        for i in range(m):
            if self.basis[i] < n:
                x[self.basis[i]] = self.tab[i][-1]
        y = []
        for i in range(m):
            s = _ZERO
            for k in range(m):
                bk = self.basis[k]
                if bk < n and self.cost[bk]:
                    s += self.cost[bk] * self.tab[k][n + i]
            y.append(-s if self.flip[i] else s)
        return LpStatus.OPTIMAL, x, y, None


def _solve_standard(rows, rhs, cost):
    return _Tableau(rows, rhs, cost).solve()


# -- general-form interface ---------------------------------------------------


class Relation(Enum):
    LE = "<="
    GE = ">="
    EQ = "=="

    @classmethod
    def parse(cls, text: str) -> "Relation":
        norm = {"<=": cls.LE, ">=": cls.GE, "==": cls.EQ, "=": cls.EQ}
        try:
            return norm[text]
        except KeyError:
            raise ValueError(f"unknown relation {text!r}") from None


@dataclass(frozen=True)
class LpOutcome:
    """Result of LinearSystem.solve, everything exact.

    `dual` and `farkas` are reported over the constraint rows as entered,
    and only when presolve consumed no rows (otherwise None).
    """

    status: LpStatus
    objective: Optional[Fraction] = None
    solution: Optional[tuple[Fraction, ...]] = None
    dual: Optional[tuple[Fraction, ...]] = None
    farkas: Optional[tuple[Fraction, ...]] = None
    ray: Optional[tuple[Fraction, ...]] = None


class LinearSystem:
    """A rational LP in inequality form.  Variables are free by default;
    lower bounds arrive as ordinary singleton constraint rows and are
    recognized during presolve, so `x >= 0` costs no extra simplex row.
    """

    def __init__(self, num_vars: int):
        if num_vars < 0:
            raise ValueError("negative variable count")
        self.num_vars = num_vars
        self._rows: list[tuple[tuple[Fraction, ...], Relation, Fraction]] = []
        self._cost: tuple[Fraction, ...] = tuple(Fraction(0) for _ in range(num_vars))
        self._sense = 1  # +1 minimize, -1 maximize

    def _vector(self, coeffs: Sequence[RationalLike]) -> tuple[Fraction, ...]:
        vec = tuple(as_rational(c) for c in coeffs)
        if len(vec) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} coefficients, got {len(vec)}")
        return vec

    def minimize(self, coeffs: Sequence[RationalLike]) -> "LinearSystem":
        self._cost = self._vector(coeffs)
        self._sense = 1
        return self

    def maximize(self, coeffs: Sequence[RationalLike]) -> "LinearSystem":
        self._cost = self._vector(coeffs)
        self._sense = -1
        return self

    def add_constraint(
        self, coeffs: Sequence[RationalLike], relation: str, rhs: RationalLike
    ) -> "LinearSystem":
        self._rows.append((self._vector(coeffs), Relation.parse(relation), as_rational(rhs)))
        return self

    def solve(self) -> LpOutcome:
        n = self.num_vars
        lower: list[Optional[Fraction]] = [None] * n
        fixed: list[Optional[Fraction]] = [None] * n
        consumed: set[int] = set()

        for idx, (coeffs, rel, rhs) in enumerate(self._rows):
            nz = [j for j, c in enumerate(coeffs) if c != 0]
            if len(nz) != 1:
                continue
            j = nz[0]
            a = coeffs[j]
            if rel is Relation.EQ:
                if fixed[j] is None:
                    fixed[j] = rhs / a
                    consumed.add(idx)
            elif (rel is Relation.GE and a > 0) or (rel is Relation.LE and a < 0):
                bound = rhs / a
                if lower[j] is None or bound > lower[j]:
                    lower[j] = bound
                consumed.add(idx)
            # upper-bound singletons stay as ordinary rows

        for j in range(n):
            if fixed[j] is not None and lower[j] is not None and fixed[j] < lower[j]:
                return LpOutcome(status=LpStatus.INFEASIBLE)

        # map original variables to standard (nonnegative) columns
        shift: list[Fraction] = [Fraction(0)] * n
        col_of: list[Optional[int]] = [None] * n
        neg_col_of: list[Optional[int]] = [None] * n
        ncols = 0
        for j in range(n):
            if fixed[j] is not None:
                shift[j] = fixed[j]
                continue
            if lower[j] is not None:
                shift[j] = lower[j]
                col_of[j] = ncols
                ncols += 1
            else:
                col_of[j] = ncols
                neg_col_of[j] = ncols + 1
                ncols += 2

        std_rows: list[list] = []
        std_rhs: list = []
        kept: list[int] = []  # original index of each standard row
        for idx, (coeffs, rel, rhs) in enumerate(self._rows):
            if idx in consumed:
                continue
            rhs_adj = rhs - sum(c * shift[j] for j, c in enumerate(coeffs) if c != 0)
            row = [_ZERO] * ncols
            blank = True
            for j, c in enumerate(coeffs):
                if c == 0 or col_of[j] is None:
                    continue
                blank = False
                q = _Q(c.numerator, c.denominator)
                row[col_of[j]] += q
                if neg_col_of[j] is not None:
                    row[neg_col_of[j]] -= q
            if blank:
                ok = (
                    rhs_adj == 0
                    if rel is Relation.EQ
                    else rhs_adj <= 0 if rel is Relation.GE else rhs_adj >= 0
                )
                if not ok:
                    return LpOutcome(status=LpStatus.INFEASIBLE)
                continue  # tautology after substitution
            std_rows.append(row)
            std_rhs.append(_Q(rhs_adj.numerator, rhs_adj.denominator))
            kept.append(idx)

        # slack/surplus columns
        nslack = sum(1 for i in kept if self._rows[i][1] is not Relation.EQ)
        width = ncols + nslack
        s = ncols
        for r, i in enumerate(kept):
            std_rows[r].extend([_ZERO] * (width - len(std_rows[r])))
            rel = self._rows[i][1]
            if rel is Relation.LE:
                std_rows[r][s] = _ONE
                s += 1
            elif rel is Relation.GE:
                std_rows[r][s] = -_ONE
                s += 1

        cost_std = [_ZERO] * width
        for j in range(n):
            if col_of[j] is None:
                continue
            c = self._cost[j] * self._sense
            if c == 0:
                continue
            q = _Q(c.numerator, c.denominator)
            cost_std[col_of[j]] += q
            if neg_col_of[j] is not None:
                cost_std[neg_col_of[j]] -= q

        status, x_std, y_std, ray_std = _solve_standard(std_rows, std_rhs, cost_std)

        if status is LpStatus.INFEASIBLE:
            farkas = None
            if not consumed:
                full = [Fraction(0)] * len(self._rows)
                for r, i in enumerate(kept):
                    full[i] = _to_frac(y_std[r])
                farkas = tuple(full)
            return LpOutcome(status=status, farkas=farkas)

        def restore(vec) -> tuple[Fraction, ...]:
            out = []
            for j in range(n):
                v = shift[j]
                if col_of[j] is not None:
                    v = v + _to_frac(vec[col_of[j]])
                if neg_col_of[j] is not None:
                    v = v - _to_frac(vec[neg_col_of[j]])
                out.append(v)
            return tuple(out)

        if status is LpStatus.UNBOUNDED:
            ray = []
            for j in range(n):
                v = Fraction(0)
                if col_of[j] is not None:
                    v = v + _to_frac(ray_std[col_of[j]])
                if neg_col_of[j] is not None:
                    v = v - _to_frac(ray_std[neg_col_of[j]])
                ray.append(v)
            return LpOutcome(status=status, ray=tuple(ray))

        solution = restore(x_std)
        objective = sum((c * v for c, v in zip(self._cost, solution)), Fraction(0))
        dual = None
        if not consumed:
            full = [Fraction(0)] * len(self._rows)
            for r, i in enumerate(kept):
                full[i] = _to_frac(y_std[r]) * self._sense
            dual = tuple(full)
        return LpOutcome(
            status=status, objective=objective, solution=solution, dual=dual
        )


# -- conic primitives ---------------------------------------------------------


@dataclass(frozen=True)
class ConicResult:
    """Membership of a target in the nonnegative span of the generators.

    Exactly one of `witness` (coefficients, one per generator, with
    sum(l_k g_k) == target and l >= 0) and `separator` (a vector y with
    y.g >= 0 for every generator and y.target < 0) is set.
    """

    member: bool
    witness: Optional[tuple[Fraction, ...]] = None
    separator: Optional[tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class VanishingResult:
    """Existence of a nonzero nonnegative combination summing to zero."""

    exists: bool
    combination: Optional[tuple[Fraction, ...]] = None


def _check_dims(generators, target_len: Optional[int]) -> int:
    dims = {len(g) for g in generators}
    if target_len is not None:
        dims.add(target_len)
    if len(dims) != 1:
        raise ValueError("generators and target must share one dimension")
    (dim,) = dims
    if dim == 0:
        raise ValueError("dimension must be at least 1")
    return dim


def verify_witness(generators, target, witness) -> bool:
    """Exact re-substitution: witness >= 0 and sum(w_k g_k) == target."""
    if len(witness) != len(generators) or any(w < 0 for w in witness):
        return False
    dim = len(target)
    total = [Fraction(0)] * dim
    for w, g in zip(witness, generators):
        if w:
            for i in range(dim):
                total[i] += w * g[i]
    return all(total[i] == target[i] for i in range(dim))


def verify_separator(generators, target, separator) -> bool:
    """Exact check: separator.g >= 0 for all generators, separator.target < 0."""
    dot = lambda u, v: sum((a * b for a, b in zip(u, v)), Fraction(0))
    if any(dot(separator, g) < 0 for g in generators):
        return False
    return dot(separator, target) < 0


def conic_membership(
    target: Sequence[Fraction], generators: Sequence[Sequence[Fraction]]
) -> ConicResult:
    """Decide target in { sum l_k g_k : l >= 0 }, with certificate.

    The zero target is rejected: whether the cone is pointed is a
    different question, answered by contains_zero below.
    """
    dim = _check_dims(generators, len(target))
    tgt = [as_rational(v) for v in target]
    if all(v == 0 for v in tgt):
        raise LpError("zero target is not a membership query; use contains_zero")
    gens = [[as_rational(v) for v in g] for g in generators]

    if not gens:
        sep = _primitive([-v for v in tgt])
        if not verify_separator([], tgt, sep):
            raise LpError("separator failed verification")
        return ConicResult(member=False, separator=sep)

    rows = [[_Q(g[i].numerator, g[i].denominator) for g in gens] for i in range(dim)]
    rhs = [_Q(v.numerator, v.denominator) for v in tgt]
    cost = [_ZERO] * len(gens)
    status, x, y, _ = _solve_standard(rows, rhs, cost)
    if status is LpStatus.OPTIMAL:
        witness = tuple(_to_frac(v) for v in x)
        if not verify_witness(gens, tgt, witness):
            raise LpError("witness failed verification")
        return ConicResult(member=True, witness=witness)
    if status is LpStatus.INFEASIBLE:
        separator = _primitive([-_to_frac(v) for v in y])
        if not verify_separator(gens, tgt, separator):
            raise LpError("separator failed verification")
        return ConicResult(member=False, separator=separator)
    raise LpError("conic membership cannot be unbounded")  # pragma: no cover


def contains_zero(generators: Sequence[Sequence[Fraction]]) -> VanishingResult:
    """Is there l >= 0, l != 0, with sum l_k g_k = 0?

    Normalized as sum(l) = 1, which loses no generality for a cone.
    """
    if not generators:
        return VanishingResult(exists=False)
    dim = _check_dims(generators, None)
    gens = [[as_rational(v) for v in g] for g in generators]
    rows = [[_Q(g[i].numerator, g[i].denominator) for g in gens] for i in range(dim)]
    rows.append([_ONE] * len(gens))
    rhs = [_ZERO] * dim + [_ONE]
    cost = [_ZERO] * len(gens)
    status, x, _, _ = _solve_standard(rows, rhs, cost)
    if status is LpStatus.INFEASIBLE:
        return VanishingResult(exists=False)
    combo = tuple(_to_frac(v) for v in x)
    zero = [Fraction(0)] * dim
    if sum(combo) != 1 or not verify_witness(gens, zero, combo):
        raise LpError("vanishing combination failed verification")
    return VanishingResult(exists=True, combination=combo)
