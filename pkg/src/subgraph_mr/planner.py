"""Communication-cost planning: cost expressions, shares, reducer counts."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg, optimize

from .cq import ConjunctiveQuery, CQSet
from .graph import SampleGraph

log = logging.getLogger(__name__)

KKT_TOL = 1e-8


class StructuralError(ValueError):
    """Inputs do not meet a closed form's structural assumptions."""


# ---------------------------------------------------------------- expressions


def _subgoal_sets(subgoals: Sequence[tuple[int, int]], p: int) -> list[frozenset[int]]:
    occ: list[set[int]] = [set() for _ in range(p)]
    for i, (a, b) in enumerate(subgoals):
        occ[a].add(i)
        occ[b].add(i)
    return [frozenset(o) for o in occ]


def dominated_variables(cq: ConjunctiveQuery | SampleGraph) -> set[int]:
    """Variables whose share can be fixed at 1.

    ``A`` is dominated by ``B`` when every subgoal containing ``A`` also
    contains ``B``.  When two variables occur in exactly the same subgoals
    the later one is dominated, so the first survives.
    """
    edges = cq.subgoals if isinstance(cq, ConjunctiveQuery) else cq.edges
    p = cq.p
    occ = _subgoal_sets(edges, p)
    out = set()
    for a in range(p):
        for b in range(p):
            if a == b:
                continue
            if occ[a] < occ[b] or (occ[a] == occ[b] and b < a):
                out.add(a)
                break
    return out


@dataclass(frozen=True)
class CostExpression:
    """``cost = e * sum(coef * prod(shares))``, one term per subgoal."""

    names: tuple[str, ...]
    terms: tuple[tuple[int, frozenset], ...]
    dominated: frozenset = frozenset()
    labels: tuple[str, ...] = ()
    mode: str = "single"

    @property
    def free(self) -> list[int]:
        return [v for v in range(len(self.names)) if v not in self.dominated]

    def value(self, shares: Sequence[float]) -> float:
        """Per-edge replication: the expression divided by ``e``."""
        return float(sum(c * math.prod(shares[v] for v in vs) for c, vs in self.terms))

    def term_values(self, shares: Sequence[float]) -> list[float]:
        return [c * math.prod(shares[v] for v in vs) for c, vs in self.terms]

    def subset_sums(self, shares: Sequence[float]) -> dict[int, float]:
        """For each free variable, the sum of the terms containing its share."""
        tv = self.term_values(shares)
        return {v: sum(t for t, (_, vs) in zip(tv, self.terms) if v in vs) for v in self.free}

    def render(self) -> str:
        low = [n.lower() for n in self.names]
        sep = "" if all(len(n) == 1 for n in low) else "*"
        parts = []
        for c, vs in self.terms:
            mono = sep.join(low[v] for v in sorted(vs)) or "1"
            parts.append(mono if c == 1 else f"{c}{mono}" if mono != "1" else str(c))
        return "e*(" + " + ".join(parts) + ")"

    __str__ = render

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "terms": [{"coefficient": c, "shares": [self.names[v] for v in sorted(vs)], "subgoal": lab}
                      for (c, vs), lab in zip(self.terms, self.labels or [""] * len(self.terms))],
            "dominated": [self.names[v] for v in sorted(self.dominated)],
            "text": self.render(),
        }


def _expr(names, edges, coefs, mode, labels) -> CostExpression:
    p = len(names)
    dom = dominated_variables_from_edges(edges, p)
    free = [v for v in range(p) if v not in dom]
    terms = tuple((c, frozenset(v for v in free if v not in (a, b))) for c, (a, b) in zip(coefs, edges))
    return CostExpression(tuple(names), terms, frozenset(dom), tuple(labels), mode)


def dominated_variables_from_edges(edges, p: int) -> set[int]:
    return dominated_variables(ConjunctiveQuery(tuple(f"v{i}" for i in range(p)), tuple(edges)))


def cost_expression(cqs: CQSet | ConjunctiveQuery | Sequence[ConjunctiveQuery], mode: str = "single") -> CostExpression:
    """Cost expression for one CQ or, variable-oriented, for a whole group."""
    if isinstance(cqs, ConjunctiveQuery):
        queries = [cqs]
    else:
        queries = list(cqs)
    if not queries:
        raise ValueError("no queries")
    q0 = queries[0]
    names = q0.names
    if mode == "single":
        if len(queries) != 1:
            raise StructuralError("single mode takes exactly one CQ")
        labels = [f"E({names[a]},{names[b]})" for a, b in q0.subgoals]
        return _expr(names, q0.subgoals, [1] * len(q0.subgoals), mode, labels)
    if mode != "variable-oriented":
        raise ValueError(f"unknown mode {mode!r}")
    base = [frozenset(sg) for sg in q0.subgoals]
    for q in queries[1:]:
        if q.names != names or [frozenset(sg) for sg in q.subgoals] != base:
            raise StructuralError("queries do not share a subgoal list up to argument order")
    coefs, labels = [], []
    for i, sg in enumerate(q0.subgoals):
        dirs = {q.subgoals[i] for q in queries}
        coefs.append(2 if len(dirs) == 2 else 1)
        a, b = sorted(sg) if len(dirs) == 2 else sg
        labels.append(f"E({names[a]},{names[b]})" + ("+rev" if len(dirs) == 2 else ""))
    return _expr(names, q0.subgoals, coefs, mode, labels)


def cost_expression_from_edges(s: SampleGraph, bidirectional: Iterable[tuple[int, int]] = ()) -> CostExpression:
    """Variable-oriented expression with coefficient 2 on the given sample edges."""
    bi = {frozenset(e) for e in bidirectional}
    coefs = [2 if frozenset(e) in bi else 1 for e in s.edges]
    labels = [f"E({s.names[a]},{s.names[b]})" for a, b in s.edges]
    return _expr(s.names, s.edges, coefs, "variable-oriented", labels)


def bidirectional_edges(cqs: CQSet | Sequence[ConjunctiveQuery]) -> list[tuple[int, int]]:
    queries = list(cqs)
    out = []
    for i, sg in enumerate(queries[0].subgoals):
        if len({q.subgoals[i] for q in queries}) == 2:
            out.append(tuple(sorted(sg)))
    return out


# ---------------------------------------------------------------- shares


@dataclass(frozen=True)
class ShareAssignment:
    names: tuple[str, ...]
    shares: tuple[float, ...]
    k: float
    cost_per_edge: float | None = None
    expression: CostExpression | None = field(default=None, repr=False, compare=False)
    multiplier: float | None = None
    kkt_residual: float | None = None

    def share(self, name: str) -> float:
        return self.shares[self.names.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.shares))

    def product(self) -> float:
        return float(math.prod(self.shares))

    def per_subgoal(self) -> list[float]:
        if self.expression is None:
            return []
        return self.expression.term_values(self.shares)

    def rounded(self) -> "ShareAssignment":
        """Nearest integers, at least 1, with the realized cost and reducer count."""
        ints = tuple(max(1, int(round(s))) for s in self.shares)
        cost = self.expression.value(ints) if self.expression is not None else None
        return ShareAssignment(self.names, ints, math.prod(ints), cost, self.expression)

    def to_json(self) -> dict:
        d = {
            "shares": self.as_dict(),
            "k": self.k,
            "reducers": self.product(),
            "cost_per_edge": self.cost_per_edge,
        }
        if self.expression is not None:
            d["per_subgoal"] = dict(zip(self.expression.labels, self.per_subgoal()))
            d["expression"] = self.expression.render()
        if self.multiplier is not None:
            d["lagrange_multiplier"] = self.multiplier
            d["kkt_residual"] = self.kkt_residual
        return d


def _check_k(k: float) -> None:
    if not (k >= 1):
        raise ValueError(f"reducer budget k must be >= 1, got {k}")


def _incidence(expr: CostExpression, free: list[int]) -> tuple[np.ndarray, np.ndarray]:
    pos = {v: i for i, v in enumerate(free)}
    A = np.zeros((len(expr.terms), len(free)))
    c = np.zeros(len(expr.terms))
    for t, (coef, vs) in enumerate(expr.terms):
        c[t] = coef
        for v in vs:
            A[t, pos[v]] = 1.0
    return A, c


def _kkt(A, c, y, logk, floor_tol=1e-12):
    """Multiplier and relative stationarity residual at ``y``."""
    tv = c * np.exp(A @ y)
    g = A.T @ tv
    inner = y > floor_tol
    lam = float(np.mean(g[inner])) if inner.any() else float(np.min(g))
    res = np.abs(g[inner] - lam) if inner.any() else np.zeros(0)
    # variables held at the floor need g >= lam
    low = np.maximum(lam - g[~inner], 0.0)
    scale = max(abs(lam), 1e-300)
    r = max(float(res.max(initial=0.0)), float(low.max(initial=0.0))) / scale
    r = max(r, abs(float(y.sum()) - logk) / max(1.0, logk))
    return lam, r


def _newton_polish(A, c, y, logk, iters=50):
    n = len(y)
    for _ in range(iters):
        inner = y > 1e-12
        idx = np.flatnonzero(inner)
        if idx.size == 0:
            break
        tv = c * np.exp(A @ y)
        g = A.T @ tv
        H = (A.T * tv) @ A
        lam = float(np.mean(g[idx]))
        m = idx.size
        J = np.zeros((m + 1, m + 1))
        J[:m, :m] = H[np.ix_(idx, idx)]
        J[:m, m] = -1.0
        J[m, :m] = 1.0
        F = np.concatenate([g[idx] - lam, [y.sum() - logk]])
        step = linalg.lstsq(J, -F)[0]
        ynew = y.copy()
        ynew[idx] += step[:m]
        if np.any(ynew < -1e-12):
            # a variable wants to leave through the floor; stop and let the caller keep SLSQP's answer
            break
        y = np.maximum(ynew, 0.0)
        if np.max(np.abs(step[:m])) < 1e-15 * max(1.0, logk):
            break
    return y


def _min_variance(A, y, logk):
    """Among optimal points ``y + N z`` (cost unchanged) pick the smallest spread."""
    M = np.vstack([A, np.ones((1, A.shape[1]))])
    N = linalg.null_space(M)
    if N.shape[1] == 0:
        return y
    res = optimize.minimize(
        lambda z: float(np.sum((y + N @ z) ** 2)),
        np.zeros(N.shape[1]),
        jac=lambda z: 2.0 * N.T @ (y + N @ z),
        constraints=[{"type": "ineq", "fun": lambda z: y + N @ z, "jac": lambda z: N}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    z = res.x if res.success else np.zeros(N.shape[1])
    return np.maximum(y + N @ z, 0.0)


def optimize_shares(expr: CostExpression, k: float) -> ShareAssignment:
    """Minimize ``expr`` subject to ``prod(shares) = k`` and shares >= 1.

    Works on log-shares, where the cost is a convex sum of exponentials.
    SLSQP from uniform shares, then Newton on the KKT system; flat optimal
    directions are resolved toward equal log-shares.
    """
    _check_k(k)
    names = expr.names
    free = expr.free
    p = len(names)
    logk = math.log(k)
    if not free:
        if k != 1:
            raise StructuralError("no free share variables; only k = 1 is attainable")
        ones = tuple(1.0 for _ in range(p))
        return ShareAssignment(names, ones, 1.0, expr.value(ones), expr, None, 0.0)
    A, c = _incidence(expr, free)
    n = len(free)
    y0 = np.full(n, logk / n)
    if n == 1 or logk == 0.0:
        y = y0
    else:
        def f(y):
            return float(c @ np.exp(A @ y))

        def grad(y):
            return A.T @ (c * np.exp(A @ y))

        res = optimize.minimize(
            f, y0, jac=grad, method="SLSQP",
            bounds=[(0.0, None)] * n,
            constraints=[{"type": "eq", "fun": lambda y: y.sum() - logk, "jac": lambda y: np.ones(n)}],
            options={"ftol": 1e-14, "maxiter": 1000},
        )
        y = np.maximum(res.x, 0.0)
        y *= logk / y.sum() if y.sum() > 0 else 1.0
        y = _newton_polish(A, c, y, logk)
        y = _min_variance(A, y, logk)
        y = _newton_polish(A, c, y, logk)
    lam, r = _kkt(A, c, y, logk)
    if r > KKT_TOL:
        log.warning("KKT residual %.3g above tolerance", r)
    shares = [1.0] * p
    for i, v in enumerate(free):
        shares[v] = float(math.exp(y[i]))
    shares_t = tuple(shares)
    return ShareAssignment(names, shares_t, float(k), expr.value(shares_t), expr, lam, r)


def regular_shares(p: int, k: float, expr: CostExpression | None = None) -> ShareAssignment:
    """Every node of a regular sample gets the ``p``-th root of ``k``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    _check_k(k)
    s = float(k) ** (1.0 / p)
    names = expr.names if expr is not None else tuple(f"X{i}" for i in range(1, p + 1))
    shares = tuple(s for _ in range(p))
    return ShareAssignment(names, shares, float(k), expr.value(shares) if expr else None, expr)


def mixed_partition(s: SampleGraph, bidirectional: Iterable[tuple[int, int]]) -> tuple[str, frozenset] | None:
    """A split ``(case, S1)`` meeting case (a) or (b) of the 2:1 share rule, if any."""
    bi = {frozenset(e) for e in bidirectional}
    edges = [frozenset(e) for e in s.edges]
    for case in ("a", "b"):
        for r in range(s.p + 1):
            for s1 in itertools.combinations(range(s.p), r):
                S1 = frozenset(s1)
                ok = True
                for e in edges:
                    inside = len(e & S1)
                    if case == "a":
                        want = 2 if e in bi else 1
                    else:
                        want = 1 if e in bi else 0
                    if inside != want:
                        ok = False
                        break
                if ok:
                    return case, S1
    return None


def regular_mixed_shares(s: SampleGraph, bidirectional: Iterable[tuple[int, int]], k: float) -> ShareAssignment:
    """Closed form for regular samples whose edges split as case (a) or (b):
    nodes in S1 get twice the share of nodes in S2."""
    _check_k(k)
    bi = [tuple(e) for e in bidirectional]
    expr = cost_expression_from_edges(s, bi)
    if len(set(s.degrees())) != 1:
        raise StructuralError("sample graph is not regular; use optimize_shares")
    if not bi:
        return regular_shares(s.p, k, expr)
    found = mixed_partition(s, bi)
    if found is None:
        raise StructuralError("no S1/S2 split satisfies case (a) or (b); use optimize_shares")
    _, S1 = found
    t = (float(k) / 2 ** len(S1)) ** (1.0 / s.p)
    shares = tuple(2 * t if v in S1 else t for v in range(s.p))
    return ShareAssignment(s.names, shares, float(k), expr.value(shares), expr)


@dataclass(frozen=True)
class SymbolicPlan:
    """Exact totals for a plan with integer shares and a symbolic edge count."""

    shares: dict
    k: int
    m: int
    per_edge: Fraction
    total_communication: Fraction
    per_reducer_load: Fraction


def symbolic_plan(plan: ShareAssignment, m: int) -> SymbolicPlan:
    """Round shares and evaluate communication exactly for ``m`` edges."""
    r = plan.rounded()
    ints = [int(x) for x in r.shares]
    per_edge = Fraction(sum(c * math.prod(ints[v] for v in vs) for c, vs in plan.expression.terms))
    k = math.prod(ints)
    total = per_edge * m
    return SymbolicPlan(dict(zip(plan.names, ints)), k, m, per_edge, total, total / k)


# ---------------------------------------------------------------- closed forms


def replication_eq3(p: int, d: int, s3: int, k: float) -> float:
    """Per-edge replication when S2 is independent and touches every edge.

    Shares: S1 and S2 get ``a``, S3 gets ``a/2``, ``a = k^(1/p) 2^(s3/p)``;
    every edge then costs ``2k/a^2``.
    """
    if not (0 <= s3 <= p) or d < 1:
        raise StructuralError("need 0 <= s3 <= p and d >= 1")
    _check_k(k)
    return k * p * d / (2 ** (2 * s3 / p) * k ** (2 / p))


def replication_eq3_printed(p: int, d: int, s3: int, k: float) -> float:
    """The printed form, which carries an extra factor 2 (kept for comparison)."""
    return 2 * replication_eq3(p, d, s3, k)


def eq3_shares(p: int, s3: int, k: float) -> tuple[float, float, float]:
    a = k ** (1 / p) * 2 ** (s3 / p)
    return a, a, a / 2  # S1, S2, S3


def replication_eq2(p: int, d: int, s1: int, s2: int, s3: int, k: float) -> float:
    """Per-edge replication for ``d' = d'' = d11 = d/2`` with S2 independent.

    The degree conditions force ``s1 = s2 = s3 = p/3``.  The optimum has
    ``a = 2^(2/3) b`` (S1) and ``z = 2^(1/3) b`` (S2).
    """
    if d % 2 or d < 2:
        raise StructuralError("d must be even and positive")
    if not (s1 == s2 == s3 and s1 + s2 + s3 == p):
        raise StructuralError("the degree conditions require |S1| = |S2| = |S3| = p/3")
    _check_k(k)
    return k * p * d * (2 ** (2 / 3) + 2 ** (1 / 3)) / (4 * k ** (2 / p))


def replication_eq2_printed(p: int, d: int, s1: int, s2: int, s3: int, k: float) -> float:
    return k * p * d * (1 + 2 ** (2 / 3)) / (2 ** (1 + 2 * s3 / (3 * p)) * k ** (2 / p))


def eq2_shares(p: int, k: float) -> tuple[float, float, float]:
    """``(a, z, b)`` for S1, S2, S3."""
    b = (k ** (3 / p) / 2) ** (1 / 3)
    return 2 ** (2 / 3) * b, 2 ** (1 / 3) * b, b


def replication_special_cases(case: str, p: int, d: int, s1: int, s2: int, s3: int, k: float) -> float:
    if case in ("2", "eq2"):
        return replication_eq2(p, d, s1, s2, s3, k)
    if case in ("3", "eq3"):
        return replication_eq3(p, d, s3, k)
    raise ValueError(f"unknown case {case!r}")


# ---------------------------------------------------------------- counting


def useful_reducer_count(b: int, p: int) -> int:
    """Nondecreasing bucket lists of length ``p`` over ``b`` buckets."""
    if b < 1 or p < 1:
        raise ValueError("b and p must be >= 1")
    return comb(b + p - 1, p)


def bucket_oriented_replication(b: int, p: int) -> int:
    """Reducers receiving one edge under bucket-oriented processing."""
    if b < 1 or p < 2:
        raise ValueError("need b >= 1 and p >= 2")
    return comb(b + p - 3, p - 2)


def generalized_partition_replication(b: int, p: int) -> Fraction:
    """Average reducers per edge when reducers are ``p``-subsets of ``b`` groups."""
    if p < 2 or b < p:
        raise ValueError("need p >= 2 and b >= p")
    return Fraction(b - 1, b) * comb(b - 2, p - 2) + Fraction(1, b) * comb(b - 1, p - 1)


def partition_reducer_count(b: int, p: int = 3) -> int:
    return comb(b, p)


def partition_ratio_limit(p: int) -> Fraction:
    return 1 + Fraction(1, p - 1)


@dataclass(frozen=True)
class Convertibility:
    alpha: float
    beta: float
    p: int
    exponent: float

    @property
    def convertible(self) -> bool:
        return self.exponent <= 0

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "p": self.p,
                "exponent": self.exponent, "convertible": self.convertible}


def convertibility_check(alpha: float, beta: float, p: int) -> Convertibility:
    """Reducer work exceeds serial work by ``b^(p - alpha - 2 beta)``."""
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    return Convertibility(alpha, beta, p, p - alpha - 2 * beta)


def c5_join_bound(n: Sequence[int]) -> float:
    """Worst-case output of the 5-cycle join ``R1(A,B)...R5(E,A)``.

    If ``n1 n5 n3 >= n2 n4`` in every rotation the bound is ``sqrt(prod n)``;
    otherwise it is the smallest ``n1 n5 n3`` among violating rotations.
    """
    n = [int(x) for x in n]
    if len(n) != 5 or any(x < 1 for x in n):
        raise ValueError("need five sizes >= 1")
    violating = []
    for r in range(5):
        m = n[r:] + n[:r]
        lhs = m[0] * m[4] * m[2]
        if lhs < m[1] * m[3]:
            violating.append(lhs)
    if not violating:
        prod = math.prod(n)
        root = math.isqrt(prod)
        return float(root) if root * root == prod else math.sqrt(prod)
    return float(min(violating))


# ---------------------------------------------------------------- group vs split


@dataclass(frozen=True)
class SplitReport:
    combined: float
    parts: tuple[float, ...]

    @property
    def split_total(self) -> float:
        return float(sum(self.parts))

    @property
    def holds(self) -> bool:
        return self.combined <= self.split_total * (1 + 1e-9)


def combined_vs_split_check(cqs: CQSet | Sequence[ConjunctiveQuery], splits: Sequence[Sequence[int]], k: float) -> SplitReport:
    """Optimal cost of the whole group against the sum over the parts."""
    queries = list(cqs)
    idx = sorted(i for part in splits for i in part)
    if idx != list(range(len(queries))):
        raise ValueError("splits must partition the query indices")
    whole = optimize_shares(cost_expression(queries, "variable-oriented"), k).cost_per_edge
    parts = []
    for part in splits:
        sub = [queries[i] for i in part]
        parts.append(optimize_shares(cost_expression(sub, "variable-oriented"), k).cost_per_edge)
    return SplitReport(whole, tuple(parts))
