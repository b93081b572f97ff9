"""CQs for cycles built from run sequences of up/down edges.

Position ``i`` (1-based) of a pattern describes the edge between ``X_i`` and
``X_{i+1}`` (``X_p`` and ``X_1`` for the last position): ``u`` means the
first is smaller.  Canonical patterns start at a local minimum, so they begin
with a run of ``u`` and end with a run of ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .cq import ConjunctiveQuery, CQSet
from .samples import cycle


@dataclass(frozen=True, order=True)
class RunSequence:
    runs: tuple[int, ...]

    def __post_init__(self):
        if not self.runs or len(self.runs) % 2 or any(r < 1 for r in self.runs):
            raise ValueError(f"bad run sequence {self.runs!r}")

    @property
    def p(self) -> int:
        return sum(self.runs)

    @cached_property
    def pattern(self) -> str:
        return "".join(("u" if i % 2 == 0 else "d") * r for i, r in enumerate(self.runs))

    @property
    def digits(self) -> str:
        return "".join(str(r) if r < 10 else f"[{r}]" for r in self.runs)

    def __str__(self) -> str:
        return self.digits

    def shift(self, k: int) -> "RunSequence":
        """Cyclic shift by ``2k`` runs."""
        n = len(self.runs)
        j = (2 * k) % n
        return RunSequence(self.runs[j:] + self.runs[:j])

    def flip(self) -> "RunSequence":
        return RunSequence(self.runs[::-1])

    def equivalents(self) -> set["RunSequence"]:
        out = set()
        for s in (self, self.flip()):
            for k in range(len(self.runs) // 2):
                out.add(s.shift(k))
        return out

    def canonical(self) -> "RunSequence":
        return min(self.equivalents())


def _check_p(p: int) -> None:
    if p < 3:
        raise ValueError("cycles need p >= 3")


def _compositions(p: int, parts: int):
    if parts == 1:
        if p >= 1:
            yield (p,)
        return
    for first in range(1, p - parts + 2):
        for rest in _compositions(p - first, parts - 1):
            yield (first,) + rest


def run_sequences(p: int) -> list[RunSequence]:
    """Every even-length composition of ``p``, by length then lexicographically."""
    _check_p(p)
    out = []
    for parts in range(2, p + 1, 2):
        out.extend(RunSequence(c) for c in _compositions(p, parts))
    return out


def canonical_run_sequences(p: int) -> list[RunSequence]:
    """One run sequence per class under even run shifts and flip.

    The representative is the smallest run tuple in its class.  Output is
    ordered by number of runs, then lexicographically.
    """
    seen: set[RunSequence] = set()
    reps = []
    for rs in run_sequences(p):
        if rs in seen:
            continue
        cls = rs.equivalents()
        seen |= cls
        reps.append(min(cls))
    return sorted(reps, key=lambda r: (len(r.runs), r.runs))


# ---------------------------------------------------------------- symmetry


def _swap(c: str) -> str:
    return c.translate(str.maketrans("ud", "du"))


def pattern_symmetries(pattern: str) -> list[tuple[str, int]]:
    """Dihedral maps of cycle positions that leave ``pattern`` unchanged.

    ``("rot", r)`` sends position ``j`` to ``j + r``; ``("ref", r)`` sends it
    to ``r - j`` (0-based, mod p).  The identity is ``("rot", 0)``.
    """
    p = len(pattern)
    out = []
    for r in range(p):
        if all(pattern[i] == pattern[(i + r) % p] for i in range(p)):
            out.append(("rot", r))
    for r in range(p):
        # edge i (j=i..i+1) maps to the edge between r-i and r-i-1, reversed
        if all(pattern[i] == _swap(pattern[(r - i - 1) % p]) for i in range(p)):
            out.append(("ref", r))
    return out


def _image(g: tuple[str, int], j: int, p: int) -> int:
    kind, r = g
    return (j + r) % p if kind == "rot" else (r - j) % p


def is_palindrome(pattern: str) -> bool:
    """Unchanged by the flip that keeps ``X_1`` in place."""
    return ("ref", 0) in pattern_symmetries(pattern)


def period(pattern: str) -> int:
    """Length of the smallest string whose repetition gives ``pattern``."""
    p = len(pattern)
    for q in range(1, p + 1):
        if p % q == 0 and pattern == pattern[:q] * (p // q):
            return q
    return p


def extra_conditions(pattern: str) -> list[tuple[int, int]]:
    """Inequalities ``(a, b)`` meaning ``X_{a+1} < X_{b+1}`` that make each
    cycle match exactly once.

    ``X_1`` must be smallest over its orbit under the pattern's symmetries.
    If a symmetry also fixes ``X_1`` (a flip), ``X_2 < X_p`` breaks it.
    """
    p = len(pattern)
    sym = pattern_symmetries(pattern)
    orbit = sorted({_image(g, 0, p) for g in sym} - {0})
    extras = [(0, j) for j in orbit]
    if any(g != ("rot", 0) and _image(g, 0, p) == 0 for g in sym):
        extras.append((1, p - 1))
    return extras


def cq_from_run_sequence(seq: RunSequence) -> ConjunctiveQuery:
    c = seq.pattern
    p = len(c)
    names = tuple(f"X{i}" for i in range(1, p + 1))
    subgoals = []
    for i in range(p - 1):
        subgoals.append((i, i + 1) if c[i] == "u" else (i + 1, i))
    # last edge joins X_p back to X_1
    subgoals.append((0, p - 1) if c[p - 1] == "d" else (p - 1, 0))
    atoms = [("<", a, b) for a, b in subgoals]
    atoms.extend(("<", a, b) for a, b in extra_conditions(c))
    return ConjunctiveQuery(names, tuple(subgoals), (tuple(atoms),))


def cycle_cqs(p: int) -> CQSet:
    reps = canonical_run_sequences(p)
    return CQSet(cycle(p), tuple(cq_from_run_sequence(r) for r in reps), tuple((r.digits,) for r in reps))


# ---------------------------------------------------------------- counting


def cycle_class_count(p: int) -> int:
    """Exact number of classes, by Burnside over the dihedral group."""
    _check_p(p)
    total = sum(2 ** math.gcd(r, p) - 2 for r in range(p))
    if p % 2 == 0:
        # reflections through edge midpoints fix nothing; the others fix 2^(p/2)
        total += (p // 2) * 2 ** (p // 2)
    return total // (2 * p)


def conditional_bound(p: int) -> Fraction:
    """``(2^p - 2) / (2p)``, exact when every pattern is asymmetric."""
    _check_p(p)
    return Fraction(2 ** p - 2, 2 * p)


def symmetry_correction(p: int) -> int:
    """The ``c`` with ``(2^p + c - 2) / (2p)`` equal to the class count."""
    return 2 * p * cycle_class_count(p) - (2 ** p - 2)
