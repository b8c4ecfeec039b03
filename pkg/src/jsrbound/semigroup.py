"""Finite matrix sets and exact norms of their n-fold product sets.

``power_norm`` returns ``max ||A_{i_n} ... A_{i_1}||`` over all ``r**n``
words by depth-first search with branch-and-bound pruning.  A prefix ``P``
with ``m`` factors still to come is dropped once ``||P|| * ||S||**m`` cannot
beat the best complete word found so far, which is valid for every
submultiplicative norm and keeps the result exact.

Before enumeration the members are rescaled by a power of two so that the
set norm lies in (1/2, 1]; each partial product additionally carries its own
binary exponent.  Power-of-two scaling is exact in floating point, so the
returned maximum is bit-identical to what plain unscaled multiplication
would give whenever the latter does not overflow or underflow.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linalg import (
    DimensionError,
    NormKind,
    _max_abs,
    _mul_parts,
    _norm_parts,
    as_matrix,
    eigen_spectral_radius,
    mat_mul,
    matrix_norm,
)

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExhausted",
    "MatrixSet",
    "PowerNorm",
    "ProductWord",
    "gsr_lower_estimate",
    "nilpotency_check",
    "power_norm",
    "power_set_norm",
    "realize",
    "set_norm",
]

DEFAULT_BUDGET = 10**7
# relative safety margin on the pruning test; covers rounding in ||P||*||S||^m
PRUNE_SLACK = 1e-9
_LOG2_SLACK = math.log2(1.0 + PRUNE_SLACK)
_RENORM_LO = 2.0**-256
_RENORM_HI = 2.0**256


class BudgetExhausted(RuntimeError):
    """Enumeration stopped after exceeding its node budget.

    ``best`` (when not None) is a ``PowerNorm`` with ``exact=False``: the
    largest norm among the complete words seen, hence a certified lower
    estimate of the true maximum.
    """

    def __init__(self, message: str, best: "PowerNorm | None" = None, nodes: int = 0):
        super().__init__(message)
        self.best = best
        self.nodes = nodes


class MatrixSet:
    """Nonempty finite list of square complex matrices of equal size."""

    def __init__(self, members: Iterable, labels: Sequence[str] | None = None):
        mats = tuple(as_matrix(m) for m in members)
        if not mats:
            raise ValueError("a matrix set needs at least one member")
        d = mats[0].shape[0]
        for i, m in enumerate(mats):
            if m.shape != (d, d):
                raise DimensionError(f"member {i} has shape {m.shape}, expected {(d, d)}")
            m.setflags(write=False)
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != len(mats):
                raise ValueError("labels must match the number of members")
        self.members = mats
        self.labels = labels
        self.dim = d

    @property
    def r(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i) -> np.ndarray:
        return self.members[i]

    def __repr__(self) -> str:
        return f"MatrixSet(d={self.dim}, r={self.r})"

    def scaled(self, c: complex) -> "MatrixSet":
        return MatrixSet([c * m for m in self.members], self.labels)

    def stacked(self) -> np.ndarray:
        return np.stack(self.members)


@dataclass(frozen=True)
class ProductWord:
    """A realized product; ``indices[0]`` is applied first (rightmost factor)."""

    indices: tuple[int, ...]
    value: np.ndarray = field(repr=False)
    norm: float


@dataclass(frozen=True)
class PowerNorm:
    """``mantissa * 2**exponent`` = max norm over all words of length ``n``."""

    n: int
    kind: NormKind
    mantissa: float
    exponent: int
    exact: bool = True
    nodes: int = 0
    word: tuple[int, ...] | None = None

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0.0

    @property
    def value(self) -> float:
        if self.is_zero:
            return 0.0
        try:
            return math.ldexp(self.mantissa, self.exponent)
        except OverflowError:
            return math.inf

    @property
    def log(self) -> float:
        """Natural log of the value (``-inf`` for zero); never overflows."""
        if self.is_zero:
            return -math.inf
        return math.log(self.mantissa) + self.exponent * math.log(2.0)

    def root(self) -> float:
        """``value ** (1/n)`` without forming ``value``."""
        if self.is_zero:
            return 0.0
        q = self.exponent // self.n
        rem = self.exponent - q * self.n
        if rem <= 900:
            base = math.ldexp(self.mantissa, rem) ** (1.0 / self.n)
        else:
            base = math.exp((math.log(self.mantissa) + rem * math.log(2.0)) / self.n)
        return math.ldexp(base, q)

    def __float__(self) -> float:
        return self.value


def _key(mant: float, exp: int):
    """Exact ordering key for ``mant * 2**exp`` (mant >= 0)."""
    if mant == 0.0:
        return (-math.inf, 0.0)
    m, e = math.frexp(mant)
    return (e + exp, m)


def _check_kind(kind) -> NormKind:
    kind = NormKind.parse(kind)
    if not kind.induced:
        raise ValueError("the max-entry norm is not submultiplicative; use one, inf or two")
    return kind


def set_norm(S: MatrixSet, kind: NormKind | str = NormKind.TWO) -> float:
    """Largest member norm."""
    kind = _check_kind(kind)
    st = S.stacked()
    return float(_norm_parts(st.real, st.imag, kind).max())


def _rescale_exponent(s: float) -> int:
    m, e = math.frexp(s)
    return e - 1 if m == 0.5 else e


def _word_count(r: int, n: int) -> int:
    return n if r == 1 else (r ** (n + 1) - r) // (r - 1)


def power_norm(
    S: MatrixSet,
    n: int,
    kind: NormKind | str = NormKind.TWO,
    budget: int = DEFAULT_BUDGET,
    prune: bool = True,
) -> PowerNorm:
    """Exact ``max`` of the norm over all products of length ``n``.

    Raises ``BudgetExhausted`` once more than ``budget`` word extensions
    (child products) would be formed.  Without pruning the full tree size is
    checked up front.
    """
    kind = NormKind.parse(kind)
    if not kind.induced and prune:
        raise ValueError("pruning needs a submultiplicative (induced) norm")
    if n < 1:
        raise ValueError("product length must be positive")
    if budget < 1:
        raise ValueError("budget must be positive")
    if not prune and _word_count(S.r, n) > budget:
        raise BudgetExhausted(
            f"{_word_count(S.r, n)} word extensions needed, budget is {budget}", None, 0)
    return _Search(S, n, kind, budget, prune).run()


class _Search:
    """Depth-first branch and bound; the last few levels of every subtree are
    expanded breadth-first as one numpy batch (rows kept in word order)."""

    block_rows = 512

    def __init__(self, S: MatrixSet, n: int, kind: NormKind, budget: int, prune: bool):
        self.n, self.kind, self.budget = n, kind, budget
        self.r = S.r
        st = S.stacked()
        self.s = float(_norm_parts(st.real, st.imag, kind).max())
        self.e0 = _rescale_exponent(self.s) if self.s > 0 else 0
        f = math.ldexp(1.0, -self.e0)
        # shape (1, r, d, d) so a batch of K parents broadcasts to (K, r, d, d)
        self.mre = (st.real * f)[None]
        self.mim = (st.imag * f)[None]
        self.log2_s = math.log2(self.s) - self.e0 if self.s > 0 else -math.inf
        self.prune = prune and self.r > 1
        depth = 1
        while self.r ** (depth + 1) <= self.block_rows and depth < n:
            depth += 1
        self.block_depth = n if self.r == 1 else depth
        self.nodes = 0
        self.best_key = None
        self.best_word = None
        self.best_log2 = -math.inf

    def run(self) -> PowerNorm:
        n, kind = self.n, self.kind
        if self.s == 0.0:
            return PowerNorm(n, kind, 0.0, 0, True, 0, (0,) * n)
        d = self.mre.shape[-1]
        eye = np.eye(d)[None]
        stack = [(eye, np.zeros_like(eye), 0, ())]
        while stack:
            pr, pi, pexp, word = stack.pop()
            rem = n - len(word)
            if rem <= self.block_depth:
                self._block(pr, pi, pexp, word, rem)
                continue
            cr, ci = self._expand(pr, pi, len(word))
            exps = np.full(self.r, pexp, dtype=np.int64)
            keep = self._survivors(cr, ci, exps, rem - 1)
            cr, ci, exps = _renormalize(cr[keep], ci[keep], exps[keep])
            for j in reversed(range(len(keep))):
                stack.append((cr[j:j + 1], ci[j:j + 1], int(exps[j]), word + (int(keep[j]),)))
        mant, ex = _from_key(self.best_key)
        return PowerNorm(n, kind, mant, ex + n * self.e0, True, self.nodes, self.best_word)

    def _expand(self, pr, pi, depth):
        k = pr.shape[0]
        if self.nodes + k * self.r > self.budget:
            partial = None
            if self.best_key is not None:
                mant, ex = _from_key(self.best_key)
                partial = PowerNorm(self.n, self.kind, mant, ex + self.n * self.e0,
                                    False, self.nodes, self.best_word)
            raise BudgetExhausted(
                f"node budget {self.budget} exhausted at depth {depth} of {self.n}",
                partial, self.nodes)
        self.nodes += k * self.r
        d = pr.shape[-1]
        if depth == 0:
            cr = np.broadcast_to(self.mre, (k, self.r, d, d))
            ci = np.broadcast_to(self.mim, (k, self.r, d, d))
        else:
            cr, ci = _mul_parts(self.mre, self.mim, pr[:, None], pi[:, None])
        return cr.reshape(k * self.r, d, d), ci.reshape(k * self.r, d, d)

    def _survivors(self, cr, ci, exps, remaining):
        rows = np.arange(cr.shape[0])
        if not self.prune or self.best_key is None:
            return rows
        offset = exps + remaining * self.log2_s
        if self.kind is NormKind.TWO:
            # Frobenius dominates the 2-norm and is cheap; screen with it first
            frob = np.sqrt(np.sum(cr * cr + ci * ci, axis=(-2, -1)))
            rows = rows[~self._pruned(frob, offset)]
            if rows.size == 0:
                return rows
            offset = offset[rows]
            cr, ci = cr[rows], ci[rows]
        norms = _norm_parts(cr, ci, self.kind)
        return rows[~self._pruned(norms, offset)]

    def _pruned(self, norms, offset):
        with np.errstate(divide="ignore"):
            bound = np.log2(norms) + offset
        return bound + _LOG2_SLACK <= self.best_log2

    def _block(self, pr, pi, pexp, word, rem):
        exps = np.array([pexp], dtype=np.int64)
        tails = np.zeros((1, 0), dtype=np.int64)
        depth = len(word)
        for level in range(rem):
            cr, ci = self._expand(pr, pi, depth + level)
            k = pr.shape[0]
            exps = np.repeat(exps, self.r)
            tails = np.concatenate(
                [np.repeat(tails, self.r, axis=0), np.tile(np.arange(self.r), k)[:, None]], axis=1)
            if level == rem - 1:
                self._record(_norm_parts(cr, ci, self.kind), exps, word, tails)
                return
            keep = self._survivors(cr, ci, exps, rem - level - 1)
            if keep.size == 0:
                return
            pr, pi, exps = _renormalize(cr[keep], ci[keep], exps[keep])
            tails = tails[keep]

    def _record(self, norms, exps, word, tails):
        mant, e = np.frexp(norms)
        total = np.where(mant > 0, e.astype(np.int64) + exps, np.iinfo(np.int64).min)
        top = total.max()
        cand = np.flatnonzero(total == top)
        i = int(cand[np.argmax(mant[cand])])  # argmax returns the first maximum
        k = _key(float(norms[i]), int(exps[i]))
        if self.best_key is None or k > self.best_key:
            self.best_key = k
            self.best_word = word + tuple(int(x) for x in tails[i])
            self.best_log2 = _key_log2(k)


def _from_key(k):
    if k[0] == -math.inf:
        return 0.0, 0
    return k[1], k[0]


def _key_log2(k) -> float:
    if k[0] == -math.inf:
        return -math.inf
    return k[0] + math.log2(k[1])


def _renormalize(cr, ci, exps):
    """Shift rows whose magnitude drifted far from 1 by an exact power of two."""
    peak = _max_abs(cr, ci)
    off = (peak != 0.0) & ((peak < _RENORM_LO) | (peak > _RENORM_HI))
    if off.any():
        e = np.frexp(peak)[1].astype(np.int64)
        shift = np.where(off, e, 0)
        f = np.ldexp(1.0, -shift)[:, None, None]
        cr, ci, exps = cr * f, ci * f, exps + shift
    return cr, ci, exps


def power_set_norm(
    S: MatrixSet,
    n: int,
    kind: NormKind | str = NormKind.TWO,
    budget: int = DEFAULT_BUDGET,
    prune: bool = True,
) -> float:
    """``||S^n||`` as a float (``inf`` if it overflows; see ``power_norm``)."""
    kind = _check_kind(kind)
    return power_norm(S, n, kind, budget, prune).value


def realize(S: MatrixSet, indices: Sequence[int], kind: NormKind | str = NormKind.TWO) -> ProductWord:
    """Form ``A_{i_n} ... A_{i_1}`` by left multiplication."""
    indices = tuple(int(i) for i in indices)
    if not indices:
        raise ValueError("empty word")
    p = S[indices[0]]
    for i in indices[1:]:
        p = mat_mul(S[i], p)
    return ProductWord(indices, p, matrix_norm(p, kind))


def nilpotency_check(S: MatrixSet, tol: float = 0.0, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff every entry of every product of length ``d`` has modulus <= ``tol``.

    With ``tol=0`` this is the exact criterion for a zero joint spectral radius.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    worst = power_norm(S, S.dim, NormKind.MAX, budget, prune=False)
    if tol == 0.0:
        return worst.is_zero
    return worst.log <= math.log(tol)


def _is_min_rotation(word: tuple[int, ...]) -> bool:
    return all(word <= word[i:] + word[:i] for i in range(1, len(word)))


def gsr_lower_estimate(S: MatrixSet, n_max: int, budget: int = DEFAULT_BUDGET) -> float:
    """``max rho(P)**(1/|P|)`` over all products of length 1..n_max.

    Always a lower bound on the joint spectral radius.  Uses the eigenvalue
    oracle; cyclic rotations of a word share a spectrum so only one
    representative per rotation class is evaluated.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    r = S.r
    total = sum(r**k for k in range(1, n_max + 1))
    if total > budget:
        raise BudgetExhausted(f"{total} words needed, budget is {budget}", None, 0)
    st = S.stacked()
    peak = float(np.abs(st).max())
    if peak == 0.0:
        return 0.0
    e0 = _rescale_exponent(peak)
    mats = [np.ldexp(m.real, -e0) + 1j * np.ldexp(m.imag, -e0) for m in S.members]
    best = 0.0
    for length in range(1, n_max + 1):
        for word in itertools.product(range(r), repeat=length):
            if not _is_min_rotation(word):
                continue
            p = mats[word[0]]
            for i in word[1:]:
                p = mat_mul(mats[i], p)
            rho = eigen_spectral_radius(p)
            if rho > 0.0:
                best = max(best, rho ** (1.0 / length))
    return math.ldexp(best, e0)
