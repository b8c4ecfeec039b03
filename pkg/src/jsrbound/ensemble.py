"""Seeded random matrix sets and the width/enclosure benchmark.

All randomness comes from ``numpy.random.Generator(PCG64(seed))`` consumed
in a fixed order, so a given seed reproduces the benchmark bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundMode, bochi_constant, sweep
from .linalg import NormKind, eigen_spectral_radius
from .semigroup import DEFAULT_BUDGET, BudgetExhausted, MatrixSet, gsr_lower_estimate

__all__ = ["BenchResult", "BenchRow", "make_rng", "run_bench", "unit_disc_set"]

ENCLOSURE_SLACK = 1e-8


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def unit_disc_set(rng: np.random.Generator, d: int, r: int) -> MatrixSet:
    """``r`` matrices with entries drawn uniformly from the complex unit disc."""
    radius = np.sqrt(rng.random((r, d, d)))
    angle = 2.0 * np.pi * rng.random((r, d, d))
    return MatrixSet(radius * np.exp(1j * angle))


@dataclass(frozen=True)
class BenchRow:
    d: int
    r: int
    n: int
    mean_width_ratio: float
    instances: int
    bochi: float


@dataclass
class BenchResult:
    rows: list[BenchRow] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


def run_bench(
    seed: int,
    dims=(2,),
    members=(1,),
    instances: int = 50,
    n_max: int = 10,
    kind: NormKind | str = NormKind.TWO,
    mode: BoundMode | str = BoundMode.EXACT,
    budget: int = DEFAULT_BUDGET,
    gsr_depth: int = 4,
) -> BenchResult:
    """Mean ``upper/lower`` per (d, r, n) over a seeded ensemble.

    Single matrices are checked against the eigenvalue oracle; larger sets
    against the product-spectrum lower estimate (up to ``gsr_depth``).
    """
    if any(d < 2 for d in dims):
        raise ValueError("benchmark dimensions must be at least 2")
    rng = make_rng(seed)
    kind = NormKind.parse(kind)
    mode = BoundMode.parse(mode)
    out = BenchResult()
    for d in dims:
        for r in members:
            ratios: dict[int, list[float]] = {n: [] for n in range(1, n_max + 1)}
            for idx in range(instances):
                S = unit_disc_set(rng, d, r)
                tag = f"d={d} r={r} instance={idx}"
                seq = sweep(S, n_max, kind, mode, budget)
                for n, msg in seq.failures.items():
                    out.failures.append(f"{tag} n={n}: {msg}")
                for iv in seq:
                    if iv.width_ratio is not None:
                        ratios[iv.n].append(iv.width_ratio)
                if r == 1:
                    rho = eigen_spectral_radius(S[0])
                    for iv in seq:
                        if not iv.contains(rho, ENCLOSURE_SLACK):
                            out.violations.append(
                                f"{tag} n={iv.n}: rho={rho!r} outside [{iv.lower!r}, {iv.upper!r}]")
                else:
                    try:
                        est = gsr_lower_estimate(S, min(gsr_depth, n_max), budget)
                    except BudgetExhausted as exc:
                        out.failures.append(f"{tag} product-spectrum estimate: {exc}")
                        est = 0.0
                    hi = seq.best_upper
                    lo = max(seq.best_lower or 0.0, est)
                    if hi is not None and lo > hi * (1.0 + 1e-9):
                        out.violations.append(f"{tag}: lower {lo!r} exceeds upper {hi!r}")
            for n in range(1, n_max + 1):
                vals = ratios[n]
                if not vals:
                    continue
                mean = math.fsum(vals) / len(vals)
                out.rows.append(BenchRow(d, r, n, mean, len(vals), bochi_constant(d, r)))
    return out
