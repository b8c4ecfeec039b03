"""Two-sided enclosures of the joint spectral radius from ``||S^n||``.

For a set ``S`` of ``d x d`` matrices (``d >= 2``) and an induced norm::

    C_d**(-sigma/n) * (||S||**d / ||S^d||)**(-nu/n) * ||S^n||**(1/n)
        <= rho(S) <= ||S^n||**(1/n)

with ``C_d = 2**d - 1`` for a single matrix and ``d**(3d/2)`` otherwise.
``sigma`` and ``nu`` are weighted sums of the base-``d`` digits of ``n``
(``BoundMode.EXACT``) or their closed-form upper estimates
(``BoundMode.CLOSED``).  All products of powers are evaluated in log space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .linalg import NormKind
from .semigroup import (
    DEFAULT_BUDGET,
    BudgetExhausted,
    MatrixSet,
    PowerNorm,
    nilpotency_check,
    power_norm,
)

__all__ = [
    "BochiReport",
    "BoundMode",
    "BoundParams",
    "BoundSequence",
    "CertifiedInterval",
    "DigitDecomposition",
    "OmegaReport",
    "OmegaRow",
    "base_d_digits",
    "bochi_check",
    "bochi_constant",
    "bound_params",
    "certify",
    "omega_recursion_check",
    "sigma_nu_closed",
    "sigma_nu_exact",
    "sweep",
]

CHECK_SLACK = 1e-9


class BoundMode(str, enum.Enum):
    EXACT = "exact"
    CLOSED = "closed"

    @classmethod
    def parse(cls, value: "BoundMode | str") -> "BoundMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"exact_digits": "exact", "digits": "exact", "closed_form": "closed"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown bound mode {value!r}") from None


def bochi_constant(d: int, r: int) -> float:
    """``2**d - 1`` for a single matrix, ``d**(3d/2)`` for ``r > 1``."""
    if d < 2:
        raise ValueError(f"the constant is defined for d >= 2, got d={d}")
    if r < 1:
        raise ValueError("r must be positive")
    if r == 1:
        return float(2**d - 1)
    return float(d) ** (1.5 * d)


@dataclass(frozen=True)
class DigitDecomposition:
    """``n = sum(digits[j] * d**j)``; ``digits[0]`` is the least significant."""

    n: int
    d: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if self.d < 2 or self.n < 1:
            raise ValueError("need n >= 1 and d >= 2")
        if not self.digits or not 1 <= self.digits[-1] <= self.d - 1:
            raise ValueError("leading digit must lie in [1, d-1]")
        if any(not 0 <= x <= self.d - 1 for x in self.digits):
            raise ValueError("digits must lie in [0, d-1]")
        if sum(x * self.d**j for j, x in enumerate(self.digits)) != self.n:
            raise ValueError("digits do not reconstruct n")

    @property
    def k(self) -> int:
        """Index of the leading digit, ``floor(log_d n)``."""
        return len(self.digits) - 1


def base_d_digits(n: int, d: int) -> DigitDecomposition:
    if n < 1:
        raise ValueError("n must be positive")
    if d < 2:
        raise ValueError("d must be at least 2")
    digits = []
    m = n
    while m:
        m, rem = divmod(m, d)
        digits.append(rem)
    return DigitDecomposition(n, d, tuple(digits))


def sigma_nu_exact(n: int, d: int) -> tuple[int, int]:
    """Digit sums ``sigma = sum_j n_j sum_{i<=j} (d-1)**i``, ``nu = sum_j n_j (d-1)**j``."""
    dec = base_d_digits(n, d)
    q = d - 1
    sigma = nu = 0
    partial = 0  # sum_{i<=j} q**i
    power = 1  # q**j
    for nj in dec.digits:
        partial += power
        sigma += nj * partial
        nu += nj * power
        power *= q
    return sigma, nu


def sigma_nu_closed(n: int, d: int) -> tuple[float, float]:
    """Closed-form upper estimates of the digit sums."""
    if n < 1:
        raise ValueError("n must be positive")
    if d < 2:
        raise ValueError("d must be at least 2")
    if d == 2:
        t = math.log(n) / math.log(2.0)
        return 0.5 * (t + 1.0) * (t + 2.0), t + 1.0
    growth = n ** (math.log(d - 1) / math.log(d))
    return (d - 1) ** 3 / (d - 2) ** 2 * growth, (d - 1) ** 2 / (d - 2) * growth


@dataclass(frozen=True)
class BoundParams:
    d: int
    r: int
    n: int
    bochi: float
    sigma: float
    nu: float
    mode: BoundMode


def bound_params(d: int, r: int, n: int, mode: BoundMode | str = BoundMode.EXACT,
                 force_multi_constant: bool = False) -> BoundParams:
    mode = BoundMode.parse(mode)
    c = bochi_constant(d, 2 if force_multi_constant else r)
    sigma, nu = sigma_nu_exact(n, d) if mode is BoundMode.EXACT else sigma_nu_closed(n, d)
    return BoundParams(d, r, n, c, sigma, nu, mode)


def _log_factor(p: BoundParams, log_ratio: float) -> float:
    """``log(C**(sigma/n) * ratio**(nu/n))``."""
    try:
        s_over_n = p.sigma / p.n
        v_over_n = p.nu / p.n
    except OverflowError:
        raise OverflowError(
            "digit sums too large for floating point; use the closed-form mode") from None
    return s_over_n * math.log(p.bochi) + v_over_n * log_ratio


@dataclass(frozen=True)
class CertifiedInterval:
    """Enclosure ``lower <= rho(S) <= upper`` from products of length ``n``.

    ``lower`` is None when it could not be certified (``status`` says why).
    ``power_n_norm`` may be ``inf`` for huge ``n``; ``log_power_n_norm`` is
    always finite unless the products vanish.
    """

    n: int
    lower: float | None
    upper: float
    norm: NormKind
    mode: BoundMode
    exact_zero: bool = False
    status: str = "ok"
    params: BoundParams | None = None
    set_norm: float | None = None
    power_d_norm: float | None = None
    power_n_norm: float | None = None
    log_power_n_norm: float | None = None
    nodes: int = 0

    def __post_init__(self):
        if self.lower is not None and self.lower > self.upper:
            raise ValueError(f"inverted interval [{self.lower}, {self.upper}]")
        if self.exact_zero and (self.lower != 0.0 or self.upper != 0.0):
            raise ValueError("exact-zero interval must be [0, 0]")

    def contains(self, x: float, rel: float = 0.0) -> bool:
        lo = 0.0 if self.lower is None else self.lower
        return lo * (1.0 - rel) <= x <= self.upper * (1.0 + rel)

    @property
    def width_ratio(self) -> float | None:
        if self.lower is None or self.lower == 0.0:
            return None
        return self.upper / self.lower


@dataclass
class BoundSequence:
    intervals: list[CertifiedInterval] = field(default_factory=list)
    failures: dict[int, str] = field(default_factory=dict)

    @property
    def best_lower(self) -> float | None:
        lows = [iv.lower for iv in self.intervals if iv.lower is not None]
        return max(lows) if lows else None

    @property
    def best_upper(self) -> float | None:
        ups = [iv.upper for iv in self.intervals]
        return min(ups) if ups else None

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)


class _Certifier:
    """Caches ``||S^n||`` across the lengths and modes of one run."""

    def __init__(self, S: MatrixSet, kind, budget: int, tol: float, force_multi_constant: bool):
        self.S = S
        self.kind = NormKind.parse(kind)
        if not self.kind.induced:
            raise ValueError("certification needs an induced norm (one, inf or two)")
        self.budget = budget
        self.tol = tol
        self.force = force_multi_constant
        self._cache: dict[int, PowerNorm | BudgetExhausted] = {}
        self._nilpotent: bool | None = None

    def power(self, n: int) -> PowerNorm:
        hit = self._cache.get(n)
        if hit is None:
            try:
                hit = power_norm(self.S, n, self.kind, self.budget)
            except BudgetExhausted as exc:
                hit = exc
            self._cache[n] = hit
        if isinstance(hit, BudgetExhausted):
            raise hit
        return hit

    def nilpotent_by_tol(self) -> bool:
        if self._nilpotent is None:
            self._nilpotent = self.tol > 0 and nilpotency_check(self.S, self.tol, self.budget)
        return self._nilpotent

    def interval(self, n: int, mode: BoundMode) -> CertifiedInterval:
        S, kind = self.S, self.kind
        d, r = S.dim, S.r
        if n < 1:
            raise ValueError("n must be positive")
        s = self.power(1).value
        if d == 1:
            # 1 x 1 matrices commute: rho is exactly the largest modulus
            pn = self.power(n)
            return CertifiedInterval(n, s, s, kind, mode, s == 0.0, "scalar", None, s, None,
                                     pn.value, None if pn.is_zero else pn.log, pn.nodes)
        params = bound_params(d, r, n, mode, self.force)
        pn = self.power(n)
        base = dict(params=params, set_norm=s, power_n_norm=pn.value,
                    log_power_n_norm=None if pn.is_zero else pn.log, nodes=pn.nodes)
        if pn.is_zero:
            return CertifiedInterval(n, 0.0, 0.0, kind, mode, True, "exact-zero", **base)
        upper = pn.root()
        try:
            pd = self.power(d)
        except BudgetExhausted:
            return CertifiedInterval(n, None, upper, kind, mode, False,
                                     f"lower unavailable: budget exhausted computing ||S^{d}||",
                                     **base)
        base["power_d_norm"] = pd.value
        if pd.is_zero or self.nilpotent_by_tol():
            return CertifiedInterval(n, 0.0, 0.0, kind, mode, True, "exact-zero", **base)
        # ratio >= 1 in exact arithmetic; clamping only lowers the bound
        log_ratio = max(d * math.log(s) - pd.log, 0.0)
        log_lower = math.log(upper) - _log_factor(params, log_ratio)
        lower = max(min(math.exp(log_lower), upper), 0.0)
        return CertifiedInterval(n, lower, upper, kind, mode, False, "ok", **base)


def certify(
    S: MatrixSet,
    n: int,
    kind: NormKind | str = NormKind.TWO,
    mode: BoundMode | str = BoundMode.EXACT,
    budget: int = DEFAULT_BUDGET,
    tol: float = 0.0,
    force_multi_constant: bool = False,
) -> CertifiedInterval:
    """Certified enclosure of the joint spectral radius from length-``n`` products.

    Raises ``BudgetExhausted`` when ``||S^n||`` itself cannot be enumerated.
    If only ``||S^d||`` is out of budget the upper bound is still returned
    and ``lower`` is None.
    """
    cert = _Certifier(S, kind, budget, tol, force_multi_constant)
    return cert.interval(n, BoundMode.parse(mode))


def sweep(
    S: MatrixSet,
    n_max: int,
    kind: NormKind | str = NormKind.TWO,
    mode: BoundMode | str = BoundMode.EXACT,
    budget: int = DEFAULT_BUDGET,
    tol: float = 0.0,
    force_multi_constant: bool = False,
) -> BoundSequence:
    """Intervals for ``n = 1..n_max``; a failing ``n`` is logged in ``failures``."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    cert = _Certifier(S, kind, budget, tol, force_multi_constant)
    mode = BoundMode.parse(mode)
    seq = BoundSequence()
    for n in range(1, n_max + 1):
        try:
            seq.intervals.append(cert.interval(n, mode))
        except (BudgetExhausted, OverflowError) as exc:
            seq.failures[n] = str(exc)
    return seq


@dataclass(frozen=True)
class BochiReport:
    """``||S^d|| <= C_d * rho * ||S||**(d-1)``, both sides itemized."""

    holds: bool
    lhs: float
    rhs: float
    bochi: float
    rho_ref: float
    set_norm: float

    def __bool__(self) -> bool:
        return self.holds


def bochi_check(
    S: MatrixSet,
    rho_ref: float,
    kind: NormKind | str = NormKind.TWO,
    budget: int = DEFAULT_BUDGET,
    force_multi_constant: bool = False,
) -> BochiReport:
    """Check the Bochi inequality against a reference spectral radius."""
    if rho_ref < 0:
        raise ValueError("rho_ref must be nonnegative")
    d = S.dim
    c = bochi_constant(d, 2 if force_multi_constant else S.r)
    s_pn = power_norm(S, 1, kind, budget)
    pd = power_norm(S, d, kind, budget)
    s = s_pn.value
    rhs = c * rho_ref * s ** (d - 1) if rho_ref > 0 else 0.0
    if pd.is_zero:
        holds = True
    elif rho_ref == 0.0:
        holds = False
    else:
        log_rhs = math.log(c) + math.log(rho_ref) + (d - 1) * s_pn.log
        holds = pd.log <= log_rhs + math.log1p(CHECK_SLACK)
    return BochiReport(holds, pd.value, rhs, c, rho_ref, s)


@dataclass(frozen=True)
class OmegaRow:
    k: int
    n: int
    log_omega: float
    log_bound: float
    holds: bool


@dataclass(frozen=True)
class OmegaReport:
    rows: tuple[OmegaRow, ...]

    @property
    def holds(self) -> bool:
        return all(row.holds for row in self.rows)

    def __bool__(self) -> bool:
        return self.holds


def omega_recursion_check(
    S: MatrixSet,
    rho_ref: float,
    k_max: int,
    kind: NormKind | str = NormKind.TWO,
    budget: int = DEFAULT_BUDGET,
    force_multi_constant: bool = False,
) -> OmegaReport:
    """Check ``omega_{d^k} <= C_d**(sum_{i<=k}(d-1)**i) * ratio**((d-1)**k)``
    for ``k = 0..k_max``, where ``omega_m = ||S^m|| / rho**m`` and
    ``ratio = ||S||**d / ||S^d||``.  Everything is compared in log space.
    """
    if rho_ref <= 0:
        raise ValueError("rho_ref must be positive")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    d = S.dim
    c = bochi_constant(d, 2 if force_multi_constant else S.r)
    s = power_norm(S, 1, kind, budget)
    pd = power_norm(S, d, kind, budget)
    if pd.is_zero:
        raise ValueError("products of length d vanish; the set is nilpotent")
    log_ratio = d * s.log - pd.log
    log_rho = math.log(rho_ref)
    rows = []
    for k in range(k_max + 1):
        m = d**k
        pm = power_norm(S, m, kind, budget)
        log_omega = pm.log - m * log_rho
        exponent = sum((d - 1) ** i for i in range(k + 1))
        log_bound = exponent * math.log(c) + (d - 1) ** k * log_ratio
        slack = CHECK_SLACK * (1.0 + abs(log_bound))
        rows.append(OmegaRow(k, m, log_omega, log_bound, log_omega <= log_bound + slack))
    return OmegaReport(tuple(rows))
