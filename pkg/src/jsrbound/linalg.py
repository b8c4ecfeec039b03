"""Dense complex matrix kernels, induced norms and an eigenvalue oracle.

Matrices are plain ``numpy.complex128`` arrays of shape ``(d, d)``.  The
product and norm kernels work on split real/imaginary parts and accumulate
every sum left to right with one numpy call per term, so a given matrix
produces bit-identical results whether it is evaluated alone or as part of
a stacked batch ``(..., d, d)``.  Scaling an input by a power of two scales
every kernel output by the matching power of two exactly (barring overflow
or subnormals), which the enumeration code relies on.

Arithmetic is IEEE double precision with round-to-nearest; no directed
rounding is attempted.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "DimensionError",
    "NormKind",
    "as_matrix",
    "charpoly",
    "eigen_spectral_radius",
    "mat_mul",
    "mat_power",
    "matrix_norm",
    "poly_roots",
]

POWER_TOL = 1e-12
ROOT_TOL = 1e-10
ORACLE_MAX_DIM = 16

# Second start vector for the power iteration.  Used alongside the all-ones
# vector so a start that is (nearly) orthogonal to the dominant singular
# subspace cannot stall the estimate below the true norm.
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


class DimensionError(ValueError):
    """Matrix shapes are incompatible or malformed."""


class ConvergenceError(ArithmeticError):
    """An iterative kernel did not converge within its iteration budget."""


class NormKind(str, enum.Enum):
    ONE = "one"
    INF = "inf"
    TWO = "two"
    MAX = "max"

    @property
    def induced(self) -> bool:
        """True for operator norms; the max-entry norm is not submultiplicative."""
        return self is not NormKind.MAX

    @classmethod
    def parse(cls, value: "NormKind | str") -> "NormKind":
        if isinstance(value, cls):
            return value
        aliases = {"1": "one", "induced_one": "one", "infinity": "inf",
                   "induced_inf": "inf", "2": "two", "spectral": "two",
                   "induced_two": "two", "max_entry": "max", "0": "max"}
        key = str(value).strip().lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown norm kind {value!r}") from None


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` and return it as a square complex128 array."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


# -- kernels on split parts -------------------------------------------------

def _mul_parts(ar, ai, br, bi):
    """Complex product of stacked matrices given as (real, imag) parts."""
    xr = ar[..., :, :, None]
    xi = ai[..., :, :, None]
    yr = br[..., None, :, :]
    yi = bi[..., None, :, :]
    # terms[..., i, k, j] = a_ik * b_kj, summed over k in index order
    return _seq_sum(xr * yr - xi * yi, -2), _seq_sum(xr * yi + xi * yr, -2)


def _seq_sum(x, axis):
    """Left-to-right sum along ``axis`` (numpy's pairwise sum reorders terms)."""
    x = np.moveaxis(x, axis, 0)
    s = x[0]
    for j in range(1, x.shape[0]):
        s = s + x[j]
    return s


def _max_abs(re, im):
    return np.hypot(re, im).max(axis=(-2, -1))


def _norm_parts(re, im, kind: NormKind):
    """Norm of each matrix in a stack; returns an array of shape ``re.shape[:-2]``."""
    if kind is NormKind.ONE:
        return _seq_sum(np.hypot(re, im), -2).max(axis=-1)
    if kind is NormKind.INF:
        return _seq_sum(np.hypot(re, im), -1).max(axis=-1)
    if kind is NormKind.MAX:
        return _max_abs(re, im)
    return _two_norm_parts(re, im)


def _start_vectors(d: int):
    k = np.arange(d)
    second = np.exp(1j * _GOLDEN_ANGLE * k) * (1.0 + k / (2.0 * d))
    v = np.stack([np.ones(d, dtype=np.complex128), second], axis=-1)
    return v.real.copy(), v.imag.copy()


def _rayleigh(gr, gi, yr, yi):
    """max over columns y of <G y, y> / <y, y>; G Hermitian."""
    zr, zi = _mul_parts(gr, gi, yr, yi)
    num = _seq_sum(yr * zr + yi * zi, -2)
    den = _seq_sum(yr * yr + yi * yi, -2)
    safe = np.where(den > 0, den, 1.0)
    q = np.where(den > 0, num / safe, 0.0)
    return np.maximum(q.max(axis=-1), 0.0)


def _two_norm_parts(re, im):
    """Largest singular value via power iteration on the Gram matrix G = A*A.

    Each sweep squares the normalized iterate, M_j ~ G^(2^j).  The Rayleigh
    quotient of G at M_j v is a lower bound on the top eigenvalue and
    (tr G^(2^j))^(2^-j) an upper bound; the sweep stops once they agree to
    ``POWER_TOL`` relative, which also covers near-degenerate top singular
    values where successive estimates creep up too slowly to judge.  Gives
    up after ``10 d^2`` sweeps.  Returns the (lower) Rayleigh estimate, which
    scales exactly under power-of-two scaling of ``A``.
    """
    batch = re.shape[:-2]
    d = re.shape[-1]
    re = re.reshape((-1, d, d))
    im = im.reshape((-1, d, d))
    # exact power-of-two prescale so that A*A neither underflows nor overflows
    peak = _max_abs(re, im)
    shift = np.where(peak > 0, np.frexp(peak)[1], 0)
    re = np.ldexp(re, -shift[:, None, None])
    im = np.ldexp(im, -shift[:, None, None])
    hr = np.swapaxes(re, -1, -2)
    hi = -np.swapaxes(im, -1, -2)
    gr, gi = _mul_parts(hr, hi, re, im)

    out = np.zeros(re.shape[0])
    done = peak == 0.0
    vr, vi = _start_vectors(d)
    vr = np.broadcast_to(vr, gr.shape[:-2] + vr.shape)
    vi = np.broadcast_to(vi, gi.shape[:-2] + vi.shape)
    mr, mi = gr, gi
    log_scale = np.zeros(re.shape[0])  # M_j = G^(2^j) / exp(log_scale)
    sweeps = 10 * d * d
    for j in range(sweeps + 1):
        scale = _max_abs(mr, mi)
        scale = np.where(scale > 0, scale, 1.0)
        mr, mi = mr / scale[:, None, None], mi / scale[:, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            log_scale = 2.0 * log_scale + np.log(scale) if j else np.log(scale)
            yr, yi = _mul_parts(mr, mi, vr, vi)
            lam = _rayleigh(gr, gi, yr, yi)
            trace = _seq_sum(np.diagonal(mr, axis1=-2, axis2=-1), -1)
            log_upper = (np.log(np.maximum(trace, 0.0)) + log_scale) / 2.0**j
            gap = log_upper - np.log(lam)
        hit = ~done & (lam > 0) & (gap <= POWER_TOL)
        out[hit] = lam[hit]
        done |= hit
        if done.all():
            break
        mr, mi = _mul_parts(mr, mi, mr, mi)
    else:
        raise ConvergenceError(
            f"two-norm power iteration did not converge in {sweeps} sweeps")
    return np.ldexp(np.sqrt(out), shift).reshape(batch)


# -- public API -------------------------------------------------------------

def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product ``a @ b`` with a fixed, left-to-right accumulation order."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[-1] != b.shape[-2] or a.ndim < 2 or b.ndim < 2:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    cr, ci = _mul_parts(a.real, a.imag, b.real, b.imag)
    return cr + 1j * ci


def mat_power(a: np.ndarray, n: int) -> np.ndarray:
    """``a**n`` by repeated left multiplication (``a @ (a @ ...)``)."""
    a = as_matrix(a)
    if n < 0:
        raise ValueError("negative power")
    p = np.eye(a.shape[0], dtype=np.complex128)
    if n == 0:
        return p
    p = a.copy()
    for _ in range(n - 1):
        p = mat_mul(a, p)
    return p


def matrix_norm(a: np.ndarray, kind: NormKind | str = NormKind.TWO) -> float:
    """Norm of a single matrix.

    ``one``: max column sum of moduli; ``inf``: max row sum; ``two``: largest
    singular value; ``max``: largest entry modulus.
    """
    kind = NormKind.parse(kind)
    a = as_matrix(a)
    return float(_norm_parts(a.real, a.imag, kind))


def charpoly(a: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first.

    Faddeev-LeVerrier recursion: M_k = A M_{k-1} + c_{k-1} I,
    c_k = -tr(A M_k) / k.
    """
    a = as_matrix(a)
    d = a.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    coeffs = np.zeros(d + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, d + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def _horner(coeffs, z):
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for c in coeffs:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _residual_scale(coeffs, z):
    return np.polyval(np.abs(coeffs), np.abs(z))


def poly_roots(coeffs, tol: float = ROOT_TOL, max_iter: int = 500) -> np.ndarray:
    """All roots of a polynomial (highest degree first) by Aberth iteration.

    Exact zero roots are deflated first.  Converged when every root has
    relative backward residual ``|p(z)| / sum |c_i||z|^i <= tol``.  Clusters
    that look like a multiple root are replaced by their centroid when that
    does not worsen the residual.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.complex128), "f")
    if c.size == 0:
        raise ValueError("zero polynomial")
    nz = 0
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
        nz += 1
    m = c.size - 1
    zeros = np.zeros(nz, dtype=np.complex128)
    if m == 0:
        return zeros
    c = c / c[0]
    # Fujiwara bound on root moduli
    tail = np.abs(c[1:])
    radius = 2.0 * max(tail[j] ** (1.0 / (j + 1)) for j in range(m))
    if m >= 1:
        radius = max(radius, 2.0 * (tail[-1] / 2.0) ** (1.0 / m))
    z = 0.5 * radius * np.exp(1j * (2.0 * np.pi * np.arange(m) / m + 0.4))
    polish = 0
    for _ in range(max_iter):
        p, dp = _horner(c, z)
        res = np.abs(p) / np.maximum(_residual_scale(c, z), np.finfo(float).tiny)
        if np.all(res <= tol):
            polish += 1
            if polish > 3:
                break
        with np.errstate(divide="ignore", invalid="ignore"):
            w = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = w / (1.0 - w * inv.sum(axis=1))
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
    else:
        if polish == 0:
            raise ConvergenceError(f"Aberth iteration did not converge in {max_iter} steps")
    z = _merge_clusters(c, z)
    return np.concatenate([z, zeros])


def _merge_clusters(c, z):
    # A root of multiplicity m is perturbed by roughly eps^(1/m), so clusters
    # are grown with a widening link radius; each candidate merge must keep
    # the residual at rounding level, which rejects genuinely distinct roots.
    if z.size < 2:
        return z
    z = z.copy()
    scale = 1.0 + np.abs(z).max()
    for frac in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1):
        for idx in _single_linkage(z, frac * scale):
            if len(idx) > 1 and np.ptp(z[idx]) != 0:
                _try_merge(c, z, idx)
    return z


def _single_linkage(z, radius):
    m = z.size
    link = np.abs(z[:, None] - z[None, :]) <= radius
    label = list(range(m))
    for i in range(m):
        for j in range(i + 1, m):
            if link[i, j] and label[j] != label[i]:
                old, new = label[j], label[i]
                label = [new if x == old else x for x in label]
    return [[i for i in range(m) if label[i] == lab] for lab in sorted(set(label))]


def _try_merge(c, z, idx):
    # a centre of multiplicity m must be a near-root of p, p', ..., p^(m-1)
    centre = _refine_multiple(c, z[idx].mean(), len(idx))
    at = np.array([centre])
    p_centre = abs(_horner(c, at)[0][0])
    p_roots = np.abs(_horner(c, z[idx])[0]).max()
    floor = np.finfo(float).eps * _residual_scale(c, at)[0]
    if p_centre > 4.0 * max(p_roots, floor):
        return
    q = c
    for _ in range(len(idx) - 1):
        q = np.polyder(q)
        scale = _residual_scale(q, at)[0]
        if abs(_horner(q, at)[0][0]) > ROOT_TOL * max(scale, np.finfo(float).tiny):
            return
    z[idx] = centre


def _refine_multiple(c, z0, mult, steps=50):
    """Newton on p^(mult-1), which has a simple root at a root of multiplicity ``mult``."""
    q = np.polyder(c, mult - 1)
    dq = np.polyder(q)
    z = complex(z0)
    for _ in range(steps):
        den = np.polyval(dq, z)
        if den == 0:
            break
        step = np.polyval(q, z) / den
        z -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(z)):
            break
    return z


def eigen_spectral_radius(a: np.ndarray) -> float:
    """Largest eigenvalue modulus, computed from the characteristic polynomial.

    Validation oracle only; shares no code with the norm/bound machinery.
    """
    a = as_matrix(a)
    d = a.shape[0]
    if d > ORACLE_MAX_DIM:
        raise DimensionError(f"eigen oracle supports d <= {ORACLE_MAX_DIM}, got {d}")
    peak = np.abs(a).max()
    if peak == 0.0:
        return 0.0
    e = math.frexp(peak)[1]
    scaled = np.ldexp(a.real, -e) + 1j * np.ldexp(a.imag, -e)
    roots = poly_roots(charpoly(scaled))
    return math.ldexp(float(np.abs(roots).max()), e)
