"""Star convolution and (cross-)covariance quadrature.

The covariance of two moving averages driven by the same noise is
``gamma_12(h) = sigma2 * int phi_1(t) phi_2(t + h) dt``; everything in this
module reduces to such product integrals, their values on the sampling
lattice ``h = s * Delta``, and the mixed discrete/continuous convolution
``(b * phi)(t) = sum_s b(s) phi(t - s Delta)`` of a kernel with an even
coefficient sequence.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParameterError
from .kernels import AbsKernel, Kernel, KernelGrid, LinComboKernel, grid_sample
from .quadrature import QuadResult, product_integral
from .tails import (
    GeomSeqTail,
    PowerSeqTail,
    PowerTail,
    SeqTail,
    ZeroSeqTail,
    seq_tail_power_sum,
    tail_sup,
)

__all__ = [
    "FiniteSupport",
    "PowerDecay",
    "CoefficientSeq",
    "star_conv",
    "autocovariance",
    "crosscovariance",
    "covariance_lags",
    "b_star_gamma",
    "BStarGamma",
]


@dataclass(frozen=True)
class FiniteSupport:
    """Even coefficient sequence with finite support, stored one-sided.

    ``values[k]`` is ``b(k) = b(-k)``; evenness holds by construction.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ParameterError("values must be non-empty (b(0) at least)")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_two_sided(cls, values) -> "FiniteSupport":
        """Build from values on ``-K..K``; raises unless the array is even."""
        values = [float(v) for v in values]
        if len(values) % 2 != 1:
            raise ParameterError("two-sided values must have odd length 2K+1")
        K = len(values) // 2
        left, right = values[:K][::-1], values[K + 1 :]
        if any(l != r for l, r in zip(left, right)):
            raise ParameterError("coefficient sequence must be even: b(-s) == b(s)")
        return cls(values=tuple(values[K:]))

    @classmethod
    def delta0(cls) -> "FiniteSupport":
        return cls(values=(1.0,))

    @property
    def radius(self) -> int:
        return len(self.values) - 1

    def weight(self, s) -> np.ndarray:
        s = np.abs(np.asarray(s, dtype=int))
        out = np.zeros(s.shape, dtype=float)
        inside = s <= self.radius
        out[inside] = np.asarray(self.values)[s[inside]]
        return out if out.ndim else float(out)

    def weights(self, radius: int) -> np.ndarray:
        """Two-sided weight array on ``-radius..radius``."""
        return self.weight(np.arange(-radius, radius + 1))

    def lq_member(self, q: float) -> bool:
        return True

    def seq_tail(self) -> SeqTail:
        return ZeroSeqTail()

    def spec_dict(self) -> dict:
        return {"type": "finite_support", "values": list(self.values)}


@dataclass(frozen=True)
class PowerDecay:
    """Even sequence ``b(s) = c * |s|**-rho`` for ``s != 0`` with ``b(0) = b0``."""

    c: float
    rho: float
    b0: float

    def __post_init__(self):
        if not self.c > 0 or not self.rho > 0:
            raise ParameterError("c and rho must be > 0")

    def weight(self, s) -> np.ndarray:
        s = np.abs(np.asarray(s, dtype=float))
        out = np.where(s == 0, self.b0, self.c * np.maximum(s, 1.0) ** -self.rho)
        return out if out.ndim else float(out)

    def weights(self, radius: int) -> np.ndarray:
        return self.weight(np.arange(-radius, radius + 1))

    def lq_member(self, q: float) -> bool:
        """Exact membership in the q-summable class: ``q * rho > 1``."""
        return q * self.rho > 1.0

    def seq_tail(self) -> SeqTail:
        return PowerSeqTail(constant=self.c, exponent=self.rho, lower=self.c)

    def spec_dict(self) -> dict:
        return {"type": "power_decay", "c": self.c, "rho": self.rho, "b0": self.b0}


CoefficientSeq = FiniteSupport | PowerDecay


# ---------------------------------------------------------------------------
# star convolution (b * phi)(t) = sum_s b(s) phi(t - s Delta)
# ---------------------------------------------------------------------------


def star_conv_kernel(b: CoefficientSeq, kernel: Kernel, Delta: float, *, absolute: bool = False) -> Kernel:
    """Kernel object evaluating ``(b * phi)(t)`` exactly (finite support) or
    with a controlled truncation (power decay).

    The absolute companion evaluates ``(|b| * |phi|)(t)``.
    """
    base = AbsKernel(kernel) if absolute else kernel
    tail_dropped = 0.0
    if isinstance(b, FiniteSupport):
        radius = b.radius
    else:
        radius, tail_dropped = _power_star_radius(b, kernel, Delta)
    s_vals = np.arange(-radius, radius + 1)
    coeffs = b.weights(radius)
    if absolute:
        coeffs = np.abs(coeffs)
    keep = coeffs != 0.0
    if not np.any(keep):
        keep = s_vals == 0
    return LinComboKernel(
        base=base,
        shifts=tuple(s_vals[keep] * Delta),
        coeffs=tuple(coeffs[keep]),
        truncation_bound=tail_dropped,
    )


def _power_star_radius(b: PowerDecay, kernel: Kernel, Delta: float, rel_tol: float = 1e-10, cap: int = 4096):
    """Truncation radius for a power-decay coefficient convolution.

    Power tails rarely meet fine tolerances by direct summation, so the radius
    caps at ``cap`` and the achieved tail bound travels with the kernel as a
    disclosed truncation diagnostic.
    """
    decay = kernel.decay
    if isinstance(decay, PowerTail):
        if b.rho + decay.exponent <= 1.0:
            raise ConvergenceError(
                f"sum b(s) phi(t - s Delta) diverges: rho_b + rho_phi = {b.rho + decay.exponent:g} <= 1"
            )
    scale = abs(b.b0) + b.c
    radius = 64
    while radius < cap:
        tail = _star_tail_bound(b, kernel, Delta, radius)
        if tail <= rel_tol * scale:
            return radius, tail
        radius *= 2
    return cap, _star_tail_bound(b, kernel, Delta, cap)


def _star_tail_bound(b: PowerDecay, kernel: Kernel, Delta: float, radius: int) -> float:
    # bound sum_{|s| > radius} |b(s) phi(t - s Delta)| uniformly over a window
    # of width ~ radius/2 * Delta around the origin; only the s -> -inf side
    # survives for causal kernels but both sides are bounded the same way.
    total = 0.0
    s = radius
    while True:
        term = b.c * s**-b.rho * tail_sup(kernel.decay, s * Delta / 2.0)
        total += term
        if term == 0.0 or term < 1e-3 * total or s > 64 * radius:
            return 2.0 * total if term > 0 else total
        s = max(s + 1, int(1.25 * s))


def star_conv(b: CoefficientSeq, grid: KernelGrid, Delta: float | None = None, *, absolute: bool = False) -> KernelGrid:
    """Sample ``(b * phi)`` (or ``(|b| * |phi|)``) on the same grid as ``grid``.

    For finite-support coefficients the result is backed by an exact shifted
    linear combination of the original kernel; power-decay coefficients are
    truncated at a radius with a relative tail below 1e-10.
    """
    Delta = grid.Delta if Delta is None else Delta
    kernel = star_conv_kernel(b, grid.kernel, Delta, absolute=absolute)
    return grid_sample(kernel, grid.Delta, grid.m, grid.horizon)


# ---------------------------------------------------------------------------
# covariance quadrature
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=100_000)
def _cached_product(k1: Kernel, k2: Kernel, shift: float, absolute: bool, base_step: float) -> QuadResult:
    return product_integral(k1, k2, shift, absolute=absolute, base_step=base_step)


def crosscovariance(
    k1: Kernel,
    k2: Kernel,
    sigma2: float,
    h: float,
    *,
    base_step: float = 1.0 / 64.0,
    full_output: bool = False,
):
    """``sigma2 * int phi_1(t) phi_2(t + h) dt`` by breakpoint-aware quadrature.

    Emits a warning when the decay-model tail bound beyond the integration
    window exceeds 1% of the value.
    """
    r = _cached_product(k1, k2, float(h), False, base_step)
    value = sigma2 * r.value
    tail = sigma2 * r.tail_bound
    if tail > 0.01 * abs(value) and abs(value) > 0:
        warnings.warn(
            f"covariance tail bound {tail:.3g} exceeds 1% of value {value:.3g}", RuntimeWarning, stacklevel=2
        )
    if full_output:
        return value, QuadResult(value=value, disc_estimate=sigma2 * r.disc_estimate, tail_bound=tail)
    return value


def autocovariance(kernel: Kernel, sigma2: float, h: float, *, base_step: float = 1.0 / 64.0, full_output: bool = False):
    """Autocovariance at lag ``h``; even in ``h`` by direct symmetrisation."""
    return crosscovariance(kernel, kernel, sigma2, abs(h), base_step=base_step, full_output=full_output)


def covariance_lags(
    k1: Kernel,
    k2: Kernel,
    sigma2: float,
    Delta: float,
    s_min: int,
    s_max: int,
    *,
    base_step: float | None = None,
    absolute: bool = False,
) -> np.ndarray:
    """Array of ``sigma2 * int phi_1(t) phi_2(t + s Delta) dt`` for ``s_min <= s <= s_max``."""
    base_step = Delta / 64.0 if base_step is None else base_step
    same = k1 is k2 or k1 == k2
    out = np.empty(s_max - s_min + 1)
    for i, s in enumerate(range(s_min, s_max + 1)):
        shift = s * Delta
        if same and s < 0 and -s <= s_max:
            shift = -shift  # symmetric: reuse the positive-lag cache entry
        out[i] = sigma2 * _cached_product(k1, k2, float(shift), absolute, base_step).value
    return out


def fit_seq_tail(lags: np.ndarray, vals: np.ndarray, known_exponent: float | None = None) -> SeqTail:
    """Tail model for a lag sequence from its last computed decade.

    When ``known_exponent`` is given (analytic kernel decay), only the
    constant is fitted against it; otherwise both power and geometric fits
    compete.  Fitted models are conservative (constant inflated by the fit
    residual, ``exact=False``).
    """
    lags = np.asarray(lags, dtype=float)
    mags = np.abs(np.asarray(vals, dtype=float))
    keep = (mags > 1e-280) & (lags > 0)
    if keep.sum() < 3:
        return ZeroSeqTail(exact=False)
    lo = max(lags[keep].max() / 10.0, 1.0)
    sel = keep & (lags >= lo)
    if sel.sum() < 3:
        sel = keep
    x, y = lags[sel], np.log(mags[sel])
    if known_exponent is not None:
        shifted = y + known_exponent * np.log(x)
        return PowerSeqTail(
            constant=float(np.exp(np.max(shifted))),
            exponent=known_exponent,
            lower=float(np.exp(np.min(shifted))),
            exact=False,
        )
    slope_p, icept_p = np.polyfit(np.log(x), y, 1)
    res_p = float(np.max(np.abs(np.log(x) * slope_p + icept_p - y)))
    slope_e, icept_e = np.polyfit(x, y, 1)
    res_e = float(np.max(np.abs(x * slope_e + icept_e - y)))
    if res_e <= res_p and slope_e < 0:
        return GeomSeqTail(constant=float(np.exp(icept_e + res_e)), ratio=float(np.exp(slope_e)), exact=False)
    return PowerSeqTail(
        constant=float(np.exp(icept_p + res_p)),
        exponent=float(-slope_p),
        lower=float(np.exp(icept_p - res_p)),
        exact=False,
    )


def gamma_seq_exponent(kernel: Kernel, other: Kernel | None = None) -> float | None:
    """Analytic power-decay exponent of the lag covariance when both kernels
    have exact power tails; ``None`` for exponential decay."""
    d1, d2 = kernel.decay, (other or kernel).decay
    if isinstance(d1, PowerTail) and isinstance(d2, PowerTail) and d1.exact and d2.exact:
        a, b = d1.exponent, d2.exponent
        return min(a, b, a + b - 1.0)
    return None


@dataclass(frozen=True)
class BStarGamma:
    """Lag sequence ``(b * gamma)(s Delta)`` on ``-radius..radius`` with tail data."""

    values: np.ndarray
    radius: int
    tail: SeqTail
    l2_sq: float
    l2_sq_tail: float
    capped: bool

    def value(self, s: int) -> float:
        if abs(s) > self.radius:
            raise IndexError(f"lag {s} outside computed radius {self.radius}")
        return float(self.values[s + self.radius])

    def to_csv(self, path) -> None:
        """Write the sequence as ``index,value,tail_bound`` rows.

        The tail-bound column bounds the omitted mass beyond each index from
        the fitted tail model (zero inside the computed radius except at the
        edges, where it reports the model's one-sided continuation).
        """
        from .tails import seq_tail_power_sum, ZeroSeqTail as _Zero

        with open(path, "w", encoding="utf-8") as fh:
            fh.write("index,value,tail_bound\n")
            for s in range(-self.radius, self.radius + 1):
                if abs(s) == self.radius and not isinstance(self.tail, _Zero):
                    _, bound = seq_tail_power_sum(self.tail, self.radius + 1, 1.0)
                else:
                    bound = 0.0
                fh.write(f"{s},{self.value(s)!r},{float(bound)!r}\n")


def b_star_gamma(
    b: CoefficientSeq,
    kernel: Kernel,
    sigma2: float,
    Delta: float,
    S: int | None = None,
    *,
    base_step: float | None = None,
    rel_tol: float = 1e-8,
    s_cap: int = 10**6,
) -> BStarGamma:
    """Sequence ``s -> sum_u b(u) gamma((s - u) Delta)`` with its squared l2 norm.

    The truncation radius doubles adaptively until the extrapolated tail of
    the squared-norm is below ``rel_tol`` (relative), capping at ``s_cap``
    with ``capped=True``.  A tail that provably diverges raises
    :class:`ConvergenceError`.
    """
    gamma_exp = _gamma_power_exponent_or_check(b, kernel)

    if isinstance(b, FiniteSupport):
        b_radius = b.radius
    else:
        b_radius = None  # grows with S below

    S_eff = 32 if S is None else S
    while True:
        ub = b_radius if b_radius is not None else max(64, 4 * S_eff)
        g_lo, g_hi = -(S_eff + ub), S_eff + ub
        gam = covariance_lags(kernel, kernel, sigma2, Delta, g_lo, g_hi, base_step=base_step)
        w = b.weights(ub)
        # full convolution, then crop to [-S_eff, S_eff]
        conv = np.convolve(gam, w, mode="same")
        mid = len(gam) // 2
        vals = conv[mid - S_eff : mid + S_eff + 1]
        lags = np.arange(-S_eff, S_eff + 1)
        tail = fit_seq_tail(lags, vals, known_exponent=_bsg_exponent(b, gamma_exp))
        head = float(np.sum(vals**2))
        t_lo, t_hi = seq_tail_power_sum(tail, S_eff + 1, 2.0) if not isinstance(tail, ZeroSeqTail) else (0.0, 0.0)
        tail_sq = 2.0 * t_hi  # both sides
        if not np.isfinite(tail_sq):
            if S is not None or S_eff >= s_cap:
                raise ConvergenceError("squared-norm tail of (b * gamma) diverges or cannot be bounded")
        if S is not None:
            capped = False
            break
        if tail_sq <= rel_tol * max(head, 1e-300):
            capped = False
            break
        if S_eff >= s_cap:
            capped = True
            break
        S_eff *= 2
    return BStarGamma(values=vals, radius=S_eff, tail=tail, l2_sq=head + tail_sq / 2.0, l2_sq_tail=tail_sq, capped=capped)


def _gamma_power_exponent_or_check(b: CoefficientSeq, kernel: Kernel) -> float | None:
    ge = gamma_seq_exponent(kernel)
    if isinstance(b, PowerDecay) and ge is not None and b.rho + ge <= 1.0:
        raise ConvergenceError(
            f"(b * gamma) diverges termwise: rho_b + rho_gamma = {b.rho + ge:g} <= 1"
        )
    return ge


def _bsg_exponent(b: CoefficientSeq, gamma_exp: float | None) -> float | None:
    if gamma_exp is None:
        return None
    if isinstance(b, FiniteSupport):
        return gamma_exp
    return min(b.rho, gamma_exp)
