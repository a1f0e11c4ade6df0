"""Replicated experiments testing the Gaussian limits against the analytic variance.

One experiment simulates ``replicates`` independent paths (counter-based
streams ``0 .. R-1`` of the master seed), computes the centered and root-n
normalised statistic for each, and compares the sample of normalised values
to the centered normal law with the analytic limit variance: empirical
moments, variance ratio, and the Kolmogorov-Smirnov distance.

Replicates are embarrassingly parallel and their randomness is keyed by the
stream index, so reports are bit-identical regardless of the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .covariance import CoefficientSeq, covariance_lags
from .errors import ParameterError
from .kernels import Kernel
from .levy import LevyModel, cumulants
from .simulate import (
    PathConfig,
    compute_qn,
    compute_sn,
    ls_derivative,
    normalized_statistic,
    sample_autocov,
    simulate_pair,
    simulate_path,
)
from .variance import autocov_clt_sigma, eta2_qn, eta2_sn, expected_qn, expected_sn

__all__ = ["ExperimentConfig", "LsSpec", "McReport", "run_experiment", "ks_distance", "run_replicates"]

STATISTICS = ("sn", "qn", "autocov_contrast", "ls_derivative")


@dataclass(frozen=True)
class LsSpec:
    """Least-squares derivative specification: maps ``theta -> R^k`` and the
    expansion point (which must satisfy the projection property)."""

    v: object
    vp: object
    theta0: float
    k: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one replicated experiment."""

    statistic: str
    kernel: Kernel
    model: LevyModel
    delta: float
    n: int
    replicates: int
    seed: int = 0
    kernel2: Kernel | None = None
    b: CoefficientSeq | None = None
    contrast: tuple[float, ...] | None = None
    lags: int | None = None
    ls: LsSpec | None = None
    fine_steps: int = 64
    horizon: float | None = None
    tail_mass_budget: float = 1e-4
    conditions: str = "auto"  # "auto" | "waive"

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ParameterError(f"statistic must be one of {STATISTICS}, got {self.statistic!r}")
        if self.replicates < 2:
            raise ParameterError("replicates must be >= 2")
        if self.n < 2:
            raise ParameterError("n must be >= 2")
        if self.statistic == "qn" and self.b is None:
            raise ParameterError("qn experiments need a coefficient sequence b")
        if self.statistic == "autocov_contrast":
            if self.contrast is None or self.lags is None:
                raise ParameterError("autocov_contrast experiments need contrast and lags")
            if not any(c != 0.0 for c in self.contrast):
                raise ParameterError("contrast must be non-zero")
            if len(self.contrast) != self.lags:
                raise ParameterError("contrast length must equal lags")
            if not self.lags < self.n - 1:
                raise ParameterError("lags must satisfy m < n - 1")
        if self.statistic == "ls_derivative" and self.ls is None:
            raise ParameterError("ls_derivative experiments need an LsSpec")
        if self.conditions not in ("auto", "waive"):
            raise ParameterError("conditions must be 'auto' or 'waive'")

    def path_config(self, stream_index: int) -> PathConfig:
        return PathConfig(
            delta=self.delta,
            n=self.n,
            fine_steps=self.fine_steps,
            horizon=self.horizon,
            seed=self.seed,
            stream_index=stream_index,
            tail_mass_budget=self.tail_mass_budget,
        )


@dataclass(frozen=True)
class McReport:
    """Per-replicate normalised statistics and their comparison to the limit law."""

    statistics: np.ndarray
    replicates: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    eta2: float
    variance_ratio: float
    ks: float
    degenerate: bool = False
    conditions_note: str = ""
    extra: dict = field(default_factory=dict)
    csv_path: str | None = None
    json_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "eta2": self.eta2,
            "variance_ratio": self.variance_ratio,
            "ks": self.ks,
            "degenerate": self.degenerate,
            "conditions_note": self.conditions_note,
            "extra": dict(self.extra),
            "csv_path": self.csv_path,
            "json_path": self.json_path,
        }


def ks_distance(samples, variance: float) -> float:
    """Sup distance between the empirical law and the centered normal with ``variance``."""
    samples = np.sort(np.asarray(samples, dtype=float))
    if samples.size < 1:
        raise ParameterError("need at least one sample")
    if not variance > 0:
        raise ParameterError(f"variance must be > 0, got {variance}")
    R = samples.size
    cdf = sps.norm.cdf(samples, scale=math.sqrt(variance))
    upper = np.max(np.arange(1, R + 1) / R - cdf)
    lower = np.max(cdf - np.arange(0, R) / R)
    return float(max(upper, lower))


def run_replicates(replicate_fn, count: int, threads: int | None = None) -> np.ndarray:
    """Evaluate ``replicate_fn(r)`` for ``r = 0..count-1``, optionally threaded.

    Results land in stream-index order, so the output is identical for any
    thread count.
    """
    out = np.empty(count)
    if threads is None or threads <= 1:
        for r in range(count):
            out[r] = replicate_fn(r)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for r, val in zip(range(count), pool.map(replicate_fn, range(count))):
            out[r] = val
    return out


def _sn_setup(cfg: ExperimentConfig):
    k2 = cfg.kernel2 if cfg.kernel2 is not None else cfg.kernel
    check = "auto" if cfg.conditions == "auto" else "skip"
    rep = eta2_sn(cfg.kernel, k2, cfg.model, cfg.delta, check=check)
    expected = expected_sn(cfg.kernel, k2, cfg.model, cfg.delta, cfg.n)

    def one(r: int) -> float:
        x1, x2 = simulate_pair(cfg.kernel, k2, cfg.model, cfg.path_config(r))
        return normalized_statistic(compute_sn(x1, x2), expected, cfg.n)

    return rep.eta2, rep.conditions_note, one


def _qn_setup(cfg: ExperimentConfig):
    check = "auto" if cfg.conditions == "auto" else "skip"
    rep = eta2_qn(cfg.kernel, cfg.b, cfg.model, cfg.delta, check=check)
    expected = expected_qn(cfg.b, cfg.kernel, cfg.model, cfg.delta, cfg.n)

    def one(r: int) -> float:
        x = simulate_path(cfg.kernel, cfg.model, cfg.path_config(r))
        return normalized_statistic(compute_qn(x, cfg.b), expected, cfg.n)

    return rep.eta2, rep.conditions_note, one


def _autocov_setup(cfg: ExperimentConfig):
    m = cfg.lags
    alpha = np.asarray(cfg.contrast, dtype=float)
    check = "auto" if cfg.conditions == "auto" else "skip"
    sigma = autocov_clt_sigma(cfg.kernel, cfg.model, cfg.delta, m, check=check)
    target = float(alpha @ sigma @ alpha)
    sigma2, _ = cumulants(cfg.model)
    gam = covariance_lags(cfg.kernel, cfg.kernel, sigma2, cfg.delta, 1, m, base_step=cfg.delta / 256.0)
    finite_mean = (1.0 - np.arange(1, m + 1) / cfg.n) * gam  # exact finite-n mean of each lag

    def one(r: int) -> float:
        x = simulate_path(cfg.kernel, cfg.model, cfg.path_config(r))
        ghat = sample_autocov(x, m)
        return math.sqrt(cfg.n) * float(alpha @ (ghat - finite_mean))

    note = "centering at the exact finite-n mean (1 - j/n) gamma(j Delta)"
    return target, note, one


def _ls_setup(cfg: ExperimentConfig):
    from .inference import ls_kernel_pair

    spec = cfg.ls
    k1, k2 = ls_kernel_pair(cfg.kernel, spec.v, spec.vp, spec.theta0, spec.k, cfg.delta)
    check = "auto" if cfg.conditions == "auto" else "skip"
    if check == "auto":
        # license the limit through the base kernel's autocovariance conditions
        from .conditions import check_conditions

        base_rep = check_conditions("autocov", cfg.kernel, Delta=cfg.delta, model=cfg.model)
        note = f"autocov conditions {base_rep.overall}"
    else:
        note = "unverified (check skipped)"
    rep = eta2_sn(k1, k2, cfg.model, cfg.delta, check="skip")

    def one(r: int) -> float:
        x = simulate_path(cfg.kernel, cfg.model, cfg.path_config(r))
        return normalized_statistic(ls_derivative(x, spec.v, spec.vp, spec.theta0, spec.k), 0.0, cfg.n)

    return rep.eta2, note, one


def run_experiment(cfg: ExperimentConfig, *, threads: int | None = None) -> McReport:
    """Run all replicates of the configured experiment and summarise them."""
    setup = {"sn": _sn_setup, "qn": _qn_setup, "autocov_contrast": _autocov_setup, "ls_derivative": _ls_setup}
    eta2, note, one = setup[cfg.statistic](cfg)
    values = run_replicates(one, cfg.replicates, threads=threads)

    degenerate = not (eta2 > 0.0) or bool(np.all(values == values[0]))
    variance = float(np.var(values, ddof=1))
    report = McReport(
        statistics=values,
        replicates=cfg.replicates,
        mean=float(np.mean(values)),
        variance=variance,
        skewness=float(sps.skew(values)),
        excess_kurtosis=float(sps.kurtosis(values)),
        eta2=float(eta2),
        variance_ratio=(variance / eta2 if eta2 > 0 else math.nan),
        ks=(ks_distance(values, eta2) if eta2 > 0 else math.nan),
        degenerate=degenerate,
        conditions_note=note,
    )
    return report
