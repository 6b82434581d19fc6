"""Initial interval-length estimate and well-balanced cooling schedules.

Step 1 of the approximation algorithm estimates q (the z-interval length)
from a handful of TPA runs; step 2 runs TPA at a much higher rate, thins,
and keeps every d-th point so that consecutive z-gaps concentrate as
Gamma(d, k) variables below the target eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import GibbsModel, SIGN_NONNEGATIVE, SIGN_NONPOSITIVE
from .samplers import SamplerOracle
from .tpa import DIRECTION_DOWN, merge_runs, thin, tpa_run

REGIME_INTEGER_NONPOSITIVE = "integer-nonpositive"
REGIME_INTEGER_NONNEGATIVE = "integer-nonnegative"
REGIME_SHIFTED = "shifted-mixed"

# Endpoint duplicate guard for kept points.
_ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class ScheduleParams:
    """Rate/selection parameters: keep every d-th point of a rate-k process.

    By construction d = (3/4) * eta * k up to the ceiling on d, so z-gaps of
    kept points have mean (3/4) * eta.
    """

    eta: float
    d: int
    k: float
    q_hat1: float
    regime: str

    def __post_init__(self):
        if self.eta <= 0 or self.k <= 0 or self.d < 1:
            raise ValueError("eta and k must be positive, d >= 1")
        if self.q_hat1 < 0:
            raise ValueError("q_hat1 must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "d": self.d,
            "k": self.k,
            "q_hat1": self.q_hat1,
            "regime": self.regime,
        }

    @classmethod
    def from_dict(cls, spec: dict) -> "ScheduleParams":
        return cls(
            eta=float(spec["eta"]),
            d=int(spec["d"]),
            k=float(spec["k"]),
            q_hat1=float(spec["q_hat1"]),
            regime=str(spec["regime"]),
        )


@dataclass(frozen=True)
class CoolingSchedule:
    """beta_0 = 0 < beta_1 < ... < beta_l = beta with midpoints and half-lengths."""

    betas: tuple[float, ...]
    degenerate: bool = False

    def __post_init__(self):
        if len(self.betas) < 2:
            raise ValueError("a schedule needs at least two points")
        if self.betas[0] != 0.0:
            raise ValueError("schedules start at 0")
        for lo, hi in zip(self.betas, self.betas[1:]):
            if hi <= lo:
                raise ValueError("schedule points must be strictly increasing")

    @property
    def beta(self) -> float:
        return self.betas[-1]

    @property
    def num_intervals(self) -> int:
        return len(self.betas) - 1

    @property
    def midpoints(self) -> tuple[float, ...]:
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.betas, self.betas[1:]))

    @property
    def half_lengths(self) -> tuple[float, ...]:
        """Parameter-space half-lengths delta_i = (beta_{i+1} - beta_i) / 2."""
        return tuple((hi - lo) / 2.0 for lo, hi in zip(self.betas, self.betas[1:]))

    def to_dict(self) -> dict:
        return {"betas": list(self.betas), "degenerate": self.degenerate}

    @classmethod
    def from_dict(cls, spec: dict) -> "CoolingSchedule":
        return cls(
            betas=tuple(float(b) for b in spec["betas"]),
            degenerate=bool(spec.get("degenerate", False)),
        )


def regime_for_model(model: GibbsModel) -> str:
    """Integer regimes need integer energies of a single sign; everything
    else goes through the shifted pipeline."""
    if model.integer_valued and model.sign_class == SIGN_NONPOSITIVE:
        return REGIME_INTEGER_NONPOSITIVE
    if model.integer_valued and model.sign_class == SIGN_NONNEGATIVE:
        return REGIME_INTEGER_NONNEGATIVE
    return REGIME_SHIFTED


def initial_estimate(
    oracle: SamplerOracle,
    beta: float,
    rng: np.random.Generator,
    runs: int = 5,
    normalized: bool = True,
    trace: list | None = None,
) -> tuple[float, int]:
    """Estimate q from ``runs`` merged TPA runs.

    Returns (q_hat1, draws_used).  q_hat1 is the merged point count divided
    by the run count, so it estimates q itself; with the default 5 runs,
    q_hat1 + 1/2 >= q/2 with probability >= 99%.  ``normalized=False``
    returns the raw merged count instead (mean 5q), for fidelity
    experiments against the literal step-1 phrasing.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    before = oracle.counter.total
    merged = merge_runs(
        [tpa_run(oracle, beta, rng, trace=trace, run_id=i) for i in range(runs)]
    )
    draws_used = oracle.counter.total - before
    count = float(len(merged))
    return (count / runs if normalized else count), draws_used


def select_params(q_hat1: float, n: int, regime: str, beta: float) -> ScheduleParams:
    """Parameter choice for the target failure budget, per regime.

    Integer regimes: eta = 2/[2 + ln(2n)], d = ceil(22 ln(100 (2+ln 2n)
    (q_hat1 + 1/2))), k = (2/3) d (2 + ln 2n).  Shifted regime:
    eta = 2/ln 2, d = ceil(22 ln(200 (ln 2)^-1 (q_hat1 + 2 n beta + 1))),
    k = (2/3) (ln 2) d.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if q_hat1 < 0:
        raise ValueError("q_hat1 must be nonnegative")
    if regime in (REGIME_INTEGER_NONPOSITIVE, REGIME_INTEGER_NONNEGATIVE):
        scale = 2.0 + math.log(2.0 * n)
        eta = 2.0 / scale
        d = math.ceil(22.0 * math.log(100.0 * scale * (q_hat1 + 0.5)))
        k = (2.0 / 3.0) * d * scale
    elif regime == REGIME_SHIFTED:
        eta = 2.0 / math.log(2.0)
        d = math.ceil(
            22.0 * math.log(200.0 / math.log(2.0) * (q_hat1 + 2.0 * n * beta + 1.0))
        )
        k = (2.0 / 3.0) * math.log(2.0) * d
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return ScheduleParams(eta=eta, d=max(d, 1), k=k, q_hat1=q_hat1, regime=regime)


def well_balanced_schedule(
    oracle: SamplerOracle,
    beta: float,
    params: ScheduleParams,
    rng: np.random.Generator,
    trace: list | None = None,
) -> tuple[CoolingSchedule, int]:
    """Step 2: run TPA ceil(k) times, thin to rate k, keep every d-th point.

    Points are kept counting from the end where the walk starts (the beta
    end for downward processes, the 0 end for upward ones), which is what
    makes consecutive kept z-gaps Gamma(d, k); the final partial block is
    absorbed into the interval touching the far endpoint.  Fewer than d
    points yield the legal single-interval schedule {0, beta}, flagged
    degenerate.
    """
    before = oracle.counter.total
    runs = [
        tpa_run(oracle, beta, rng, trace=trace, run_id=i)
        for i in range(math.ceil(params.k))
    ]
    process = thin(merge_runs(runs), params.k, rng)
    draws_used = oracle.counter.total - before

    pts = process.points
    m = len(pts)
    d = params.d
    if process.direction == DIRECTION_DOWN:
        kept = [pts[m - j * d] for j in range(1, m // d + 1)]
    else:
        kept = [pts[j * d - 1] for j in range(1, m // d + 1)]
    kept = sorted(
        p for p in kept if p > _ENDPOINT_TOL and p < beta - _ENDPOINT_TOL
    )
    schedule = CoolingSchedule(
        betas=(0.0, *kept, float(beta)), degenerate=not kept
    )
    return schedule, draws_used
