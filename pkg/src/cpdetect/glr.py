"""Generalized likelihood ratio detector for a mean shift.

Pre-change distribution N(mu0, sigma^2) with both parameters known; the
post-change mean is unknown and maximized out, subject to a minimum change
magnitude nu_min.  The decision statistic scans every candidate change
onset j and takes the best log-likelihood ratio of the segment j..k.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .gaussian_stats import PrefixStats


@dataclass(frozen=True)
class GlrConfig:
    mu0: float = 0.0
    sigma: float = 1.0
    nu_min: float = 0.5
    threshold_h: float = 5.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.nu_min < 0:
            raise ValueError("nu_min must be nonnegative")
        if self.threshold_h <= 0:
            raise ValueError("threshold_h must be positive")


class GlrState:
    """Running prefix sums; one observation appended per step."""

    def __init__(self):
        self.prefix = PrefixStats()

    @property
    def k(self) -> int:
        return len(self.prefix)

    def observe(self, x: float) -> None:
        self.prefix.append(float(x))

    def to_json(self) -> str:
        sums, _ = self.prefix.arrays()
        values = np.diff(sums)
        return json.dumps({"series": values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "GlrState":
        state = cls()
        for x in json.loads(text)["series"]:
            state.observe(x)
        return state


def glr_decision(state: GlrState, config: GlrConfig) -> float:
    """Decision statistic g_k = max over onsets j of the best shifted LLR.

    For the segment j..k with deviation sum s and length m, the
    log-likelihood ratio at shift nu is (nu*s - m*nu^2/2) / sigma^2,
    maximized at nu = s/m; when |s/m| < nu_min the shift is projected to
    sign(s)*nu_min.  Both shift directions are allowed.  The statistic is
    clamped at 0 so it reads as "no evidence" rather than negative evidence.
    """
    k = state.k
    if k < 1:
        raise ValueError("need at least one observation")
    sums, _ = state.prefix.arrays()
    sigma2 = config.sigma * config.sigma
    # deviation sums of segments j..k for j = 1..k, and their lengths
    m = np.arange(k, 0, -1, dtype=float)
    s = (sums[k] - sums[:k]) - config.mu0 * m
    nu = s / m
    small = np.abs(nu) < config.nu_min
    nu = np.where(small, np.where(s >= 0, config.nu_min, -config.nu_min), nu)
    llr = (nu * s - 0.5 * m * nu * nu) / sigma2
    return float(max(0.0, llr.max()))
