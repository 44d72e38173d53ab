"""
Closed-form quantities for the randomized construction and for the random-graph
tail estimates. All arithmetic is float64; "log" is the natural logarithm.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np
from scipy.special import gammaln

from app.core.errors import InvalidEpsilon, InvalidParameters


@dataclass(frozen=True)
class BoundReport:
    n: int
    delta_max: int
    r: int
    d: int
    c_dr: float
    q_star: float
    gamma_at_q_star: float
    lower: float
    upper: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_rd(r: int, d: int) -> None:
    if r < 1:
        raise InvalidParameters(f"index r must be >= 1, got {r}")
    if d < 1:
        raise InvalidParameters(f"slack d must be >= 1, got {d}")


def _check_delta(delta_max: int) -> None:
    if delta_max < 2:
        raise InvalidParameters(f"max degree must be >= 2, got {delta_max}")


def _check_prob(q: float, name: str = "q") -> None:
    if not 0.0 <= q <= 1.0:
        raise InvalidParameters(f"{name} must lie in [0, 1], got {q}")


def _weight(delta_max: int, r: int) -> float:
    # 2r(Δ+1)^(r+2)
    return 2.0 * r * float(delta_max + 1) ** (r + 2)


# ----------------------------
# Code-size bounds
# ----------------------------

def c_const(d: int, r: int) -> float:
    _check_rd(r, d)
    return d * (d + 1) ** (-1.0 - 1.0 / d) * (2.0 * r) ** (-1.0 / d)


def q_star(delta_max: int, r: int, d: int) -> float:
    """Minimizer of gamma: root of 1 - 2r(Δ+1)^(r+2)(d+1)(1-q)^d = 0."""
    _check_delta(delta_max)
    _check_rd(r, d)
    return 1.0 - (_weight(delta_max, r) * (d + 1)) ** (-1.0 / d)


def gamma(q: float, delta_max: int, r: int, d: int) -> float:
    """Per-vertex expected code-size factor q + 2r(Δ+1)^(r+2)(1-q)^(d+1)."""
    _check_prob(q)
    _check_delta(delta_max)
    _check_rd(r, d)
    return q + _weight(delta_max, r) * (1.0 - q) ** (d + 1)


def theta_bounds(n: int, delta_max: int, r: int, d: int) -> BoundReport:
    """
    n/(Δ+1) <= θ_n <= n(1 - c(d,r)/(Δ+1)^((r+2)/d)). Pure arithmetic: the upper side
    only holds for graphs with the (r+d+1)-strong neighbourhood property.
    """
    if n < 1:
        raise InvalidParameters(f"n must be >= 1, got {n}")
    _check_delta(delta_max)
    _check_rd(r, d)
    c = c_const(d, r)
    q0 = q_star(delta_max, r, d)
    return BoundReport(
        n=n,
        delta_max=delta_max,
        r=r,
        d=d,
        c_dr=c,
        q_star=q0,
        gamma_at_q_star=gamma(q0, delta_max, r, d),
        lower=n / (delta_max + 1),
        upper=n * (1.0 - c / float(delta_max + 1) ** ((r + 2) / d)),
    )


# ----------------------------
# Bad-vertex probabilities
# ----------------------------

def binom_lower_tail(q: float, trials: int, r: int) -> float:
    """P(Bin(trials, q) <= r-1), with coefficients from log-gamma."""
    _check_prob(q)
    if trials < 0:
        raise InvalidParameters(f"trial count must be >= 0, got {trials}")
    if r < 1:
        raise InvalidParameters(f"index r must be >= 1, got {r}")
    if r - 1 >= trials:
        return 1.0
    if q == 0.0:
        return 1.0
    if q == 1.0:
        return 0.0
    l = np.arange(r, dtype=np.float64)
    log_terms = (
        gammaln(trials + 1.0) - gammaln(l + 1.0) - gammaln(trials - l + 1.0)
        + l * math.log(q) + (trials - l) * math.log1p(-q)
    )
    return float(min(1.0, max(0.0, np.exp(log_terms).sum())))


def f1_prob(q: float, deg_closed: int, r: int) -> float:
    """Probability that N[v] (of size deg_closed) holds at most r-1 sampled vertices."""
    if deg_closed < 1:
        raise InvalidParameters(f"closed degree must be >= 1, got {deg_closed}")
    return binom_lower_tail(q, deg_closed, r)


def f2_prob(q: float, dist_size: int, r: int) -> float:
    """Same tail for one w, with dist_size = #(N[v] \\ N[w]); the caller maximizes over w."""
    return binom_lower_tail(q, dist_size, r)


# ----------------------------
# Random-graph tail estimates
# ----------------------------

def concentration_bound(theta: float, eps: float) -> float:
    """P(|T - θ| >= εθ) <= 2 exp(-ε²θ/4) for a sum of independent Bernoullis with mean θ."""
    if not 0.0 < eps <= 0.5:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1/2], got {eps}", eps=eps)
    if theta <= 0:
        raise InvalidParameters(f"mean must be > 0, got {theta}")
    return 2.0 * math.exp(-(eps**2) * theta / 4.0)


def common_tail_bound(n: int, p: float) -> float:
    """Per-pair bound P(T_ij > (n-1)p/4) <= e * exp(-(n-1)p/2)."""
    if n < 2:
        raise InvalidParameters(f"n must be >= 2, got {n}")
    if not 0.0 < p < 1.0:
        raise InvalidParameters(f"p must lie in (0, 1), got {p}")
    return math.e * math.exp(-(n - 1) * p / 2.0)


def degree_event_bound(n: int, p: float) -> float:
    """Union over all n vertices of the ε = 1/2 degree deviation."""
    if n < 2:
        raise InvalidParameters(f"n must be >= 2, got {n}")
    _check_prob(p, "p")
    if p == 0.0:
        return float(n) * 2.0
    return n * concentration_bound((n - 1) * p, 0.5)


def common_union_bound(n: int, p: float) -> float:
    return math.comb(n, 2) * common_tail_bound(n, p)


def lemma_degree_cap(n: int, y: int) -> float:
    return max(32.0 * math.log(n), 8.0 * y)


def n0_threshold() -> int:
    """
    Smallest integer x past the large root of x = 2560 (ln x)^2 (about 4.3e5);
    above it x > 2560 (ln x)^2 holds for good.
    """
    x = 1.0e6
    for _ in range(200):
        nxt = 2560.0 * math.log(x) ** 2
        if abs(nxt - x) < 1e-9:
            break
        x = nxt
    k = math.floor(x)
    while k <= 2560.0 * math.log(k) ** 2:
        k += 1
    while k - 1 > 2560.0 * math.log(k - 1) ** 2:
        k -= 1
    return k
