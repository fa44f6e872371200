"""Scalar household economics: tastes, production shares, fertility, mortality."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError

DAY_HOURS = 24.0


@dataclass(frozen=True)
class Preferences:
    """Cobb-Douglas taste parameters; beta is pinned to 1 - alpha."""

    alpha: float
    sigma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 <= self.sigma < 1.0:
            raise ParameterError(f"sigma must lie in [0, 1), got {self.sigma}")

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha


def utility(leisure: float, consumption: float, prefs: Preferences) -> float:
    """Cobb-Douglas utility leisure^alpha * consumption^beta, homogeneous of degree one."""
    if leisure < 0.0 or consumption < 0.0:
        raise DomainError(
            f"leisure and consumption must be >= 0, got ({leisure}, {consumption})"
        )
    if leisure == 0.0 or consumption == 0.0:
        return 0.0
    return math.pow(leisure, prefs.alpha) * math.pow(consumption, prefs.beta)


def consumption(labor: float, others_labor: float, gamma: float) -> float:
    """Own production share labor * (labor + others_labor)^(gamma - 1)."""
    if not 0.0 <= labor <= DAY_HOURS:
        raise DomainError(f"labor must lie in [0, {DAY_HOURS}], got {labor}")
    if others_labor < 0.0:
        raise DomainError(f"others_labor must be >= 0, got {others_labor}")
    if not gamma > 1.0:
        raise DomainError(f"gamma must be > 1, got {gamma}")
    if labor == 0.0:
        return 0.0
    return labor * math.pow(labor + others_labor, gamma - 1.0)


#: Supported offspring-weight shapes.  "geometric" sums sigma^j over the k
#: children, so large families keep paying off at high sigma.  "threshold"
#: pays a flat sigma once the family is nonempty, which caps the attractive
#: family size at one child and puts the have-a-kid boundary exactly at
#: sigma = 0.5.
SIGMA_FORMS = ("geometric", "threshold")


def _check_sigma_form(form: str) -> None:
    if form not in SIGMA_FORMS:
        raise ParameterError(f"sigma form must be one of {SIGMA_FORMS}, got {form!r}")


def sigma_weight(sigma: float, k: int, form: str = "geometric") -> float:
    """Offspring weight attached to k children; zero when k = 0."""
    if not 0.0 <= sigma < 1.0:
        raise ParameterError(f"sigma must lie in [0, 1), got {sigma}")
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    _check_sigma_form(form)
    if form == "threshold":
        return sigma if k >= 1 else 0.0
    total = 0.0
    power = 1.0
    for _ in range(k):
        power *= sigma
        total += power
    return total


def fertility_bracket(sigma: float, k: int, form: str = "geometric") -> float:
    """Utility multiplier 1/(k+1) + sigma_weight(sigma, k) a family of size k earns."""
    return 1.0 / (k + 1) + sigma_weight(sigma, k, form)


def family_utility(
    leisure: float,
    consumption_: float,
    prefs: Preferences,
    k: int,
    form: str = "geometric",
) -> float:
    """Family utility: own share of a (k+1)-way split plus weighted offspring utility."""
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    own = utility(leisure / (k + 1), consumption_ / (k + 1), prefs)
    return own + sigma_weight(prefs.sigma, k, form) * utility(leisure, consumption_, prefs)


def choose_k(prefs: Preferences, k_max: int = 10, form: str = "geometric") -> int:
    """Optimal family size: argmax of the fertility bracket over 0..k_max.

    By degree-one homogeneity the bracket factors out of family utility, so the
    argmax is independent of leisure, consumption, and allocation strategy.
    Ties resolve toward the smaller k.
    """
    if k_max < 0:
        raise ParameterError(f"k_max must be >= 0, got {k_max}")
    best_k = 0
    best_value = fertility_bracket(prefs.sigma, 0, form)
    for k in range(1, k_max + 1):
        value = fertility_bracket(prefs.sigma, k, form)
        if value > best_value:
            best_k = k
            best_value = value
    return best_k


def mortality(cumulative_labor: float, mid: float = 240.0, scale: float = 60.0) -> float:
    """Logistic death probability in (0, 1) as lifetime labor accumulates."""
    if cumulative_labor < 0.0:
        raise DomainError(f"cumulative_labor must be >= 0, got {cumulative_labor}")
    if not scale > 0.0:
        raise ParameterError(f"scale must be > 0, got {scale}")
    t = (cumulative_labor - mid) / scale
    if t >= 0.0:
        p = 1.0 / (1.0 + math.exp(-t))
    else:
        e = math.exp(t)
        p = e / (1.0 + e)
    # exp saturates in float64 around |t| ~ 37; keep the range open
    return min(max(p, 5e-324), math.nextafter(1.0, 0.0))
