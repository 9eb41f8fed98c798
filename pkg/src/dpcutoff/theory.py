"""Closed-form benchmarks: a-priori truncation levels, minimax rates and constants.

Two canonical classes are covered: polynomial decay ``sigma_j^2 = j^-q`` with
Hoelder smoothness ``nu``, and exponential decay ``sigma_j^2 = e^-aj`` with
logarithmic smoothness ``p``.
"""

import math
import warnings
from collections import namedtuple
from dataclasses import dataclass

from ._validation import check_index, check_positive, check_tau
from .sequence_model import Hoelder, Logarithmic, source_factors

__all__ = [
    "RateSpec",
    "MSE",
    "apriori_k_poly",
    "apriori_k_exp",
    "rate_poly",
    "rate_constant_poly",
    "rate_exp",
    "solve_power_exp",
    "power_exp_asymptotic",
    "m_opt_exp",
    "analytic_mse",
]

MSE = namedtuple("MSE", ["variance", "bias_sq"])


@dataclass(frozen=True)
class RateSpec:
    """Problem class plus source radius ``rho`` and noise level ``delta``.

    Build with :meth:`poly` or :meth:`exp`.
    """

    kind: str
    rho: float
    delta: float
    nu: float = None
    q: float = None
    p: float = None
    a: float = None

    def __post_init__(self):
        rho = check_positive(self.rho, "rho")
        delta = check_positive(self.delta, "delta")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "delta", delta)
        if self.kind == "poly":
            object.__setattr__(self, "nu", check_positive(self.nu, "nu"))
            object.__setattr__(self, "q", check_positive(self.q, "q"))
        elif self.kind == "exp":
            object.__setattr__(self, "p", check_positive(self.p, "p"))
            object.__setattr__(self, "a", check_positive(self.a, "a"))
        else:
            raise ValueError(f"kind must be 'poly' or 'exp', got {self.kind!r}")
        if not delta < rho:
            warnings.warn(
                f"delta/rho = {delta / rho:g} >= 1; asymptotic formulas are not meaningful",
                RuntimeWarning,
                stacklevel=3,
            )

    @classmethod
    def poly(cls, nu, q, rho, delta):
        return cls("poly", rho, delta, nu=nu, q=q)

    @classmethod
    def exp(cls, p, a, rho, delta):
        return cls("exp", rho, delta, p=p, a=a)


def _require(spec, kind):
    if spec.kind != kind:
        raise ValueError(f"expected a {kind!r} rate spec, got {spec.kind!r}")


def _ceil(x):
    # absorb representation error such as 1000**(2/3) = 99.99999999999997
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def apriori_k_poly(spec):
    """Order-optimal fixed truncation ``ceil((rho/delta)^(2/((nu+1)q+1)))``."""
    _require(spec, "poly")
    expo = 2.0 / ((spec.nu + 1.0) * spec.q + 1.0)
    return max(1, _ceil((spec.rho / spec.delta) ** expo))


def rate_poly(spec):
    """``rho^((q+1)/((nu+1)q+1)) * delta^(nu/(nu+1+1/q))``."""
    _require(spec, "poly")
    nu, q = spec.nu, spec.q
    return spec.rho ** ((q + 1.0) / ((nu + 1.0) * q + 1.0)) * spec.delta ** (
        nu / (nu + 1.0 + 1.0 / q)
    )


def rate_constant_poly(tau, nu, q):
    """Constant ``L`` in the high-probability bound ``L * rate_poly``."""
    tau = check_tau(tau)
    nu = check_positive(nu, "nu")
    q = check_positive(q, "q")
    first = (2.0 / (tau - 1.0) + 1.0) ** (2.0 / ((nu + 1.0) * q)) * (tau + 1.0) / 2.0
    second = ((3.0 * tau + 1.0) / 2.0) ** (nu / (nu + 1.0))
    return first + second + 1.0


def rate_exp(spec):
    """``rho * (-log(delta^2/rho^2))^(-p/2)``; needs ``delta < rho``."""
    _require(spec, "exp")
    if spec.delta >= spec.rho:
        raise ValueError("rate_exp needs delta < rho")
    return spec.rho * (-2.0 * math.log(spec.delta / spec.rho)) ** (-0.5 * spec.p)


def power_exp_asymptotic(a, b, y):
    """``z(y) = log(y)/a - log((log(y)/a)^b)/a``, the large-``y`` root of ``x^b e^(ax) = y``."""
    a = check_positive(a, "a")
    b = check_positive(b, "b", allow_zero=True)
    y = check_positive(y, "y")
    L = math.log(y) / a
    if b == 0:
        return L
    if L <= 0:
        raise ValueError("asymptotic formula needs y > 1")
    return L - b * math.log(L) / a


def solve_power_exp(a, b, y, *, rtol=1e-12, maxiter=200):
    """Unique ``x > 0`` with ``x**b * exp(a*x) == y``.

    Works on ``g(t) = b t + a e^t - log y`` with ``t = log x``, which is
    increasing and convex, so roots far below 1 cost no more than large
    ones. Newton steps are kept inside a sign-changing bracket.
    """
    a = check_positive(a, "a")
    b = check_positive(b, "b", allow_zero=True)
    y = check_positive(y, "y")
    log_y = math.log(y)
    if b == 0:
        if log_y <= 0:
            raise ValueError("exp(a x) = y has no positive root for y <= 1")
        return log_y / a

    def g(t):
        return b * t + a * math.exp(t) - log_y

    if y > math.e:
        z = power_exp_asymptotic(a, b, y)
        lo, hi = max(1e-12, z - 2.0), max(z + 2.0, 1.0)
    else:
        lo, hi = 1e-12, max(log_y / a + b + 2.0, 1.0)
    lo, hi = math.log(lo), math.log(hi)
    while g(lo) > 0:
        lo -= max(1.0, abs(lo))
    while g(hi) < 0:
        hi += max(1.0, abs(hi))

    t = hi
    for _ in range(maxiter):
        gt = g(t)
        # g is the log of f(x)/y, so it bounds the relative residual
        if abs(gt) <= 0.25 * rtol:
            break
        if gt < 0:
            lo = t
        else:
            hi = t
        t_new = t - gt / (b + a * math.exp(t))
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if t_new == t:
            break
        t = t_new
    x = math.exp(t)
    if x == 0.0:
        raise OverflowError(f"root exp({t:g}) underflows")
    return x


def m_opt_exp(delta, rho, p, a):
    """Balancing discretisation level for exponential decay (real-valued)."""
    delta = check_positive(delta, "delta")
    rho = check_positive(rho, "rho")
    p = check_positive(p, "p")
    a = check_positive(a, "a")
    L = 2.0 * math.log(rho / delta) / a
    if L <= 0:
        raise ValueError("m_opt_exp needs delta < rho")
    m = L - (p + 1.0) * math.log(L) / a
    if m <= 0:
        raise ValueError(f"m_opt_exp is non-positive ({m:g}); delta/rho too large")
    return m


def apriori_k_exp(spec):
    """Minimiser of the worst-case MSE for exponential decay (integer, >= 1).

    Solves ``x^(p+1) e^(ax) = p (e^a - 1) rho^2 / (a^(p+1) delta^2)`` with
    ``x = k + 1``.
    """
    _require(spec, "exp")
    p, a = spec.p, spec.a
    y = p * math.expm1(a) * (spec.rho / spec.delta) ** 2 / a ** (p + 1.0)
    return max(1, _ceil(solve_power_exp(a, p + 1.0, y) - 1.0))


def analytic_mse(spectrum, condition, rho, k, delta):
    """Variance ``delta^2 sum_{j<=k} sigma_j^-2`` and worst squared bias over the source ball.

    ``condition`` is a :class:`Hoelder` or :class:`Logarithmic` instance.
    """
    if not isinstance(condition, (Hoelder, Logarithmic)):
        raise TypeError("condition must be Hoelder or Logarithmic")
    k = check_index(k, "k", minimum=0)
    delta = check_positive(delta, "delta")
    rho = check_positive(rho, "rho", allow_zero=True)
    variance = delta * delta * spectrum.variance_sum(k)
    factor = source_factors(condition, spectrum, k + 1)[-1]
    return MSE(variance, float(factor * factor * rho * rho))
