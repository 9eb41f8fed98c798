"""Discrepancy-based truncation for spectral cut-off.

For a discretisation level ``m`` the stopping index is

    k(m) = min{0 <= k <= m : sum_{j=k+1}^{m} y_j**2 <= tau**2 * m * delta**2}

and the final truncation level is the maximum of ``k(m)`` over the searched
levels. With prefix sums ``P(k) = sum_{j<=k} y_j**2`` the condition reads
``P(k) >= P(m) - tau**2 m delta**2`` so every ``k(m)`` is one binary search.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_coefficients, check_index, check_positive, check_tau
from .sequence_model import Observation

__all__ = [
    "FixedM",
    "NormBound",
    "Heuristic",
    "DpConfig",
    "DpResult",
    "discrepancy_index",
    "discrepancy_indices",
    "norm_bound_level",
    "modified_discrepancy",
    "cutoff_estimate",
    "error_components",
    "estimation_error",
    "error_profile",
    "policy_from_dict",
]

# relative gap under which the extended-precision decision is re-checked with fsum
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class FixedM:
    """Search every level ``m <= min(M, N)``."""

    M: int

    def __post_init__(self):
        object.__setattr__(self, "M", check_index(self.M, "M"))


@dataclass(frozen=True)
class NormBound:
    """Search up to the largest ``m`` with ``sqrt(m) delta <= sigma_m R``.

    ``R`` is an upper bound for the norm of the true solution.
    """

    R: float

    def __post_init__(self):
        object.__setattr__(self, "R", check_positive(self.R, "R"))


@dataclass(frozen=True)
class Heuristic:
    """Grow ``m`` geometrically until ``k(m)/m`` stays below ``theta``.

    Checkpoints are ``ceil(growth**i)``. The search stops after ``window``
    consecutive checkpoints with ``k(m)/m < theta`` or at ``cap`` (the
    observation length when ``None``). Every level up to the last checkpoint
    enters the maximum.
    """

    theta: float = 0.1
    window: int = 3
    growth: float = 2.0
    cap: int = None

    def __post_init__(self):
        theta = check_positive(self.theta, "theta")
        if theta >= 1:
            raise ValueError(f"theta must lie in (0, 1), got {theta}")
        growth = check_positive(self.growth, "growth")
        if growth <= 1:
            raise ValueError(f"growth must exceed 1, got {growth}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "growth", growth)
        object.__setattr__(self, "window", check_index(self.window, "window"))
        if self.cap is not None:
            object.__setattr__(self, "cap", check_index(self.cap, "cap"))


def policy_to_dict(policy):
    if isinstance(policy, FixedM):
        return {"kind": "fixed", "M": policy.M}
    if isinstance(policy, NormBound):
        return {"kind": "norm_bound", "R": policy.R}
    return {"kind": "heuristic", "theta": policy.theta, "window": policy.window,
            "growth": policy.growth, "cap": policy.cap}


def policy_from_dict(d):
    d = dict(d)
    kind = d.pop("kind", "heuristic")
    kinds = {"fixed": FixedM, "norm_bound": NormBound, "heuristic": Heuristic}
    if kind not in kinds:
        raise ValueError(f"unknown m-policy {kind!r}")
    return kinds[kind](**d)


@dataclass(frozen=True)
class DpConfig:
    tau: float = 1.5
    policy: object = field(default_factory=Heuristic)

    def __post_init__(self):
        object.__setattr__(self, "tau", check_tau(self.tau))
        if not isinstance(self.policy, (FixedM, NormBound, Heuristic)):
            raise TypeError("policy must be FixedM, NormBound or Heuristic")

    def to_dict(self):
        return {"tau": self.tau, "policy": policy_to_dict(self.policy)}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        policy = policy_from_dict(d.pop("policy", {"kind": "heuristic"}))
        return cls(policy=policy, **d)


@dataclass(frozen=True, eq=False)
class DpResult:
    """Outcome of :func:`modified_discrepancy`.

    ``trace`` is an ``(n, 2)`` integer array of ``(m, k(m))`` rows for every
    evaluated level; ``argmax_m`` is the smallest level attaining ``k_dp``.
    """

    k_dp: int
    trace: np.ndarray = field(repr=False)
    m_searched: int
    argmax_m: int
    policy: str

    def __eq__(self, other):
        return (
            isinstance(other, DpResult)
            and np.array_equal(self.trace, other.trace)
            and (self.k_dp, self.m_searched, self.argmax_m, self.policy)
            == (other.k_dp, other.m_searched, other.argmax_m, other.policy)
        )

    def save_trace(self, path):
        """Write the ``(m, k(m))`` curve as two-column text."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("m k\n")
            for m, k in self.trace:
                fh.write(f"{m} {k}\n")


def _threshold(tau, m, delta):
    return tau * tau * m * (delta * delta)


class _PrefixSquares:
    """Prefix sums of ``y_j**2`` accumulated in extended precision."""

    def __init__(self, y):
        self.sq = y * y
        self.P = np.concatenate(
            ([np.longdouble(0)], np.cumsum(self.sq.astype(np.longdouble)))
        )

    def tail_exact(self, k, m):
        return math.fsum(self.sq[k:m])

    def indices(self, ms, delta, tau):
        ms = np.asarray(ms, dtype=np.int64)
        thr = _threshold(tau, ms.astype(float), delta)
        Pm = self.P[ms]
        k = np.searchsorted(self.P, Pm - thr, side="left")
        k = np.minimum(k, ms)
        # decisions whose margin is within rounding of the threshold
        scale = np.maximum(Pm, thr) * _TIE_RTOL
        at_k = np.abs((Pm - self.P[k]) - thr) <= scale
        prev = np.maximum(k - 1, 0)
        at_prev = (k > 0) & (np.abs((Pm - self.P[prev]) - thr) <= scale)
        for i in np.flatnonzero(at_k | at_prev):
            k[i] = self._exact(int(ms[i]), float(thr[i]), int(k[i]))
        return k

    def _exact(self, m, thr, k):
        while k > 0 and self.tail_exact(k - 1, m) <= thr:
            k -= 1
        while k < m and self.tail_exact(k, m) > thr:
            k += 1
        return k


def _as_array(obs):
    return obs.y if isinstance(obs, Observation) else check_coefficients(obs)


def discrepancy_index(y, delta, tau, m):
    """Stopping index ``k(m)`` of the discrepancy principle at level ``m``.

    Parameters
    ----------
    y : array-like
        Observed coefficients ``(y^delta, u_j)``, ``j = 1..N``.
    delta : float
        Noise level.
    tau : float
        Safety factor, strictly larger than one.
    m : int
        Discretisation level, ``1 <= m <= N``.

    Returns
    -------
    int
        Smallest ``k`` in ``0..m`` with ``sum_{j=k+1}^m y_j**2 <= tau**2 m delta**2``.
    """
    y = check_coefficients(y)
    delta = check_positive(delta, "delta")
    tau = check_tau(tau)
    m = check_index(m, "m")
    if m > y.size:
        raise IndexError(f"m={m} exceeds the number of coefficients {y.size}")
    return int(_PrefixSquares(y[:m]).indices([m], delta, tau)[0])


def discrepancy_indices(y, delta, tau, ms=None):
    """Vectorised :func:`discrepancy_index` for several levels (default ``1..N``)."""
    y = check_coefficients(y)
    delta = check_positive(delta, "delta")
    tau = check_tau(tau)
    if ms is None:
        ms = np.arange(1, y.size + 1)
    ms = np.asarray(ms, dtype=np.int64)
    if ms.size and (ms.min() < 1 or ms.max() > y.size):
        raise IndexError("levels must lie in 1..N")
    return _PrefixSquares(y).indices(ms, delta, tau)


def norm_bound_level(spectrum, delta, R, limit=None):
    """Largest ``m`` with ``sqrt(m) delta <= sigma_m R`` (at least 1).

    The left side grows and the right side shrinks with ``m``, so the
    admissible levels form a prefix and bisection finds its end. ``limit``
    caps the answer; without it the search doubles until the condition fails.
    """
    delta = check_positive(delta, "delta")
    R = check_positive(R, "R")
    if spectrum.size is not None:
        limit = spectrum.size if limit is None else min(limit, spectrum.size)

    def ok(m):
        idx = np.array([m])
        sigma = float(spectrum._sigma(idx)[0])
        if sigma > 0.0 and math.isfinite(sigma * R):
            return math.sqrt(m) * delta <= sigma * R
        # sigma_m underflows: compare in logs
        lhs = 0.5 * math.log(m) + math.log(delta)
        return lhs <= 0.5 * float(spectrum.log_squared(idx)[0]) + math.log(R)

    if not ok(1):
        return 1
    if limit is None:
        hi = 2
        while ok(hi):
            hi *= 2
            if hi > 2**52:
                raise OverflowError("norm bound level does not terminate")
    else:
        limit = check_index(limit, "limit")
        if ok(limit):
            return limit
        hi = limit
    lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _heuristic_stop(ms, ks, policy, cap):
    checkpoints = []
    i = 0
    while True:
        c = min(math.ceil(policy.growth ** i), cap)
        if not checkpoints or c > checkpoints[-1]:
            checkpoints.append(c)
        if c >= cap:
            break
        i += 1
    run = 0
    for c in checkpoints:
        run = run + 1 if ks[c - 1] / c < policy.theta else 0
        if run >= policy.window:
            return c
    return cap


def modified_discrepancy(obs, cfg, spectrum=None):
    """Maximise ``k(m)`` over the levels chosen by ``cfg.policy``.

    ``spectrum`` is only consulted by :class:`NormBound`.
    """
    y = _as_array(obs)
    if y.size == 0:
        raise ValueError("observation is empty")
    delta = obs.delta if isinstance(obs, Observation) else None
    if delta is None:
        raise TypeError("pass an Observation (it carries the noise level)")
    policy = cfg.policy
    n = y.size
    if isinstance(policy, FixedM):
        top = min(policy.M, n)
        name = "fixed"
    elif isinstance(policy, NormBound):
        if spectrum is None:
            raise ValueError("NormBound policy needs the spectrum")
        top = norm_bound_level(spectrum, delta, policy.R, n)
        name = "norm_bound"
    else:
        top = min(policy.cap or n, n)
        name = "heuristic"
    ms = np.arange(1, top + 1)
    ks = _PrefixSquares(y[:top]).indices(ms, delta, cfg.tau)
    if isinstance(policy, Heuristic):
        top = _heuristic_stop(ms, ks, policy, top)
        ms, ks = ms[:top], ks[:top]
    if ms.size == 0:
        raise ValueError("policy selected an empty range of levels")
    best = int(np.argmax(ks))
    return DpResult(
        k_dp=int(ks[best]),
        trace=np.column_stack([ms, ks]).astype(np.int64),
        m_searched=int(top),
        argmax_m=int(ms[best]),
        policy=name,
    )


def cutoff_estimate(obs, spectrum, k):
    """Coefficients ``y_j / sigma_j`` of the truncated estimate, ``j <= k``."""
    y = _as_array(obs)
    k = check_index(k, "k", minimum=0)
    if k > y.size:
        raise IndexError(f"k={k} exceeds the number of coefficients {y.size}")
    if k == 0:
        return np.zeros(0)
    return y[:k] / spectrum.values(k)


def error_components(estimate, x_hat, tail_bound=0.0):
    """Squared data-propagation and approximation parts of the error.

    Returns ``(sum_{j<=k} (est_j - x_j)**2, sum_{j>k} x_j**2 + tail_bound)``.
    """
    est = check_coefficients(estimate, "estimate")
    x = check_coefficients(x_hat, "x_hat")
    k = est.size
    if k > x.size:
        raise ValueError(f"estimate length {k} exceeds solution length {x.size}")
    diff = est - x[:k]
    data = math.fsum(diff * diff)
    approx = math.fsum(x[k:] * x[k:]) + float(tail_bound)
    return data, approx


def estimation_error(estimate, x_hat, tail_bound=0.0):
    """Norm of ``estimate - x_hat`` including the unrepresented tail."""
    data, approx = error_components(estimate, x_hat, tail_bound)
    return math.sqrt(data + approx)


def error_profile(y, sigma, x_hat, tail_bound=0.0, kmax=None):
    """Realised error of the cut-off estimate for every ``k = 0..kmax``.

    ``x_hat`` is zero-extended when shorter than ``kmax``.
    """
    y = np.asarray(y, dtype=float)
    kmax = y.size if kmax is None else int(kmax)
    x = np.zeros(max(kmax, np.size(x_hat)))
    x[: np.size(x_hat)] = x_hat
    diff = y[:kmax] / sigma[:kmax] - x[:kmax]
    data = np.concatenate(([0.0], np.cumsum(diff * diff)))
    x2 = x * x
    suffix = np.concatenate((np.cumsum(x2[::-1])[::-1], [0.0]))
    return np.sqrt(data + suffix[: kmax + 1] + tail_bound)
