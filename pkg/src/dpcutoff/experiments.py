"""Monte Carlo harness comparing the discrepancy choice with oracle baselines.

Each work unit ``(delta index, replication)`` draws its noise from an
independent stream derived from the root seed, so results do not depend on
evaluation order.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_index, check_positive
from .discrepancy import DpConfig, FixedM, NormBound, modified_discrepancy, norm_bound_level
from .sequence_model import (
    NOISE_KINDS,
    Hoelder,
    Logarithmic,
    SolutionSpec,
    forward,
    make_solution,
    observe,
    solution_spec_from_dict,
    source_factors,
    stream_seed,
    tail_bound,
)
from .spectrum import Spectrum, spectrum_from_dict
from .theory import (
    RateSpec,
    apriori_k_exp,
    apriori_k_poly,
    m_opt_exp,
    rate_constant_poly,
    rate_exp,
    rate_poly,
)

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "problem_class",
    "observation_length",
    "run_experiment",
    "rate_regression",
    "coverage",
    "median_errors",
    "summarize",
    "mse_vs_analytic",
]

CSV_FIELDS = ("delta", "rep", "k_dp", "err_dp", "err_oracle", "err_apriori",
              "bound", "within_bound")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment, including the root seed.

    ``n_obs`` fixes the observation length; ``None`` picks it per ``delta``
    (see :func:`observation_length`). ``bound_slack`` multiplies the
    exponential-class rate, ``epsilon`` gives the bound ``epsilon * ||x||``
    for spectra outside the two canonical classes.
    """

    spectrum: Spectrum
    solution: SolutionSpec
    deltas: tuple
    replications: int = 100
    dp: DpConfig = field(default_factory=DpConfig)
    root_seed: int = 0
    n_obs: int = None
    noise_kind: str = "gaussian"
    bound_slack: float = 1.5
    epsilon: float = None
    oracle_kmax: int = 5000

    def __post_init__(self):
        deltas = tuple(check_positive(d, "delta") for d in self.deltas)
        if not deltas:
            raise ValueError("deltas must not be empty")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("deltas must be strictly decreasing")
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "replications", check_index(self.replications, "replications"))
        seed = check_index(self.root_seed, "root_seed", minimum=0)
        if seed >= 2**64:
            raise ValueError("root_seed must fit in 64 bits")
        object.__setattr__(self, "root_seed", seed)
        if self.n_obs is not None:
            object.__setattr__(self, "n_obs", check_index(self.n_obs, "n_obs"))
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"noise_kind must be one of {NOISE_KINDS}")
        object.__setattr__(self, "bound_slack", check_positive(self.bound_slack, "bound_slack"))
        if self.epsilon is not None:
            object.__setattr__(self, "epsilon", check_positive(self.epsilon, "epsilon"))
        object.__setattr__(self, "oracle_kmax", check_index(self.oracle_kmax, "oracle_kmax"))
        if not isinstance(self.spectrum, Spectrum):
            raise TypeError("spectrum must be a Spectrum")
        if not isinstance(self.solution, SolutionSpec):
            raise TypeError("solution must be a SolutionSpec")
        if not isinstance(self.dp, DpConfig):
            raise TypeError("dp must be a DpConfig")

    def to_dict(self):
        return {
            "spectrum": self.spectrum.to_dict(),
            "solution": self.solution.to_dict(),
            "deltas": list(self.deltas),
            "replications": self.replications,
            "dp": self.dp.to_dict(),
            "root_seed": self.root_seed,
            "n_obs": self.n_obs,
            "noise_kind": self.noise_kind,
            "bound_slack": self.bound_slack,
            "epsilon": self.epsilon,
            "oracle_kmax": self.oracle_kmax,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d["spectrum"] = spectrum_from_dict(d["spectrum"])
        d["solution"] = solution_spec_from_dict(d["solution"])
        d["dp"] = DpConfig.from_dict(d.get("dp", {}))
        d["deltas"] = tuple(d["deltas"])
        return cls(**d)


@dataclass(frozen=True)
class RunRecord:
    delta: float
    rep: int
    k_dp: int
    err_dp: float
    err_oracle: float
    err_apriori: float
    bound: float
    within_bound: bool

    def as_row(self):
        return asdict(self)


def problem_class(spectrum, condition):
    """``"poly"`` or ``"exp"`` for the canonical pairings, else ``None``."""
    if spectrum.family == "polynomial" and isinstance(condition, Hoelder):
        return "poly"
    if spectrum.family == "exponential" and isinstance(condition, Logarithmic):
        return "exp"
    return None


def _rate_spec(cfg, delta):
    cls = problem_class(cfg.spectrum, cfg.solution.condition)
    if cls is None or cfg.solution.rho == 0:
        return None
    if cls == "poly":
        return RateSpec("poly", cfg.solution.rho, delta,
                        nu=cfg.solution.condition.nu, q=cfg.spectrum.q)
    return RateSpec("exp", cfg.solution.rho, delta,
                    p=cfg.solution.condition.p, a=cfg.spectrum.a)


def _apriori_k(cfg, delta, kmax):
    spec = _rate_spec(cfg, delta)
    if spec is not None and spec.kind == "poly":
        return apriori_k_poly(spec)
    if spec is not None:
        return apriori_k_exp(spec)
    # minimise the worst-case MSE over the available range
    ks = np.arange(0, kmax + 1)
    inv = np.concatenate(([0.0], cfg.spectrum.inverse_squared(ks[1:])))
    variance = delta * delta * np.cumsum(inv)
    upper = kmax + 1
    if cfg.spectrum.size is not None:
        upper = min(upper, cfg.spectrum.size)
    f = source_factors(cfg.solution.condition, cfg.spectrum, upper)
    f = np.concatenate((f, np.full(kmax + 1 - f.size, f[-1])))[: kmax + 1]
    total = variance + f * f * cfg.solution.rho ** 2
    return int(np.argmin(total))


def _policy_bound(cfg, delta):
    policy = cfg.dp.policy
    if isinstance(policy, FixedM):
        return policy.M
    if isinstance(policy, NormBound):
        return norm_bound_level(cfg.spectrum, delta, policy.R)
    return 0


def observation_length(cfg, delta):
    """Number of observed coefficients ``N`` used at noise level ``delta``.

    Polynomial class: ``max(4 * policy bound, 10 * a-priori k)``.
    Exponential class: ``max(ceil(4 * m_opt), 4 * policy bound, a-priori k)``.
    Other spectra need an explicit ``n_obs``.
    """
    if cfg.n_obs is not None:
        return cfg.n_obs
    spec = _rate_spec(cfg, delta)
    if spec is None:
        raise ValueError("n_obs must be given for spectra outside the canonical classes")
    bound = _policy_bound(cfg, delta)
    if spec.kind == "poly":
        return max(4 * bound, 10 * apriori_k_poly(spec), 1)
    k_ap = apriori_k_exp(spec)
    try:
        m_opt = math.ceil(4 * m_opt_exp(delta, spec.rho, spec.p, spec.a))
    except ValueError:
        m_opt = 4 * k_ap
    return max(m_opt, 4 * bound, k_ap, 1)


def _bound(cfg, delta, x_norm):
    spec = _rate_spec(cfg, delta)
    if spec is not None and spec.kind == "poly":
        L = rate_constant_poly(cfg.dp.tau, spec.nu, spec.q)
        return L * rate_poly(spec)
    if spec is not None and delta < spec.rho:
        return cfg.bound_slack * rate_exp(spec)
    if cfg.epsilon is not None:
        return cfg.epsilon * x_norm
    return math.nan


class _Truth:
    """True solution with cached squared-norm suffix sums."""

    def __init__(self, cfg):
        self.x = make_solution(cfg.solution, cfg.spectrum)
        self.tail = tail_bound(cfg.solution, cfg.spectrum)
        x2 = self.x * self.x
        self.suffix = np.concatenate((np.cumsum(x2[::-1])[::-1], [0.0])) + self.tail
        self.norm = math.sqrt(self.suffix[0])
        self.y_hat = forward(self.x, cfg.spectrum)

    def bias_sq(self, kmax):
        out = np.full(kmax + 1, self.tail)
        m = min(kmax + 1, self.suffix.size)
        out[:m] = self.suffix[:m]
        return out

    def padded(self, n):
        out = np.zeros(n)
        m = min(n, self.x.size)
        out[:m] = self.x[:m]
        return out


def run_experiment(cfg):
    """Run every ``(delta, replication)`` unit; records are ordered by that key."""
    truth = _Truth(cfg)
    records = []
    for i, delta in enumerate(cfg.deltas):
        n = observation_length(cfg, delta)
        sigma = cfg.spectrum.values(n)
        x = truth.padded(n)
        kcap = min(n, cfg.oracle_kmax)
        k_ap = min(_apriori_k(cfg, delta, kcap), n)
        bound = _bound(cfg, delta, truth.norm)
        for r in range(cfg.replications):
            obs = observe(truth.y_hat, delta, n, cfg.noise_kind,
                          stream_seed(cfg.root_seed, i, r))
            res = modified_discrepancy(obs, cfg.dp, cfg.spectrum)
            kmax = max(kcap, res.k_dp, k_ap)
            diff = obs.y[:kmax] / sigma[:kmax] - x[:kmax]
            err = np.sqrt(
                np.concatenate(([0.0], np.cumsum(diff * diff))) + truth.bias_sq(kmax)
            )
            err_dp = float(err[res.k_dp])
            records.append(RunRecord(
                delta=delta,
                rep=r,
                k_dp=res.k_dp,
                err_dp=err_dp,
                err_oracle=float(err.min()),
                err_apriori=float(err[k_ap]),
                bound=float(bound),
                within_bound=bool(err_dp <= bound),
            ))
    return records


def rate_regression(points):
    """Least-squares slope of ``log(error)`` against ``log(delta)``."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("need at least two (delta, error) points")
    if np.any(pts <= 0):
        raise ValueError("deltas and errors must be positive")
    if np.unique(pts[:, 0]).size < 2:
        raise ValueError("need at least two distinct deltas")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def _select(records, delta):
    sel = [r for r in records if r.delta == delta]
    if not sel:
        raise ValueError(f"no records at delta={delta}")
    return sel


def coverage(records, delta):
    """Fraction of replications at ``delta`` whose error is within the bound."""
    sel = _select(records, delta)
    return sum(r.within_bound for r in sel) / len(sel)


def median_errors(records, attr="err_dp"):
    """``{delta: median of attr}`` in order of first appearance."""
    out = {}
    for d in dict.fromkeys(r.delta for r in records):
        out[d] = float(np.median([getattr(r, attr) for r in _select(records, d)]))
    return out


def summarize(records, cfg):
    """JSON-ready summary: per-delta medians and coverage, slope, config echo."""
    per_delta = []
    med = median_errors(records)
    for d in med:
        sel = _select(records, d)
        per_delta.append({
            "delta": d,
            "median_err_dp": med[d],
            "median_err_oracle": float(np.median([r.err_oracle for r in sel])),
            "median_err_apriori": float(np.median([r.err_apriori for r in sel])),
            "median_k_dp": float(np.median([r.k_dp for r in sel])),
            "bound": sel[0].bound,
            "coverage": coverage(records, d),
        })
    slope = None
    if len(med) >= 2 and all(v > 0 for v in med.values()):
        slope = rate_regression(med.items())
    return {
        "per_delta": per_delta,
        "slope": slope,
        "root_seed": cfg.root_seed,
        "config": cfg.to_dict(),
    }


def mse_vs_analytic(cfg, k, delta=None):
    """Compare the Monte Carlo MSE at a fixed ``k`` with its closed form.

    Returns ``(empirical, analytic, z)`` where ``z`` is the gap divided by the
    standard error of the empirical mean (0 when that is 0).
    """
    k = check_index(k, "k", minimum=0)
    delta = cfg.deltas[0] if delta is None else check_positive(delta, "delta")
    truth = _Truth(cfg)
    bias_sq = float(truth.bias_sq(k)[k])
    analytic = delta * delta * cfg.spectrum.variance_sum(k) + bias_sq
    sigma = cfg.spectrum.values(k)
    x = truth.padded(k)
    sq = np.empty(cfg.replications)
    for r in range(cfg.replications):
        obs = observe(truth.y_hat, delta, max(k, 1), cfg.noise_kind,
                      stream_seed(cfg.root_seed, 0, r))
        diff = obs.y[:k] / sigma - x
        sq[r] = math.fsum(diff * diff) + bias_sq
    empirical = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(sq.size)) if sq.size > 1 else 0.0
    z = 0.0 if se == 0 else (empirical - analytic) / se
    return empirical, analytic, z
