"""True solutions, forward map and noisy observations in coefficient space.

A solution is stored through its first ``n_rep`` coefficients ``(x, v_j)``.
The part of the source ball beyond ``n_rep`` is accounted for by
:func:`tail_bound`, the worst case of ``sum_{j > n_rep} (x, v_j)**2``.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_coefficients, check_index, check_positive

__all__ = [
    "Hoelder",
    "Logarithmic",
    "FlatJ",
    "PowerDecay",
    "RandomSphere",
    "SolutionSpec",
    "Observation",
    "NOISE_KINDS",
    "make_xi",
    "source_factors",
    "make_solution",
    "tail_bound",
    "forward",
    "draw_noise",
    "observe",
    "stream_seed",
    "solution_spec_from_dict",
]

NOISE_KINDS = ("gaussian", "rademacher", "uniform")


@dataclass(frozen=True)
class Hoelder:
    """``x = (K*K)^{nu/2} xi``, i.e. ``x_j = sigma_j**nu * xi_j``."""

    nu: float

    def __post_init__(self):
        object.__setattr__(self, "nu", check_positive(self.nu, "nu"))


@dataclass(frozen=True)
class Logarithmic:
    """``x = (-log K*K)^{-p/2} xi``, i.e. ``x_j = (-log sigma_j**2)**(-p/2) xi_j``."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", check_positive(self.p, "p"))


@dataclass(frozen=True)
class FlatJ:
    """``xi_j = rho / sqrt(J)`` for ``j <= J``, zero afterwards."""

    J: int

    def __post_init__(self):
        object.__setattr__(self, "J", check_index(self.J, "J"))


@dataclass(frozen=True)
class PowerDecay:
    """``xi_j`` proportional to ``j**-s``, normalised to norm ``rho``."""

    s: float = 1.0

    def __post_init__(self):
        s = check_positive(self.s, "s")
        if s <= 0.5:
            raise ValueError(f"s must exceed 1/2, got {s}")
        object.__setattr__(self, "s", s)


@dataclass(frozen=True)
class RandomSphere:
    """Uniformly random direction of norm ``rho`` on the first ``n_rep`` axes."""

    seed: int = 0


@dataclass(frozen=True)
class SolutionSpec:
    condition: object
    rho: float
    profile: object = field(default_factory=PowerDecay)
    n_rep: int = 100_000

    def __post_init__(self):
        if not isinstance(self.condition, (Hoelder, Logarithmic)):
            raise TypeError("condition must be Hoelder or Logarithmic")
        if not isinstance(self.profile, (FlatJ, PowerDecay, RandomSphere)):
            raise TypeError("profile must be FlatJ, PowerDecay or RandomSphere")
        object.__setattr__(self, "rho", check_positive(self.rho, "rho", allow_zero=True))
        object.__setattr__(self, "n_rep", check_index(self.n_rep, "n_rep"))
        if isinstance(self.profile, FlatJ) and self.profile.J > self.n_rep:
            raise ValueError(f"J={self.profile.J} exceeds n_rep={self.n_rep}")

    def to_dict(self):
        cond = self.condition
        prof = self.profile
        out = {"rho": self.rho, "n_rep": self.n_rep}
        if isinstance(cond, Hoelder):
            out.update(condition="hoelder", nu=cond.nu)
        else:
            out.update(condition="logarithmic", p=cond.p)
        kind = {FlatJ: "flat", PowerDecay: "power", RandomSphere: "sphere"}[type(prof)]
        out["profile"] = {"kind": kind, **asdict(prof)}
        return out


def solution_spec_from_dict(d):
    d = dict(d)
    cond = d.pop("condition")
    if cond == "hoelder":
        condition = Hoelder(d.pop("nu"))
    elif cond == "logarithmic":
        condition = Logarithmic(d.pop("p"))
    else:
        raise ValueError(f"unknown source condition {cond!r}")
    prof = dict(d.pop("profile", {"kind": "power"}))
    kind = prof.pop("kind")
    profiles = {"flat": FlatJ, "power": PowerDecay, "sphere": RandomSphere}
    if kind not in profiles:
        raise ValueError(f"unknown profile kind {kind!r}")
    return SolutionSpec(condition=condition, profile=profiles[kind](**prof), **d)


def make_xi(spec):
    """The source element ``xi`` on indices ``1..n_rep``."""
    n, rho, prof = spec.n_rep, spec.rho, spec.profile
    if isinstance(prof, FlatJ):
        xi = np.zeros(n)
        xi[: prof.J] = rho / math.sqrt(prof.J)
        return xi
    if isinstance(prof, PowerDecay):
        xi = np.arange(1, n + 1, dtype=float) ** -prof.s
    else:
        xi = np.random.default_rng(prof.seed).standard_normal(n)
    norm = math.sqrt(math.fsum(xi * xi))
    return xi * (rho / norm)


def source_factors(condition, spectrum, n):
    """Multipliers ``x_j / xi_j`` for ``j = 1..n``."""
    j = np.arange(1, n + 1)
    if isinstance(condition, Hoelder):
        return np.exp(0.5 * condition.nu * spectrum.log_squared(j))
    log_inv = -spectrum.log_squared(j)
    if np.any(log_inv <= 0):
        bad = int(j[np.argmax(log_inv <= 0)])
        raise ValueError(
            f"logarithmic source condition needs sigma_j**2 < 1, violated at j={bad}"
        )
    return log_inv ** (-0.5 * condition.p)


def make_solution(spec, spectrum):
    """True coefficients ``x_j = factor_j * xi_j`` for ``j = 1..n_rep``."""
    return source_factors(spec.condition, spectrum, spec.n_rep) * make_xi(spec)


def tail_bound(spec, spectrum):
    """Worst-case squared norm of the coefficients past ``n_rep``.

    The factor is evaluated at ``n_rep + 1``, or at ``n_rep`` for a table
    that ends there; both bound the tail because the factors are monotone.
    """
    j = spec.n_rep + 1
    if spectrum.size is not None and j > spectrum.size:
        j = spectrum.size
    factor = source_factors(spec.condition, spectrum, j)[-1]
    return float(factor * factor * spec.rho * spec.rho)


def forward(x, spectrum):
    """Apply the operator in coefficient space, ``y_j = sigma_j * x_j``."""
    x = check_coefficients(x, "x")
    return spectrum.values(x.size, strict=False) * x


def stream_seed(root_seed, *key):
    """Independent child seed for the work unit identified by ``key``."""
    ss = np.random.SeedSequence(int(root_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0])


def draw_noise(n, kind, seed):
    """``n`` i.i.d. mean-zero unit-variance draws of the given kind."""
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        return rng.standard_normal(n)
    if kind == "rademacher":
        return 2.0 * rng.integers(0, 2, size=n).astype(float) - 1.0
    if kind == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=n)
    raise ValueError(f"unknown noise kind {kind!r}; choose from {NOISE_KINDS}")


@dataclass(frozen=True, eq=False)
class Observation:
    """Noisy coefficients ``y_j = (y_hat, u_j) + delta Z_j``, ``j = 1..N``."""

    y: np.ndarray = field(repr=False)
    delta: float
    noise_kind: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        y = check_coefficients(self.y).copy()
        if y.size == 0:
            raise ValueError("observation must contain at least one coefficient")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "delta", check_positive(self.delta, "delta"))

    @property
    def n(self):
        return int(self.y.size)

    def __eq__(self, other):
        return (
            isinstance(other, Observation)
            and np.array_equal(self.y, other.y)
            and (self.delta, self.noise_kind, self.seed)
            == (other.delta, other.noise_kind, other.seed)
        )

    def metadata(self):
        return {"delta": self.delta, "noise_kind": self.noise_kind,
                "seed": self.seed, "n": self.n}

    def save(self, path):
        """Write ``index value`` rows to ``path`` and metadata to ``path.json``."""
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("index value\n")
            for j, v in enumerate(self.y, start=1):
                fh.write(f"{j} {v:.17g}\n")
        with open(_sidecar(path), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.metadata(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        meta = json.loads(_sidecar(path).read_text(encoding="utf-8"))
        data = np.loadtxt(path, skiprows=1, ndmin=2)
        if data.shape[0] != meta["n"] or not np.array_equal(
            data[:, 0], np.arange(1, meta["n"] + 1)
        ):
            raise ValueError(f"{path}: rows do not match metadata length {meta['n']}")
        return cls(data[:, 1], meta["delta"], meta["noise_kind"], meta["seed"])


def _sidecar(path):
    return path.with_name(path.name + ".json")


def observe(y_hat, delta, n, noise_kind="gaussian", seed=0):
    """Sample the first ``n`` noisy coefficients of ``y_hat`` (zero-extended)."""
    y_hat = check_coefficients(y_hat, "y_hat")
    n = check_index(n, "N")
    delta = check_positive(delta, "delta")
    exact = np.zeros(n)
    m = min(n, y_hat.size)
    exact[:m] = y_hat[:m]
    y = exact + delta * draw_noise(n, noise_kind, seed)
    return Observation(y, delta, noise_kind, int(seed))
