"""Singular value models for compact operators given in diagonal form.

Every spectrum stores the squared singular values ``sigma_j**2`` implicitly
through :meth:`Spectrum.log_squared`, which keeps exponentially decaying
sequences representable far beyond the range where ``sigma_j`` itself would
underflow.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_index, check_positive

__all__ = [
    "Spectrum",
    "Polynomial",
    "Exponential",
    "ScaledPolynomial",
    "ScaledExponential",
    "Table",
    "singular_value",
    "variance_sum",
    "load_table",
    "spectrum_from_dict",
]

#: ``log(sigma_j**-2)`` above which the inverse square is reported as ``inf``.
DEFAULT_LOG_THRESHOLD = 600.0


class Spectrum:
    """Base class for a non-increasing positive singular value sequence.

    Subclasses implement :meth:`log_squared` on integer index arrays.
    """

    #: ``"polynomial"``, ``"exponential"`` or ``None`` for generic spectra.
    family = None
    log_threshold = DEFAULT_LOG_THRESHOLD

    @property
    def size(self):
        """Number of available indices, ``None`` when unbounded."""
        return None

    def _check_range(self, j):
        j = np.asarray(j)
        if j.size and j.min() < 1:
            raise IndexError("singular value indices start at 1")
        if self.size is not None and j.size and j.max() > self.size:
            raise IndexError(
                f"index {int(j.max())} beyond table length {self.size}"
            )

    def log_squared(self, j):
        """``log(sigma_j**2)`` for an integer array ``j``."""
        raise NotImplementedError

    def _sigma(self, j):
        return np.exp(0.5 * self.log_squared(j))

    def squared(self, j):
        self._check_range(j)
        return np.exp(self.log_squared(np.asarray(j)))

    def values(self, n, strict=True):
        """``sigma_1, ..., sigma_n`` as an array.

        With ``strict`` an underflow to zero raises ``OverflowError``.
        """
        n = check_index(n, "n", minimum=0)
        j = np.arange(1, n + 1)
        self._check_range(j)
        out = self._sigma(j)
        if strict and np.any(out == 0.0):
            raise OverflowError("singular values underflow to zero")
        return out

    def inverse_squared(self, j):
        """``sigma_j**-2``; entries past ``log_threshold`` are ``inf``."""
        self._check_range(j)
        log_inv = -self.log_squared(np.asarray(j, dtype=float))
        with np.errstate(over="ignore"):
            out = np.exp(np.minimum(log_inv, self.log_threshold))
        return np.where(log_inv > self.log_threshold, np.inf, out)

    def variance_sum(self, k):
        """Exact ``sum_{j<=k} sigma_j**-2``; the empty sum is 0."""
        k = check_index(k, "k", minimum=0)
        if k == 0:
            return 0.0
        terms = self.inverse_squared(np.arange(1, k + 1))
        if not np.all(np.isfinite(terms)):
            raise OverflowError(
                f"sigma_j**-2 exceeds exp({self.log_threshold}) for some j <= {k}"
            )
        return math.fsum(terms)

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(Spectrum):
    """``sigma_j**2 = j**-q``."""

    q: float
    family = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "q", check_positive(self.q, "q"))

    def log_squared(self, j):
        return -self.q * np.log(np.asarray(j, dtype=float))

    def _sigma(self, j):
        return np.asarray(j, dtype=float) ** (-0.5 * self.q)

    def inverse_squared(self, j):
        self._check_range(j)
        return np.asarray(j, dtype=float) ** self.q

    def to_dict(self):
        return {"kind": "polynomial", "q": self.q}


@dataclass(frozen=True)
class Exponential(Spectrum):
    """``sigma_j**2 = exp(-a j)``."""

    a: float
    family = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "a", check_positive(self.a, "a"))

    def log_squared(self, j):
        return -self.a * np.asarray(j, dtype=float)

    def variance_sum(self, k):
        # geometric sum e^a (e^{ak} - 1) / (e^a - 1)
        k = check_index(k, "k", minimum=0)
        if k == 0:
            return 0.0
        if self.a * k > self.log_threshold:
            raise OverflowError(
                f"sigma_j**-2 exceeds exp({self.log_threshold}) for some j <= {k}"
            )
        return math.exp(self.a) * math.expm1(self.a * k) / math.expm1(self.a)

    def to_dict(self):
        return {"kind": "exponential", "a": self.a}


def _check_band(c, C, j0):
    c = check_positive(c, "c")
    C = check_positive(C, "C")
    if c > C:
        raise ValueError(f"need c <= C, got c={c}, C={C}")
    return c, C, check_index(j0, "j0")


@dataclass(frozen=True)
class ScaledPolynomial(Spectrum):
    """Polynomial decay inside the band ``c j^-q <= sigma_j^2 <= C j^-q``.

    Uses ``sqrt(c C) j^-q`` for ``j >= j0`` and holds ``sigma_{j0}`` constant
    below ``j0``.
    """

    q: float
    c: float = 1.0
    C: float = 1.0
    j0: int = 1
    family = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "q", check_positive(self.q, "q"))
        c, C, j0 = _check_band(self.c, self.C, self.j0)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "j0", j0)

    def log_squared(self, j):
        j = np.maximum(np.asarray(j, dtype=float), self.j0)
        return 0.5 * math.log(self.c * self.C) - self.q * np.log(j)

    def to_dict(self):
        return {"kind": "scaled_polynomial", "q": self.q, "c": self.c,
                "C": self.C, "j0": self.j0}


@dataclass(frozen=True)
class ScaledExponential(Spectrum):
    """Exponential decay inside the band ``c e^-aj <= sigma_j^2 <= C e^-aj``."""

    a: float
    c: float = 1.0
    C: float = 1.0
    j0: int = 1
    family = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "a", check_positive(self.a, "a"))
        c, C, j0 = _check_band(self.c, self.C, self.j0)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "j0", j0)

    def log_squared(self, j):
        j = np.maximum(np.asarray(j, dtype=float), self.j0)
        return 0.5 * math.log(self.c * self.C) - self.a * j

    def to_dict(self):
        return {"kind": "scaled_exponential", "a": self.a, "c": self.c,
                "C": self.C, "j0": self.j0}


@dataclass(frozen=True, eq=False)
class Table(Spectrum):
    """Explicit finite list of singular values ``sigma_1 >= sigma_2 >= ... > 0``."""

    values_: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values_, dtype=float).reshape(-1)
        if v.size == 0:
            raise ValueError("table spectrum needs at least one value")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("table singular values must be finite and positive")
        if np.any(np.diff(v) > 0):
            bad = int(np.argmax(np.diff(v) > 0)) + 2
            raise ValueError(f"table singular values increase at index {bad}")
        v.setflags(write=False)
        object.__setattr__(self, "values_", v)
        object.__setattr__(self, "_log_sq", 2.0 * np.log(v))

    def __eq__(self, other):
        return isinstance(other, Table) and np.array_equal(self.values_, other.values_)

    def __hash__(self):
        return hash(self.values_.tobytes())

    def __repr__(self):
        return f"Table(size={self.size})"

    @property
    def size(self):
        return int(self.values_.size)

    def log_squared(self, j):
        self._check_range(j)
        return self._log_sq[np.asarray(j, dtype=int) - 1]

    def _sigma(self, j):
        return self.values_[np.asarray(j, dtype=int) - 1]

    def inverse_squared(self, j):
        self._check_range(j)
        return self._sigma(j) ** -2.0

    def to_dict(self):
        return {"kind": "table", "values": [float(v) for v in self.values_]}


def singular_value(spec, j):
    """Return ``sigma_j`` (not its square) for a single index ``j >= 1``."""
    j = check_index(j, "j")
    idx = np.array([j])
    spec._check_range(idx)
    sigma = float(spec._sigma(idx)[0])
    if sigma == 0.0:
        raise OverflowError(f"sigma_{j} underflows to zero")
    return sigma


def variance_sum(spec, k):
    """Return ``sum_{j=1}^{k} sigma_j**-2`` (0 for ``k == 0``)."""
    return spec.variance_sum(k)


def load_table(path):
    """Read a two-column ``index sigma_j`` text file into a :class:`Table`.

    A non-numeric first line is treated as a header. Indices must run
    1, 2, ... and the values must be strictly decreasing.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.replace(",", " ").split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                idx, val = int(parts[0]), float(parts[1])
            except (ValueError, IndexError):
                if lineno == 1 and not rows:
                    continue
                raise ValueError(f"{path}:{lineno}: expected 'index value'") from None
            if idx != len(rows) + 1:
                raise ValueError(f"{path}:{lineno}: expected index {len(rows) + 1}, got {idx}")
            if val <= 0:
                raise ValueError(f"{path}:{lineno}: singular value must be positive")
            if rows and val >= rows[-1]:
                raise ValueError(f"{path}:{lineno}: singular values must strictly decrease")
            rows.append(val)
    return Table(np.array(rows))


_KINDS = {
    "polynomial": Polynomial,
    "exponential": Exponential,
    "scaled_polynomial": ScaledPolynomial,
    "scaled_exponential": ScaledExponential,
}


def spectrum_from_dict(d):
    """Inverse of ``Spectrum.to_dict``; tables may also give a ``path``."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "table":
        if "path" in d:
            return load_table(d["path"])
        return Table(np.asarray(d["values"], dtype=float))
    if kind not in _KINDS:
        raise ValueError(f"unknown spectrum kind {kind!r}")
    return _KINDS[kind](**d)
