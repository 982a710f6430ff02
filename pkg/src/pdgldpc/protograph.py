"""Protograph base matrices, degree bookkeeping and design rates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

RationalLike = Union[Fraction, int, str]


class InvalidProtographError(ValueError):
    pass


class InfeasibleDesignError(ValueError):
    """Raised when parameters admit no valid code (e.g. non-positive rate)."""


@dataclass(frozen=True, eq=False)
class BaseMatrix:
    """``n_c x n_v`` matrix of edge multiplicities (rows: checks, cols: variables)."""

    entries: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.entries)
        if raw.ndim != 2 or raw.size == 0:
            raise InvalidProtographError("base matrix must be a nonempty 2-D array")
        if raw.dtype.kind == "f":
            if not np.all(np.isfinite(raw)) or not np.all(raw == np.round(raw)):
                raise InvalidProtographError("base matrix entries must be finite integers")
        elif raw.dtype.kind not in "iub":
            raise InvalidProtographError(f"unsupported entry type {raw.dtype}")
        arr = raw.astype(np.int64)
        if np.any(arr < 0):
            raise InvalidProtographError("base matrix entries must be nonnegative")
        cols = arr.sum(axis=0)
        if np.any(cols < 1):
            raise InvalidProtographError(f"unconnected variable node(s) {np.flatnonzero(cols < 1).tolist()}")
        rows = arr.sum(axis=1)
        if np.any(rows < 2):
            raise InvalidProtographError(f"check node(s) of degree < 2: {np.flatnonzero(rows < 2).tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n_c(self) -> int:
        return self.entries.shape[0]

    @property
    def n_v(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def col_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    @property
    def row_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @property
    def n_edges(self) -> int:
        return int(self.entries.sum())

    def __eq__(self, other):
        if not isinstance(other, BaseMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.shape, self.entries.tobytes()))

    def to_json(self) -> dict:
        return {"n_c": self.n_c, "n_v": self.n_v, "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: Mapping) -> "BaseMatrix":
        B = cls(np.array(obj["entries"], dtype=np.int64))
        if "n_c" in obj and (obj["n_c"], obj["n_v"]) != B.shape:
            raise InvalidProtographError("declared dimensions do not match entries")
        return B


@dataclass(frozen=True)
class DegreeCountVector:
    """Numbers ``counts[k]`` of variable nodes having degree ``degrees[k]``."""

    degrees: Tuple[int, ...]
    counts: Tuple[int, ...]

    def __post_init__(self):
        d = tuple(int(x) for x in self.degrees)
        c = tuple(int(x) for x in self.counts)
        if len(d) != len(c):
            raise ValueError("degrees and counts differ in length")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("degrees must be distinct and ascending")
        if any(x < 0 for x in c):
            raise ValueError("negative count")
        object.__setattr__(self, "degrees", d)
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_dict(cls, mapping: Mapping[int, int]) -> "DegreeCountVector":
        items = sorted((int(k), int(v)) for k, v in mapping.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    def as_dict(self, drop_zero: bool = False) -> Dict[int, int]:
        return {d: c for d, c in zip(self.degrees, self.counts) if c or not drop_zero}

    @property
    def n_v(self) -> int:
        return sum(self.counts)

    @property
    def n_edges(self) -> int:
        return sum(d * c for d, c in zip(self.degrees, self.counts))

    def column_list(self) -> list:
        """Degrees of the columns laid out in ascending order."""
        out = []
        for d, c in zip(self.degrees, self.counts):
            out.extend([d] * c)
        return out

    def matches(self, B: BaseMatrix) -> bool:
        return column_degrees(B).as_dict(drop_zero=True) == self.as_dict(drop_zero=True)


def column_degrees(B: BaseMatrix) -> DegreeCountVector:
    d, c = np.unique(B.col_degrees, return_counts=True)
    return DegreeCountVector(tuple(int(x) for x in d), tuple(int(x) for x in c))


def design_rate(B_or_dims, doping: Optional[Tuple[int, int, int]] = None) -> Fraction:
    """``1 - (n_c + (mu - kappa) y) / n_v`` as an exact fraction.

    ``B_or_dims`` is a :class:`BaseMatrix` or an ``(n_c, n_v)`` pair;
    ``doping`` is ``(mu, kappa, y)`` or None for the plain protograph.
    """
    if isinstance(B_or_dims, BaseMatrix):
        n_c, n_v = B_or_dims.shape
    else:
        n_c, n_v = (int(v) for v in B_or_dims)
    extra = 0
    if doping is not None:
        mu, kappa, y = (int(v) for v in doping)
        if not mu > kappa >= 1:
            raise ValueError(f"need mu > kappa >= 1, got ({mu}, {kappa})")
        if y < 0:
            raise ValueError("negative doping count")
        extra = (mu - kappa) * y
    R = 1 - Fraction(n_c + extra, n_v)
    if R <= 0:
        raise InfeasibleDesignError(f"design rate {R} is not positive (over-doped)")
    return R


def conventional_rate(B: BaseMatrix, gc_rows: Mapping[int, Tuple[int, int]]) -> Fraction:
    """Rate ``1 - sum_i (n_i - k_i) / n_v`` when rows in ``gc_rows`` carry an
    ``(n_i, k_i)`` component code and every other row is a single parity check."""
    m = 0
    for i in range(B.n_c):
        if i in gc_rows:
            n_i, k_i = gc_rows[i]
            m += n_i - k_i
        else:
            m += 1
    R = 1 - Fraction(m, B.n_v)
    if R <= 0:
        raise InfeasibleDesignError(f"design rate {R} is not positive")
    return R


def parse_rate(value: RationalLike) -> Fraction:
    return Fraction(value) if not isinstance(value, float) else Fraction(value).limit_denominator(10 ** 6)


@dataclass(frozen=True)
class EnsembleDistribution:
    """Edge-perspective degree distributions ``lambda`` and ``rho`` as
    ``{degree: coefficient}`` maps."""

    lam: Tuple[Tuple[int, float], ...]
    rho: Tuple[Tuple[int, float], ...]

    def __init__(self, lam: Mapping[int, float], rho: Mapping[int, float], tol: float = 1e-9):
        lam_t = tuple(sorted((int(k), float(v)) for k, v in lam.items()))
        rho_t = tuple(sorted((int(k), float(v)) for k, v in rho.items()))
        for name, t in (("lambda", lam_t), ("rho", rho_t)):
            if not t:
                raise ValueError(f"{name} is empty")
            if any(d < 1 for d, _ in t):
                raise ValueError(f"{name} has a degree below 1")
            if any(not (-tol <= c <= 1 + tol) for _, c in t):
                raise ValueError(f"{name} coefficients must lie in [0, 1]")
            if abs(sum(c for _, c in t) - 1.0) > tol:
                raise ValueError(f"{name} coefficients sum to {sum(c for _, c in t)!r}, not 1")
        object.__setattr__(self, "lam", lam_t)
        object.__setattr__(self, "rho", rho_t)

    @classmethod
    def normalized(cls, lam: Mapping[int, float], rho: Mapping[int, float]) -> "EnsembleDistribution":
        """Build from coefficients that only approximately sum to one (e.g.
        rounded published values) by rescaling each polynomial."""
        sl = sum(lam.values())
        sr = sum(rho.values())
        return cls({k: v / sl for k, v in lam.items()}, {k: v / sr for k, v in rho.items()})

    @property
    def lam_dict(self) -> Dict[int, float]:
        return dict(self.lam)

    @property
    def rho_dict(self) -> Dict[int, float]:
        return dict(self.rho)

    @property
    def int_lambda(self) -> float:
        return sum(c / d for d, c in self.lam)

    @property
    def int_rho(self) -> float:
        return sum(c / d for d, c in self.rho)

    @property
    def rate(self) -> float:
        return 1.0 - self.int_rho / self.int_lambda

    def lambda_of(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x ** (d - 1) for d, c in self.lam)

    def rho_of(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x ** (d - 1) for d, c in self.rho)

    def to_json(self) -> dict:
        return {"lambda": {str(d): c for d, c in self.lam}, "rho": {str(d): c for d, c in self.rho}}

    @classmethod
    def from_json(cls, obj: Mapping) -> "EnsembleDistribution":
        return cls({int(k): v for k, v in obj["lambda"].items()}, {int(k): v for k, v in obj["rho"].items()})


def validate_ensemble(E: EnsembleDistribution, R: RationalLike, tol: float = 1e-6) -> bool:
    """True iff the ensemble's design rate ``1 - int(rho)/int(lambda)`` is
    within ``tol`` of ``R``."""
    return abs(E.rate - float(parse_rate(R))) < tol


def realize_counts(E: EnsembleDistribution, n_v: int) -> DegreeCountVector:
    """Node counts for ``n_v`` variable nodes: floor of the node-perspective
    fractions, shortfall added one at a time from the lowest degree upward."""
    total = E.int_lambda
    degrees = [d for d, _ in E.lam]
    counts = [math.floor(n_v * (c / d) / total + 1e-9) for d, c in E.lam]
    k = 0
    while sum(counts) < n_v:
        counts[k % len(counts)] += 1
        k += 1
    return DegreeCountVector(tuple(degrees), tuple(counts))


def regular_base(n_c: int, n_v: int, value: int = 1) -> BaseMatrix:
    return BaseMatrix(np.full((n_c, n_v), value, dtype=np.int64))


def base_from_rows(rows: Sequence[Sequence[int]]) -> BaseMatrix:
    return BaseMatrix(np.array(rows, dtype=np.int64))


def load_base(path) -> BaseMatrix:
    with open(path) as fh:
        return BaseMatrix.from_json(json.load(fh))


def save_base(B: BaseMatrix, path) -> None:
    with open(path, "w") as fh:
        json.dump(B.to_json(), fh, separators=(",", ":"))
        fh.write("\n")
