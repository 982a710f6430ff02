"""Hamming component codes: parity-check matrices, GC-node EXIT functions and
local ML erasure decoding."""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, Iterable, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from . import gf2

log = logging.getLogger(__name__)

ORACLE_MAX_LENGTH = 20


class InconsistentErasureError(ValueError):
    """Known bits violate a parity check that involves no erased position."""


@dataclass(frozen=True, eq=False)
class ComponentCode:
    """A binary ``(mu, kappa)`` linear code given by its parity-check matrix."""

    mu: int
    kappa: int
    pcm: np.ndarray
    d_min: Optional[int] = None
    d_min_dual: Optional[int] = None
    name: str = ""
    col_bits: Tuple[int, ...] = field(init=False, repr=False)
    row_bits: Tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        pcm = np.array(self.pcm, dtype=np.uint8) & 1
        pcm.setflags(write=False)
        object.__setattr__(self, "pcm", pcm)
        if pcm.shape != (self.mu - self.kappa, self.mu):
            raise ValueError(f"pcm shape {pcm.shape} does not match ({self.mu}, {self.kappa}) code")
        object.__setattr__(self, "row_bits", tuple(gf2.rows_to_bitsets(pcm)))
        object.__setattr__(self, "col_bits", tuple(gf2.rows_to_bitsets(pcm.T)))
        if gf2.rank(self.row_bits) != self.mu - self.kappa:
            raise ValueError("component pcm is not full rank")

    @property
    def m(self) -> int:
        """Number of parity checks, mu - kappa."""
        return self.mu - self.kappa

    @property
    def column_weights(self) -> np.ndarray:
        return self.pcm.sum(axis=0).astype(int)

    @property
    def is_hamming(self) -> bool:
        return sorted(self.col_bits) == list(range(1, 2 ** self.m)) and self.mu == 2 ** self.m - 1

    def weight_profile(self) -> Dict[int, int]:
        """Histogram ``{column weight: count}`` of the pcm."""
        w, c = np.unique(self.column_weights, return_counts=True)
        return {int(a): int(b) for a, b in zip(w, c)}

    def __eq__(self, other):
        if not isinstance(other, ComponentCode):
            return NotImplemented
        return (self.mu, self.kappa) == (other.mu, other.kappa) and np.array_equal(self.pcm, other.pcm)

    def __hash__(self):
        return hash((self.mu, self.kappa, self.row_bits))

    @classmethod
    def from_pcm(cls, pcm, name: str = "") -> "ComponentCode":
        pcm = np.asarray(pcm, dtype=np.uint8)
        m, mu = pcm.shape
        d = _min_distance(gf2.rows_to_bitsets(pcm), mu) if mu - m <= 16 else None
        return cls(mu=mu, kappa=mu - m, pcm=pcm, d_min=d, name=name)


def _min_distance(pcm_rows: Sequence[int], mu: int) -> Optional[int]:
    # smallest number of linearly dependent columns
    colv = [sum(((r >> c) & 1) << k for k, r in enumerate(pcm_rows)) for c in range(mu)]
    for w in range(1, mu + 1):
        for S in combinations(colv, w):
            acc = 0
            for v in S:
                acc ^= v
            if acc == 0:
                return w
    return None


def hamming(m: int, systematic: bool = True) -> ComponentCode:
    """The ``(2^m - 1, 2^m - 1 - m)`` Hamming code.

    With ``systematic=True`` the last ``m`` columns of the pcm form the identity
    (parity positions) and the remaining nonzero vectors fill the first
    ``kappa`` columns in increasing integer order. Otherwise column ``c`` is the
    binary expansion of ``c + 1``.
    """
    if not 2 <= m <= 8:
        raise ValueError(f"Hamming parameter m must be in [2, 8], got {m}")
    mu = 2 ** m - 1
    if systematic:
        units = [1 << r for r in range(m)]
        values = [v for v in range(1, mu + 1) if v not in units] + units
    else:
        values = list(range(1, mu + 1))
    pcm = np.array([[(v >> r) & 1 for v in values] for r in range(m)], dtype=np.uint8)
    return ComponentCode(mu=mu, kappa=mu - m, pcm=pcm, d_min=3, d_min_dual=2 ** (m - 1),
                         name=f"hamming({mu},{mu - m})")


def spc(mu: int) -> ComponentCode:
    """Single parity check code of length ``mu``."""
    return ComponentCode(mu=mu, kappa=mu - 1, pcm=np.ones((1, mu), dtype=np.uint8), d_min=2,
                         d_min_dual=mu, name=f"spc({mu})")


# --- EXIT functions -----------------------------------------------------------

def gaussian_binomial(a: int, b: int) -> int:
    if b < 0 or b > a:
        return 0
    num = den = 1
    for i in range(b):
        num *= 2 ** a - 2 ** i
        den *= 2 ** b - 2 ** i
    return num // den


def hamming_e_tilde(m: int) -> Tuple[int, ...]:
    """``e~_h`` for h = 0..mu: the sum over all h-subsets of pcm columns of
    their GF(2) rank, via subspace Moebius inversion over the simplex code."""
    mu = 2 ** m - 1
    out = [0]
    for h in range(1, mu + 1):
        total = 0
        for t in range(1, min(h, m) + 1):
            inner = sum((-1) ** u * 2 ** comb(u, 2) * gaussian_binomial(t, u) * comb(2 ** (t - u) - 1, h)
                        for u in range(t + 1))
            total += t * gaussian_binomial(m, t) * inner
        out.append(total)
    return tuple(out)


def enumerated_e_tilde(code: ComponentCode) -> Tuple[int, ...]:
    """Same quantity as :func:`hamming_e_tilde` by summing ranks over subsets."""
    if code.mu > ORACLE_MAX_LENGTH:
        raise ValueError("enumeration limited to mu <= 20")
    sums = [0] * (code.mu + 1)
    cols = code.col_bits
    for mask in range(1 << code.mu):
        S = [cols[c] for c in range(code.mu) if (mask >> c) & 1]
        sums[len(S)] += gf2.rank(S)
    return tuple(sums)


@dataclass(frozen=True)
class ExitTable:
    """Exact GC-node EXIT polynomial in the form
    ``I_E(x) = sum_h coeff[h] (1-x)^(h-1) x^(mu-h)``, h = 1..mu."""

    code: ComponentCode
    e_tilde: Tuple[int, ...]
    coeffs: Tuple[Fraction, ...]

    @classmethod
    def from_e_tilde(cls, code: ComponentCode, e: Sequence[int]) -> "ExitTable":
        mu = code.mu
        if e[0] != 0:
            raise ValueError("e~_0 must vanish")
        coeffs = tuple(Fraction(h * e[h] - (mu - h + 1) * e[h - 1], mu) for h in range(1, mu + 1))
        return cls(code=code, e_tilde=tuple(int(v) for v in e), coeffs=coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        mu = self.code.mu
        c = np.array([float(v) for v in self.coeffs])
        h = np.arange(1, mu + 1)
        xx = x[..., None]
        return np.sum(c * (1.0 - xx) ** (h - 1) * xx ** (mu - h), axis=-1)


@functools.lru_cache(maxsize=None)
def exit_table(code: ComponentCode) -> ExitTable:
    e = hamming_e_tilde(code.m) if code.is_hamming else enumerated_e_tilde(code)
    return ExitTable.from_e_tilde(code, e)


def _check_ia(I_A) -> np.ndarray:
    a = np.asarray(I_A, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueError(f"a priori information must lie in [0, 1], got {I_A!r}")
    return a


def exit_closed_form(code: ComponentCode, I_A):
    """Extrinsic mutual information of a GC node given a priori ``I_A``."""
    a = _check_ia(I_A)
    out = np.clip(exit_table(code)(a), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=None)
def oracle_counts(code: ComponentCode) -> Tuple[int, ...]:
    """``counts[g]``: number of (position j, known set K of size g among the
    other positions) pairs for which bit j is recoverable from K.

    Bit j is recoverable iff the unit vector at j lies in the row space of the
    pcm restricted to the erased columns (the others' complement plus j).
    """
    mu = code.mu
    if mu > ORACLE_MAX_LENGTH:
        raise ValueError(f"exact oracle limited to mu <= {ORACLE_MAX_LENGTH}")
    counts = [0] * mu
    rows = code.row_bits
    for j in range(mu):
        others = [c for c in range(mu) if c != j]
        for mask in range(1 << (mu - 1)):
            erased = [j] + [others[k] for k in range(mu - 1) if (mask >> k) & 1]
            sub = gf2.select_columns(rows, erased)
            if gf2.in_rowspan(1, sub):
                counts[mu - len(erased)] += 1
    return tuple(counts)


def exit_oracle(code: ComponentCode, I_A):
    """Exact extrinsic information by enumerating all erasure patterns."""
    a = _check_ia(I_A)
    counts = oracle_counts(code)
    mu = code.mu
    g = np.arange(mu)
    aa = a[..., None]
    val = np.sum(np.array(counts, dtype=float) * aa ** g * (1.0 - aa) ** (mu - 1 - g), axis=-1) / mu
    return float(val) if val.ndim == 0 else val


@functools.lru_cache(maxsize=None)
def gc_exit_function(code: ComponentCode, check_tol: float = 1e-6):
    """EXIT function used by PEXIT: the closed form, cross-checked against the
    enumeration oracle when it is affordable. On disagreement the oracle
    polynomial is used instead."""
    table = exit_table(code)
    if code.mu > 15:
        return table
    grid = np.linspace(0.0, 1.0, 21)
    diff = np.max(np.abs(table(grid) - exit_oracle(code, grid)))
    if diff > check_tol:
        log.warning("closed-form GC EXIT of %s deviates from oracle by %.3g; using oracle", code.name, diff)
        return lambda x: exit_oracle(code, np.clip(x, 0.0, 1.0))
    return table


# --- local ML erasure decoding ----------------------------------------------

def ml_erase_decode(code: ComponentCode, erased: Iterable[int],
                    known_bits: Union[Mapping[int, int], Sequence[int], np.ndarray, None] = None
                    ) -> Tuple[Dict[int, int], Set[int]]:
    """Gaussian elimination on the pcm columns indexed by ``erased``.

    ``known_bits`` gives the values of the non-erased positions (mapping or a
    length-mu vector whose erased entries are ignored); all-zero if omitted.
    Returns ``(resolved, unresolved)`` where ``resolved`` maps position to its
    recovered bit. When the erased columns have full rank every position is
    resolved; otherwise only those whose reduced row has weight one.
    """
    E = sorted(set(int(e) for e in erased))
    for e in E:
        if not 0 <= e < code.mu:
            raise ValueError(f"erased position {e} outside [0, {code.mu})")
    Eset = set(E)
    if known_bits is None:
        vals = {}
    elif isinstance(known_bits, Mapping):
        vals = {int(k): int(v) & 1 for k, v in known_bits.items()}
    else:
        vals = {k: int(v) & 1 for k, v in enumerate(known_bits)}
    k_e = len(E)
    aug = []
    for r in range(code.m):
        row = code.pcm[r]
        syn = 0
        for c in range(code.mu):
            if c not in Eset and row[c]:
                syn ^= vals.get(c, 0)
        v = syn << k_e
        for k, c in enumerate(E):
            if row[c]:
                v |= 1 << k
        aug.append(v)
    red, pivots = gf2.rref(aug, k_e + 1)
    if pivots and pivots[-1] == k_e:
        raise InconsistentErasureError("nonzero syndrome on a check with no erased positions")
    low = (1 << k_e) - 1
    resolved: Dict[int, int] = {}
    for r in red:
        part = r & low
        if part & (part - 1) == 0:
            resolved[E[part.bit_length() - 1]] = (r >> k_e) & 1
    return resolved, Eset - set(resolved)


@functools.lru_cache(maxsize=None)
def resolution_table(code: ComponentCode) -> np.ndarray:
    """``table[mask]`` is the bitmask of positions ML-recoverable when the
    positions in ``mask`` are erased. Only built for mu <= 16."""
    if code.mu > 16:
        raise ValueError("resolution table limited to mu <= 16")
    mu = code.mu
    rows = code.row_bits
    table = np.zeros(1 << mu, dtype=np.int64)
    for mask in range(1, 1 << mu):
        E = [c for c in range(mu) if (mask >> c) & 1]
        red, _ = gf2.rref(gf2.select_columns(rows, E), len(E))
        out = 0
        for r in red:
            if r & (r - 1) == 0:
                out |= 1 << E[r.bit_length() - 1]
        table[mask] = out
    table.setflags(write=False)
    return table
