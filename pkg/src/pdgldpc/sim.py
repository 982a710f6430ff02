"""Monte Carlo BLER simulation over the BEC with a hybrid peeling / local-ML
decoder, batched over frames."""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.stats import binomtest

from . import gf2, seeds
from .component import ml_erase_decode, resolution_table
from .doping import PdGldpcCode

CHUNK = 256
ORACLE_MAX_COLS = 1 << 12


@dataclass(frozen=True)
class SimConfig:
    epsilon: float
    max_blocks: int = 10 ** 6
    target_errors: int = 100
    max_decoder_iters: int = 200
    rng_seed: int = 0
    workers: int = 1
    chunk: int = CHUNK

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"erasure probability {self.epsilon} outside [0, 1]")
        if self.target_errors < 1:
            raise ValueError("target_errors must be at least 1")
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be at least 1")
        if self.max_decoder_iters < 1:
            raise ValueError("max_decoder_iters must be at least 1")
        if self.workers < 1 or self.chunk < 1:
            raise ValueError("workers and chunk must be positive")


@dataclass
class SimResult:
    epsilon: float
    blocks_run: int
    block_errors: int
    mean_iters: float
    residual_erasure_histogram: Dict[int, int] = field(default_factory=dict)

    @property
    def bler(self) -> float:
        return self.block_errors / self.blocks_run if self.blocks_run else 0.0

    @property
    def interval(self) -> Tuple[float, float]:
        """Wilson score 95% interval for the BLER."""
        if not self.blocks_run:
            return 0.0, 1.0
        ci = binomtest(self.block_errors, self.blocks_run).proportion_ci(0.95, method="wilson")
        return float(min(ci.low, self.bler)), float(max(ci.high, self.bler))


class Decoder:
    """Precomputed decoder structures for one code.

    Each iteration resolves, in parallel for all frames, every SPC row with a
    single erased neighbour and every erased position of a GC block that the
    block's local ML solution determines. Both steps are closure operations
    on the erasure set, so the fixpoint does not depend on their order.
    """

    def __init__(self, code: PdGldpcCode, max_iters: int = 200):
        self.code = code
        self.n = code.n
        self.max_iters = max_iters
        self.H = sp.csr_matrix(code.spc_matrix(), dtype=np.int32)
        self.blocks = np.asarray(code.gc_blocks, dtype=np.int64)
        self.table = None
        if self.blocks.size:
            mu = code.code.mu
            if mu <= 16:
                self.table = resolution_table(code.code)
            self.pow2 = (1 << np.arange(mu)).astype(np.int64)
        self.colid = np.arange(1, self.n + 1, dtype=np.int64)

    def _spc_step(self, E: np.ndarray) -> np.ndarray:
        Et = E.T.astype(np.int64)
        cnt = self.H @ Et
        single = cnt == 1
        if not single.any():
            return E
        pos = self.H @ (Et * self.colid[:, None])
        r, f = np.nonzero(single)
        E[f, pos[r, f] - 1] = False
        return E

    def _gc_step(self, E: np.ndarray) -> np.ndarray:
        sub = E[:, self.blocks]
        if self.table is not None:
            masks = sub.astype(np.int64) @ self.pow2
            res = self.table[masks]
            R = ((res[..., None] >> np.arange(self.blocks.shape[1])) & 1).astype(bool)
        else:
            R = np.zeros_like(sub)
            for f, b in zip(*np.nonzero(sub.any(axis=2))):
                resolved, _ = ml_erase_decode(self.code.code, np.flatnonzero(sub[f, b]))
                R[f, b, list(resolved)] = True
        f, b, p = np.nonzero(R)
        E[f, self.blocks[b, p]] = False
        return E

    def decode(self, erasures: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Decode a ``(frames, n)`` boolean erasure matrix.

        Returns the residual erasure matrix and, per frame, the number of
        iterations that resolved at least one position.
        """
        E = np.array(erasures, dtype=bool, copy=True)
        if E.ndim != 2 or E.shape[1] != self.n:
            raise ValueError(f"erasure matrix must have {self.n} columns")
        iters = np.zeros(E.shape[0], dtype=np.int64)
        left = E.sum(axis=1)
        active = left > 0
        for _ in range(self.max_iters):
            if not active.any():
                break
            idx = np.flatnonzero(active)
            sub = E[idx]
            sub = self._spc_step(sub)
            if self.blocks.size:
                sub = self._gc_step(sub)
            E[idx] = sub
            now = sub.sum(axis=1)
            progressed = now < left[idx]
            iters[idx[progressed]] += 1
            left[idx] = now
            active[idx] = progressed & (now > 0)
        return E, iters


def _as_mask(code: PdGldpcCode, erasures) -> np.ndarray:
    a = np.asarray(erasures)
    if a.dtype == bool:
        if a.shape != (code.n,):
            raise ValueError(f"erasure mask must have length {code.n}")
        return a
    m = np.zeros(code.n, dtype=bool)
    m[a.astype(np.int64)] = True
    return m


def decode_block(code: PdGldpcCode, erasures, max_iters: int = 200) -> Tuple[bool, np.ndarray, int]:
    """Decode one erasure pattern (boolean mask or index list).

    Returns ``(success, residual_mask, iterations)``.
    """
    E = _as_mask(code, erasures)
    R, it = Decoder(code, max_iters).decode(E[None, :])
    return not R[0].any(), R[0], int(it[0])


def erasure_rank_oracle(code: PdGldpcCode, erasures) -> bool:
    """Whole-code ML decodability: the full PCM restricted to the erased
    columns has full column rank."""
    if code.n > ORACLE_MAX_COLS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_COLS} columns")
    cols = np.flatnonzero(_as_mask(code, erasures))
    if cols.size == 0:
        return True
    sub = code.pcm.H.tocsc()[:, cols].tocsr()
    rows = []
    for r in range(sub.shape[0]):
        v = 0
        for c in sub.indices[sub.indptr[r]:sub.indptr[r + 1]]:
            v |= 1 << int(c)
        if v:
            rows.append(v)
    return gf2.rank(rows) == cols.size


# --- BLER harness -----------------------------------------------------------

_WORKER: Dict[str, Decoder] = {}


def _init_worker(code, max_iters):
    _WORKER["dec"] = Decoder(code, max_iters)


def _run_chunk(args):
    seed, eps, c, size, take = args
    dec = _WORKER["dec"]
    rng = seeds.generator(seed, "sim", c)
    E = rng.random((size, dec.n)) < eps
    R, it = dec.decode(E[:take])
    return R.sum(axis=1), it


def run_bler(code: PdGldpcCode, cfg: SimConfig) -> SimResult:
    """Transmit the all-zero codeword until ``target_errors`` block errors or
    ``max_blocks`` blocks.

    Block ``b`` always sees the same erasure pattern (chunk ``b // chunk`` is
    drawn from its own named sub-stream) and results are consumed in block
    order, so the outcome does not depend on ``workers``.
    """
    n_chunks = -(-cfg.max_blocks // cfg.chunk)
    residuals: List[np.ndarray] = []
    iters: List[np.ndarray] = []
    errors = 0
    done = False

    def jobs(start, stop):
        for c in range(start, stop):
            take = min(cfg.chunk, cfg.max_blocks - c * cfg.chunk)
            yield (cfg.rng_seed, cfg.epsilon, c, cfg.chunk, take)

    def consume(res, it):
        nonlocal errors, done
        fail = res > 0
        cum = errors + np.cumsum(fail)
        hit = np.flatnonzero(cum >= cfg.target_errors)
        if hit.size:
            k = hit[0] + 1
            res, it, done = res[:k], it[:k], True
        errors += int((res > 0).sum())
        residuals.append(res)
        iters.append(it)

    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker,
                                 initargs=(code, cfg.max_decoder_iters)) as ex:
            c = 0
            while c < n_chunks and not done:
                wave = list(jobs(c, min(n_chunks, c + 2 * cfg.workers)))
                for res, it in ex.map(_run_chunk, wave):
                    if not done:
                        consume(res, it)
                c += len(wave)
    else:
        _init_worker(code, cfg.max_decoder_iters)
        for job in jobs(0, n_chunks):
            consume(*_run_chunk(job))
            if done:
                break
    res = np.concatenate(residuals)
    it = np.concatenate(iters)
    hist = Counter(int(r) for r in res[res > 0])
    return SimResult(epsilon=cfg.epsilon, blocks_run=int(res.size), block_errors=errors,
                     mean_iters=float(it.mean()), residual_erasure_histogram=dict(sorted(hist.items())))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GLDPC_WORKERS", "1")))
    except ValueError:
        return 1


CSV_FIELDS = ("epsilon", "blocks", "errors", "bler", "ci_low", "ci_high", "mean_iters")


def results_csv(results: Iterable[SimResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in results:
        lo, hi = r.interval
        w.writerow([repr(float(r.epsilon)), r.blocks_run, r.block_errors, repr(r.bler), repr(lo), repr(hi),
                    repr(r.mean_iters)])
    return buf.getvalue()


def read_csv(text: str) -> List[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: (int(v) if k in ("blocks", "errors") else float(v)) for k, v in r.items()} for r in rows]
