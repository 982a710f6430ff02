"""Independent reference implementations and random small codes for tests."""

import numpy as np
import scipy.sparse as sp

from pdgldpc.component import hamming
from pdgldpc.doping import DopingSpec, dope_partial, plain_code
from pdgldpc.lifting import lift

from conftest import random_base


def reference_peel(H, erased):
    """Sequential peeling: repeatedly fill the single erased bit of a check."""
    H = sp.csr_matrix(H)
    rows = [set(H.indices[H.indptr[r]:H.indptr[r + 1]]) for r in range(H.shape[0])]
    E = set(int(i) for i in np.flatnonzero(erased))
    changed = True
    while changed and E:
        changed = False
        for r in rows:
            left = r & E
            if len(left) == 1:
                E -= left
                changed = True
    out = np.zeros(H.shape[1], dtype=bool)
    out[list(E)] = True
    return out


def random_code(rng, doped=True, max_nv=12):
    """Small random lifted code, partially doped with the (7,4) Hamming code."""
    code = hamming(3)
    n_c = int(rng.integers(2, max(3, max_nv // 3)))
    n_v = int(rng.integers(n_c + 2, max(n_c + 3, max_nv + 1)))
    B = random_base(rng, n_c, n_v, max_deg=4, p2=0.6)
    N = 7 * int(rng.integers(1, 4))
    L = lift(B, N, 7, rng_seed=int(rng.integers(2 ** 31)))
    if not doped:
        return plain_code(B, L)
    x = int(rng.integers(1, max(2, n_v // 3) + 1))
    cols = tuple(int(j) for j in rng.choice(n_v, size=x, replace=False))
    try:
        return dope_partial(B, L, DopingSpec(cols, code))
    except ValueError:
        return plain_code(B, L)
