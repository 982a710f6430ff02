"""Persistent formats: alist PCMs, a compact binary cache, JSON sidecars for
doped codes and run manifests."""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .component import ComponentCode
from .doping import PdGldpcCode
from .lifting import LiftedPcm
from .protograph import BaseMatrix

PathLike = Union[str, Path]
SIDECAR_VERSION = 1


class AlistParseError(ValueError):
    """Malformed alist text; ``offset`` is the byte offset of the bad token."""

    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at byte offset {offset}")
        self.offset = offset


class FormatError(ValueError):
    pass


# --- alist ------------------------------------------------------------------

def write_alist(H) -> str:
    """MacKay alist text for a binary matrix, with zero padding."""
    H = sp.csr_matrix(H)
    H.sort_indices()
    Hc = H.tocsc()
    Hc.sort_indices()
    m, n = H.shape
    col_deg = np.diff(Hc.indptr)
    row_deg = np.diff(H.indptr)
    cmax = int(col_deg.max()) if n else 0
    rmax = int(row_deg.max()) if m else 0
    out = [f"{n} {m}", f"{cmax} {rmax}", " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for j in range(n):
        idx = list(Hc.indices[Hc.indptr[j]:Hc.indptr[j + 1]] + 1) + [0] * (cmax - col_deg[j])
        out.append(" ".join(map(str, idx)))
    for i in range(m):
        idx = list(H.indices[H.indptr[i]:H.indptr[i + 1]] + 1) + [0] * (rmax - row_deg[i])
        out.append(" ".join(map(str, idx)))
    return "\n".join(out) + "\n"


class _Tokens:
    def __init__(self, text: str):
        self.toks = [(m.group(), m.start()) for m in re.finditer(r"\S+", text)]
        self.end = len(text.encode())
        self.raw = text
        self.i = 0

    def _byte(self, char_pos: int) -> int:
        return len(self.raw[:char_pos].encode())

    def int(self, what: str) -> Tuple[int, int]:
        if self.i >= len(self.toks):
            raise AlistParseError(f"unexpected end of input reading {what}", self.end)
        tok, pos = self.toks[self.i]
        self.i += 1
        if not re.fullmatch(r"\d+", tok):
            raise AlistParseError(f"expected non-negative integer for {what}, got {tok!r}", self._byte(pos))
        return int(tok), self._byte(pos)

    def peek_is_zero(self) -> bool:
        return self.i < len(self.toks) and self.toks[self.i][0] == "0"


def read_alist(text: Union[str, bytes]) -> sp.csr_matrix:
    """Parse alist text (zero padding optional) into a binary CSR matrix.

    The column and row adjacency lists must describe the same matrix.
    """
    if isinstance(text, bytes):
        text = text.decode()
    t = _Tokens(text)
    n, _ = t.int("column count")
    m, _ = t.int("row count")
    cmax, _ = t.int("max column degree")
    rmax, _ = t.int("max row degree")
    col_deg = []
    for j in range(n):
        d, off = t.int(f"degree of column {j}")
        if d > cmax:
            raise AlistParseError(f"column {j} degree {d} exceeds maximum {cmax}", off)
        col_deg.append(d)
    row_deg = []
    for i in range(m):
        d, off = t.int(f"degree of row {i}")
        if d > rmax:
            raise AlistParseError(f"row {i} degree {d} exceeds maximum {rmax}", off)
        row_deg.append(d)
    if sum(col_deg) != sum(row_deg):
        raise AlistParseError("column and row degree sums differ", t._byte(t.toks[t.i - 1][1]) if t.i else 0)
    cols_of_rows = set()
    for j in range(n):
        for _ in range(col_deg[j]):
            r, off = t.int(f"row index of column {j}")
            if not 1 <= r <= m:
                raise AlistParseError(f"row index {r} out of range 1..{m}", off)
            if (r - 1, j) in cols_of_rows:
                raise AlistParseError(f"repeated entry ({r}, {j + 1})", off)
            cols_of_rows.add((r - 1, j))
        for _ in range(cmax - col_deg[j]):
            if t.peek_is_zero():
                t.int("padding")
    seen = set()
    for i in range(m):
        for _ in range(row_deg[i]):
            c, off = t.int(f"column index of row {i}")
            if not 1 <= c <= n:
                raise AlistParseError(f"column index {c} out of range 1..{n}", off)
            if (i, c - 1) not in cols_of_rows or (i, c - 1) in seen:
                raise AlistParseError(f"row list entry ({i + 1}, {c}) disagrees with column lists", off)
            seen.add((i, c - 1))
        for _ in range(rmax - row_deg[i]):
            if t.peek_is_zero():
                t.int("padding")
    if t.i < len(t.toks):
        raise AlistParseError("trailing data", t._byte(t.toks[t.i][1]))
    rr = np.array([p[0] for p in sorted(cols_of_rows)], dtype=np.int64)
    cc = np.array([p[1] for p in sorted(cols_of_rows)], dtype=np.int64)
    return sp.csr_matrix((np.ones(rr.size, dtype=np.uint8), (rr, cc)), shape=(m, n))


def save_alist(H, path: PathLike) -> None:
    Path(path).write_text(write_alist(H))


def load_alist(path: PathLike) -> sp.csr_matrix:
    return read_alist(Path(path).read_bytes())


def save_binary(H, path: PathLike) -> None:
    """Compact cache: CSR index arrays in an uncompressed npz."""
    H = sp.csr_matrix(H)
    H.sort_indices()
    with open(path, "wb") as fh:
        np.savez(fh, shape=np.array(H.shape, dtype=np.int64), indptr=H.indptr.astype(np.int64),
                 indices=H.indices.astype(np.int64))


def load_binary(path: PathLike) -> sp.csr_matrix:
    with np.load(path) as z:
        indptr, indices = z["indptr"], z["indices"]
        return sp.csr_matrix((np.ones(indices.size, dtype=np.uint8), indices, indptr),
                             shape=tuple(int(s) for s in z["shape"]))


# --- doped code sidecar -----------------------------------------------------

def component_to_json(code: ComponentCode) -> dict:
    return {"mu": code.mu, "kappa": code.kappa, "name": code.name, "pcm": code.pcm.tolist(),
            "d_min": code.d_min, "d_min_dual": code.d_min_dual}


def component_from_json(obj: dict) -> ComponentCode:
    return ComponentCode(mu=int(obj["mu"]), kappa=int(obj["kappa"]), pcm=np.array(obj["pcm"]),
                         d_min=obj.get("d_min"), d_min_dual=obj.get("d_min_dual"), name=obj.get("name", ""))


def sidecar(code: PdGldpcCode) -> dict:
    p = code.pcm
    return {
        "format": "pdgldpc-sidecar",
        "version": SIDECAR_VERSION,
        "kind": code.kind,
        "N": code.N,
        "base": code.base.to_json(),
        "component": component_to_json(code.code) if code.code is not None else None,
        "doped_cols": list(code.doped_cols),
        "gc_checks": list(code.gc_checks),
        "gc_blocks": code.gc_blocks.tolist(),
        "col_origin": p.col_origin.tolist(),
        "row_origin": p.row_origin.tolist(),
        "row_block": p.row_block.tolist(),
    }


def code_from_parts(H, meta: dict) -> PdGldpcCode:
    if meta.get("format") != "pdgldpc-sidecar":
        raise FormatError("not a code sidecar")
    if meta.get("version") != SIDECAR_VERSION:
        raise FormatError(f"unsupported sidecar version {meta.get('version')}")
    comp = component_from_json(meta["component"]) if meta.get("component") else None
    pcm = LiftedPcm(H=H, col_origin=meta["col_origin"], row_origin=meta["row_origin"],
                    row_block=meta["row_block"], N=int(meta["N"]))
    mu = comp.mu if comp is not None else 0
    blocks = np.array(meta["gc_blocks"], dtype=np.int64).reshape(-1, mu) if mu else np.zeros((0, 0))
    return PdGldpcCode(pcm=pcm, base=BaseMatrix.from_json(meta["base"]), code=comp, N=int(meta["N"]),
                       gc_blocks=blocks, kind=meta["kind"], doped_cols=meta["doped_cols"],
                       gc_checks=meta["gc_checks"])


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_code(code: PdGldpcCode, stem: PathLike, binary: bool = False) -> List[Path]:
    """Write ``stem.alist`` and ``stem.json`` (plus ``stem.npz`` if asked)."""
    paths = [Path(f"{stem}.alist"), Path(f"{stem}.json")]
    save_alist(code.pcm.H, paths[0])
    paths[1].write_text(dumps_json(sidecar(code)))
    if binary:
        paths.append(Path(f"{stem}.npz"))
        save_binary(code.pcm.H, paths[2])
    return paths


def load_code(path: PathLike, sidecar_path: Optional[PathLike] = None) -> PdGldpcCode:
    """Load a code from its alist (or npz) file and JSON sidecar."""
    path = Path(path)
    if path.suffix == ".json" and sidecar_path is None:
        sidecar_path, path = path, path.with_suffix(".alist")
    sidecar_path = Path(sidecar_path) if sidecar_path else path.with_suffix(".json")
    H = load_binary(path) if path.suffix == ".npz" else load_alist(path)
    return code_from_parts(H, json.loads(sidecar_path.read_text()))


# --- manifests ----------------------------------------------------------------

def digest(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def file_digests(paths) -> Dict[str, str]:
    return {str(p): digest(p) for p in paths if Path(p).exists()}
