"""Command-line front end: ``pdgldpc <command> ...``.

Exit codes: 0 success, 1 replay mismatch, 2 usage or input error,
3 infeasible design, 4 numerical fault.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, seeds
from .component import ComponentCode, hamming
from .design import (DeConfig, RegularDesign, build_doped_base, construct_regular, optimize_ensemble,
                     realize_and_sweep)
from .doping import (DopingSpec, PdGldpcCode, dope_conventional, dope_partial, plain_code,
                     typical_dmin_check)
from .io import (AlistParseError, FormatError, digest, dumps_json, load_code, save_code)
from .lifting import LiftingError, lift
from .pexit import CodeDescription, NumericalFaultError, threshold
from .protograph import (BaseMatrix, EnsembleDistribution, InfeasibleDesignError, InvalidProtographError,
                         load_base, parse_rate)
from .sim import SimConfig, default_workers, results_csv, run_bler

log = logging.getLogger("pdgldpc")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


# --- helpers -----------------------------------------------------------------

def _rate(s: str) -> Fraction:
    try:
        r = parse_rate(s)
    except (ValueError, ZeroDivisionError) as err:
        raise argparse.ArgumentTypeError(f"invalid rate {s!r}") from err
    if not 0 < r < 1:
        raise argparse.ArgumentTypeError(f"rate {s} must lie strictly between 0 and 1")
    return r


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{s} must be positive")
    return v


def _int_list(s: str) -> List[int]:
    """``"1,4,7"`` or a half-open range ``"0:75"``."""
    out = []
    for part in s.split(","):
        part = part.strip()
        if ":" in part:
            a, b = part.split(":", 1)
            out.extend(range(int(a), int(b)))
        elif part:
            out.append(int(part))
    return out


def parse_eps(spec: str) -> List[float]:
    """Comma list of values or an inclusive ``start:stop:step`` range."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if part.count(":") == 2:
            a, b, s = (float(v) for v in part.split(":"))
            if s <= 0:
                raise UsageError("epsilon step must be positive")
            k = int(np.floor((b - a) / s + 1e-9))
            out.extend(round(a + i * s, 12) for i in range(k + 1))
        elif part:
            out.append(float(part))
    if not out:
        raise UsageError("no epsilon values given")
    for e in out:
        if not 0.0 <= e <= 1.0:
            raise UsageError(f"epsilon {e} outside [0, 1]")
    return out


def _component(m: int) -> ComponentCode:
    try:
        return hamming(m)
    except ValueError as err:
        raise UsageError(str(err)) from err


def _write(path: Path, text: str, outputs: List[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    outputs.append(path)


def _manifest(args, argv: Sequence[str], inputs: Sequence[Path], outputs: Sequence[Path], t0: float,
              stem: Path) -> None:
    params = {k: (str(v) if isinstance(v, (Fraction, Path)) else v) for k, v in vars(args).items()
              if k != "func"}
    man = {
        "command": args.command,
        "argv": list(argv),
        "cwd": os.getcwd(),
        "params": params,
        "seeds": {"master": getattr(args, "seed", None)},
        "version": __version__,
        "inputs": {str(p): digest(p) for p in inputs},
        "outputs": {Path(p).name: digest(p) for p in outputs},
        "wall_clock_s": round(time.time() - t0, 3),
    }
    Path(str(stem) + ".manifest.json").write_text(json.dumps(man, indent=1, sort_keys=True) + "\n")


def _lift_and_wrap(B: BaseMatrix, N: int, code: Optional[ComponentCode], doped=(), gc_checks=(),
                   seed: int = 0) -> PdGldpcCode:
    mu = code.mu if code is not None else 1
    lifted = lift(B, N, mu, rng_seed=seeds.derive_seed(seed, "lift"))
    if gc_checks:
        return dope_conventional(B, list(gc_checks), code, lifted)
    if doped:
        return dope_partial(B, lifted, DopingSpec(tuple(doped), code))
    return plain_code(B, lifted)


# --- commands ------------------------------------------------------------------

def cmd_construct(args, argv):
    t0 = time.time()
    code = _component(args.component)
    if args.N % code.mu:
        raise UsageError(f"lifting factor {args.N} is not a multiple of the component length {code.mu}")
    stem = Path(args.out)
    outputs: List[Path] = []
    inputs: List[Path] = []
    report = {"mode": args.mode, "seed": args.seed, "component": code.name, "N": args.N}
    if args.mode == "regular":
        if args.rate is None:
            raise UsageError("--mode regular needs --rate")
        d = RegularDesign(code, args.nv, args.rate, w_r=args.wr,
                          y_values=tuple(args.y) if args.y is not None else None)
        res = construct_regular(d, seed=args.seed, tol=args.tol, workers=args.workers)
        B, doped, gc = res.base, tuple(range(res.y_best * code.mu)), ()
        report.update(y=res.y_best, threshold=res.threshold.epsilon_star,
                      thresholds={str(k): v for k, v in sorted(res.thresholds.items())})
    elif args.mode == "irregular":
        if args.rate is None:
            raise UsageError("--mode irregular needs --rate")
        cfg = DeConfig(code, n_v=args.nv, R=args.rate, y_max=args.ymax, l=args.l, r=args.r,
                       generations=args.generations, rng_seed=seeds.derive_seed(args.seed, "de"))
        if args.ensemble:
            inputs.append(Path(args.ensemble))
            E = EnsembleDistribution.normalized(*_load_ensemble(args.ensemble))
        else:
            E = optimize_ensemble(cfg).ensemble
        res = realize_and_sweep(E, cfg, seed=args.seed, tol=args.tol, workers=args.workers)
        B, doped, gc = res.G_p, tuple(range(res.y_opt * code.mu)), ()
        _write(Path(str(stem) + ".gc.base.json"), dumps_json(res.G_c.to_json()), outputs)
        report.update(ensemble=E.to_json(), counts=res.counts.as_dict(), y=res.y_opt,
                      gc_threshold=res.gc_threshold.epsilon_star, threshold=res.thresholds[res.y_opt],
                      thresholds={str(k): v for k, v in sorted(res.thresholds.items())},
                      skipped={str(k): v for k, v in res.skipped.items()})
    else:
        if not args.base or args.check_idx is None:
            raise UsageError("--mode conventional needs --base and --check-idx")
        inputs.append(Path(args.base))
        B = load_base(args.base)
        doped, gc = (), tuple(args.check_idx)
        desc = CodeDescription(B, code, gc_rows=gc)
        report.update(check_idx=list(gc), threshold=threshold(desc, "conventional", tol=args.tol).epsilon_star)
    pd = _lift_and_wrap(B, args.N, code, doped, gc, seed=args.seed)
    _write(Path(str(stem) + ".base.json"), dumps_json(B.to_json()), outputs)
    stem.parent.mkdir(parents=True, exist_ok=True)
    outputs.extend(save_code(pd, stem))
    report.update(n=pd.n, rows=pd.pcm.rows, design_rate=pd.design_rate)
    _write(Path(str(stem) + ".report.json"), dumps_json(report), outputs)
    _manifest(args, argv, inputs, outputs, t0, stem)
    print(dumps_json(report), end="")


def _load_ensemble(path):
    obj = json.loads(Path(path).read_text())
    obj = obj.get("ensemble", obj)
    return ({int(k): float(v) for k, v in obj["lambda"].items()}, {int(k): float(v) for k, v in obj["rho"].items()})


def _describe(args) -> CodeDescription:
    if args.code:
        c = load_code(args.code)
        comp = c.code
        if args.mode == "conventional":
            return CodeDescription(c.base, comp, gc_rows=c.gc_checks)
        if args.mode == "pd":
            return CodeDescription(c.base, comp, doped=c.doped_cols)
        return CodeDescription(c.base)
    if not args.base:
        raise UsageError("give --code or --base")
    B = load_base(args.base)
    if args.mode == "ldpc":
        return CodeDescription(B)
    comp = _component(args.component)
    if args.mode == "pd":
        if args.doped is None:
            raise UsageError("--mode pd with --base needs --doped")
        return CodeDescription(B, comp, doped=args.doped)
    if args.check_idx is None:
        raise UsageError("--mode conventional with --base needs --check-idx")
    return CodeDescription(B, comp, gc_rows=args.check_idx)


def cmd_threshold(args, argv):
    desc = _describe(args)
    res = threshold(desc, args.mode, tol=args.tol)
    out = {"epsilon_star": res.epsilon_star, "iterations": res.iterations_at_threshold, "mode": args.mode,
           "fingerprint": desc.fingerprint(), "converged": res.converged, "bisection_width": res.bisection_width}
    text = dumps_json(out)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")


def cmd_check(args, argv):
    if args.code:
        c = load_code(args.code)
        B, doped = c.base, c.doped_cols
    elif args.base:
        B, doped = load_base(args.base), tuple(args.doped or ())
    else:
        raise UsageError("give --code or --base")
    ok, cyc = typical_dmin_check(B, doped)
    print(dumps_json({"typical_dmin": ok, "cycle": list(cyc) if cyc else None, "n_c": B.n_c, "n_v": B.n_v,
                      "doped": len(doped)}), end="")
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_optimize(args, argv):
    t0 = time.time()
    cfg = DeConfig(_component(args.component), n_v=args.nv, R=args.rate, y_max=args.ymax, l=args.l, r=args.r,
                   population=args.population, generations=args.generations,
                   rng_seed=seeds.derive_seed(args.seed, "de"))
    res = optimize_ensemble(cfg)
    report = {"ensemble": res.ensemble.to_json(), "threshold": res.threshold, "rate": res.ensemble.rate,
              "seed": args.seed, "generations": res.generations, "best_history": res.best_history[::10]}
    text = dumps_json(report)
    if args.out:
        outputs: List[Path] = []
        _write(Path(args.out), text, outputs)
        _manifest(args, argv, [], outputs, t0, Path(args.out))
    print(text, end="")


def cmd_simulate(args, argv):
    t0 = time.time()
    eps = parse_eps(args.eps)
    code = load_code(args.code)
    if args.target_errors < 1 or args.max_blocks < 1:
        raise UsageError("--target-errors and --max-blocks must be positive")
    results = []
    for e in eps:
        cfg = SimConfig(e, max_blocks=int(args.max_blocks), target_errors=args.target_errors,
                        max_decoder_iters=args.max_iters, rng_seed=seeds.derive_seed(args.seed, "sim", repr(e)),
                        workers=args.workers)
        results.append(run_bler(code, cfg))
        log.info("eps=%g blocks=%d errors=%d", e, results[-1].blocks_run, results[-1].block_errors)
    text = results_csv(results)
    if args.out:
        outputs: List[Path] = []
        _write(Path(args.out), text, outputs)
        code_path = Path(args.code)
        ins = [code_path] + ([code_path.with_suffix(".json")] if code_path.suffix != ".json" else [])
        _manifest(args, argv, [p for p in ins if p.exists()], outputs, t0, Path(args.out))
    print(text, end="")


def cmd_sweep(args, argv):
    t0 = time.time()
    code = _component(args.component)
    d = RegularDesign(code, args.nv, args.rate, w_r=args.wr, y_values=tuple(args.y) if args.y else None)
    per_seed = {}
    for s in args.seeds:
        res = construct_regular(d, seed=s, tol=args.tol, workers=args.workers)
        per_seed[str(s)] = {str(k): v for k, v in sorted(res.thresholds.items())}
    ys = sorted({int(y) for t in per_seed.values() for y in t})
    med = {str(y): float(np.median([t[str(y)] for t in per_seed.values() if str(y) in t])) for y in ys}
    best = max(ys, key=lambda y: med[str(y)])
    text = dumps_json({"per_seed": per_seed, "median": med, "y_best": best})
    if args.out:
        outputs: List[Path] = []
        _write(Path(args.out), text, outputs)
        _manifest(args, argv, [], outputs, t0, Path(args.out))
    print(text, end="")


def cmd_replay(args, argv):
    man = json.loads(Path(args.manifest).read_text())
    rec = list(man["argv"])
    if "--out" not in rec:
        raise UsageError("manifest has no recorded output")
    outdir = Path(args.outdir) if args.outdir else Path(tempfile.mkdtemp(prefix="pdgldpc-replay-"))
    outdir.mkdir(parents=True, exist_ok=True)
    k = rec.index("--out") + 1
    rec[k] = str(outdir / Path(rec[k]).name)
    cwd = os.getcwd()
    try:
        os.chdir(man["cwd"])
        for p, h in man["inputs"].items():
            if digest(p) != h:
                raise UsageError(f"input {p} changed since the recorded run")
        rc = main(rec)
    finally:
        os.chdir(cwd)
    if rc:
        return rc
    bad = []
    for name, h in man["outputs"].items():
        p = outdir / name
        if not p.exists() or digest(p) != h:
            bad.append(name)
    print(dumps_json({"replayed": man["command"], "outdir": str(outdir), "identical": not bad, "mismatched": bad}),
          end="")
    return EXIT_MISMATCH if bad else EXIT_OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdgldpc", description="Protograph-based partially doped GLDPC codes")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    workers = default_workers()

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=workers)

    c = sub.add_parser("construct", help="build a code and write base/alist/sidecar/manifest")
    c.add_argument("--mode", choices=("regular", "irregular", "conventional"), required=True)
    c.add_argument("--rate", type=_rate)
    c.add_argument("--nv", type=int, default=400)
    c.add_argument("--component", type=int, default=4, help="Hamming parameter m (length 2^m - 1)")
    c.add_argument("--N", type=int, required=True, help="lifting factor, a multiple of the component length")
    c.add_argument("--wr", type=int, default=2, help="variable degree of the regular base")
    c.add_argument("--y", type=_int_list, help="doping counts to try (default: feasible range)")
    c.add_argument("--ymax", type=int, default=5)
    c.add_argument("--l", type=int, default=20)
    c.add_argument("--r", type=int, default=9)
    c.add_argument("--generations", type=int, default=300)
    c.add_argument("--ensemble", help="JSON ensemble to realise instead of optimising")
    c.add_argument("--base", help="base matrix JSON (conventional mode)")
    c.add_argument("--check-idx", type=_int_list)
    c.add_argument("--tol", type=_positive_float, default=1e-4)
    c.add_argument("--out", required=True, help="output stem")
    common(c)
    c.set_defaults(func=cmd_construct)

    t = sub.add_parser("threshold", help="PEXIT threshold of a code or base matrix")
    t.add_argument("--mode", choices=("pd", "conventional", "ldpc"), default="pd")
    t.add_argument("--code", help="code sidecar JSON or alist")
    t.add_argument("--base", help="base matrix JSON")
    t.add_argument("--component", type=int, default=4)
    t.add_argument("--doped", type=_int_list)
    t.add_argument("--check-idx", type=_int_list)
    t.add_argument("--tol", type=_positive_float, default=1e-4)
    t.add_argument("--out")
    t.set_defaults(func=cmd_threshold)

    k = sub.add_parser("check", help="typical minimum distance condition")
    k.add_argument("--code")
    k.add_argument("--base")
    k.add_argument("--doped", type=_int_list)
    k.set_defaults(func=cmd_check)

    o = sub.add_parser("optimize", help="differential-evolution ensemble design")
    o.add_argument("--rate", type=_rate, default=Fraction(1, 2))
    o.add_argument("--nv", type=int, default=400)
    o.add_argument("--component", type=int, default=4)
    o.add_argument("--ymax", type=int, default=5)
    o.add_argument("--l", type=int, default=20)
    o.add_argument("--r", type=int, default=9)
    o.add_argument("--population", type=int, default=50)
    o.add_argument("--generations", type=int, default=300)
    o.add_argument("--out")
    common(o)
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", help="Monte Carlo BLER over the BEC")
    s.add_argument("--code", required=True)
    s.add_argument("--eps", required=True, help="comma list or start:stop:step")
    s.add_argument("--target-errors", type=int, default=100)
    s.add_argument("--max-blocks", type=float, default=1e6)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--out")
    common(s)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="PD threshold versus doping count for regular designs")
    w.add_argument("--rate", type=_rate, required=True)
    w.add_argument("--nv", type=int, default=400)
    w.add_argument("--component", type=int, default=4)
    w.add_argument("--wr", type=int, default=2)
    w.add_argument("--y", type=_int_list)
    w.add_argument("--seeds", type=_int_list, default=[0])
    w.add_argument("--tol", type=_positive_float, default=1e-4)
    w.add_argument("--out")
    common(w, seed=False)
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    r.add_argument("manifest")
    r.add_argument("--outdir")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        rc = args.func(args, argv)
        return EXIT_OK if rc is None else rc
    except (UsageError, AlistParseError, FormatError, LiftingError, InvalidProtographError,
            FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as err:
        if isinstance(err, InfeasibleDesignError):
            print(f"infeasible design: {err}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFaultError, FloatingPointError) as err:
        print(f"numerical fault: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
