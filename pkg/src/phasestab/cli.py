"""Command-line front end.

Every subcommand writes a JSON report (``sinc-table`` writes CSV) to
``--out`` or stdout.  Files are written to a temporary name and renamed,
so a failed run never leaves a partial file behind.

Exit codes: 0 certified / all checks passed, 2 invalid input,
10 certified negative (or a failed check), 11 heuristic answer,
12 search budget or window exhausted.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import instability as ins
from . import stability as st
from .frames import (
    FrameFileError,
    analysis,
    dump_frame,
    dumps,
    atomic_write,
    encode_vector,
    frame_bounds,
    load_frame,
    onb_frame,
    perturb_destroy_pr,
    sinc_frame,
)
from .hilbert import ScalarField, quotient_distance

DEFAULT_SEED = 24301
EXIT_OK, EXIT_INPUT, EXIT_NO, EXIT_HEURISTIC, EXIT_BUDGET = 0, 2, 10, 11, 12


class InputError(Exception):
    pass


def _clean(x):
    """Plain JSON types (numpy scalars and arrays converted)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def _emit(args, text: str) -> None:
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _report(args, doc: dict) -> None:
    doc = dict(doc)
    doc["subcommand"] = args.command
    doc["seed"] = args.seed
    doc["version"] = __version__
    _emit(args, dumps(_clean(doc)))


def _load(path):
    try:
        return load_frame(path)
    except (OSError, FrameFileError) as exc:
        raise InputError(f"{path}: {exc}") from None


# -- subcommands ---------------------------------------------------------------


def cmd_pr_check(args) -> int:
    frame = _load(args.frame)
    if args.method == "complement" and frame.field is ScalarField.COMPLEX:
        raise InputError("the complement method needs a real frame")
    v = st.does_phase_retrieval(frame, method=args.method, restarts=args.restarts, seed=args.seed)
    doc = {"frame": {"field": frame.field.value, "dim": frame.M, "N": frame.N}}
    doc.update(v.to_dict(frame.field))
    if v.witness is not None:
        f, g = v.witness
        doc["witness_check"] = {
            "measurement_gap": float(np.linalg.norm(np.abs(analysis(frame, f)) - np.abs(analysis(frame, g)))),
            "distance": quotient_distance(f, g, frame.field),
        }
    _report(args, doc)
    _say(args, f"verdict: {v.kind}")
    return {"yes": EXIT_OK, "no": EXIT_NO, "heuristic_yes": EXIT_HEURISTIC}[v.kind]


def _random_pairs(rng, n, M, field):
    cplx = field is ScalarField.COMPLEX
    for _ in range(n):
        f = rng.standard_normal(M) + (1j * rng.standard_normal(M) if cplx else 0)
        g = rng.standard_normal(M) + (1j * rng.standard_normal(M) if cplx else 0)
        f = f / np.linalg.norm(f)
        g = g / np.linalg.norm(g) * rng.uniform()
        yield f, g


def cmd_lipschitz(args) -> int:
    frame = _load(args.frame)
    ss = np.random.SeedSequence(args.seed)
    s_opt, s_ver = ss.spawn(2)
    gain = st.min_lifted_gain(frame, restarts=args.restarts, seed=s_opt)
    doc = {
        "c": gain.c,
        "minimizer": [encode_vector(r, frame.field) for r in gain.minimizer.matrix],
        "restarts": args.restarts,
        "grid_c": gain.grid_c,
        "grid_agrees": gain.grid_agrees,
    }
    if gain.c < args.c_tol:
        doc["stable"] = False
        _report(args, doc)
        _say(args, f"c = {gain.c:.3e}: not certifiably stable")
        return EXIT_NO
    C = st.lipschitz_constant(frame, gain.c)
    rng = np.random.default_rng(s_ver)
    passed = 0
    worst = 0.0
    for f, g in _random_pairs(rng, args.pairs, frame.M, frame.field):
        d = quotient_distance(f, g, frame.field)
        gap = float(np.linalg.norm(np.abs(analysis(frame, f)) - np.abs(analysis(frame, g))))
        ok = d <= C * gap * (1 + 1e-12) + 1e-12
        passed += ok
        if gap > 0:
            worst = max(worst, d / (C * gap))
    doc.update({"stable": True, "C": C, "pairs": args.pairs, "pass_rate": passed / args.pairs, "worst_ratio": worst})
    _report(args, doc)
    _say(args, f"c = {gain.c:.6g}, C = {C:.6g}, pass rate {passed}/{args.pairs}")
    return EXIT_OK if passed == args.pairs else EXIT_NO


def _generator(args):
    if args.generator == "onb":
        return onb_frame()
    if args.generator == "sinc":
        return sinc_frame()
    return st.default_riesz(args.riesz_eps, args.riesz_blocks, seed=args.seed)


def cmd_witness(args) -> int:
    if not args.delta > 0 or args.N < 1:
        raise InputError("need delta > 0 and N >= 1")
    gen = _generator(args)
    try:
        w = ins.build_witness(gen, args.delta, args.N, budget=args.budget)
    except RuntimeError as exc:
        _say(args, f"budget exhausted: {exc}")
        return EXIT_BUDGET
    lem = w.lemma
    ok = (
        w.certified
        and abs(w.distance - 2.0) <= 1e-9
        and abs(w.norm_f - math.sqrt(2)) <= 1e-9
        and abs(w.norm_g - math.sqrt(2)) <= 1e-9
    )
    doc = {
        "generator": gen.name,
        "delta": w.delta,
        "eps": w.eps,
        "N": w.N,
        "k": w.k,
        "m": w.m,
        "mode": w.mode,
        "lemma": {"proj_sq": lem.proj_sq, "head_sum": lem.head_sum, "tail_bound": lem.tail_bound,
                  "certified_sum": lem.certified_sum},
        "gap_value": w.gap_value,
        "gap_tail_bound": w.gap_tail_bound,
        "gap_bound": w.gap_bound,
        "distance": w.distance,
        "norm_f": w.norm_f,
        "norm_g": w.norm_g,
        "psi_ref": w.psi_ref,
        "verified": ok,
    }
    if w.f is not None:
        doc["window"] = list(w.window)
        doc["f"] = encode_vector(w.f, gen.field)
        doc["g"] = encode_vector(w.g, gen.field)
    _report(args, doc)
    _say(args, f"k={w.k} m={w.m} gap <= {w.gap_bound:.3e} distance {w.distance:.12g}")
    return EXIT_OK if ok else EXIT_NO


TABLE_HEADER = "m,dist,gap,gap_tail,ratio,log2_incr"


def cmd_sinc_table(args) -> int:
    if args.m_max < 2:
        raise InputError("m_max >= 2 required for increments")
    try:
        rows = ins.growth_table(args.m_max, args.window)
    except ValueError as exc:
        _say(args, str(exc))
        return EXIT_BUDGET
    ok = True
    buf = io.StringIO()
    buf.write(TABLE_HEADER + "\n")
    for r in rows:
        ok &= r.gap**2 + r.gap_tail <= ins.gap_upper_bound_sq(r.m)
        ok &= r.ratio >= ins.ratio_lower_bound(r.m)
        incr = "" if r.log2_incr is None else repr(r.log2_incr)
        buf.write(f"{r.m},{r.dist!r},{r.gap!r},{r.gap_tail!r},{r.ratio!r},{incr}\n")
    _emit(args, buf.getvalue())
    _say(args, f"{len(rows)} rows, checks {'passed' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_NO


HOLDER_DEFAULTS = {
    "gamma": [1.5, 2.0, 4.0],
    "R": 1.0,
    "riesz_eps": 0.1,
    "m_max": 6,
    "field": "real",
    "trials": 500,
    "lipschitz_trials": 2000,
    "close_fraction": 0.5,
}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _holder_config(path) -> dict:
    cfg = dict(HOLDER_DEFAULTS)
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: {exc}") from None
        if not isinstance(user, dict):
            raise InputError("config must be a JSON object")
        unknown = set(user) - set(cfg)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    g = cfg["gamma"]
    cfg["gamma"] = [g] if isinstance(g, (int, float)) else g
    checks = [
        (lambda: all(float(x) > 1 for x in cfg["gamma"]), "every gamma must exceed 1"),
        (lambda: float(cfg["R"]) > 0, "R must be positive"),
        (lambda: 0 < float(cfg["riesz_eps"]) < 1, "riesz_eps must lie in (0, 1)"),
        (lambda: _is_int(cfg["m_max"]) and 1 <= cfg["m_max"] <= 12, "m_max must be an integer in 1..12"),
        (lambda: cfg["field"] in ("real", "complex"), "field must be real or complex"),
        (lambda: _is_int(cfg["trials"]) and cfg["trials"] > 0, "trials must be a positive integer"),
        (lambda: _is_int(cfg["lipschitz_trials"]) and cfg["lipschitz_trials"] > 0, "lipschitz_trials must be a positive integer"),
        (lambda: 0 <= float(cfg["close_fraction"]) <= 1, "close_fraction must lie in [0, 1]"),
    ]
    for check, msg in checks:
        try:
            ok = check()
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise InputError(f"invalid config: {msg}")
    return cfg


def holder_run(cfg: dict, seed) -> dict:
    """Riesz chain, sampled ball pairs and violation counts for each gamma."""
    field = ScalarField(cfg["field"])
    s_riesz, s_chain, s_pairs = np.random.SeedSequence(seed).spawn(3)
    gen = st.default_riesz(cfg["riesz_eps"], cfg["m_max"], seed=s_riesz, field=field)
    setup = st.riesz_chain(gen, cfg["gamma"][0], cfg["R"], trials=cfg["lipschitz_trials"], seed=s_chain)
    out = {"B": gen.B, "A": gen.A, "G_raw": setup.raw_G, "G": setup.chain.G, "runs": []}
    for gamma, child in zip(cfg["gamma"], s_pairs.spawn(len(cfg["gamma"]))):
        gamma = float(gamma)
        chain = st.coordinate_chain(gen.width, gen.m_max, setup.raw_G, gamma, cfg["R"])
        K = st.holder_constants(gen.B, cfg["R"], gamma, float(chain.G[0]))
        rng = np.random.default_rng(child)
        violations = 0
        worst = 0.0
        used = 0
        for _ in range(cfg["trials"]):
            f = st.sample_ball(chain, rng, field)
            if rng.uniform() < cfg["close_fraction"]:
                h = st.sample_ball(chain, rng, field, scale=np.linalg.norm(f) * 10 ** rng.uniform(-6, 0))
                g = f + h
                if not st.ball_membership(g, chain):
                    g = st.sample_ball(chain, rng, field)
            else:
                g = st.sample_ball(chain, rng, field)
            r = st.holder_check(f, g, setup.frame, chain, K)
            used += 1
            violations += r.violation
            if r.rhs > 0:
                worst = max(worst, r.lhs / r.rhs)
        out["runs"].append({
            "gamma": gamma,
            "constants": {"C1": K.C1, "C2": K.C2, "Cprime": K.Cprime, "C": K.C},
            "pairs": used,
            "violations": violations,
            "worst_ratio": worst,
        })
    return out


def cmd_holder(args) -> int:
    cfg = _holder_config(args.config)
    res = holder_run(cfg, args.seed)
    doc = {"config": cfg}
    doc.update(res)
    total = sum(r["violations"] for r in res["runs"])
    doc["violations"] = total
    _report(args, doc)
    _say(args, f"{total} violations")
    return EXIT_OK if total == 0 else EXIT_NO


def cmd_perturb(args) -> int:
    frame = _load(args.frame)
    if not args.epsilon > 0:
        raise InputError("epsilon must be positive")
    res = perturb_destroy_pr(frame, args.epsilon)
    doc = {
        "epsilon": res.eps,
        "k": res.k,
        "difference_sq": res.difference_sq,
        "lower_frame_bound": res.lower_bound,
        "original_bounds": list(frame_bounds(frame)),
        "degraded": res.degraded,
        "cp_failure": {
            "subset": list(range(1, res.k + 1)),
            "u": encode_vector(res.u, frame.field),
            "v": encode_vector(res.v, frame.field),
            "rank_inside": res.rank_inside,
            "rank_outside": res.rank_outside,
            "ambient_dim": frame.M + 1,
            "certified": res.certified,
        },
        "frame": dump_frame(res.frame),
    }
    if args.frame_out:
        atomic_write(args.frame_out, dumps(_clean(dump_frame(res.frame))))
    _report(args, doc)
    _say(args, f"k={res.k} diff={res.difference_sq:.3e} certified={res.certified}")
    return EXIT_OK if res.certified and res.difference_sq < args.epsilon else EXIT_NO


# -- parser --------------------------------------------------------------------


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")

    p = argparse.ArgumentParser(prog="phasestab", description="Phase retrieval stability experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("pr-check", parents=[common], help="phase-retrieval verdict for a frame file")
    s.add_argument("frame")
    s.add_argument("--method", choices=["auto", "complement", "lifted"], default="auto")
    s.add_argument("--restarts", type=int, default=16)
    s.set_defaults(func=cmd_pr_check)

    s = sub.add_parser("lipschitz", parents=[common], help="lifted gain c and Lipschitz constant")
    s.add_argument("frame")
    s.add_argument("--restarts", type=int, default=16)
    s.add_argument("--pairs", type=int, default=1000)
    s.add_argument("--c-tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_lipschitz)

    s = sub.add_parser("witness", parents=[common], help="unstable pair for a countable frame")
    s.add_argument("--generator", choices=["onb", "sinc", "riesz"], required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--budget", type=int, default=10**9, help="largest frame index searched")
    s.add_argument("--riesz-eps", type=float, default=0.1)
    s.add_argument("--riesz-blocks", type=int, default=6)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("sinc-table", parents=[common], help="growth table of the binomial sinc pairs")
    s.add_argument("--m-max", type=int, default=8)
    s.add_argument("--window", type=int, default=None)
    s.set_defaults(func=cmd_sinc_table)

    s = sub.add_parser("holder", parents=[common], help="Hoelder bound on a Riesz subspace chain")
    s.add_argument("--config", help="JSON file overriding the defaults")
    s.set_defaults(func=cmd_holder)

    s = sub.add_parser("perturb", parents=[common], help="small perturbation that breaks phase retrieval")
    s.add_argument("--frame", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--frame-out", help="also write the perturbed frame file here")
    s.set_defaults(func=cmd_perturb)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"phasestab {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
