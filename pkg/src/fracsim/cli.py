"""Command-line interface.

Subcommands: compute, exact, compat, topk, align, noise, pearson, bench.
Every command is deterministic given identical flags, inputs, and seed.
Exit codes: 0 success, 1 usage/validation error, 2 iteration-cap exit,
3 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import subprocess
import sys
import time
from pathlib import Path

from . import _kernels as K
from .analysis import pearson
from .compat import run_rolesim, run_simrank
from .config import FSimConfig
from .engine import FSimEngine
from .errors import (ConfigError, FracsimError, GraphParseError,
                     ResourceBudgetError, ValidationError)
from .exact import exact_maximal_relation
from .graph import inject_noise, load_graph, write_graph
from .scores import read_scores, write_scores

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_RESOURCE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_pair(args):
    t0 = time.perf_counter()
    g1 = load_graph(args.g1, args.l1)
    g2 = load_graph(args.g2, args.l2) if args.g2 else g1
    return g1, g2, time.perf_counter() - t0


def _write_manifest(out_path, manifest: dict) -> str:
    manifest_path = str(out_path) + ".manifest.tsv"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for key, value in manifest.items():
            fh.write(f"{key}\t{value}\n")
    return manifest_path


def _compute_flags(p: argparse.ArgumentParser, pair: bool = True):
    p.add_argument("--g1", required=True, help="edge TSV of the first graph")
    p.add_argument("--l1", required=True, help="label TSV of the first graph")
    if pair:
        p.add_argument("--g2", help="edge TSV of the second graph "
                                    "(default: first graph)")
        p.add_argument("--l2", help="label TSV of the second graph")
    p.add_argument("--variant", default="s", choices=["s", "dp", "b", "bj"])
    p.add_argument("--wplus", type=float, default=0.4)
    p.add_argument("--wminus", type=float, default=0.4)
    p.add_argument("--label-fn", default="jw",
                   choices=["indicator", "edit", "jw"])
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--conv", default="abs", choices=["abs", "rel"])
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--ub", action="store_true",
                   help="enable upper-bound pruning")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--matching", default="greedy",
                   choices=["greedy", "exact-small"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-candidates", type=int, default=20_000_000)


def _config_from(args) -> FSimConfig:
    return FSimConfig(
        variant=args.variant, w_plus=args.wplus, w_minus=args.wminus,
        theta=args.theta, epsilon=args.epsilon,
        convergence_mode="absolute" if args.conv == "abs" else "relative",
        max_iterations=args.max_iters, label_fn=args.label_fn,
        ub_enabled=args.ub, alpha=args.alpha, beta=args.beta,
        matching_mode=args.matching, workers=args.workers,
        max_candidates=args.max_candidates)


def _run_compute(args, out_path) -> int:
    cfg = _config_from(args)
    g1, g2, load_s = _load_pair(args)
    t0 = time.perf_counter()
    engine = FSimEngine(g1, g2, cfg)
    init_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    table, report = engine.run()
    iterate_s = time.perf_counter() - t0
    manifest = {
        "command": "compute",
        "variant": cfg.variant, "w_plus": cfg.w_plus, "w_minus": cfg.w_minus,
        "label_fn": cfg.label_fn.kind, "theta": cfg.theta,
        "epsilon": cfg.epsilon, "convergence_mode": cfg.convergence_mode,
        "ub_enabled": cfg.ub_enabled, "alpha": cfg.alpha, "beta": cfg.beta,
        "matching_mode": cfg.matching_mode, "workers": cfg.workers,
        "backend": K.BACKEND,
        "digest_g1": _sha256(args.g1), "digest_l1": _sha256(args.l1),
        "digest_g2": _sha256(args.g2) if args.g2 else _sha256(args.g1),
        "digest_l2": _sha256(args.l2) if args.l2 else _sha256(args.l1),
        "nodes1": g1.n_nodes, "nodes2": g2.n_nodes,
        "candidate_pairs": engine.candidate_count,
        "iterations": report.iterations,
        "converged": str(report.converged).lower(),
        "load_seconds": f"{load_s:.6f}",
        "init_seconds": f"{init_s:.6f}",
        "iterate_seconds": f"{iterate_s:.6f}",
    }
    t0 = time.perf_counter()
    manifest_path = _write_manifest(out_path, manifest)
    meta = {"manifest": manifest_path, **manifest}
    write_scores(out_path, table, g1.ext_ids, g2.ext_ids, meta)
    write_s = time.perf_counter() - t0
    print(f"wrote {out_path}: {len(table)} pairs, "
          f"{report.iterations} iterations, converged={report.converged}, "
          f"{iterate_s + init_s + load_s + write_s:.3f}s total")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_compute(args) -> int:
    return _run_compute(args, args.out)


def _cmd_exact(args) -> int:
    g1, g2, _ = _load_pair(args)
    rel = exact_maximal_relation(g1, g2, args.variant)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# command: exact\n# variant: {args.variant}\n"
                 f"# pairs: {len(rel)}\n")
        for u, v in rel.sorted_pairs():
            fh.write(f"{g1.ext_ids[u]}\t{g2.ext_ids[v]}\n")
    print(f"wrote {args.out}: {len(rel)} pairs in the maximal "
          f"{args.variant}-simulation")
    return EXIT_OK


def _cmd_compat(args) -> int:
    g = load_graph(args.graph, args.labels)
    t0 = time.perf_counter()
    if args.kind == "simrank":
        table, report = run_simrank(g, decay=args.decay,
                                    epsilon=args.epsilon,
                                    max_iters=args.max_iters,
                                    workers=args.workers)
    else:
        table, report = run_rolesim(g, decay=args.decay,
                                    normalizer=args.normalizer,
                                    epsilon=args.epsilon,
                                    max_iters=args.max_iters,
                                    workers=args.workers)
    elapsed = time.perf_counter() - t0
    manifest = {
        "command": f"compat {args.kind}", "decay": args.decay,
        "normalizer": args.normalizer if args.kind == "rolesim" else "",
        "epsilon": args.epsilon, "workers": args.workers,
        "backend": K.BACKEND,
        "digest_graph": _sha256(args.graph),
        "digest_labels": _sha256(args.labels),
        "iterations": report.iterations,
        "converged": str(report.converged).lower(),
        "iterate_seconds": f"{elapsed:.6f}",
    }
    manifest_path = _write_manifest(args.out, manifest)
    write_scores(args.out, table, g.ext_ids, g.ext_ids,
                 {"manifest": manifest_path, **manifest})
    print(f"wrote {args.out}: {len(table)} pairs, "
          f"{report.iterations} iterations, converged={report.converged}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_topk(args) -> int:
    rows, _ = read_scores(args.scores)
    mine = [(v, s) for u, v, s in rows if u == args.node]
    if not mine:
        raise ValidationError(
            f"node {args.node!r} has no maintained pairs in {args.scores}")
    # rows are written sorted by internal ids, so a stable sort keeps the
    # documented tie-break (smaller internal id first)
    mine.sort(key=lambda t: -t[1])
    for v, s in mine[:args.k]:
        print(f"{v}\t{s:.6f}")
    return EXIT_OK


def _read_truth(path) -> list[tuple[str, str]]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise GraphParseError(
                    f"expected 2 tab-separated fields, got {len(fields)}",
                    line_no)
            out.append((fields[0], fields[1]))
    return out


def _cmd_align(args) -> int:
    rows, meta = read_scores(args.scores)
    truth = dict(_read_truth(args.truth))
    by_u: dict[str, list[tuple[str, float]]] = {}
    for u, v, s in rows:
        by_u.setdefault(u, []).append((v, s))
    n1 = int(meta.get("nodes1", len(by_u)))
    known = set(by_u)
    unknown = [u for u in truth if u not in known]
    if unknown and "nodes1" not in meta:
        raise ValidationError(
            f"truth references nodes absent from the score file: "
            f"{sorted(unknown)[:5]}")
    total = 0.0
    hits = 0
    for u, cands in by_u.items():
        best = max(s for _, s in cands)
        argmax = [v for v, s in cands if s == best]
        if u in truth and truth[u] in argmax:
            hits += 1
            p = 1.0 / len(argmax)
            total += 2.0 * p / (p + 1.0)
    f1 = total / n1 if n1 else 0.0
    print(f"F1\t{f1:.6f}")
    print(f"aligned_nodes\t{hits}")
    print(f"truth_size\t{len(truth)}")
    return EXIT_OK


def _cmd_noise(args) -> int:
    g = load_graph(args.graph, args.labels)
    noisy = inject_noise(g, args.edge_add, args.edge_del, args.label_err,
                         args.seed)
    write_graph(noisy, args.out_graph, args.out_labels)
    print(f"wrote {args.out_graph} ({noisy.n_edges} edges) and "
          f"{args.out_labels} ({noisy.n_nodes} nodes)")
    return EXIT_OK


def _cmd_pearson(args) -> int:
    rows_a, _ = read_scores(args.a)
    rows_b, _ = read_scores(args.b)
    map_a = {(u, v): s for u, v, s in rows_a}
    map_b = {(u, v): s for u, v, s in rows_b}
    common = sorted(set(map_a) & set(map_b))
    if len(common) < 2:
        raise ValidationError(
            f"only {len(common)} common pairs between the two score files")
    coeff = pearson([map_a[k] for k in common], [map_b[k] for k in common])
    print(f"pearson\t{coeff:.6f}")
    print(f"common_pairs\t{len(common)}")
    return EXIT_OK


def _bench_rows(args) -> list[tuple[str, int, int, float]]:
    """(setting, candidate pairs, iterations, seconds) per sweep value."""
    g1, g2, _ = _load_pair(args)
    values = args.values.split(",") if args.values else None

    def run_once(cfg) -> tuple[int, int, float]:
        engine = FSimEngine(g1, g2, cfg)
        t0 = time.perf_counter()
        _, report = engine.run()
        return engine.candidate_count, report.iterations, \
            time.perf_counter() - t0

    rows = []
    if args.sweep == "theta":
        thetas = [float(x) for x in values] if values else \
            [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        run_once(_config_from(args))  # warm-up excluded from timings
        for theta in thetas:
            cfg = FSimConfig(**{**_config_kwargs(args), "theta": theta})
            rows.append((f"theta={theta}",) + run_once(cfg))
    elif args.sweep == "workers":
        counts = [int(x) for x in values] if values else [1, 2, 4, 8]
        run_once(_config_from(args))
        for w in counts:
            cfg = FSimConfig(**{**_config_kwargs(args), "workers": w})
            rows.append((f"workers={w}",) + run_once(cfg))
    else:  # backend sweep: subprocess per backend so the env flag applies
        for backend in (values or ["numba", "numpy"]):
            secs, cand, iters = _compute_in_subprocess(args, backend)
            rows.append((f"backend={backend}", cand, iters, secs))
    return rows


def _config_kwargs(args) -> dict:
    cfg = _config_from(args)
    return dict(
        variant=cfg.variant, w_plus=cfg.w_plus, w_minus=cfg.w_minus,
        theta=cfg.theta, epsilon=cfg.epsilon,
        convergence_mode=cfg.convergence_mode,
        max_iterations=cfg.max_iterations, label_fn=cfg.label_fn,
        ub_enabled=cfg.ub_enabled, alpha=cfg.alpha, beta=cfg.beta,
        matching_mode=cfg.matching_mode, workers=cfg.workers,
        max_candidates=cfg.max_candidates)


def _compute_in_subprocess(args, backend: str) -> tuple[float, int, int]:
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "scores.tsv"
        cmd = [sys.executable, "-m", "fracsim", "compute",
               "--g1", args.g1, "--l1", args.l1,
               "--variant", args.variant, "--wplus", str(args.wplus),
               "--wminus", str(args.wminus), "--label-fn", args.label_fn,
               "--theta", str(args.theta), "--epsilon", str(args.epsilon),
               "--matching", args.matching, "--workers", str(args.workers),
               "--out", str(out)]
        if args.g2:
            cmd += ["--g2", args.g2, "--l2", args.l2]
        if args.max_iters is not None:
            cmd += ["--max-iters", str(args.max_iters)]
        env = dict(os.environ, FRACSIM_BACKEND=backend)
        subprocess.run(cmd, env=env, check=False, capture_output=True)
        # timed run after the warm-up (numba compile cache now hot)
        proc = subprocess.run(cmd, env=env, check=False, capture_output=True)
        if proc.returncode not in (EXIT_OK, EXIT_NOT_CONVERGED):
            raise FracsimError(
                f"backend {backend} run failed: {proc.stderr.decode()}")
        _, meta = read_scores(out)
        return (float(meta["iterate_seconds"]), int(meta["candidate_pairs"]),
                int(meta["iterations"]))


def _cmd_bench(args) -> int:
    rows = _bench_rows(args)
    lines = ["setting\tcandidate_pairs\titerations\tseconds"]
    lines += [f"{s}\t{c}\t{i}\t{t:.4f}" for s, c, i, t in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracsim",
                     description="Fractional simulation scores between "
                                 "labeled directed graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="iterate scores to convergence")
    _compute_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_compute)

    p = sub.add_parser("exact", help="exact maximal simulation relation")
    p.add_argument("--g1", required=True)
    p.add_argument("--l1", required=True)
    p.add_argument("--g2")
    p.add_argument("--l2")
    p.add_argument("--variant", default="s", choices=["s", "dp", "b", "bj"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_exact)

    p = sub.add_parser("compat", help="SimRank / RoleSim presets")
    p.add_argument("kind", choices=["simrank", "rolesim"])
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--decay", type=float, default=0.8)
    p.add_argument("--normalizer", default="rop", choices=["rop", "max"])
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_compat)

    p = sub.add_parser("topk", help="top-k most similar nodes")
    p.add_argument("--scores", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(fn=_cmd_topk)

    p = sub.add_parser("align", help="argmax alignment F1 against truth")
    p.add_argument("--scores", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(fn=_cmd_align)

    p = sub.add_parser("noise", help="inject seeded structural/label noise")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--edge-add", type=float, default=0.0)
    p.add_argument("--edge-del", type=float, default=0.0)
    p.add_argument("--label-err", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(fn=_cmd_noise)

    p = sub.add_parser("pearson", help="correlation of two score files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(fn=_cmd_pearson)

    p = sub.add_parser("bench", help="theta / worker / backend sweeps")
    _compute_flags(p)
    p.add_argument("--sweep", default="theta",
                   choices=["theta", "workers", "backend"])
    p.add_argument("--values", help="comma-separated sweep values")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValidationError, GraphParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceBudgetError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
