"""Command line: ``fracopt solve|verify|lemma-check|catalog``.

Exit codes: 0 success, 1 error or failed check, 2 solve finished INDETERMINATE.
``FRACOPT_SEED`` supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, kernel, oracle, reduction
from .apps import catalog_get, catalog_list
from .errors import FracoptError, UnknownEntry
from .files import ProblemFile, atomic_write, canonical_dumps, load_problem, save_problem
from .functional import functional_value
from .measures import degenerate

EXIT_OK, EXIT_ERROR, EXIT_INDETERMINATE = 0, 1, 2


def _seed(args, pf: ProblemFile):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FRACOPT_SEED")
    if env not in (None, ""):
        return int(env)
    return pf.config.get("seed")


def build_report(pf: ProblemFile, cfg: reduction.SolveConfig, rep: reduction.SolveReport, wall: float) -> dict:
    return {
        "tool": {"name": "fracopt", "version": __version__, "kernel": kernel.BACKEND},
        "problem": pf.problem.name,
        "problem_hash": pf.hash(),
        "seed": cfg.seed,
        "wall_time_s": wall,
        "config": cfg.to_dict(),
        "sign_check": rep.sign_check.to_dict() if rep.sign_check is not None else None,
        "result": rep.to_dict(),
    }


def _fmt_point(p):
    return "(" + ", ".join(f"{x:.10g}" for x in p) + ")"


def format_text(doc: dict) -> str:
    res = doc["result"]
    lines = [
        f"problem        {doc['problem']} [{doc['problem_hash'][:12]}]",
        f"classification {res['classification']} ({res['direction']})",
        f"best value     {res['best_value']!r}",
        f"best alpha     {_fmt_point(res['best_alpha'])}",
        f"best u         {_fmt_point(res['best_u'])}",
        f"evaluations    {res['evaluations']} (skipped: sign {res['skipped_sign']}, failure {res['skipped_failure']})",
    ]
    cert = res.get("certificate")
    if cert:
        lines.append(f"certificate    eps={cert['epsilon']:g} value={cert['value']!r} sup_estimate={cert['sup_estimate']!r}")
    wit = res.get("witness")
    if wit:
        vals = ", ".join(f"{e['value']:.6g}" for e in wit["sequence"])
        lines.append(f"witness        {vals}")
    for note in res.get("notes", []):
        lines.append(f"note           {note}")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    pf = load_problem(args.path)
    cfg = pf.solve_config(
        direction=args.direction,
        epsilon=args.epsilon,
        seed=_seed(args, pf),
        grid_per_dim=args.grid,
        multistarts=args.multistarts,
    )
    t0 = time.perf_counter()
    rep = reduction.optimize(pf.problem, cfg)
    doc = build_report(pf, cfg, rep, time.perf_counter() - t0)
    if args.out:
        atomic_write(args.out, canonical_dumps(doc) + "\n")
    if args.format == "json":
        print(canonical_dumps(doc))
    else:
        print(format_text(doc))
    return EXIT_INDETERMINATE if rep.classification == reduction.INDETERMINATE else EXIT_OK


def run_verification(pf: ProblemFile, result: dict, cfg: reduction.SolveConfig, samples: int = 10_000, tol: float = 1e-9):
    """Independent checks of a solve result; returns ``[(name, passed, detail), ...]``."""
    p = pf.problem
    checks = []
    cls = result["classification"]
    direction = result["direction"]
    s = 1.0 if direction == "max" else -1.0
    alpha, u, value = tuple(result["best_alpha"]), tuple(result["best_u"]), float(result["best_value"])

    c = reduction.test_function(p, alpha, u, cfg.zero_tol)
    checks.append(("reported value equals C(alpha*, u*)", abs(c - value) <= tol, f"C={c!r} reported={value!r}"))
    fv = functional_value(p, alpha, degenerate(p.U, u), cfg.zero_tol)
    checks.append(("degenerate measure at u* reproduces the value", abs(fv - value) <= tol, f"I={fv!r}"))

    if cls == reduction.UNBOUNDED:
        wit = result.get("witness") or {"sequence": []}
        seq = [(tuple(e["alpha"]), tuple(e["u"]), float(e["value"])) for e in wit["sequence"]]
        match = all(abs(reduction.test_function(p, a, uu, cfg.zero_tol) - v) <= tol * max(1.0, abs(v)) for a, uu, v in seq)
        checks.append(("witness values equal C at their points", bool(seq) and match, f"{len(seq)} entries"))
        ok = reduction.DivergenceWitness(seq, direction).is_valid(cfg.divergence_threshold)
        checks.append(("witness strictly monotone past threshold", ok, f"last={seq[-1][2] if seq else None!r}"))
        return checks
    if cls == reduction.INDETERMINATE:
        checks.append(("classification decided", False, "INDETERMINATE results cannot be verified"))
        return checks

    target = value
    if cls == reduction.EPSILON_OPTIMAL:
        cert = result.get("certificate")
        if not cert:
            checks.append(("certificate present", False, "missing"))
            return checks
        target = float(cert["sup_estimate"])
        gap = s * (target - float(cert["value"]))
        checks.append(("certificate within epsilon", -tol <= gap < float(cert["epsilon"]), f"gap={gap!r}"))

    if p.U.kind == "finite":
        inst = oracle.instance_from_problem(p, alpha, direction)
        ov, _ = oracle.simplex_lfp_value(inst, seed=cfg.seed)
        checks.append(("simplex oracle agrees at alpha*", abs(ov - value) <= tol, f"oracle={ov!r}"))
        if p.S.dimension and any(lo < hi for lo, hi in zip(p.S.lower, p.S.upper)):
            rng = np.random.default_rng(cfg.seed)
            worst = -math.inf
            for a in p.S.sample(rng, 50):
                v, _ = oracle.simplex_lfp_value(oracle.instance_from_problem(p, tuple(a), direction), n_random=2000, seed=cfg.seed)
                worst = max(worst, s * (v - target))
            checks.append(("no sampled alpha beats the optimum (oracle)", worst <= tol, f"max excess={worst!r}"))
    else:
        vals, _ = oracle.sample_mixture_values(p, samples, 5, cfg.seed, cfg.truncation_bound)
        excess = float(np.max(s * (vals - target))) if len(vals) else -math.inf
        checks.append((f"{len(vals)} random mixtures dominated", excess <= tol, f"max excess={excess!r}"))
    return checks


def cmd_verify(args) -> int:
    pf = load_problem(args.path)
    cfg = pf.solve_config(seed=_seed(args, pf))
    if args.report:
        with open(args.report, encoding="utf-8") as fh:
            result = json.load(fh)["result"]
    else:
        result = reduction.optimize(pf.problem, cfg).to_dict()
    checks = run_verification(pf, result, cfg, args.samples, args.tol)
    for name, passed, detail in checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    ok = all(passed for _, passed, _ in checks)
    print("verify: " + ("pass" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_ERROR


def cmd_lemma_check(args) -> int:
    pf = load_problem(args.path)
    cfg = pf.solve_config(seed=_seed(args, pf))
    rep1 = oracle.check_lemma1(pf.problem, args.alphas, args.samples, args.atoms, cfg.seed, args.tol, cfg.truncation_bound)
    print("lemma1 " + json.dumps(rep1.to_dict(), sort_keys=True))
    ok = rep1.verdict == "holds"
    sol = reduction.optimize(pf.problem, cfg)
    if sol.classification in (reduction.ATTAINED, reduction.EPSILON_OPTIMAL):
        deg, mix = oracle.lemma2_sups(pf.problem, sol.direction, seed=cfg.seed, truncation=cfg.truncation_bound)
        holds = oracle.check_lemma2_sup(pf.problem, cfg, args.tol)
        print("lemma2 " + json.dumps({"degenerate_extremum": deg, "mixture_extremum": mix, "holds": holds}, sort_keys=True))
        ok = ok and holds
    else:
        print(f"lemma2 skipped (classification {sol.classification})")
    return EXIT_OK if ok else EXIT_ERROR


def cmd_catalog(args) -> int:
    if args.name is None:
        for name in catalog_list():
            print(name)
        return EXIT_OK
    entry = catalog_get(args.name)
    pf = ProblemFile(entry.problem)
    if args.export:
        save_problem(pf, args.export)
        print(f"wrote {args.export} [{pf.hash()[:12]}]")
    else:
        print(pf.dumps(), end="")
        print(f"# {entry.notes}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fracopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("path")
    p.add_argument("--direction", choices=["max", "min"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=int, help="grid points per dimension")
    p.add_argument("--multistarts", type=int)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution against brute-force oracles")
    p.add_argument("path")
    p.add_argument("--report", help="report file to check (default: solve afresh)")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lemma-check", help="sample the mixture bounds")
    p.add_argument("path")
    p.add_argument("--samples", type=int, default=100, help="mixtures per sampled alpha")
    p.add_argument("--alphas", type=int, default=100)
    p.add_argument("--atoms", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_lemma_check)

    p = sub.add_parser("catalog", help="list or export catalog problems")
    p.add_argument("name", nargs="?")
    p.add_argument("--export", metavar="PATH")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownEntry as exc:
        print(f"fracopt: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (FracoptError, OSError, ValueError) as exc:
        print(f"fracopt: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
