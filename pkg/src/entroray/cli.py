"""Command-line surface.

Subcommands: ``search`` (one seeded run), ``batch`` (jobs file with a
master seed), ``score`` (Ingleton/violation/polymatroid report for a
vector), ``decompose`` (tight/modular split), ``grid`` (pyramid grids),
``hyperplanes`` (null-space hyperplanes through given rays), ``verify``
(recompute the bundled fixture anchors).

Summary output is machine-parseable ``key=value`` pairs.  Exit codes:
0 success, 1 I/O or data-file failure, 2 argument errors, 3 undefined
ray distance.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import data
from .core import AlphabetSpec, EntropyVector, JointPmf, entropy_vector
from .errors import (EntrorayError, InvalidArgumentError, ParseError,
                     UndefinedDistanceError)
from .geometry import (RaySet, hyperplane_through, hyperplanes_leave_one_out,
                       ingleton_delta_all_pairs, ingleton_score, is_polymatroid,
                       normalized_distance, tighten, violation_index)
from .inner_bounds import generate_grid
from .search import (SearchConfig, SearchJob, SearchOutcome, batch_run,
                     derive_centroid_start, run_search)

EXIT_OK = 0
EXIT_IO = 1
EXIT_ARGS = 2
EXIT_UNDEFINED = 3

_FMT = "{:.15g}".format


def _resolve_vector(spec_text: str) -> EntropyVector:
    """fc | vamos | <ray-file>:<label> | comma-separated canonical reals."""
    if spec_text == "fc":
        return data.load_fixture_rays("reference_points").get("fc")
    if spec_text == "vamos":
        return data.pyramid_rays()[0]
    if "," in spec_text:
        vals = [float(t) for t in spec_text.split(",")]
        return EntropyVector.from_values(vals)
    if ":" in spec_text:
        path, _, label = spec_text.rpartition(":")
        return data.load_ray_table(path).get(label)
    raise InvalidArgumentError(
        f"cannot interpret vector {spec_text!r}: use fc, vamos, file:LABEL, "
        "or 15 comma-separated values")


def _resolve_start(text: str, spec: AlphabetSpec) -> JointPmf:
    """uniform | centroid[:SEED] | <pmf-file>."""
    if text == "uniform":
        return JointPmf.uniform(spec)
    if text == "centroid" or text.startswith("centroid:"):
        if spec.n != 4:
            raise InvalidArgumentError("centroid start is defined for four variables")
        seed = int(text.split(":", 1)[1]) if ":" in text else 1
        _, base_rays = data.pyramid_rays()
        pmf, _ = derive_centroid_start(spec, base_rays, seed=seed)
        return pmf
    return data.load_sparse_pmf(text)


def _alphabet(text: str) -> AlphabetSpec:
    return AlphabetSpec(tuple(int(t) for t in text.split(",")))


def _config_from_args(args, target) -> SearchConfig:
    waypoints = None
    if args.waypoints:
        rows = data.load_ray_table(args.waypoints)
        wps = list(rows.rays)
        if target is not None and args.objective == "dnorm":
            wps.append(target)
        waypoints = tuple(wps)
    hyperplanes = None
    if args.hyperplanes:
        hyperplanes = tuple(p for _, p in
                            data.hyperplanes_from_rayset(data.load_ray_table(args.hyperplanes)))
    return SearchConfig(
        objective=args.objective,
        target=target if (args.objective == "dnorm" and waypoints is None) else None,
        delta=args.delta,
        max_accepted=args.L,
        max_rejected=args.M,
        epsilon=args.eps,
        seed=args.seed,
        waypoints=waypoints,
        hyperplanes=hyperplanes,
        eta=args.eta,
        trace_stride=args.trace_stride,
    )


def _summary(outcome: SearchOutcome) -> str:
    parts = [
        f"termination={outcome.termination}",
        f"accepted_moves={outcome.accepted_moves}",
        f"proposals={outcome.proposals}",
        f"final_objective={_FMT(outcome.final_objective)}",
    ]
    if outcome.final_dnorm is not None:
        parts.append(f"final_dnorm={_FMT(outcome.final_dnorm)}")
    if outcome.final_h.n == 4:
        parts.append(f"ingleton_34={_FMT(ingleton_score(outcome.final_h))}")
    parts.append(f"seed={outcome.config.seed}")
    return " ".join(parts)


def cmd_search(args) -> int:
    spec = _alphabet(args.alphabet)
    target = _resolve_vector(args.target) if args.target else None
    if args.objective == "dnorm" and target is None:
        raise InvalidArgumentError("--objective dnorm requires --target")
    start = _resolve_start(args.start, spec)
    cfg = _config_from_args(args, target)
    outcome = run_search(start, cfg)
    if args.out:
        data.write_run_records([outcome], args.out, starts={0: start})
    if args.trace:
        data.emit_trace_csv(outcome, args.trace)
    print(_summary(outcome))
    return EXIT_OK


def cmd_batch(args) -> int:
    jobs = []
    with open(args.jobs, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc}", args.jobs, lineno) from exc
            spec = AlphabetSpec(tuple(obj.get("alphabet", (2, 2, 2, 2))))
            objective = obj.get("objective", "dnorm")
            target = None
            if objective == "dnorm":
                t = obj["target"]
                target = (EntropyVector.from_values(t) if isinstance(t, list)
                          else _resolve_vector(t))
            cfg = SearchConfig(
                objective=objective,
                target=target,
                delta=float(obj.get("delta", 1e-6)),
                max_accepted=int(obj.get("L", 10**6)),
                max_rejected=int(obj.get("M", 10**5)),
                epsilon=float(obj.get("eps", 1.0)),
            )
            jobs.append(SearchJob(_resolve_start(obj.get("start", "uniform"), spec), cfg))
    results = batch_run(jobs, args.seed, parallelism=args.parallel)
    if args.out:
        starts = {k: j.start for k, j in enumerate(jobs)}
        data.write_run_records(results, args.out, master_seed=args.seed, starts=starts)
    failures = sum(1 for r in results if not isinstance(r, SearchOutcome))
    print(f"jobs={len(jobs)} failed={failures} master_seed={args.seed}")
    return EXIT_OK


def cmd_score(args) -> int:
    h = _resolve_vector(args.vector)
    if not np.any(h.values):
        raise InvalidArgumentError("zero vector has no scores")
    report = is_polymatroid(h)
    print(f"polymatroid={'true' if report else 'false'}")
    if not report:
        worst = min(report.violations, key=lambda kv: kv[1])
        print(f"worst_violation={worst[0]} slack={_FMT(worst[1])}")
    if h.n == 4:
        deltas = ingleton_delta_all_pairs(h)
        for (i, j), v in sorted(deltas.items()):
            print(f"delta_{i}{j}={_FMT(v)}")
        if h.joint > 0:
            for (i, j), v in sorted(deltas.items()):
                print(f"ingleton_{i}{j}={_FMT(v / h.joint)}")
        print(f"violation_index_34={_FMT(violation_index(h))}")
        print(f"min_delta={_FMT(min(deltas.values()))}")
    if report:
        h_mod, h_ti = tighten(h)
        print("h_mod=" + ",".join(_FMT(v) for v in h_mod.values))
        print("h_ti=" + ",".join(_FMT(v) for v in h_ti.values))
    return EXIT_OK


def cmd_decompose(args) -> int:
    h = _resolve_vector(args.vector)
    h_mod, h_ti = tighten(h)
    rs = RaySet(h.n, (h_mod, h_ti), ("mod", "ti"))
    if args.out:
        data.write_ray_table(rs, args.out)
    else:
        _print_ray_table(rs)
    if h.n == 4 and h_ti.joint > 0:
        print(f"tight_ingleton_34={_FMT(ingleton_score(h_ti))}", file=sys.stderr)
    return EXIT_OK


def _print_ray_table(rs: RaySet) -> None:
    print("label " + " ".join(data.canonical_columns(rs.n)))
    for lab, ray in rs:
        print(lab + " " + " ".join(_FMT(v) for v in ray.values))


def cmd_grid(args) -> int:
    if args.base:
        rows = data.load_ray_table(args.base)
        if args.vamos:
            apex = _resolve_vector(args.vamos)
            base = rows
        elif "vamos" in rows.labels:
            apex = rows.get("vamos")
            base = rows.subset([lab for lab in rows.labels if lab != "vamos"])
        else:
            raise InvalidArgumentError("--base file has no 'vamos' row; pass --vamos")
    else:
        apex, base = data.pyramid_rays()
        if args.vamos:
            apex = _resolve_vector(args.vamos)
    grid = generate_grid(apex, base, args.level)
    if args.out:
        data.write_ray_table(grid, args.out)
    else:
        _print_ray_table(grid)
    print(f"level={args.level} rays={len(grid)}", file=sys.stderr)
    return EXIT_OK


def cmd_hyperplanes(args) -> int:
    rays = data.load_ray_table(args.points)
    d = (1 << rays.n) - 1
    if len(rays) == d - 1:
        plane = hyperplane_through(rays.matrix())
        out = RaySet.from_arrays(rays.n, [plane.g], ["g"])
    elif len(rays) == d:
        planes = hyperplanes_leave_one_out(rays)
        out = RaySet.from_arrays(rays.n, [p.g for _, p in planes],
                                 [f"drop:{lab}" for lab, _ in planes])
    else:
        raise InvalidArgumentError(
            f"need {d - 1} rays (one hyperplane) or {d} rays (leave-one-out family), "
            f"got {len(rays)}")
    if args.out:
        data.write_ray_table(out, args.out)
    else:
        _print_ray_table(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    base = Path(args.fixtures) if args.fixtures else None
    checks = data.verify_fixtures(base, select=args.select or "")
    for c in checks:
        print(c.line())
    npass = sum(1 for c in checks if c.passed)
    nfail = sum(1 for c in checks if c.passed is False)
    nskip = sum(1 for c in checks if c.passed is None)
    print(f"pass={npass} fail={nfail} skip={nskip}")
    return EXIT_OK if nfail == 0 else EXIT_IO


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entroray", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", help="one seeded perturbation search")
    s.add_argument("--target", help="fc | vamos | ray-file:LABEL | v1,...,v15")
    s.add_argument("--alphabet", default="2,2,2,2", help="comma-separated sizes")
    s.add_argument("--start", default="uniform", help="uniform | centroid[:SEED] | pmf-file")
    s.add_argument("--objective", default="dnorm", choices=("dnorm", "ingleton", "violation"))
    s.add_argument("--delta", type=float, default=1e-6)
    s.add_argument("--L", type=int, default=10**6, help="max accepted moves")
    s.add_argument("--M", type=int, default=10**5, help="max consecutive rejections")
    s.add_argument("--eps", type=float, default=1.0, help="lambda upper bound in (0,1]")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--waypoints", help="ray file of intermediate targets")
    s.add_argument("--hyperplanes", help="coefficient table for guided search")
    s.add_argument("--eta", type=float, default=1e-4, help="hyperplane redraw threshold")
    s.add_argument("--trace-stride", type=int, default=1)
    s.add_argument("--out", help="write a run-record JSON line")
    s.add_argument("--trace", help="write the accepted-move trace CSV")
    s.set_defaults(fn=cmd_search)

    b = sub.add_parser("batch", help="run a JSON-lines job file")
    b.add_argument("--jobs", required=True)
    b.add_argument("--parallel", type=int, default=1)
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--out", help="run-records output path")
    b.set_defaults(fn=cmd_batch)

    sc = sub.add_parser("score", help="Ingleton/violation/polymatroid report")
    sc.add_argument("--vector", required=True)
    sc.set_defaults(fn=cmd_score)

    dc = sub.add_parser("decompose", help="tight/modular split")
    dc.add_argument("--vector", required=True)
    dc.add_argument("--out")
    dc.set_defaults(fn=cmd_decompose)

    g = sub.add_parser("grid", help="pyramid grid rays")
    g.add_argument("--vamos", help="apex ray (default: bundled)")
    g.add_argument("--base", help="base-ray table (default: bundled)")
    g.add_argument("--level", type=int, required=True, choices=(1, 2, 3, 4, 5))
    g.add_argument("--out")
    g.set_defaults(fn=cmd_grid)

    hp = sub.add_parser("hyperplanes", help="hyperplanes through given rays")
    hp.add_argument("--points", required=True, help="ray table (2^n-2, or 2^n-1 rows)")
    hp.add_argument("--out")
    hp.set_defaults(fn=cmd_hyperplanes)

    v = sub.add_parser("verify", help="recompute bundled fixture anchors")
    v.add_argument("--fixtures", help="fixture directory (default: bundled)")
    v.add_argument("--select", help="run only items containing this substring")
    v.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UndefinedDistanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (InvalidArgumentError, ValueError) as exc:
        if isinstance(exc, ParseError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (OSError, EntrorayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
