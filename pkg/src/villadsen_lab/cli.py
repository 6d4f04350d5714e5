"""Command-line front end.

Every subcommand prints one JSON document (sorted keys) to stdout or to
``--out``.  Exit status is 0 whenever a verdict was computed, including
negative ones, and 2 for malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .bundles import LineBundle, VectorBundle, vil_obstruction
from .construction import (
    CAP_ENV,
    ConstructionError,
    expansion_cap,
    growth_entries,
    infinite_variant_blocks,
    policy_from_json,
    ratio_bound,
    ratio_trace,
    run_campaign,
    strictly_decreasing,
)
from .embeddings import (
    NotRepresentable,
    dimdrop_schedule,
    frobenius,
    homembed_min_rank,
    homembed_threshold,
    homembed_witness,
    lochom_exponent,
    represent,
)
from .matching import hall_check
from .rank_calculus import (
    DescriptorGraph,
    GrowthProfile,
    GrowthRankConflict,
    binomial_decompose,
    nistor_sr,
    prune_rank_one,
    rr_upper,
    tdg_estimate,
)

log = logging.getLogger("villadsen_lab")

RUN_KEYS = {"target_n", "stages", "policy", "overrides", "discs", "infinite", "direct_cap", "methods"}


class InputError(ValueError):
    """Malformed command-line or file input."""


def _json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON ({exc})") from None


def _dump(obj: Any) -> str:
    def default(x):
        if isinstance(x, Fraction):
            return str(x)
        raise TypeError(f"cannot serialize {type(x).__name__}")

    return json.dumps(obj, sort_keys=True, indent=2, default=default) + "\n"


def _emit(args, obj: Any) -> None:
    text = _dump(obj)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- construct -----------------------------------------------------------------


def load_run_config(args) -> dict[str, Any]:
    cfg: dict[str, Any] = {}
    if args.run:
        data = json.loads(Path(args.run).read_text())
        if not isinstance(data, dict):
            raise InputError("run file must hold a JSON object")
        unknown = set(data) - RUN_KEYS
        if unknown:
            raise InputError(f"unknown run-file keys: {sorted(unknown)}")
        over = data.get("overrides") or {}
        if set(over) - {"n1"}:
            raise InputError(f"unknown overrides: {sorted(set(over) - {'n1'})}")
        cfg.update(data)
    if args.n is not None:
        cfg["target_n"] = args.n
    if args.stages is not None:
        cfg["stages"] = args.stages
    if args.override_n1 is not None:
        cfg.setdefault("overrides", {})["n1"] = args.override_n1
    if args.discs:
        cfg["discs"] = True
    if args.infinite:
        cfg["infinite"] = True
    if args.policy:
        cfg["policy"] = _json_arg(args.policy, "--policy") if args.policy.startswith("{") else {"name": args.policy}
    if args.direct_cap is not None:
        cfg["direct_cap"] = args.direct_cap
    if args.methods:
        cfg["methods"] = args.methods.split(",")
    if "target_n" not in cfg:
        raise InputError("target_n is required (--n or run file)")
    cfg.setdefault("stages", 2)
    cfg.setdefault("policy", {"name": "geometric", "base": 2})
    cfg.setdefault("overrides", {})
    cfg.setdefault("discs", False)
    cfg.setdefault("infinite", False)
    cfg.setdefault("direct_cap", expansion_cap())
    cfg.setdefault("methods", ["direct", "recursive", "atomic"])
    for key in ("target_n", "stages", "direct_cap"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise InputError(f"{key} must be an integer")
    if cfg["target_n"] < 1 or cfg["stages"] < 1:
        raise InputError("target_n and stages must be positive")
    bad = set(cfg["methods"]) - {"direct", "recursive", "atomic"}
    if bad:
        raise InputError(f"unknown methods: {sorted(bad)}")
    return cfg


def build_report(cfg: dict[str, Any], include_witness: bool = True) -> dict[str, Any]:
    policy = policy_from_json(cfg["policy"])
    reports = run_campaign(
        cfg["target_n"],
        cfg["stages"],
        n1=cfg["overrides"].get("n1"),
        policy=policy,
        discs=cfg["discs"],
        infinite=cfg["infinite"],
        methods=tuple(cfg["methods"]),
        cap=cfg["direct_cap"],
    )
    states = [r.state for r in reports]
    n = cfg["target_n"]
    k = n + 1
    real = ratio_trace(states, k, "real")
    cplx = ratio_trace(states, k, "complex")
    stages_out = []
    for rep, r_real, r_cplx in zip(reports, real, cplx):
        s = rep.state
        entry = s.to_json()
        entry["minimality"] = s.minimality()
        entry["invariant_violations"] = s.check_invariants()
        certs: dict[str, Any] = {}
        for method in cfg["methods"]:
            if method in rep.certificates:
                c = rep.certificates[method].to_json()
                if not include_witness:
                    c.pop("witness", None)
                certs[method] = c
            else:
                f = rep.failures[method]
                certs[method] = {"absent": True, "reason": f["reason"], "message": f["message"], "details": f["details"]}
        entry["certificates"] = certs
        entry["methods_agree"] = rep.agree()
        entry["theta_summand_rank"] = rep.theta_summand
        bound = ratio_bound(s)
        entry["ratio"] = {
            "k": k,
            "real": r_real,
            "complex": r_cplx,
            "complex_bound": bound,
            "within_bound": None if bound is None or s.discs else r_cplx <= bound,
        }
        if cfg["infinite"]:
            entry["infinite_variant"] = infinite_variant_blocks(s)
        stages_out.append(entry)
    return {
        "tool": {"name": "villadsen_lab", "version": __version__},
        "config": {key: cfg[key] for key in sorted(cfg)},
        "policy": policy.to_json(),
        "canonical": states[0].canonical,
        "stages": stages_out,
        "ratio_trace": {
            "k": k,
            "real": real,
            "complex": cplx,
            "strictly_decreasing_after_stage_1": strictly_decreasing(real[1:]) if len(real) > 2 else None,
            "strictly_decreasing": strictly_decreasing(real),
        },
        "profile": [list(e) for e in growth_entries(states)],
    }


def write_ratio_csv(path: str, report: dict[str, Any]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stage", "N", "d", "real_dim", "k", "ratio_real", "ratio_complex", "ratio_real_float"])
    for st in report["stages"]:
        r = st["ratio"]
        writer.writerow([st["i"], st["N_i"], st["d_i"], st["real_dim"], r["k"], str(r["real"]), str(r["complex"]), f"{float(r['real']):.12g}"])
    Path(path).write_text(buf.getvalue())


def cmd_construct(args) -> int:
    cfg = load_run_config(args)
    report = build_report(cfg, include_witness=not args.no_witness)
    if args.csv:
        write_ratio_csv(args.csv, report)
    _emit(args, report)
    return 0


# -- thin wrappers --------------------------------------------------------------


def _parse_sets(text: str) -> list[list[int]]:
    sets = _json_arg(text, "--sets")
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise InputError("--sets must be a JSON list of lists of coordinates")
    for s in sets:
        if not s:
            raise InputError("empty support in --sets")
        if not all(isinstance(c, int) and c >= 1 for c in s):
            raise InputError("coordinates must be positive integers")
    return sets


def cmd_hall(args) -> int:
    sets = _parse_sets(args.sets)
    _emit(args, hall_check(sets).to_json())
    return 0


def _bundle_from_args(args) -> VectorBundle:
    if args.bundle:
        try:
            return VectorBundle.from_json(_json_arg(args.bundle, "--bundle"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"--bundle: {exc}") from None
    sets = _parse_sets(args.sets) if args.sets else []
    ambient = args.ambient or max((max(s) for s in sets), default=1)
    try:
        return VectorBundle.xi_sum(ambient, sets, trivial=args.trivial)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_euler(args) -> int:
    v = _bundle_from_args(args)
    out: dict[str, Any] = {"bundle": v.to_json(), "rank": v.rank, "nonzero": v.euler_nonzero()}
    if args.symbolic:
        out["euler"] = v.euler_class().to_json()
        out["chern"] = v.chern_class().to_json()
    if v.lines and not v.trivial_rank:
        out["hall"] = v.hall().to_json()
    _emit(args, out)
    return 0


def cmd_vil(args) -> int:
    sets = _parse_sets(args.lines)
    ambient = args.ambient or max(max(s) for s in sets)
    lines = [LineBundle.xi(ambient, s) for s in sets]
    cert = vil_obstruction(lines, args.l)
    if cert is None:
        _emit(args, {"certificate": None, "k": len(lines), "l": args.l})
    else:
        _emit(args, {"certificate": cert.to_json()})
    return 0


def cmd_tdg(args) -> int:
    if args.closed:
        form = _json_arg(args.closed, "--closed")
        if set(form) - {"c", "k"}:
            raise InputError("closed form takes keys c and k")
        profile = GrowthProfile.closed_form(int(form.get("c", 1)), int(form["k"]))
    elif args.profile:
        profile = GrowthProfile.from_csv(args.profile)
    else:
        raise InputError("give --closed or --profile")
    _emit(args, tdg_estimate(profile, args.n_max, args.tol).to_json())
    return 0


def cmd_embed(args) -> int:
    verb = args.verb
    nums = args.args
    try:
        if verb == "frobenius":
            p, q = _ints(nums, 2)
            out: dict[str, Any] = {"frobenius": frobenius(p, q)}
        elif verb == "represent":
            M, p, q = _ints(nums, 3)
            rep = represent(M, p, q)
            out = {"witness": None if rep is None else {"a": rep[0], "b": rep[1]}}
        elif verb == "homembed":
            rank, dim, N = _ints(nums, 3)
            w = homembed_witness(rank, dim, N)
            out = {
                "witness": None if w is None else w.to_json()["witness"],
                "min_rank": homembed_min_rank(N, dim),
                "threshold": homembed_threshold(N, dim),
            }
        elif verb == "dimdrop":
            if len(nums) < 3:
                raise InputError("dimdrop needs p q and at least one size")
            p, q, *sizes = (int(x) for x in nums)
            try:
                out = dimdrop_schedule(p, q, sizes).to_json()
            except NotRepresentable as exc:
                out = {"error": str(exc), "offender": exc.value}
        elif verb == "lochom":
            if len(nums) != 3:
                raise InputError("lochom needs max_dim min_rank epsilon")
            out = {"k": lochom_exponent(int(nums[0]), int(nums[1]), Fraction(nums[2]))}
        else:  # pragma: no cover - argparse restricts choices
            raise InputError(f"unknown verb {verb}")
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from None
    _emit(args, out)
    return 0


def _ints(nums: list[str], count: int) -> list[int]:
    if len(nums) != count:
        raise InputError(f"expected {count} integer arguments, got {len(nums)}")
    try:
        return [int(x) for x in nums]
    except ValueError:
        raise InputError(f"non-integer argument in {nums}") from None


def cmd_sr(args) -> int:
    if args.profile:
        profile = GrowthProfile.from_csv(args.profile)
        rows = []
        for dim, rank in profile.entries:
            sr = nistor_sr(dim, rank)
            rows.append({"dim": dim, "rank": rank, "sr": sr, "rr_upper": rr_upper(sr)})
        K = max(Fraction(dim, rank) for dim, rank in profile.entries)
        _emit(args, {"entries": rows, "K": K, "sr_below_K_plus_2": all(r["sr"] < K + 2 for r in rows)})
        return 0
    if args.dim is None or args.rank is None:
        raise InputError("give --dim and --rank, or --profile")
    sr = nistor_sr(args.dim, args.rank)
    _emit(args, {"sr": sr, "rr_upper": rr_upper(sr)})
    return 0


def cmd_grcalc(args) -> int:
    if args.binomial is not None:
        _emit(args, {"k": args.binomial, "summands": [{"i": i, "multiplicity": m} for i, m in binomial_decompose(args.binomial)]})
        return 0
    if not args.graph:
        raise InputError("give --graph or --binomial")
    try:
        graph = DescriptorGraph.from_json(json.loads(Path(args.graph).read_text()))
    except (KeyError, TypeError) as exc:
        raise InputError(f"descriptor graph: {exc}") from None
    try:
        rounds = graph.propagate()
    except GrowthRankConflict as exc:
        _emit(args, {"conflict": {"node": exc.node, "lower": exc.lower, "upper": exc.upper, "chain": exc.chain}})
        return 0
    out = graph.to_json()
    out["rounds"] = rounds
    _emit(args, out)
    return 0


def cmd_prune(args) -> int:
    ranks = _json_arg(args.ranks, "--ranks")
    maps = _json_arg(args.maps, "--maps") if args.maps else []
    try:
        verdict = prune_rank_one(ranks, maps)
    except (TypeError, IndexError) as exc:
        raise InputError(f"malformed stage graph: {exc}") from None
    _emit(args, verdict.to_json())
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="villadsen-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--json", action="store_true", help="JSON output (the default)")
        return p

    p = common(sub.add_parser("construct", help="run the stage construction and certify perforation"))
    p.add_argument("--run", help="JSON run file")
    p.add_argument("--n", type=int, help="target_n (perforation for the n-fold tensor power)")
    p.add_argument("--stages", type=int)
    p.add_argument("--override-n1", type=int, dest="override_n1")
    p.add_argument("--direct-cap", type=int, dest="direct_cap", help=f"summand cap for explicit expansion (env {CAP_ENV})")
    p.add_argument("--policy", help="policy name or JSON object")
    p.add_argument("--methods", help="comma-separated: direct,recursive,atomic")
    p.add_argument("--discs", action="store_true")
    p.add_argument("--infinite", action="store_true")
    p.add_argument("--csv", help="also write the ratio trace as CSV to this path")
    p.add_argument("--no-witness", action="store_true", dest="no_witness")
    p.set_defaults(func=cmd_construct)

    p = common(sub.add_parser("hall", help="Hall condition / distinct representatives"))
    p.add_argument("--sets", required=True, help='JSON list of supports, e.g. "[[1],[2]]"')
    p.set_defaults(func=cmd_hall)

    p = common(sub.add_parser("euler", help="Euler class nonvanishing of a sum of xi_I"))
    p.add_argument("--sets", help="JSON list of supports")
    p.add_argument("--bundle", help="bundle JSON")
    p.add_argument("--trivial", type=int, default=0)
    p.add_argument("--ambient", type=int)
    p.add_argument("--symbolic", action="store_true", help="also expand the Euler and Chern classes")
    p.set_defaults(func=cmd_euler)

    p = common(sub.add_parser("vil", help="obstruction for [xi_I1 + ... + xi_Ik] - [theta_l]"))
    p.add_argument("--lines", required=True, help="JSON list of supports")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--ambient", type=int)
    p.set_defaults(func=cmd_vil)

    p = common(sub.add_parser("tdg", help="topological dimension growth of a profile"))
    p.add_argument("--closed", help='closed form JSON {"c": int, "k": int} meaning dim = c * rank^k')
    p.add_argument("--profile", help="CSV with columns i,dim,rank")
    p.add_argument("--n-max", type=int, default=10, dest="n_max")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_tdg)

    p = common(sub.add_parser("embed", help="numerical semigroup witnesses"))
    p.add_argument("verb", choices=["frobenius", "represent", "homembed", "dimdrop", "lochom"])
    p.add_argument("args", nargs="*")
    p.set_defaults(func=cmd_embed)

    p = common(sub.add_parser("sr", help="stable rank and real rank bound"))
    p.add_argument("--dim", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--profile", help="CSV with columns i,dim,rank")
    p.set_defaults(func=cmd_sr)

    p = common(sub.add_parser("grcalc", help="propagate growth-rank bounds"))
    p.add_argument("--graph", help="descriptor graph JSON file")
    p.add_argument("--binomial", type=int)
    p.set_defaults(func=cmd_grcalc)

    p = common(sub.add_parser("prune", help="rank-one summand chains"))
    p.add_argument("--ranks", required=True, help="JSON list of per-stage rank lists")
    p.add_argument("--maps", help="JSON list of boolean matrices")
    p.set_defaults(func=cmd_prune)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, ConstructionError, ValueError, KeyError, OSError) as exc:
        sys.stdout.write(_dump({"error": str(exc)}))
        log.debug("malformed input", exc_info=True)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
