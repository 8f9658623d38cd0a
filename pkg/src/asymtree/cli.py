"""Command-line entry point: measurements over radius sweeps and constructions.

Exit status is 0 on success, 1 when a checked property fails and 2 on usage
or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import cayley, hyperbolicity, netapprox, relhyp, smallcancel, treegraded
from .words import format_presentation, parse_presentation, read_word_set

FAIL = 1
USAGE = 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# inputs


def parse_range(text: str) -> list:
    """'4..6' -> [4, 5, 6]; '5' -> [5]; a reversed range is empty."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return list(range(int(a), int(b) + 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"bad radius range {text!r}; expected A..B") from None


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad number {text!r}") from None


def resolve_group(name: str, plain: bool = False):
    """Oracle for a registry name; ``plain`` drops the parabolic subgroups."""
    if name == "free":
        return cayley.free_group(parabolics=() if plain else ((1,),))
    if name.startswith("abelian-"):
        try:
            n = int(name.split("-", 1)[1])
        except ValueError:
            raise UsageError(f"bad group name {name!r}") from None
        return cayley.abelian_group(n, parabolics=() if plain else ((1,),))
    if name == "surface":
        return cayley.surface_group()
    if name == "zz-free-product":
        if plain:
            return cayley.FreeProductOracle([cayley.AbelianOracle("ab"), cayley.AbelianOracle("cd")], [])
        return cayley.zz_free_product()
    if name.startswith("eo:"):
        path = name[3:]
        P, _ = _eo_build(path)
        return cayley.DehnOracle(P)
    if name.startswith("file:"):
        path = name[5:]
        P = parse_presentation(_read(path))
        return cayley.DehnOracle(P)
    raise UsageError(f"unknown group {name!r}")


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _eo_build(path):
    text = _read(path)
    fmt = "json" if str(path).endswith(".json") else "toml"
    try:
        cfg, spaces = netapprox.load_eo_config(text, fmt)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"bad config {path}: {e}") from None
    return netapprox.build_eo_presentation(cfg, spaces)


# ---------------------------------------------------------------------------
# output


def _dump(obj) -> str:
    return json.dumps(relhyp._jsonable(obj), sort_keys=True, indent=2, default=str) + "\n"


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def _emit(args, payload: dict, rows=None, columns=None):
    if args.format == "csv" and rows is not None:
        text = _csv(rows, columns)
    else:
        text = _dump(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _flat_rows(report: relhyp.AlphaReport):
    return [{k: v for k, v in e.items() if k != "witnesses"} for e in report.per_radius]


# ---------------------------------------------------------------------------
# commands


def _balls(args):
    oracle = resolve_group(args.group, args.plain)
    for r in parse_range(args.r):
        yield r, cayley.enumerate_ball(oracle, r), oracle


def cmd_ball(args):
    rows = []
    last = None
    for r, ball, _ in _balls(args):
        rows.append({"r": r, "vertices": ball.n, "s_edges": len(ball.s_edges())})
        last = ball
    if args.export and last is not None:
        Path(args.export).write_text(cayley.export_ball(last))
    _emit(args, {"command": "ball", "group": args.group, "seed": args.seed, "rows": rows},
          rows, ["r", "vertices", "s_edges"])
    return 0


def cmd_relball(args):
    rows = []
    last = None
    for r, ball, oracle in _balls(args):
        rel = cayley.build_relative_ball(ball, oracle)
        rows.append({"r": r, "vertices": ball.n, "s_edges": len(ball.s_edges()),
                     "h_edges": len(rel.h_edges()), "cosets": len(rel.cosets())})
        last = (ball, rel)
    if args.export and last is not None:
        Path(args.export).write_text(cayley.export_ball(*last))
    _emit(args, {"command": "relball", "group": args.group, "seed": args.seed, "rows": rows},
          rows, ["r", "vertices", "s_edges", "h_edges", "cosets"])
    return 0


def _rels(args):
    for r, ball, oracle in _balls(args):
        rel = cayley.build_relative_ball(ball, oracle)
        if rel.m == 0:
            raise UsageError(f"group {args.group!r} has no parabolic subgroups")
        yield r, rel


def _merge(reports):
    out = None
    for rep in reports:
        out = rep if out is None else out.merge(rep)
    return out


def _verdict_status(rep):
    return FAIL if rep is not None and rep.verdict == "fail" else 0


def cmd_alpha(args):
    bound = float(parse_fraction(args.bound)) if args.bound else None
    reps = []
    for r, rel in _rels(args):
        if args.condition == "alpha1":
            reps.append(relhyp.alpha1_report(rel, parse_fraction(args.delta), bound))
        elif args.condition == "alpha2":
            reps.append(relhyp.alpha2_report(rel, parse_fraction(args.theta), bound=bound))
        else:
            fp = relhyp.FatParams(parse_fraction(args.theta), 2, 8)
            reps.append(relhyp.alpha3_report(rel, fp, args.k, args.samples, args.seed, bound))
    rep = _merge(reps)
    if rep is not None and bound is not None:
        ok = all(e["measured"] is not None and e["measured"] <= bound for e in rep.per_radius)
        rep.verdict = "pass" if ok else "fail"
    payload = rep.to_dict() if rep else {"condition": args.condition, "per_radius": []}
    payload.update(group=args.group, seed=args.seed)
    _emit(args, payload, _flat_rows(rep) if rep else [], ["r", "measured"])
    return _verdict_status(rep)


def cmd_bcp(args):
    bound = float(parse_fraction(args.bound)) if args.bound else None
    reps = [relhyp.bcp_report(rel, parse_fraction(args.lam), args.len_cap, bound=bound) for _, rel in _rels(args)]
    rep = _merge(reps)
    if rep is not None and bound is not None:
        rep.verdict = "pass" if all(e["measured"] <= bound for e in rep.per_radius) else "fail"
    payload = rep.to_dict() if rep else {"condition": "BCP", "per_radius": []}
    payload.update(group=args.group, seed=args.seed)
    _emit(args, payload, _flat_rows(rep) if rep else [], ["r", "a1", "a2", "paths"])
    return _verdict_status(rep)


def cmd_morse(args):
    radii = parse_range(args.r)
    sp = relhyp.SatParams(parse_fraction(args.L), parse_fraction(args.C), parse_fraction(args.mu),
                          parse_fraction(args.M))
    reps = []
    if radii:
        oracle = resolve_group(args.group)
        small = cayley.enumerate_ball(oracle, radii[0])
        samples = relhyp.morse_sweep_samples(small, sp.L, sp.C, args.samples, args.seed)
        for r in radii:
            rel = cayley.build_relative_ball(cayley.enumerate_ball(oracle, r), oracle)
            reps.append(relhyp.morse_table(rel, samples, sp))
    rep = _merge(reps)
    payload = rep.to_dict() if rep else {"condition": "morse", "per_radius": []}
    payload.update(group=args.group, seed=args.seed)
    _emit(args, payload, _flat_rows(rep) if rep else [], ["r", "tau1", "delta", "tau3", "tau4", "used"])
    return 0


def cmd_bowditch(args):
    rows = []
    for r, ball, oracle in _balls(args):
        rel = cayley.build_relative_ball(ball, oracle)
        row = {"r": r}
        thin = hyperbolicity.thin_triangle_delta(rel, args.thin_mode, args.samples or 200, args.seed)
        row["nu"] = thin.nu
        Ks = []
        for rule in args.center_rule:
            ls = hyperbolicity.build_lines_centers(rel, parse_fraction(args.kappa0), parse_fraction(args.mu0), rule)
            rep = hyperbolicity.bowditch_K(rel, ls, args.samples, args.seed)
            Ks.append(rep.K)
            if rule == args.center_rule[0]:
                row.update(rep.to_dict())
        row["K_min"], row["K_max"] = min(Ks), max(Ks)
        rows.append(row)
    _emit(args, {"command": "bowditch", "group": args.group, "seed": args.seed,
                 "center_rules": args.center_rule, "rows": rows},
          rows, ["r", "nu", "K_I", "K_II", "K_III", "K", "K_min", "K_max", "center_set_diameter"])
    return 0


def cmd_treegraded(args):
    if args.input:
        try:
            X = treegraded.PieceSpace.from_json(_read(args.input))
        except (ValueError, KeyError, TypeError) as e:
            raise UsageError(f"bad piece space {args.input}: {e}") from None
        spaces = [("input", X)]
    else:
        rng = random.Random(args.seed)
        spaces = []
        for k in range(args.count):
            G, _, _ = treegraded.random_cactus(rng, args.max_vertices)
            spaces.append((f"cactus{k}", treegraded.canonical_pieces(G)))
    rows = []
    status = 0
    for name, X in spaces:
        ok1, w1 = treegraded.check_t1(X)
        cert = treegraded.check_t2(X, args.cycle_cap or X.graph.number_of_nodes())
        proj_fail = None
        for x in X.nodes:
            for M in range(len(X.pieces)):
                try:
                    treegraded.project_to_piece(X, x, M)
                except treegraded.TreeGradedError as e:
                    proj_fail = proj_fail or [str(x), M, str(e)]
        ok = ok1 and cert.ok and proj_fail is None
        status = status or (0 if ok else FAIL)
        rows.append({"space": name, "vertices": X.graph.number_of_nodes(), "pieces": len(X.pieces),
                     "t1": ok1, "t2": cert.ok, "cycles_checked": cert.cycles_checked,
                     "projections": proj_fail is None, "witness": w1 or cert.witness or proj_fail})
    _emit(args, {"command": "treegraded", "seed": args.seed, "rows": rows}, rows,
          ["space", "vertices", "pieces", "t1", "t2", "cycles_checked", "projections"])
    return status


def cmd_snet(args):
    dims = [int(d) for d in args.dims.split(",")]
    zeta = parse_fraction(args.zeta)
    space = netapprox.torus_bouquet_space(dims, args.grid)
    n = args.stages
    chain = netapprox.nested_snets(space, list(range(1, n + 1)), [float(zeta ** k) for k in range(1, n + 1)],
                                   zeta=zeta)
    payload = {"command": "snet", "dims": dims, "grid": args.grid, "zeta": str(zeta), "seed": args.seed,
               "net_sizes": [len(x) for x in chain.nets]}
    rows = []
    status = 0
    if n >= 2:
        rep = netapprox.net_metric_bounds_check(chain, zeta)
        payload["bounds"] = rep
        rows = rep["stages"]
        status = 0 if rep["ok"] else FAIL
    _emit(args, payload, rows, ["stage", "k", "points", "edges", "connected", "pairs",
                                "lower_violations", "upper_violations", "max_ratio_to_upper"])
    return status


def cmd_eo_build(args):
    P, diag = _eo_build(args.config)
    text = format_presentation(P)
    if args.out:
        Path(args.out).write_text(text + "\n")
        diag_path = Path(args.diag) if args.diag else Path(args.out).with_suffix(".json")
        diag_path.write_text(_dump(diag))
    else:
        sys.stdout.write(text + "\n" + _dump(diag))
    return 0


def cmd_smallcancel(args):
    payload = {"command": "smallcancel", "seed": args.seed}
    status = 0
    if args.words:
        names = ("a", "b")
        W = read_word_set(_read(args.words), names)
        lam = parse_fraction(args.lam)
        ok, wit = smallcancel.check_cstar(W, lam)
        payload["cstar"] = {"lambda": str(lam), "ok": ok, "witness": repr(wit) if wit else None,
                            "profile": [[n, str(l), k] for n, l, k in smallcancel.cstar_profile(W).rows()]}
        status = 0 if ok else FAIL
    else:
        if args.input:
            P = parse_presentation(_read(args.input))
        elif args.group == "surface":
            P = cayley.surface_group().presentation
        else:
            raise UsageError("smallcancel needs --input, --words or --group surface")
        lam = parse_fraction(args.lam)
        ok, rep = smallcancel.check_c_prime(P.relators, lam)
        payload["c_prime"] = {"lambda": str(lam), "ok": ok, **rep.to_dict()}
        status = 0 if ok else FAIL
    _emit(args, payload)
    return status


SWEEP_COLUMNS = ["r", "vertices", "alpha1", "alpha2", "bcp_a1", "bcp_a2", "nu", "error"]


def cmd_sweep(args):
    radii = parse_range(args.r)
    rows = []
    oracle = resolve_group(args.group) if radii else None
    for r in radii:
        row = {"r": r}
        try:
            ball = cayley.enumerate_ball(oracle, r)
            rel = cayley.build_relative_ball(ball, oracle)
            row["vertices"] = ball.n
            row["alpha1"] = relhyp.alpha1_report(rel, parse_fraction(args.delta)).per_radius[0]["measured"]
            row["alpha2"] = relhyp.alpha2_report(rel, parse_fraction(args.theta)).per_radius[0]["measured"]
            if args.bcp:
                e = relhyp.bcp_report(rel, parse_fraction(args.lam), args.len_cap).per_radius[0]
                row["bcp_a1"], row["bcp_a2"] = e["a1"], e["a2"]
            if args.thin:
                row["nu"] = hyperbolicity.thin_triangle_delta(rel, "centered").nu
        except (ValueError, RuntimeError) as e:
            row["error"] = str(e)
        rows.append(row)
    text = _csv(rows, SWEEP_COLUMNS)
    out = Path(args.out) if args.out else None
    if out is None:
        sys.stdout.write(text)
        return 0
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(text)
    from .plotting import plot_sweep
    plot_sweep(rows, [c for c in SWEEP_COLUMNS[2:-1]], out / "sweep.png", title=args.group)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asymtree", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, group=True, radius=True):
        if group:
            p.add_argument("--group", default="free", help="free, abelian-N, surface, zz-free-product, eo:FILE, file:FILE")
            p.add_argument("--plain", action="store_true", help="ignore the parabolic subgroups")
        if radius:
            p.add_argument("--r", default="3", help="radius or range A..B")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        return p

    p = common(sub.add_parser("ball", help="enumerate word-metric balls"))
    p.add_argument("--export", help="write the largest ball in vertex/edge text form")
    p.set_defaults(func=cmd_ball)

    p = common(sub.add_parser("relball", help="balls with coset edges"))
    p.add_argument("--export")
    p.set_defaults(func=cmd_relball)

    p = common(sub.add_parser("alpha", help="coset separation conditions"))
    p.add_argument("--condition", choices=["alpha1", "alpha2", "alpha3"], default="alpha1")
    p.add_argument("--delta", default="1")
    p.add_argument("--theta", default="1/3")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--bound")
    p.set_defaults(func=cmd_alpha)

    p = common(sub.add_parser("bcp", help="bounded coset penetration constants"))
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--len-cap", type=int, default=6)
    p.add_argument("--bound")
    p.set_defaults(func=cmd_bcp)

    p = common(sub.add_parser("morse", help="Morse quantities for sampled quasi-geodesics"))
    p.add_argument("--L", default="2")
    p.add_argument("--C", default="0")
    p.add_argument("--mu", default="1")
    p.add_argument("--M", default="1")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_morse)

    p = common(sub.add_parser("bowditch", help="thin triangles and the lines-and-centers certificate"))
    p.add_argument("--kappa0", default="0")
    p.add_argument("--mu0", default="0")
    p.add_argument("--samples", type=int, default=None, help="sampled triples (exhaustive if omitted)")
    p.add_argument("--thin-mode", choices=["exhaustive", "centered", "sampled"], default="centered")
    p.add_argument("--center-rule", action="append", choices=["sum", "least-id", "greatest-id"])
    p.set_defaults(func=cmd_bowditch)

    p = common(sub.add_parser("treegraded", help="check piece decompositions"), group=False, radius=False)
    p.add_argument("--input", help="piece space JSON; random cacti if omitted")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--max-vertices", type=int, default=30)
    p.add_argument("--cycle-cap", type=int, default=None)
    p.set_defaults(func=cmd_treegraded)

    p = common(sub.add_parser("snet", help="nested nets on tori and the net-metric bounds"), group=False, radius=False)
    p.add_argument("--dims", default="2", help="comma-separated torus dimensions")
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--zeta", default="1/2")
    p.add_argument("--stages", type=int, default=4)
    p.set_defaults(func=cmd_snet)

    p = common(sub.add_parser("eo-build", help="build a presentation from a config"), group=False, radius=False)
    p.add_argument("--config", required=True)
    p.add_argument("--diag", help="diagnostics path (default: OUT with .json suffix)")
    p.set_defaults(func=cmd_eo_build)

    p = common(sub.add_parser("smallcancel", help="C' and C* checks"), radius=False)
    p.add_argument("--input", help="presentation file")
    p.add_argument("--words", help="word set file over a, b")
    p.add_argument("--lambda", dest="lam", default="1/6")
    p.set_defaults(func=cmd_smallcancel)

    p = common(sub.add_parser("sweep", help="measured constants against radius, CSV plus PNG"))
    p.add_argument("--delta", default="1")
    p.add_argument("--theta", default="1/3")
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--len-cap", type=int, default=6)
    p.add_argument("--bcp", action="store_true", help="include BCP constants")
    p.add_argument("--thin", action="store_true", help="include the thin-triangle constant")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "center_rule", "x") is None:
        args.center_rule = ["sum"]
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except (smallcancel.PreconditionError, netapprox.NetError, netapprox.SequenceError,
            netapprox.LabelingError, cayley.BallTooLarge) as e:
        print(f"error: {e}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
