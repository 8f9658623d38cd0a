"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line and asserts it."""

import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import brute
from asymtree.cayley import (
    abelian_group,
    build_relative_ball,
    enumerate_ball,
    free_group,
    surface_group,
    zz_free_product,
)
from asymtree.hyperbolicity import bowditch_K, build_lines_centers, thin_triangle_delta
from asymtree.netapprox import (
    build_eo_presentation,
    eo_labelings,
    eo_stage_graphs,
    load_eo_config,
    nested_snets,
    net_metric_bounds_check,
    torus_bouquet_space,
)
from asymtree.relhyp import (
    SatParams,
    alpha1_report,
    alpha2_report,
    bcp_report,
    morse_sweep_samples,
    morse_table,
)
from asymtree.smallcancel import (
    DehnReducer,
    check_cstar,
    cstar_profile,
    dehn_reduce,
    generate_cstar_words,
    naive_cstar,
    reduced_words,
    trivial_words_bruteforce,
)
from asymtree.treegraded import (
    TreeGradedError,
    canonical_pieces,
    check_t1,
    check_t2,
    project_to_piece,
    random_cactus,
)
from asymtree.words import close_word_set, cyclic_reduce, free_reduce

TINY = Path(__file__).parent / "data" / "eo_tiny.toml"
THIRD = Fraction(1, 3)


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return report


def rel_balls(oracle, radii):
    return {r: build_relative_ball(enumerate_ball(oracle, r)) for r in radii}


def test_c01_tree_baseline(verdict):
    t = time.time()
    oracle = free_group(parabolics=())
    nus, Ks = [], []
    for r in range(1, 7):
        rel = build_relative_ball(enumerate_ball(oracle, r))
        nus.append(thin_triangle_delta(rel.base, "centered").nu)
        rep = bowditch_K(rel, build_lines_centers(rel), samples=200 if r >= 4 else None)
        Ks.append((rep.K_I, rep.K_II, rep.K_III))
    dt = time.time() - t
    ok = all(n == 0 for n in nus) and all(max(k) == 0 for k in Ks) and dt < 10
    verdict(1, ok, f"nu={nus} K(I,II,III)={Ks} time={dt:.1f}s")


def test_c02_positive_control(verdict):
    rels = rel_balls(free_group(), range(3, 7))
    a1 = [alpha1_report(rels[r], 1).measured()[0] for r in rels]
    bcp = [(e["a1"], e["a2"]) for e in (bcp_report(rels[r], 1, 6).per_radius[0] for r in rels)]
    nu = [thin_triangle_delta(rels[r], "centered").nu for r in rels]
    base = rels[3].base
    b1, b2, _ = brute.bcp(base, 1, 6)
    brute_ok = (a1[0] == brute.alpha1(base, 1) and bcp[0] == (b1, b2)
                and thin_triangle_delta(rels[3], "exhaustive").nu == brute.thin_nu(base, True))
    ok = len(set(a1)) == 1 and len(set(bcp)) == 1 and len(set(nu)) == 1 and brute_ok
    verdict(2, ok, f"alpha1={a1} bcp={bcp} nu={nu} brute_r3={brute_ok}")


def test_c03_negative_control(verdict):
    rels = rel_balls(abelian_group(), range(3, 7))
    a1 = [alpha1_report(rels[r], 1).measured()[0] for r in rels]
    # len_cap tied to the radius, lambda = 2
    a2 = [bcp_report(rels[r], 2, r).per_radius[0]["a2"] for r in rels]
    inc = lambda xs: all(x < y for x, y in zip(xs, xs[1:]))
    rejected = alpha1_report(rels[6], 1, bound=a1[0]).verdict == "fail"
    ok = inc(a1) and inc(a2) and rejected
    verdict(3, ok, f"alpha1={a1} bcp_a2(len_cap=r)={a2} bound rejected={rejected}")


def test_c04_free_product_control(verdict):
    rels = rel_balls(zz_free_product(), range(1, 6))
    a1 = [alpha1_report(rels[r], 1).measured()[0] for r in rels]
    a2 = [alpha2_report(rels[r], THIRD).measured()[0] for r in rels]
    samples = morse_sweep_samples(rels[2].base, 2, 0, 100, 1)
    keys = ("tau1", "delta", "tau3", "tau4")
    taus = []
    for r in range(2, 6):
        e = morse_table(rels[r], samples, SatParams(2, 0, 1, 1)).per_radius[0]
        taus.append(tuple(e[k] for k in keys))
    ok = len(set(a1)) == 1 and len(set(a2)) == 1 and len(set(taus)) == 1 and len(samples) == 100
    verdict(4, ok, f"alpha1={a1} alpha2={a2} morse(tau1,delta,tau3,tau4)={taus}")


def test_c05_dehn_oracle(verdict):
    t = time.time()
    (surface,) = surface_group().presentation.relators
    trivial = trivial_words_bruteforce([surface], 4, 8, 2)
    D = DehnReducer([surface])
    count = bad = 0
    for w in reduced_words(4, 8):
        count += 1
        if D.is_trivial(w) != (w in trivial):
            bad += 1
    dt = time.time() - t
    ok = bad == 0 and count == 7686401 and dt < 300
    verdict(5, ok, f"words={count} disagreements={bad} time={dt:.0f}s")


def _random_closed_set(rng):
    ws = []
    for _ in range(rng.randint(1, 3)):
        L = rng.randint(1, 20)
        w = cyclic_reduce(free_reduce(tuple(rng.choice((1, -1, 2, -2)) for _ in range(L))))
        if w:
            ws.append(w)
    return close_word_set(ws)


def test_c06_cstar_checker(verdict):
    rng = random.Random(6)
    lams = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    agree = 0
    for k in range(200):
        W = _random_closed_set(rng)
        lam = lams[k % 4]
        agree += check_cstar(W, lam)[0] == naive_cstar(W, lam)
    g = generate_cstar_words(Fraction(1, 2), [8, 9, 10, 11, 12], 3, seed=0)
    prof = cstar_profile(g.words)
    lams_n = [prof.lambda_n[n] for n in sorted(prof.lambda_n)]
    nonincreasing = all(x >= y for x, y in zip(lams_n, lams_n[1:]))
    repass = check_cstar(g.words, Fraction(1, 2))[0]
    ok = agree == 200 and repass and nonincreasing
    verdict(6, ok, f"agreement={agree}/200 generated re-pass={repass} lambda_n nonincreasing={nonincreasing}")


def test_c07_net_metric_bounds(verdict):
    sp = torus_bouquet_space([2], 64)
    deltas = [Fraction(1, 2) ** n for n in range(1, 7)]
    chain = nested_snets(sp, [1] * 6, deltas, zeta=Fraction(1, 2))
    out = net_metric_bounds_check(chain)
    rows = [(r["stage"], r["pairs"], r["lower_violations"], r["upper_violations"]) for r in out["stages"]]
    ok = out["ok"] and [r[0] for r in rows] == [2, 3, 4, 5, 6]
    verdict(7, ok, f"(stage, pairs, lower violations, upper violations)={rows}")


def _nearest(X, x, piece):
    ds = {v: X.dist(x, v) for v in piece}
    best = min(ds.values())
    return [v for v, d in ds.items() if np.isclose(d, best)]


def test_c08_canonical_decomposition(verdict):
    failures = []
    for seed in range(100):
        G, cycles, bridges = random_cactus(random.Random(seed), 30)
        X = canonical_pieces(G)
        if G.number_of_nodes() > 1 and set(X.pieces) != set(cycles) | set(bridges):
            failures.append((seed, "pieces"))
            continue
        if not check_t1(X)[0] or not check_t2(X, G.number_of_nodes()).ok:
            failures.append((seed, "t1/t2"))
            continue
        for k, p in enumerate(X.pieces):
            for x in G.nodes:
                tied = _nearest(X, x, p)
                try:
                    y = project_to_piece(X, x, k)
                except TreeGradedError:
                    y = None
                if len(tied) != 1 or y != tied[0]:
                    failures.append((seed, "projection", x, k))
    verdict(8, not failures, f"cacti=100 failures={failures[:3]}")


def test_c09_eo_pipeline_audit(verdict):
    cfg, spaces = load_eo_config(TINY.read_text())
    P, diag = build_eo_presentation(cfg, spaces)
    d_seq = diag["d_seq"]
    lengths_ok = all(r["length"] == sum(r["demanded"]) - r["cancellation"]
                     and r["blocks"] == r["demanded"] and r["cancellation"] <= 2 * cfg.stage_max
                     for r in diag["audit"])
    graphs, _ = eo_stage_graphs(cfg, spaces)
    labels_ok = True
    for lab in eo_labelings(cfg, graphs, d_seq):
        try:
            lab.verify()
        except ValueError:
            labels_ok = False
    cfg.tree = "dfs"
    P_dfs, _ = build_eo_presentation(cfg, spaces)
    bad = sum(1 for w in reduced_words(2, 6)
              if (dehn_reduce(w, P.relators) == ()) != (dehn_reduce(w, P_dfs.relators) == ()))
    ok = lengths_ok and labels_ok and bad == 0
    cancel = [r["cancellation"] for r in diag["audit"]]
    verdict(9, ok, f"d={d_seq} cancellation={cancel} lengths={lengths_ok} labelling={labels_ok} "
                   f"bfs/dfs disagreements on words <= 6: {bad}")


def _cli(args, out=None):
    r = subprocess.run([sys.executable, "-m", "asymtree.cli", *args], capture_output=True)
    files = tuple(p.read_bytes() for p in sorted(Path(out).iterdir())) if out else ()
    return r.returncode, r.stdout, files


def test_c10_determinism(verdict, tmp_path):
    commands = [
        ["ball", "--r", "1..3"],
        ["relball", "--r", "2", "--group", "zz-free-product"],
        ["alpha", "--group", "abelian-2", "--r", "3..4", "--format", "csv"],
        ["bcp", "--r", "3"],
        ["morse", "--group", "zz-free-product", "--r", "2..3", "--samples", "20"],
        ["bowditch", "--r", "2", "--plain"],
        ["treegraded", "--count", "5"],
        ["snet", "--dims", "1,2", "--grid", "8", "--stages", "3"],
        ["eo-build", "--config", str(TINY)],
        ["smallcancel", "--group", "surface"],
        ["sweep", "--r", "1..3"],
    ]
    differing = []
    for args in commands:
        runs = [_cli(args) for _ in range(3)]
        if not runs[0] == runs[1] == runs[2] or runs[0][0] != 0:
            differing.append(args[0])
    runs = []
    for k in range(3):
        d = tmp_path / f"sweep{k}"
        runs.append(_cli(["sweep", "--r", "1..3", "--out", str(d)], d))
    if not runs[0] == runs[1] == runs[2]:
        differing.append("sweep --out")
    verdict(10, not differing, f"commands={len(commands) + 1} x 3 runs, differing={differing}")
