"""Verification battery: each check re-derives one stated result at finite depth.

Used by ``hardytree verify``.  Every check returns :class:`CheckResult` rows
naming the statement it exercises; randomized checks draw from one seeded
generator per suite so identical configs give identical reports.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .hardy import (
    INF,
    TreeFunction,
    extremal_fw,
    growth_bound_check,
    mp_level_pow,
    norm,
    weight,
)
from .operators import (
    automorphism_norm,
    automorphism_norm_pow,
    classify_trend,
    compactness_diagnostics,
    compose,
    lower_bound_fw,
    opnorm_infinity,
    sufficiency_series,
    truncated_opnorm_exact,
)
from .sampling import random_function
from .selfmaps import (
    identity_map,
    map_clamp,
    map_child_phi3,
    map_collapse_phi1,
    map_halving_phi4,
    map_parent_phi2,
    random_table_map,
    shift_automorphism,
)
from .tree import ROOT, TreeParams, iter_ball, lex_least, level_size, vertex_at

TOL = 1e-12


def close(a: float, b: float, tol: float = TOL) -> bool:
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


def leq(a: float, b: float, tol: float = TOL) -> bool:
    return a <= b + tol * max(1.0, abs(b))


@dataclass
class VerifyConfig:
    qs: tuple[int, ...] = (1, 2, 3)
    ps: tuple[float, ...] = (1.0, 2.0)
    depth: int = 8
    seed: int = 0


@dataclass
class CheckResult:
    suite: str
    anchor: str
    passed: bool
    detail: str = ""
    evidence: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.suite}: {self.anchor} -- {self.detail}"

    def to_dict(self) -> dict:
        return {"suite": self.suite, "anchor": self.anchor, "passed": self.passed,
                "detail": self.detail, "evidence": self.evidence}


def _rng(cfg: VerifyConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


def _builtin_maps(params: TreeParams, depth: int) -> list:
    return [
        identity_map(params, depth),
        map_parent_phi2(params, depth),
        map_child_phi3(params, depth),
        map_collapse_phi1(params, depth),
        map_halving_phi4(params, depth),
        map_clamp(params, depth, 2),
    ]


def check_growth(cfg: VerifyConfig) -> list[CheckResult]:
    rng = _rng(cfg, 1)
    worst, count = 0.0, 0
    for k in range(200):
        q = cfg.qs[k % len(cfg.qs)]
        p = cfg.ps[(k // len(cfg.qs)) % len(cfg.ps)]
        f = random_function(TreeParams(q), cfg.depth, rng, p)
        if norm(f, p) == 0:
            continue
        worst = max(worst, growth_bound_check(f, p).max_ratio)
        count += 1
    equality = []
    for q in cfg.qs:
        params = TreeParams(q)
        for p in cfg.ps:
            for n in range(cfg.depth + 1):
                w = vertex_at(params, n, level_size(params, n) - 1)
                rep = growth_bound_check(extremal_fw(params, w, p), p)
                equality.append(close(rep.max_ratio, 1.0) and rep.attained_at == w)
    return [
        CheckResult("growth", "growth estimate |f(v)| <= W(v)^(1/p) ||f||", leq(worst, 1.0),
                    f"max ratio {worst!r} over {count} random f", {"max_ratio": worst}),
        CheckResult("growth", "growth estimate is sharp at f_w", all(equality),
                    f"ratio 1 attained at w for {sum(equality)}/{len(equality)} f_w"),
    ]


def check_extremal(cfg: VerifyConfig) -> list[CheckResult]:
    worst, total = 0.0, 0
    for q in cfg.qs:
        params = TreeParams(q)
        for p in (1.0, 2.0, 3.0):
            for w in iter_ball(params, cfg.depth):
                worst = max(worst, abs(norm(extremal_fw(params, w, p), p) - 1.0))
                total += 1
    return [CheckResult("extremal", "||f_w|| = 1 for every w", worst <= TOL,
                        f"max |norm - 1| = {worst:.3g} over {total} (w, p)")]


def check_q1_bound(cfg: VerifyConfig, n_maps: int = 50, depth: int = 10) -> list[CheckResult]:
    prng = random.Random(cfg.seed)
    params = TreeParams(1)
    worst, eq_ok, moved = Fraction(0), True, 0
    for _ in range(n_maps):
        phi = random_table_map(params, depth, prng)
        res = truncated_opnorm_exact(phi, 1.0, depth, depth)
        worst = max(worst, res.value_pow)
        if phi(ROOT) != ROOT:
            moved += 1
            eq_ok &= all(close(truncated_opnorm_exact(phi, p, depth, depth).value ** p, 2.0) for p in cfg.ps)
    return [
        CheckResult("q1-bound", "q=1: ||C_phi||^p <= 2 for every self map", worst <= 2,
                    f"max truncated norm^p {worst} over {n_maps} random maps (depth {depth})"),
        CheckResult("q1-bound", "q=1: ||C_phi||^p = 2 when phi(o) != o", eq_ok and moved > 0,
                    f"equality checked on {moved} maps moving the root"),
    ]


def check_automorphism(cfg: VerifyConfig, depth: int = 6) -> list[CheckResult]:
    prng = random.Random(cfg.seed + 7)
    rng = _rng(cfg, 4)
    rows, ok = [], True
    for q in [q for q in cfg.qs if q >= 2]:
        params = TreeParams(q)
        for k in (1, 2, 3):
            for u in (lex_least(params, k), vertex_at(params, k, prng.randrange(level_size(params, k)))):
                phi = shift_automorphism(params, u, depth)
                expected = (q + 1) * q ** (k - 1)
                res = truncated_opnorm_exact(phi, 1.0, depth + k, depth)
                good = res.value_pow == expected and automorphism_norm_pow(phi) == expected
                for p in cfg.ps:
                    good &= close(truncated_opnorm_exact(phi, p, depth + k, depth).value ** p, expected)
                    good &= close(automorphism_norm(phi, p) ** p, expected)
                ok &= good
                rows.append(f"q={q} u={u}: {res.value_pow}")
    iso_worst = 0.0
    for t in range(100):
        q = cfg.qs[t % len(cfg.qs)]
        p = cfg.ps[t % len(cfg.ps)]
        params = TreeParams(q)
        d = min(cfg.depth, 6)
        phi = shift_automorphism(params, ROOT, d, rng=prng)
        f = random_function(params, d, rng, p)
        a, b = norm(compose(phi, f, d), p), norm(f, p)
        iso_worst = max(iso_worst, abs(a - b) / max(1.0, b))
    return [
        CheckResult("automorphism", "||C_phi||^p = (q+1) q^(|phi(o)|-1) for automorphisms", ok,
                    "; ".join(rows)),
        CheckResult("automorphism", "root-fixing automorphisms are isometries", iso_worst <= TOL,
                    f"max relative gap {iso_worst:.3g} over 100 random (phi, f)"),
    ]


def check_lower_bound(cfg: VerifyConfig) -> list[CheckResult]:
    prng = random.Random(cfg.seed + 11)
    ok, atoms, atoms_ok, total = True, 0, True, 0
    for q in cfg.qs:
        params = TreeParams(q)
        depth = min(cfg.depth, 6)
        maps = _builtin_maps(params, depth) + [random_table_map(params, min(depth, 4), prng) for _ in range(5)]
        maps.append(shift_automorphism(params, lex_least(params, 2), 4))
        for phi in maps:
            D = N = phi.coverage_depth
            res = truncated_opnorm_exact(phi, 1.0, D, N)
            lb = lower_bound_fw(phi, 1.0, N, D)
            ok &= res.value_pow >= lb.value_pow
            total += 1
            if res.single_atom:
                atoms += 1
                atoms_ok &= res.value_pow == lb.value_pow
    return [
        CheckResult("lower-bound", "sup W(w) N(n,w)/|D_n| <= ||C_phi||^p", ok,
                    f"oracle dominates the f_w bound on {total} maps"),
        CheckResult("lower-bound", "single-atom optima meet the f_w bound", atoms_ok and atoms > 0,
                    f"{atoms} single-atom cases, equality exact"),
    ]


def example1_function(params: TreeParams, depth: int, p: float, chosen=None) -> TreeFunction:
    """``|D_n|^(1/p)`` at the chosen ``v_n`` for ``n >= 1``, zero elsewhere (also at the root)."""
    chosen = chosen or [lex_least(params, n) for n in range(depth + 1)]
    return TreeFunction.sparse(params, depth, {chosen[n]: level_size(params, n) ** (1.0 / p)
                                               for n in range(1, depth + 1)})


def check_example1(cfg: VerifyConfig, depth: int = 10) -> list[CheckResult]:
    params = TreeParams(2)
    phi = map_collapse_phi1(params, depth)
    ok, norm_ok = True, True
    for p in cfg.ps:
        f = example1_function(params, depth, p)
        norm_ok &= close(norm(f, p), 1.0)
        g = compose(phi, f, depth)
        for m in range(1, depth + 1):
            ok &= close(mp_level_pow(g, p, m), 3 * 2 ** (m - 1))
    trend = classify_trend(truncated_opnorm_exact(phi, 1.0).per_level)
    return [
        CheckResult("example1", "collapse map: M_p^p(m, C f) = (q+1) q^(m-1), unbounded for q >= 2",
                    ok and norm_ok and trend == "unbounded-trend",
                    f"q=2, m=1..{depth}, ||f||=1, oracle {trend}"),
    ]


def check_example2(cfg: VerifyConfig) -> list[CheckResult]:
    rng = _rng(cfg, 2)
    d = cfg.depth
    shift_ok, iso_worst = True, 0.0
    flags_ok = True
    for t in range(100):
        q = cfg.qs[t % len(cfg.qs)]
        p = cfg.ps[(t // len(cfg.qs)) % len(cfg.ps)]
        params = TreeParams(q)
        phi = map_parent_phi2(params, d + 1)
        f = random_function(params, d, rng, p)
        g = compose(phi, f, d + 1)
        for n in range(2, d + 1):
            shift_ok &= close(mp_level_pow(g, p, n), mp_level_pow(f, p, n - 1))
        shift_ok &= close(mp_level_pow(g, p, 1), mp_level_pow(f, p, 0))
        a, b = norm(g, p), norm(f, p)
        iso_worst = max(iso_worst, abs(a - b) / max(1.0, b))
    for q in cfg.qs:
        rep = compactness_diagnostics(map_parent_phi2(TreeParams(q), d))
        flags_ok &= all(x.min == x.max == 1 for x in rep.displacement[1:])
        flags_ok &= rep.hint("cor-displacement").status == "violated"
    return [
        CheckResult("example2", "parent map: M_p^p(n, C f) = M_p^p(n-1, f)", shift_ok, f"n = 1..{d}, 100 random f"),
        CheckResult("example2", "parent map is an isometry", iso_worst <= TOL, f"max relative gap {iso_worst:.3g}"),
        CheckResult("example2", "parent map: displacement = 1, not compact", flags_ok,
                    "diagnostics flag cor-displacement violated"),
    ]


def check_example3(cfg: VerifyConfig) -> list[CheckResult]:
    rng = _rng(cfg, 3)
    d = cfg.depth
    worst = 0.0
    for t in range(100):
        q = cfg.qs[t % len(cfg.qs)]
        p = cfg.ps[(t // len(cfg.qs)) % len(cfg.ps)]
        params = TreeParams(q)
        f = random_function(params, d, rng, p)
        nf = norm(f, p)
        if nf == 0:
            continue
        worst = max(worst, norm(compose(map_halving_phi4(params, d), f, d), p) ** p / nf ** p)
    decay_ok, rows = True, []
    for q in [q for q in cfg.qs if q >= 2]:
        rep = compactness_diagnostics(map_halving_phi4(TreeParams(q), 12))
        for k in range(1, 7):
            decay_ok &= rep.decay_sequence[k] == Fraction(1, q ** k)
            decay_ok &= rep.decay_argmax[k] == lex_least(TreeParams(q), k)
        rows.append(f"q={q}: " + ", ".join(str(rep.decay_sequence[k]) for k in range(1, 7)))
    return [
        CheckResult("example3", "halving map: ||C f||^p <= 2 ||f||^p", leq(worst, 2.0),
                    f"max ratio {worst:.6g} over 100 random f"),
        CheckResult("example3", "halving map: max_{|w|=k} s(w) = q^-k", decay_ok, "; ".join(rows)),
    ]


def check_tinf(cfg: VerifyConfig) -> list[CheckResult]:
    rng = _rng(cfg, 5)
    prng = random.Random(cfg.seed + 5)
    ok, witness_ok = True, True
    for t in range(100):
        q = cfg.qs[t % len(cfg.qs)]
        params = TreeParams(q)
        depth = min(cfg.depth, 5)
        phi = random_table_map(params, depth, prng)
        f = random_function(params, depth, rng)
        ok &= leq(norm(compose(phi, f, depth), INF), norm(f, INF))
        res = opnorm_infinity(phi)
        witness_ok &= res.witness_image_norm == 1.0 and norm(res.witness, INF) == 1.0
    return [
        CheckResult("t-inf", "||C_phi f||_inf <= ||f||_inf", ok, "100 random (phi, f)"),
        CheckResult("t-inf", "indicator of phi(o) attains ||C_phi|| = 1", witness_ok, "100 random maps"),
    ]


def check_norm_axioms(cfg: VerifyConfig) -> list[CheckResult]:
    rng = _rng(cfg, 6)
    tri, hom, zero = True, True, True
    for t in range(200):
        q = cfg.qs[t % len(cfg.qs)]
        p = [*cfg.ps, INF][t % (len(cfg.ps) + 1)]
        params = TreeParams(q)
        f = random_function(params, cfg.depth, rng, 2.0)
        g = random_function(params, cfg.depth, rng, 2.0)
        lam = complex(rng.normal(), rng.normal())
        nf, ng = norm(f, p), norm(g, p)
        tri &= leq(norm(f + g, p), nf + ng)
        hom &= close(norm(f * lam, p), abs(lam) * nf)
        zero &= (norm(f - f, p) == 0) and (nf > 0 or not list(f.items()))
    return [
        CheckResult("norm-axioms", "triangle inequality", tri, "200 random pairs"),
        CheckResult("norm-axioms", "absolute homogeneity", hom, "200 random (f, lambda)"),
        CheckResult("norm-axioms", "||f|| = 0 iff f = 0", zero, "200 random f"),
    ]


def check_pointwise(cfg: VerifyConfig) -> list[CheckResult]:
    rng = _rng(cfg, 7)
    worst = 0.0
    for t in range(100):
        q = cfg.qs[t % len(cfg.qs)]
        p = cfg.ps[t % len(cfg.ps)]
        params = TreeParams(q)
        f = random_function(params, cfg.depth, rng, p, kind="sparse")
        g = random_function(params, cfg.depth, rng, p, kind="sparse")
        h = f - g
        nh = norm(h, p)
        for v, x in h.items():
            worst = max(worst, abs(f(v) - g(v)) / (weight(params, v) ** (1.0 / p) * nh))
    return [CheckResult("pointwise", "|f(v) - g(v)| <= W(v)^(1/p) ||f - g||", leq(worst, 1.0),
                        f"max ratio {worst!r} over 100 random pairs")]


def check_sufficiency_floor(cfg: VerifyConfig) -> list[CheckResult]:
    prng = random.Random(cfg.seed + 13)
    ok, total = True, 0
    for q in cfg.qs:
        params = TreeParams(q)
        maps = _builtin_maps(params, cfg.depth) + [random_table_map(params, 5, prng) for _ in range(10)]
        maps.append(shift_automorphism(params, lex_least(params, 1), 5))
        for phi in maps:
            ok &= sufficiency_series(phi).floor_holds()
            total += 1
    return [CheckResult("sufficiency-floor", "sum_{|v|=n} q^|phi(v)| >= (q+1) q^(n-1)", ok,
                        f"exact on {total} maps, every level")]


def check_table(cfg: VerifyConfig) -> list[CheckResult]:
    """Evidence for each cell of the q=1 versus q>=2 comparison."""
    prng = random.Random(cfg.seed + 17)
    d = cfg.depth
    one = TreeParams(1)
    worst = max(truncated_opnorm_exact(random_table_map(one, d, prng), 1.0).value_pow for _ in range(20))
    many = TreeParams(2)
    collapse = truncated_opnorm_exact(map_collapse_phi1(many, d), 1.0)
    halving1 = compactness_diagnostics(map_halving_phi4(one, d))
    clamp1 = compactness_diagnostics(map_clamp(one, d, 2))
    halving2 = compactness_diagnostics(map_halving_phi4(many, 12))
    return [
        CheckResult("table", "q=1: every self map induces a bounded operator", worst <= 2,
                    f"max ||C_phi||^p over 20 random maps = {worst}"),
        CheckResult("table", "q>=2: some self map induces an unbounded operator",
                    classify_trend(collapse.per_level) == "unbounded-trend",
                    "collapse map, per-level norm^p " + ", ".join(str(x) for x in collapse.per_level)),
        CheckResult("table", "q=1: only bounded self maps induce compact operators",
                    halving1.hint("cor-q1-bounded").status == "violated"
                    and clamp1.hint("thm-bounded-range").status == "consistent",
                    f"halving: {halving1.verdict}; clamp:2: {clamp1.verdict}"),
        CheckResult("table", "q>=2: some unbounded self map induces a compact operator",
                    halving2.verdict.startswith("consistent with compact")
                    and halving2.hint("thm-bounded-range").status != "consistent",
                    f"halving (q=2): {halving2.verdict}"),
    ]


SUITES: dict[str, Callable[[VerifyConfig], list[CheckResult]]] = {
    "growth": check_growth,
    "extremal": check_extremal,
    "q1-bound": check_q1_bound,
    "automorphism": check_automorphism,
    "lower-bound": check_lower_bound,
    "example1": check_example1,
    "example2": check_example2,
    "example3": check_example3,
    "t-inf": check_tinf,
    "norm-axioms": check_norm_axioms,
    "pointwise": check_pointwise,
    "sufficiency-floor": check_sufficiency_floor,
    "table": check_table,
}


def run_suites(cfg: VerifyConfig, names: list[str] | None = None) -> list[CheckResult]:
    names = list(SUITES) if not names else names
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    out: list[CheckResult] = []
    for name in names:
        out.extend(SUITES[name](cfg))
    return out
