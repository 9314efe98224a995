import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from hardytree.errors import CoverageError, DomainError
from hardytree.hardy import INF, TreeFunction, extremal_fw, mp_level_pow, norm
from hardytree.operators import (
    automorphism_norm,
    classify_trend,
    compactness_diagnostics,
    compose,
    lower_bound_fw,
    operator_norm_bounds,
    opnorm_infinity,
    sequential_compactness_probe,
    sufficiency_series,
    truncated_opnorm_exact,
)
from hardytree.sampling import random_function
from hardytree.selfmaps import (
    identity_map,
    map_child_phi3,
    map_clamp,
    map_collapse_phi1,
    map_halving_phi4,
    map_parent_phi2,
    random_table_map,
    shift_automorphism,
)
from hardytree.tree import ROOT, TreeParams, Vertex, enumerate_level, iter_ball, level_size
from hardytree.verify import example1_function


def lp_opnorm_pow(phi, D, N):
    """Independent route: one LP per target level over x_w = |f(w)|^p."""
    params = phi.params
    ball = list(iter_ball(params, D))
    pos = {w: i for i, w in enumerate(ball)}
    A = np.zeros((D + 1, len(ball)))
    for w, i in pos.items():
        A[w.depth, i] = 1
    b = [level_size(params, m) for m in range(D + 1)]
    best = 0.0
    for n in range(N + 1):
        c = np.zeros(len(ball))
        for v in enumerate_level(params, n):
            w = phi(v)
            if w in pos:
                c[pos[w]] += 1 / level_size(params, n)
        res = linprog(-c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
        best = max(best, -res.fun)
    return best


def test_compose_identity(params, rng):
    f = random_function(params, 4, rng)
    g = compose(identity_map(params, 4), f)
    assert np.array_equal(g.to_dense().level(3), f.to_dense().level(3))
    assert g.depth == 4


def test_compose_parent_level_shift(params, rng):
    for p in [1.0, 2.0, 3.0]:
        f = random_function(params, 5, rng, p)
        g = compose(map_parent_phi2(params, 6), f, 6)
        assert mp_level_pow(g, p, 1) == pytest.approx(mp_level_pow(f, p, 0), rel=1e-12)
        for n in range(2, 7):
            assert mp_level_pow(g, p, n) == pytest.approx(mp_level_pow(f, p, n - 1), rel=1e-12, abs=1e-300)


def test_compose_collapse_example():
    params = TreeParams(2)
    for p in [1.0, 2.0]:
        f = example1_function(params, 8, p)
        g = compose(map_collapse_phi1(params, 8), f)
        for m in range(1, 9):
            assert mp_level_pow(g, p, m) == pytest.approx(3 * 2 ** (m - 1), rel=1e-12)


def test_compose_default_depth_and_errors():
    params = TreeParams(2)
    f = TreeFunction.zeros(params, 3)
    assert compose(map_child_phi3(params, 6), f).depth == 2
    with pytest.raises(CoverageError, match="lies beyond the function depth"):
        compose(map_child_phi3(params, 6), f, 3)
    with pytest.raises(CoverageError):
        compose(map_parent_phi2(params, 2), f, 3)


def test_lower_bound_examples():
    prng = random.Random(5)
    params = TreeParams(1)
    for _ in range(10):
        phi = random_table_map(params, 6, prng)
        lb = lower_bound_fw(phi, 1.0)
        if phi(ROOT) != ROOT:
            assert lb.value_pow == 2
        else:
            assert lb.value_pow >= 1
    for q in [2, 3]:
        params = TreeParams(q)
        for k in [1, 2, 3]:
            u = Vertex((0,) * k)
            lb = lower_bound_fw(shift_automorphism(params, u, 4), 2.0)
            assert lb.value_pow >= (q + 1) * q ** (k - 1)
            assert lb.value == pytest.approx(math.sqrt(lb.value_pow))
    lb = lower_bound_fw(map_parent_phi2(TreeParams(2), 4), 1.0)
    assert lb.value_pow >= 1 and lb.w == ROOT and lb.n == 0


def test_lower_bound_witness_attains(params):
    phi = map_child_phi3(params, 5)
    lb = lower_bound_fw(phi, 2.0)
    f = lb.witness(params, phi.max_image_depth())
    assert norm(compose(phi, f, 5), 2.0) ** 2 == pytest.approx(float(lb.value_pow), rel=1e-12)


def test_sufficiency_examples(params):
    q = params.q
    s = sufficiency_series(map_parent_phi2(params, 6))
    for n in range(1, 7):
        assert s.values[n] == Fraction(level_size(params, n), q)
    s = sufficiency_series(map_collapse_phi1(params, 6))
    assert all(s.values[n] == level_size(params, n) for n in range(1, 7))
    assert s.floor_holds()
    for n, v in s.values.items():
        assert v >= Fraction(q + 1, q)


def test_oracle_identity(params):
    for D, N in [(0, 0), (2, 3), (4, 4)]:
        res = truncated_opnorm_exact(identity_map(params, 4), 2.0, D, N)
        assert res.value_pow == 1


@pytest.mark.parametrize("seed", range(6))
def test_oracle_matches_lp(seed):
    prng = random.Random(seed)
    q = [1, 2, 3][seed % 3]
    params = TreeParams(q)
    depth = 4 if q < 3 else 3
    maps = [random_table_map(params, depth, prng), map_halving_phi4(params, depth), map_child_phi3(params, depth)]
    for phi in maps:
        D = phi.max_image_depth() if seed % 2 else depth
        res = truncated_opnorm_exact(phi, 1.0, D, depth)
        assert float(res.value_pow) == pytest.approx(lp_opnorm_pow(phi, D, depth), rel=1e-9)


def test_oracle_witness_reproduces_value(params):
    prng = random.Random(2)
    for phi in [random_table_map(params, 4, prng), map_halving_phi4(params, 4), shift_automorphism(params, Vertex((1,)), 3)]:
        for p in [1.0, 2.0, 3.0]:
            res = truncated_opnorm_exact(phi, p)
            assert norm(res.witness, p) == pytest.approx(1.0, abs=1e-12)
            g = compose(phi, res.witness, res.target_depth)
            assert norm(g, p) == pytest.approx(res.value, rel=1e-12)


def test_oracle_monotone_and_dominates_lower_bound(params):
    prng = random.Random(9)
    for phi in [random_table_map(params, 4, prng) for _ in range(4)] + [map_halving_phi4(params, 4)]:
        grid = [[truncated_opnorm_exact(phi, 1.0, D, N).value_pow for N in range(5)] for D in range(5)]
        for D in range(5):
            for N in range(5):
                if D < 4:
                    assert grid[D][N] <= grid[D + 1][N]
                if N < 4:
                    assert grid[D][N] <= grid[D][N + 1]
                assert grid[D][N] >= lower_bound_fw(phi, 1.0, N, D).value_pow


def test_oracle_upper_consistency(params):
    prng = random.Random(4)
    for phi in [random_table_map(params, 4, prng, target_depth=3) for _ in range(5)]:
        res = truncated_opnorm_exact(phi, 1.0, phi.max_image_depth(), 4)
        assert res.value_pow <= sufficiency_series(phi, 4).upper_bound_pow


def test_q1_bound_on_random_maps():
    prng = random.Random(0)
    params = TreeParams(1)
    for _ in range(20):
        phi = random_table_map(params, 8, prng)
        res = truncated_opnorm_exact(phi, 2.0, 8, 8)
        assert res.value_pow <= 2
        if phi(ROOT) != ROOT:
            assert res.value == pytest.approx(math.sqrt(2), abs=1e-12)


def test_automorphism_norm_examples():
    p2, p3 = TreeParams(2), TreeParams(3)
    assert automorphism_norm(shift_automorphism(p2, ROOT, 3), 2.0) == 1
    phi = shift_automorphism(p2, Vertex((2, 1)), 4)
    assert automorphism_norm(phi, 1.0) == 6
    phi = shift_automorphism(p3, Vertex((3,)), 4)
    assert automorphism_norm(phi, 2.0) == pytest.approx(2.0, abs=1e-12)
    assert truncated_opnorm_exact(phi, 2.0, 5, 4).value == pytest.approx(2.0, abs=1e-12)


def test_opnorm_infinity(params, rng):
    prng = random.Random(8)
    phi = random_table_map(params, 4, prng)
    samples = [random_function(params, 4, rng) for _ in range(20)]
    res = opnorm_infinity(phi, samples)
    assert res.value == 1 and res.witness_image_norm == 1 and res.samples_checked == 20
    g = compose(phi, TreeFunction.constant(params, 4, 1.0))
    assert norm(g, INF) == 1


def test_diagnostics_parent():
    rep = compactness_diagnostics(map_parent_phi2(TreeParams(2), 8))
    assert rep.hint("cor-displacement").status == "violated"
    assert rep.verdict.startswith("not compact (displacement bounded)")
    assert rep.boundedness_trend == "bounded-trend"


@pytest.mark.parametrize("q", [2, 3])
def test_diagnostics_halving(q):
    rep = compactness_diagnostics(map_halving_phi4(TreeParams(q), 12))
    for k in range(1, 7):
        assert rep.decay_sequence[k] == Fraction(1, q ** k)
        assert rep.decay_argmax[k] == Vertex((0,) * k)
    assert rep.verdict.startswith("consistent with compact")
    assert all(x >= 0 for x in rep.decay_sequence.values())


def test_diagnostics_bounded_and_child():
    rep = compactness_diagnostics(map_clamp(TreeParams(2), 8, 2))
    assert rep.bounded_range == 2
    assert rep.hint("thm-bounded-range").status == "consistent"
    assert "compact by Theorem" in rep.hint("thm-bounded-range").message
    rep = compactness_diagnostics(map_child_phi3(TreeParams(2), 8))
    assert rep.verdict.startswith("not compact") and rep.boundedness_trend == "bounded-trend"
    rep = compactness_diagnostics(map_halving_phi4(TreeParams(1), 8))
    assert rep.hint("cor-q1-bounded").status == "violated"


def test_probe_bounded_map():
    params = TreeParams(2)
    rep = sequential_compactness_probe(map_clamp(params, 8, 2), 1.0)
    assert rep.norms[-1] == 0 and all(x == 0 for x in rep.norms[2:])
    assert rep.trend == "vanishing"


def test_probe_parent_stays_one(params):
    rep = sequential_compactness_probe(map_parent_phi2(params, 8), 1.0)
    assert rep.norms == pytest.approx([1.0] * len(rep.norms), abs=1e-12)
    assert rep.trend == "non-vanishing"


def test_probe_infinity_range_family():
    rep = sequential_compactness_probe(map_child_phi3(TreeParams(2), 7), INF, family="range")
    assert rep.norms == [1.0] * len(rep.norms) and len(rep.norms) >= 7


def test_probe_rejects_unbounded_sequence():
    params = TreeParams(2)
    phi = map_parent_phi2(params, 4)
    trials = [(str(k), extremal_fw(params, Vertex((0,) * k), 1.0, 4) * k) for k in range(1, 4)]
    with pytest.raises(DomainError):
        sequential_compactness_probe(phi, 1.0, trials)


def test_operator_norm_bounds_reports():
    b = operator_norm_bounds(map_parent_phi2(TreeParams(2), 8), 1.0)
    assert b.lower == b.upper == 1.0
    b = operator_norm_bounds(shift_automorphism(TreeParams(2), Vertex((0, 1)), 6), 1.0)
    assert b.lower == b.upper == b.formula_value == 6.0
    b = operator_norm_bounds(map_collapse_phi1(TreeParams(2), 8), 1.0)
    assert b.upper is None and b.upper_status == "unbounded-trend"
    assert b.lower_bound_fw.per_level == [1] + [3 * 2 ** (m - 1) for m in range(1, 9)]
    b = operator_norm_bounds(map_child_phi3(TreeParams(1), 5), INF)
    assert b.lower == b.upper == 1.0
    d = b.to_dict()
    assert d["p"] == "inf" and d["witness"]


def test_classify_trend():
    assert classify_trend([1, 3, 6, 12, 24]) == "unbounded-trend"
    assert classify_trend([1, 2, 2, 2, 2]) == "bounded-trend"
    assert classify_trend([1, 2]) == "inconclusive"


def test_oracle_default_domain_reaches_images():
    params = TreeParams(2)
    phi = map_child_phi3(params, 0)
    res = truncated_opnorm_exact(phi, 1.0)
    assert res.domain_depth == 1 and res.value_pow == 3
    assert truncated_opnorm_exact(phi, 1.0, 0).value_pow == 0
    b = operator_norm_bounds(phi, 1.0, domain_depth=0)
    assert b.lower == 0 and b.witness.startswith("none")
