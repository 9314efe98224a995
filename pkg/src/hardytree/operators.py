"""Composition operators ``f -> f o phi`` on the truncated T_p spaces.

Everything here works at finite depth.  Norm bounds come with the function
that attains them, so any reported value can be re-checked with
:func:`compose` and :func:`~hardytree.hardy.tp_norm`.  Compactness is an
asymptotic property; :func:`compactness_diagnostics` only reports whether
the finite-depth data are consistent with each criterion.

The p-th powers of the truncated norms are rational numbers that do not
depend on ``p`` (all ratios are counts over level sizes), so they are
computed exactly with :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import CoverageError, DomainError
from .hardy import (
    INF,
    TreeFunction,
    as_exponent,
    extremal_fw,
    format_exponent,
    norm,
    weight,
)
from .selfmaps import (
    CountingTable,
    LevelDisplacement,
    PartialAutomorphism,
    SelfMap,
    counting_function,
    displacement_profile,
)
from .tree import ROOT, TreeParams, Vertex, format_vertex, lex_least, level_size, vertex_at

TOL = 1e-12


def _root(x: Fraction | float, p: float) -> float:
    return float(x) ** (1.0 / p)


def classify_trend(values: Sequence[Fraction | float], rel_tol: float = TOL) -> str:
    """``bounded-trend`` if the running max is flat over the deeper half, else ``unbounded-trend``."""
    if len(values) < 3:
        return "inconclusive"
    running = list(np.maximum.accumulate([float(v) for v in values]))
    mid = len(running) // 2
    if running[-1] <= running[mid] * (1 + rel_tol):
        return "bounded-trend"
    return "unbounded-trend"


# -- composition


def compose(phi: SelfMap, f: TreeFunction, depth: int | None = None) -> TreeFunction:
    """``(C_phi f)(v) = f(phi(v))`` for ``|v| <= depth``.

    Without ``depth`` the output goes as deep as both the map's coverage and
    ``f``'s domain allow.
    """
    if phi.params != f.params:
        raise DomainError("map and function live on different trees")
    if depth is None:
        depth = -1
        for n in range(phi.coverage_depth + 1):
            if int(phi.image_depths(n).max()) > f.depth:
                break
            depth = n
        if depth < 0:
            raise CoverageError(f"phi(o) = {phi(ROOT)} lies beyond the function depth {f.depth}")
    elif depth > phi.coverage_depth:
        raise CoverageError(f"output depth {depth} exceeds coverage depth {phi.coverage_depth} of {phi.label!r}")
    parts = []
    for n in range(depth + 1):
        levels, idx = phi.images(n)
        bad = np.flatnonzero(levels > f.depth)
        if bad.size:
            v = vertex_at(phi.params, n, int(bad[0]))
            raise CoverageError(f"phi({v}) = {phi(v)} lies beyond the function depth {f.depth}")
        parts.append(f.values_at(levels, idx))
    return TreeFunction(f.params, depth, flat=np.concatenate(parts))


# -- lower bound from the extremal functions f_w


@dataclass
class LowerBound:
    """``sup W(w) N(n,w) / |D_n|`` over the scanned ``(w, n)``: a lower bound on ``||C_phi||^p``."""

    p: float
    value_pow: Fraction
    w: Vertex
    n: int
    per_level: list[Fraction]

    @property
    def value(self) -> float:
        return _root(self.value_pow, self.p)

    def witness(self, params: TreeParams, depth: int | None = None) -> TreeFunction:
        return extremal_fw(params, self.w, self.p, depth)


def lower_bound_fw(phi: SelfMap, p: float, n_max: int | None = None, w_max_level: int | None = None) -> LowerBound:
    p = as_exponent(p)
    if p == INF:
        raise DomainError("lower_bound_fw needs a finite p; see opnorm_infinity")
    n_max = phi.coverage_depth if n_max is None else n_max
    counts = counting_function(phi, n_max)
    params = phi.params
    best: tuple[Fraction, Vertex, int] | None = None
    per_level = []
    for n in range(n_max + 1):
        dn = level_size(params, n)
        level_best = Fraction(0)
        for w, c in counts.row(n).items():
            if w_max_level is not None and w.depth > w_max_level:
                continue
            val = Fraction(weight(params, w) * c, dn)
            level_best = max(level_best, val)
            # strict > keeps the first (lex-least w, then smallest n) on ties
            if best is None or val > best[0]:
                best = (val, w, n)
        per_level.append(level_best)
    if best is None:
        return LowerBound(p, Fraction(0), ROOT, 0, per_level)
    return LowerBound(p, best[0], best[1], best[2], per_level)


# -- sufficiency series


@dataclass
class SufficiencySeries:
    """``S(n) = sum_{|v|=n} q^(|phi(v)| - n)`` for ``n = 1..n_max``."""

    q: int
    values: dict[int, Fraction]
    root_weight: int

    @property
    def running_max(self) -> list[Fraction]:
        out, m = [], Fraction(0)
        for n in sorted(self.values):
            m = max(m, self.values[n])
            out.append(m)
        return out

    @property
    def max(self) -> Fraction:
        return max(self.values.values(), default=Fraction(0))

    @property
    def upper_bound_pow(self) -> Fraction:
        """``max{W(phi(o)), max_n S(n)}``: bounds ``||C_phi f||^p / ||f||^p`` over the scanned levels."""
        return max(Fraction(self.root_weight), self.max)

    def floor_holds(self) -> bool:
        """``S(n) q^n >= (q+1) q^(n-1)`` for every scanned level (exact)."""
        q = self.q
        return all(s * q ** n >= (q + 1) * q ** (n - 1) for n, s in self.values.items())


def sufficiency_series(phi: SelfMap, n_max: int | None = None) -> SufficiencySeries:
    n_max = phi.coverage_depth if n_max is None else n_max
    phi._check_covered(n_max)
    q = phi.params.q
    values = {}
    for n in range(1, n_max + 1):
        depths, counts = np.unique(phi.image_depths(n), return_counts=True)
        values[n] = sum((Fraction(q) ** (int(m) - n) * int(c) for m, c in zip(depths, counts)), Fraction(0))
    return SufficiencySeries(q, values, weight(phi.params, phi(ROOT)))


# -- exact truncated operator norm


@dataclass
class OracleResult:
    """Exact norm of ``C_phi`` on functions supported in ``|w| <= D``, measured on levels ``n <= N``."""

    p: float
    value_pow: Fraction
    n_star: int
    allocation: dict[int, Vertex]
    per_level: list[Fraction]
    witness: TreeFunction
    domain_depth: int
    target_depth: int

    @property
    def value(self) -> float:
        return _root(self.value_pow, self.p)

    @property
    def single_atom(self) -> bool:
        return len(self.allocation) == 1


def truncated_opnorm_exact(
    phi: SelfMap,
    p: float,
    domain_depth: int | None = None,
    target_depth: int | None = None,
) -> OracleResult:
    """Maximize ``||C_phi f||^p`` over ``||f|| <= 1`` with support in the ball of radius ``domain_depth``.

    With ``x_w = |f(w)|^p`` the constraint is one budget ``sum_{|w|=m} x_w <= |D_m|``
    per level and each ``M_p^p(n, C_phi f) = sum_w N(n,w) x_w / |D_n|`` is linear,
    so for fixed ``n`` the optimum spends each level's whole budget on the vertex
    with the most level-``n`` preimages.  The answer is the best ``n``.
    """
    p = as_exponent(p)
    if p == INF:
        raise DomainError("truncated_opnorm_exact needs a finite p; see opnorm_infinity")
    params = phi.params
    N = phi.coverage_depth if target_depth is None else target_depth
    if domain_depth is None:
        # reach every image level, else outward maps read as zero
        D = min(max(phi.coverage_depth, phi.max_image_depth(N)), params.depth_cap)
    else:
        D = domain_depth
    params.check_depth(D)
    counts = counting_function(phi, N)
    per_level = []
    best: tuple[Fraction, int, dict[int, int]] | None = None
    for n in range(N + 1):
        dn = level_size(params, n)
        maxima = {m: ci for m, ci in counts.level_maxima(n).items() if m <= D}
        val = sum((Fraction(level_size(params, m) * c, dn) for m, (c, _) in maxima.items()), Fraction(0))
        per_level.append(val)
        if best is None or val > best[0]:
            best = (val, n, {m: i for m, (_, i) in maxima.items()})
    value_pow, n_star, alloc_idx = best
    allocation = {m: vertex_at(params, m, i) for m, i in sorted(alloc_idx.items())}
    w_depth = max(D, phi.max_image_depth(N))
    witness = TreeFunction.sparse(
        params, w_depth, {w: level_size(params, m) ** (1.0 / p) for m, w in allocation.items()}
    )
    return OracleResult(p, value_pow, n_star, allocation, per_level, witness, D, N)


# -- p = infinity


@dataclass
class InfinityNorm:
    value: float
    witness: TreeFunction
    witness_image_norm: float
    samples_checked: int


def opnorm_infinity(
    phi: SelfMap,
    samples: Iterable[TreeFunction] = (),
) -> InfinityNorm:
    """``||C_phi|| = 1`` on T_inf, witnessed by the indicator of ``phi(o)``.

    Each sampled ``f`` is checked for ``||C_phi f||_inf <= ||f||_inf``.
    """
    target = phi(ROOT)
    depth = phi.max_image_depth()
    chi = TreeFunction.indicator(phi.params, target, depth)
    attained = norm(compose(phi, chi, phi.coverage_depth), INF)
    k = 0
    for f in samples:
        g = compose(phi, f)
        if norm(g, INF) > norm(f, INF) * (1 + TOL):
            raise AssertionError(f"sup-norm contraction failed for {f!r}")
        k += 1
    return InfinityNorm(1.0, chi, attained, k)


# -- automorphisms


def automorphism_norm_pow(phi: PartialAutomorphism) -> int:
    """Closed form ``||C_phi||^p``: 1 if the root is fixed, else ``(q+1) q^(|phi(o)|-1)``."""
    phi.validate()
    return weight(phi.params, phi.root_image)


def automorphism_norm(phi: PartialAutomorphism, p: float) -> float:
    p = as_exponent(p)
    if p == INF:
        return 1.0
    return automorphism_norm_pow(phi) ** (1.0 / p)


# -- compactness diagnostics


@dataclass
class Hint:
    criterion: str
    status: str  # consistent | violated | inconclusive
    message: str

    def __str__(self) -> str:
        return f"{self.criterion}: {self.status} ({self.message})"


@dataclass
class DiagnosticsReport:
    """Finite-depth evidence for the compactness criteria.  Never a proof."""

    label: str
    q: int
    n_max: int
    bounded_range: int
    range_radius_by_level: list[int]
    decay_sequence: dict[int, Fraction]
    decay_argmax: dict[int, Vertex]
    decay_reliable_upto: int
    displacement: list[LevelDisplacement]
    opnorm_pow_by_depth: list[Fraction]
    boundedness_trend: str
    hints: list[Hint] = field(default_factory=list)
    verdict: str = ""

    def hint(self, criterion: str) -> Hint:
        for h in self.hints:
            if h.criterion == criterion:
                return h
        raise KeyError(criterion)


def decay_statistic(counts: CountingTable, params: TreeParams) -> tuple[dict[int, Fraction], dict[int, Vertex]]:
    """``max_{|w|=r} sup_n q^(|w|-n) N(n,w)`` for each level ``r >= 1`` reached by the map."""
    q = params.q
    best: dict[Vertex, Fraction] = {}
    for n in range(counts.n_max + 1):
        for w, c in counts.row(n).items():
            if w.is_root:
                continue
            val = Fraction(q) ** (w.depth - n) * c
            if val > best.get(w, Fraction(-1)):
                best[w] = val
    by_level: dict[int, Fraction] = {}
    argmax: dict[int, Vertex] = {}
    for w in sorted(best, key=lambda u: (u.depth, u.word)):
        r = w.depth
        if r not in by_level or best[w] > by_level[r]:
            by_level[r] = best[w]
            argmax[r] = w
    top = max(by_level, default=0)
    for r in range(1, top + 1):
        by_level.setdefault(r, Fraction(0))
    return dict(sorted(by_level.items())), argmax


def compactness_diagnostics(phi: SelfMap, n_max: int | None = None) -> DiagnosticsReport:
    n_max = phi.coverage_depth if n_max is None else n_max
    params = phi.params
    counts = counting_function(phi, n_max)
    radius = list(np.maximum.accumulate([int(phi.image_depths(n).max()) for n in range(n_max + 1)]))
    decay, decay_at = decay_statistic(counts, params)
    # s(w) needs N(n, w) for every n; deeper w are likelier to have preimages past n_max
    reliable = n_max // 2
    disp = displacement_profile(phi, n_max)
    oracle = truncated_opnorm_exact(phi, 1, domain_depth=min(params.depth_cap, max(radius)), target_depth=n_max)
    opnorm_by_depth = list(np.maximum.accumulate(oracle.per_level)) if oracle.per_level else []
    trend = classify_trend(opnorm_by_depth)

    hints = []
    mid = (n_max + 1) // 2
    if n_max >= 2 and radius[-1] == radius[mid]:
        hints.append(Hint("thm-bounded-range", "consistent",
                          f"bounded range (radius {radius[-1]}), compact by Theorem"))
    else:
        hints.append(Hint("thm-bounded-range", "inconclusive",
                          f"range radius still growing ({radius[-1]} at level {n_max})"))

    mins = [d.min for d in disp]
    tail_min = [min(mins[n:]) for n in range(n_max + 1)]
    if n_max < 2:
        hints.append(Hint("cor-displacement", "inconclusive", "too shallow"))
    elif tail_min[mid] <= tail_min[min(1, n_max)]:
        hints.append(Hint("cor-displacement", "violated",
                          f"displacement bounded (min {tail_min[mid]} on levels {mid}..{n_max}), not compact"))
    else:
        hints.append(Hint("cor-displacement", "consistent",
                          f"min displacement grows ({tail_min[1]} -> {tail_min[mid]})"))

    seq = [decay.get(r, Fraction(0)) for r in range(1, reliable + 1)]
    if len(seq) < 2:
        hints.append(Hint("cor-decay", "inconclusive", "too shallow"))
    else:
        tail = seq[len(seq) // 2:]
        nonincreasing = all(a >= b for a, b in zip(tail, tail[1:]))
        if seq[-1] < seq[0] and nonincreasing:
            hints.append(Hint("cor-decay", "consistent",
                              f"decay statistic falls from {seq[0]} to {seq[-1]} by |w|={reliable}"))
        else:
            hints.append(Hint("cor-decay", "violated",
                              f"decay statistic does not fall ({seq[0]} -> {seq[-1]}), not compact"))
    if params.q == 1:
        bounded = hints[0].status == "consistent"
        hints.append(Hint("cor-q1-bounded", "consistent" if bounded else "violated",
                          "q=1: compact iff the map is bounded"
                          + ("" if bounded else "; range grows, not compact")))

    statuses = {h.criterion: h.status for h in hints}
    if statuses["cor-displacement"] == "violated":
        verdict = "not compact (displacement bounded)"
    elif "violated" in statuses.values():
        verdict = "not compact"
    elif statuses["thm-bounded-range"] == "consistent":
        verdict = "compact (bounded range)"
    elif all(s == "consistent" for c, s in statuses.items() if c != "thm-bounded-range"):
        verdict = "consistent with compact"
    else:
        verdict = "inconclusive"
    verdict += "; operator " + ("bounded" if trend == "bounded-trend" else trend)

    return DiagnosticsReport(
        label=phi.label,
        q=params.q,
        n_max=n_max,
        bounded_range=int(radius[-1]),
        range_radius_by_level=[int(r) for r in radius],
        decay_sequence=decay,
        decay_argmax=decay_at,
        decay_reliable_upto=reliable,
        displacement=disp,
        opnorm_pow_by_depth=opnorm_by_depth,
        boundedness_trend=trend,
        hints=hints,
        verdict=verdict,
    )


# -- sequential probe


@dataclass
class ProbeReport:
    p: float
    labels: list[str]
    norms: list[float]
    trend: str

    def to_dict(self) -> dict:
        return {
            "p": format_exponent(self.p),
            "trials": [{"trial": s, "norm": x} for s, x in zip(self.labels, self.norms)],
            "trend": self.trend,
        }


def default_trials(phi: SelfMap, p: float, n_max: int, family: str = "fw") -> list[tuple[str, TreeFunction]]:
    """Unit-norm test functions at ``w_k``, ``|w_k| = k``.

    ``family="fw"`` walks the branch ``0.0...0``; ``family="range"`` uses the
    lex-least image vertex at each level so that ``w_k`` is hit by the map.
    """
    params = phi.params
    depth = phi.max_image_depth(n_max)
    if family == "fw":
        ws = [lex_least(params, k) for k in range(1, n_max)]
    elif family == "range":
        counts = counting_function(phi, n_max)
        targets = sorted(counts.targets(), key=lambda u: (u.depth, u.word))
        first: dict[int, Vertex] = {}
        for w in targets:
            first.setdefault(w.depth, w)
        ws = [first[k] for k in sorted(first) if k >= 1]
    else:
        raise DomainError(f"unknown trial family {family!r}")
    out = []
    for w in ws:
        d = max(depth, w.depth)
        f = TreeFunction.indicator(params, w, d) if p == INF else extremal_fw(params, w, p, d)
        out.append((format_vertex(w), f))
    return out


def sequential_compactness_probe(
    phi: SelfMap,
    p: float,
    trials: Sequence[tuple[str, TreeFunction]] | None = None,
    n_max: int | None = None,
    family: str = "fw",
    bound: float = 1.0,
) -> ProbeReport:
    """Evaluate ``||C_phi f_k||`` along a bounded sequence running off to infinity."""
    p = as_exponent(p)
    n_max = phi.coverage_depth if n_max is None else n_max
    if trials is None:
        trials = default_trials(phi, p, n_max, family)
    labels, norms = [], []
    for label, f in trials:
        nf = norm(f, p)
        if nf > bound * (1 + TOL):
            raise DomainError(f"trial {label} has norm {nf} > bound {bound}; the sequence must be bounded")
        labels.append(label)
        norms.append(norm(compose(phi, f, n_max), p))
    if len(norms) < 2:
        trend = "inconclusive"
    else:
        tail = norms[len(norms) // 2:]
        if norms[-1] <= TOL or all(a > b for a, b in zip(tail, tail[1:])):
            trend = "vanishing"
        else:
            trend = "non-vanishing"
    return ProbeReport(p, labels, norms, trend)


# -- combined bounds for reports


@dataclass
class OpNormBounds:
    """Certified lower bound, finite-depth upper value, witness, and closed-form cross-checks."""

    p: float
    lower: float
    lower_pow: Fraction | None
    upper: float | None
    upper_status: str
    witness: str
    formula_value: float | None = None
    formula_source: str | None = None
    lower_bound_fw: LowerBound | None = None
    oracle: OracleResult | None = None
    sufficiency: SufficiencySeries | None = None

    def to_dict(self) -> dict:
        out = {
            "p": format_exponent(self.p),
            "lower": self.lower,
            "lower_pow": None if self.lower_pow is None else str(self.lower_pow),
            "upper": self.upper,
            "upper_status": self.upper_status,
            "witness": self.witness,
            "formula_value": self.formula_value,
            "formula_source": self.formula_source,
        }
        if self.lower_bound_fw is not None:
            lb = self.lower_bound_fw
            out["fw_lower_bound"] = {
                "value": lb.value,
                "value_pow": str(lb.value_pow),
                "w": format_vertex(lb.w),
                "n": lb.n,
                "source": "sup_w sup_n W(w) N(n,w)/|D_n| via f_w",
                "per_level_pow": [str(x) for x in lb.per_level],
            }
        if self.oracle is not None:
            o = self.oracle
            out["oracle"] = {
                "value": o.value,
                "value_pow": str(o.value_pow),
                "n_star": o.n_star,
                "domain_depth": o.domain_depth,
                "target_depth": o.target_depth,
                "allocation": {str(m): format_vertex(w) for m, w in o.allocation.items()},
                "per_level_pow": [str(x) for x in o.per_level],
            }
        if self.sufficiency is not None:
            s = self.sufficiency
            out["sufficiency"] = {
                "S": {str(n): str(v) for n, v in s.values.items()},
                "upper_bound_pow": str(s.upper_bound_pow),
                "floor_holds": s.floor_holds(),
            }
        return out


def operator_norm_bounds(
    phi: SelfMap,
    p: float,
    domain_depth: int | None = None,
    target_depth: int | None = None,
) -> OpNormBounds:
    p = as_exponent(p)
    params = phi.params
    if p == INF:
        res = opnorm_infinity(phi)
        return OpNormBounds(p, res.value, None, res.value, "exact",
                            f"indicator of phi(o) = {format_vertex(phi(ROOT))}",
                            formula_value=1.0, formula_source="T_inf theorem: ||C_phi|| = 1 for every self map")
    lb = lower_bound_fw(phi, p, target_depth, domain_depth)
    oracle = truncated_opnorm_exact(phi, p, domain_depth, target_depth)
    suff = sufficiency_series(phi, target_depth)
    trend = classify_trend(oracle.per_level)
    if oracle.allocation:
        witness = ("|D_m|^(1/p) at " + ", ".join(format_vertex(w) for w in oracle.allocation.values())
                   + f"; maximal on target level {oracle.n_star}")
    else:
        witness = "none: no image lies within the domain depth"
    if trend == "unbounded-trend":
        upper, status = None, "unbounded-trend"
    else:
        upper, status = oracle.value, "exact on truncation"
    formula = source = None
    root_image = phi(ROOT)
    if isinstance(phi, PartialAutomorphism):
        formula = automorphism_norm(phi, p)
        source = "automorphism theorem: 1 if phi(o)=o else ((q+1) q^(|phi(o)|-1))^(1/p)"
    elif params.q == 1:
        if root_image.is_root:
            formula, source = 2 ** (1.0 / p), "q=1 theorem: ||C_phi||^p <= 2 (upper bound)"
        else:
            formula, source = 2 ** (1.0 / p), "q=1 corollary: ||C_phi||^p = 2 when phi(o) != o"
    return OpNormBounds(
        p,
        lower=oracle.value,
        lower_pow=oracle.value_pow,
        upper=upper,
        upper_status=status,
        witness=witness,
        formula_value=formula,
        formula_source=source,
        lower_bound_fw=lb,
        oracle=oracle,
        sufficiency=suff,
    )
