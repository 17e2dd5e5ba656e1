"""Algebraic certificates for rational systems and the RNNs embedded in them.

Transcendence degrees are computed as generic Jacobian ranks: the rank of the
Jacobian of the generators is evaluated exactly at random integer points and
the maximum is reported.  A full-rank witness proves generic full rank; a
smaller value is only a lower bound.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    EchelonBasis,
    MultiPoly,
    RationalFunc,
    exact_rank,
    format_scalar,
    rat_combine,
)
from .embedding import build_r_aux, build_r_sigma, index_map
from .errors import ArgumentError, BlowupError
from .systems import RationalSystemSpec, RnnSystem, is_polynomial

log = logging.getLogger(__name__)

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

POINT_RANGE = 10
_MAX_POINT_ATTEMPTS = 10_000


def lie_derivative(g: RationalFunc, vector_field: Sequence[RationalFunc]) -> RationalFunc:
    """L_f g = sum_i dg/dX_i * f_i, summands with a vanishing partial are dropped."""
    if len(vector_field) != g.num_vars:
        raise ArgumentError(f"field has {len(vector_field)} components for {g.num_vars} variables")
    terms = []
    for i, f_i in enumerate(vector_field):
        if f_i.num_vars != g.num_vars:
            raise ArgumentError("field components must share the variables of g")
        d = g.partial(i)
        if d.is_zero() or f_i.is_zero():
            continue
        terms.append(d * f_i)
    if not terms:
        return RationalFunc.zero(g.num_vars)
    return rat_combine(terms)


def lie_bracket(f: Sequence[RationalFunc], g: Sequence[RationalFunc]) -> list[RationalFunc]:
    """[f, g]_i = sum_j (df_i/dX_j g_j - dg_i/dX_j f_j)."""
    out = []
    for f_i, g_i in zip(f, g):
        terms = []
        for j in range(len(f)):
            a = f_i.partial(j)
            if not a.is_zero() and not g[j].is_zero():
                terms.append(a * g[j])
            b = g_i.partial(j)
            if not b.is_zero() and not f[j].is_zero():
                terms.append(-(b * f[j]))
        out.append(rat_combine(terms) if terms else RationalFunc.zero(f_i.num_vars))
    return out


def gradient_at(g: RationalFunc, point: Sequence[Fraction]) -> list[Fraction]:
    """Exact gradient of N/D at a point where D does not vanish."""
    n, d = g.numerator, g.denominator
    if d.is_constant():
        c = d.constant_value()
        return [n.partial(i).evaluate(point) / c for i in range(g.num_vars)]
    nv, dv = n.evaluate(point), d.evaluate(point)
    return [
        (n.partial(i).evaluate(point) * dv - nv * d.partial(i).evaluate(point)) / (dv * dv)
        for i in range(g.num_vars)
    ]


def _denominators(sys: RationalSystemSpec) -> list[MultiPoly]:
    dens = {f.denominator for fld in sys.fields for f in fld}
    dens.update(h.denominator for h in sys.outputs)
    return [d for d in dens if not d.is_constant()]


def sample_points(sys: RationalSystemSpec, num_points: int, seed: int) -> list[tuple[Fraction, ...]]:
    """Integer points in [-10, 10]^dim avoiding every system denominator.

    Points are drawn one after another from one seeded stream, so a larger
    ``num_points`` extends the smaller sample instead of replacing it.
    """
    rng = random.Random(seed)
    dens = _denominators(sys)
    points = []
    for _ in range(num_points):
        for _attempt in range(_MAX_POINT_ATTEMPTS):
            pt = tuple(Fraction(rng.randint(-POINT_RANGE, POINT_RANGE)) for _ in range(sys.dim))
            if all(d.evaluate(pt) for d in dens):
                points.append(pt)
                break
        else:
            raise ArgumentError("could not find a sample point avoiding the denominators")
    return points


@dataclass
class LieTower:
    """Iterated Lie derivatives of the outputs and their generic Jacobian rank."""

    dim: int
    generators: list[RationalFunc]
    depths: list[int]
    rank: int
    points: list[tuple[Fraction, ...]]
    witness: int | None
    depth_reached: int
    stop_reason: str

    @property
    def observable(self) -> bool:
        return self.rank == self.dim

    @property
    def status(self) -> str:
        return HOLDS if self.observable else INCONCLUSIVE

    @property
    def verdict(self) -> str:
        if self.observable:
            return "semi-algebraically observable"
        return "not certified semi-algebraically observable"

    def evidence(self) -> dict:
        wit = None if self.witness is None else [format_scalar(v) for v in self.points[self.witness]]
        return {
            "rank": self.rank,
            "dim": self.dim,
            "generators": len(self.generators),
            "generator_depths": list(self.depths),
            "depth_reached": self.depth_reached,
            "stop_reason": self.stop_reason,
            "witness_point": wit,
            "verdict": self.verdict,
        }


def observability_rank(sys: RationalSystemSpec, depth_cap: int | None = None,
                       num_points: int = 8, seed: int = 0) -> LieTower:
    """Rank of the observation algebra via a pruned tower of Lie derivatives.

    A generator is kept only if its gradient enlarges the span at one of the
    sample points; only kept generators are differentiated further, which loses
    nothing because derivatives of algebraically dependent elements stay
    dependent.  Generation stops once the rank reaches ``dim``, once a whole
    depth adds nothing, at ``depth_cap``, or when a polynomial exceeds the
    degree cap (in which case the partial tower is returned).
    """
    if depth_cap is None:
        depth_cap = sys.dim
    if depth_cap < 1 or num_points < 1:
        raise ArgumentError("depth_cap and num_points must be at least 1")
    points = sample_points(sys, num_points, seed)
    bases = [EchelonBasis(sys.dim) for _ in points]
    kept: list[RationalFunc] = []
    depths: list[int] = []
    candidates = list(sys.outputs)
    depth = 0
    stop = "depth_cap"
    try:
        while True:
            fresh = []
            for g in candidates:
                if g.is_zero():
                    continue
                grew = [basis.add(gradient_at(g, pt)) for basis, pt in zip(bases, points)]
                if any(grew):
                    kept.append(g)
                    depths.append(depth)
                    fresh.append(g)
            rank = max(b.rank for b in bases)
            if rank == sys.dim:
                stop = "full_rank"
                break
            if not fresh:
                stop = "stabilized"
                break
            if depth >= depth_cap:
                stop = "depth_cap"
                break
            depth += 1
            candidates = [lie_derivative(g, fld) for g in fresh for fld in sys.fields]
    except BlowupError as exc:
        log.info("observability tower stopped at depth %d: %s", depth, exc)
        stop = "degree_cap"

    ranks = [exact_rank([gradient_at(g, pt) for g in kept]) if kept else 0 for pt in points]
    rank = max(ranks)
    assert rank == max(b.rank for b in bases)
    witness = ranks.index(rank) if kept else None
    return LieTower(sys.dim, kept, depths, rank, points, witness, depth, stop)


@dataclass
class AccessibilityResult:
    dim: int
    rank_at_v0: int
    num_brackets: int
    depth_reached: int
    stop_reason: str
    rank_bound: int | None = None

    @property
    def accessible(self) -> bool:
        return self.rank_at_v0 == self.dim

    @property
    def status(self) -> str:
        return HOLDS if self.accessible else INCONCLUSIVE

    @property
    def verdict(self) -> str:
        return "accessible (sufficient)" if self.accessible else "inconclusive"

    def evidence(self) -> dict:
        return {
            "rank_at_v0": self.rank_at_v0,
            "dim": self.dim,
            "lie_algebra_elements": self.num_brackets,
            "depth_reached": self.depth_reached,
            "stop_reason": self.stop_reason,
            "rank_bound": self.rank_bound,
            "verdict": self.verdict,
        }


def accessibility_larc(sys: RationalSystemSpec, bracket_depth_cap: int | None = None,
                       num_points: int = 8, seed: int = 0,
                       rank_bound: int | None = None) -> AccessibilityResult:
    """Lie-algebra rank condition at the initial state.

    Left-normed brackets ``[[f_a, f_b], f_c] ...`` are generated depth by depth.
    An element is discarded when it is a constant-coefficient combination of
    earlier ones (tested on the stacked values at ``v0`` and the sample
    points), since its brackets are then combinations too.  Full rank at
    ``v0`` proves accessibility; anything else is inconclusive.

    ``rank_bound`` is a known upper bound on the rank at ``v0`` (for systems
    built from an RNN, the RNN dimension: the fields are related to the RNN
    fields through the embedding, so every bracket at ``v0`` lies in the range
    of its differential).  Generation stops once the bound is reached.
    """
    if bracket_depth_cap is None:
        bracket_depth_cap = sys.dim
    for fld in sys.fields:
        for f in fld:
            if not f.denominator.evaluate(sys.v0):
                raise ArgumentError("the initial state lies on a vector-field denominator")
    points = [sys.v0] + sample_points(sys, num_points, seed)
    stacked = EchelonBasis(sys.dim * len(points))
    at_v0 = EchelonBasis(sys.dim)
    kept = 0
    frontier = [list(fld) for fld in sys.fields]
    depth = 1
    stop = "depth_cap"
    try:
        while True:
            fresh = []
            for vf in frontier:
                values = [[f.evaluate(pt) for f in vf] for pt in points]
                if stacked.add([v for row in values for v in row]):
                    kept += 1
                    fresh.append(vf)
                    at_v0.add(values[0])
            if at_v0.rank == sys.dim:
                stop = "full_rank"
                break
            if rank_bound is not None and at_v0.rank >= rank_bound:
                stop = "rank_bound"
                break
            if not fresh:
                stop = "stabilized"
                break
            if depth >= bracket_depth_cap:
                stop = "depth_cap"
                break
            depth += 1
            frontier = [lie_bracket(vf, list(g)) for vf in fresh for g in sys.fields]
    except BlowupError as exc:
        log.info("bracket generation stopped at depth %d: %s", depth, exc)
        stop = "degree_cap"
    return AccessibilityResult(sys.dim, at_v0.rank, kept, depth, stop, rank_bound)


def coordinate_obs_subspace(A: Sequence[Sequence], C: Sequence[Sequence]) -> tuple[int, ...]:
    """0-based indices spanning the largest A-invariant coordinate subspace inside Ker(C).

    Greatest fixed point: start from the zero columns of C and drop ``k``
    while some ``j`` outside the set has ``A[j][k] != 0``.
    """
    n = len(A)
    if any(len(row) != n for row in A) or any(len(row) != n for row in C):
        raise ArgumentError("A must be n x n and C must have n columns")
    keep = {i for i in range(n) if all(row[i] == 0 for row in C)}
    changed = True
    while changed:
        changed = False
        for k in sorted(keep):
            if any(A[j][k] != 0 for j in range(n) if j not in keep):
                keep.discard(k)
                changed = True
    return tuple(sorted(keep))


@dataclass(frozen=True)
class AnalysisOptions:
    depth_cap: int | None = None
    bracket_depth_cap: int | None = None
    num_points: int = 8
    seed: int = 0


@dataclass
class Certificate:
    name: str
    status: str
    lemma: str
    evidence: dict = field(default_factory=dict)
    conclusion: str | None = None
    reason: str | None = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "status": self.status, "lemma": self.lemma, "evidence": self.evidence}
        if self.conclusion is not None:
            out["conclusion"] = self.conclusion
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass
class CertificateReport:
    entries: list[Certificate] = field(default_factory=list)

    def add(self, cert: Certificate) -> Certificate:
        self.entries.append(cert)
        return cert

    def __getitem__(self, name: str) -> Certificate:
        for c in self.entries:
            if c.name == name:
                return c
        raise KeyError(name)

    def extend(self, other: CertificateReport):
        self.entries.extend(other.entries)

    @property
    def any_fails(self) -> bool:
        return any(c.status == FAILS for c in self.entries)

    def conclusions(self) -> list[str]:
        return [c.conclusion for c in self.entries if c.status == HOLDS and c.conclusion]

    def as_list(self) -> list[dict]:
        return [c.as_dict() for c in self.entries]


def observability_certificate(sys: RationalSystemSpec, options: AnalysisOptions = AnalysisOptions(),
                              name: str = "semi_algebraic_observability") -> Certificate:
    tower = observability_rank(sys, options.depth_cap, options.num_points, options.seed)
    reason = None if tower.observable else f"rank {tower.rank} < dim {tower.dim} ({tower.stop_reason})"
    return Certificate(name, tower.status, "observation-algebra transcendence degree",
                       tower.evidence(), tower.verdict if tower.observable else None, reason)


def accessibility_certificate(sys: RationalSystemSpec, options: AnalysisOptions = AnalysisOptions(),
                              name: str = "accessibility", rank_bound: int | None = None) -> Certificate:
    acc = accessibility_larc(sys, options.bracket_depth_cap, options.num_points, options.seed, rank_bound)
    reason = None if acc.accessible else f"rank at v0 {acc.rank_at_v0} < dim {acc.dim} ({acc.stop_reason})"
    return Certificate(name, acc.status, "Lie algebra rank condition",
                       acc.evidence(), "accessible" if acc.accessible else None, reason)


def minimality_certificate(sys: RnnSystem, options: AnalysisOptions = AnalysisOptions()) -> CertificateReport:
    """Sufficient test: R_aux semi-algebraically observable and accessible.

    Never reports ``fails``; the conditions are sufficient only.
    """
    aux = build_r_aux(sys)
    report = CertificateReport()
    obs = report.add(observability_certificate(aux, options, "r_aux_semi_algebraic_observability"))
    acc = report.add(accessibility_certificate(aux, options, "r_aux_accessibility", sys.n))
    if obs.status == HOLDS and acc.status == HOLDS:
        report.add(Certificate("sigma_minimality", HOLDS, "minimality.sufficient_conditions",
                               {"dim_r_aux": aux.dim}, "Σ is a σ-minimal realization"))
    else:
        missing = [c.name for c in (obs, acc) if c.status != HOLDS]
        report.add(Certificate("sigma_minimality", INCONCLUSIVE, "minimality.sufficient_conditions",
                               {"dim_r_aux": aux.dim}, reason="not established: " + ", ".join(missing)))
    return report


def hankel_minimality(sys: RnnSystem, options: AnalysisOptions = AnalysisOptions()) -> CertificateReport:
    """Compare observation-algebra ranks of R(Sigma) and R_aux with n(1+KN) and nKN.

    A rank computed on a realization equals the transcendence degree of the
    input-output map's observation algebra only when the realization is
    algebraically reachable, so a rank match counts only together with an
    accessibility certificate for the same system.
    """
    imap = index_map(sys)
    n, N, K = sys.n, imap.N, imap.K
    report = CertificateReport()
    evidence = {}
    met = []
    for label, build, target in (("r_sigma", build_r_sigma, n * (1 + K * N)), ("r_aux", build_r_aux, n * K * N)):
        rational = build(sys)
        tower = observability_rank(rational, options.depth_cap, options.num_points, options.seed)
        acc = accessibility_larc(rational, options.bracket_depth_cap, options.num_points, options.seed, n)
        evidence[label] = {
            "rank": tower.rank,
            "target": target,
            "rank_matches_target": tower.rank == target,
            "accessible": acc.accessible,
            "rank_direction": "certified lower bound on the observation-algebra transcendence degree "
                              "of the realization; equals that of the input-output map when the "
                              "realization is algebraically reachable",
        }
        if tower.rank == target and acc.accessible:
            met.append(label)
    if met:
        report.add(Certificate("hankel_rank_minimality", HOLDS, "minimality.hankel_rank", evidence,
                               "Σ is a σ-minimal realization"))
    else:
        report.add(Certificate("hankel_rank_minimality", INCONCLUSIVE, "minimality.hankel_rank", evidence,
                               reason="no realization certified with rank equal to its target "
                                      "and accessible"))
    return report


def _rank_A(sys: RnnSystem) -> int:
    return exact_rank(sys.A)


def rnn_property_report(sys: RnnSystem, options: AnalysisOptions = AnalysisOptions()) -> CertificateReport:
    """Reachability and observability conclusions for the RNN transferred from R_aux."""
    aux = build_r_aux(sys)
    report = CertificateReport()
    tower = observability_rank(aux, options.depth_cap, options.num_points, options.seed)
    acc = accessibility_larc(aux, options.bracket_depth_cap, options.num_points, options.seed, sys.n)
    polynomial = is_polynomial(aux)
    rank_a = _rank_A(sys)
    invertible = bool(sys.activation.invertible)

    report.add(Certificate(
        "span_reachability", acc.status, "reachability_observability.transfer",
        {"r_aux_accessibility": acc.evidence()},
        "Σ span-reachable" if acc.accessible else None,
        None if acc.accessible else "R_aux not certified accessible",
    ))

    hypotheses = {
        "r_aux_polynomial": polynomial,
        "r_aux_semi_algebraically_observable": tower.observable,
        "sigma_invertible": invertible,
        "ker_A_trivial": rank_a == sys.n,
    }
    evidence = dict(hypotheses, rank_A=rank_a, n=sys.n, r_aux_observability=tower.evidence())
    if all(hypotheses.values()):
        report.add(Certificate("weak_observability", HOLDS, "reachability_observability.transfer",
                               evidence, "Σ weakly observable"))
    else:
        failed = [k for k, v in hypotheses.items() if not v]
        report.add(Certificate("weak_observability", INCONCLUSIVE, "reachability_observability.transfer",
                               evidence, reason="unmet hypotheses: " + ", ".join(failed)))

    oc = coordinate_obs_subspace(sys.A, sys.C)
    oc_evidence = {"index_set": [i + 1 for i in oc], "basis": [f"e{i + 1}" for i in oc]}
    if not oc:
        report.add(Certificate("coordinate_subspace_trivial", HOLDS, "coordinate_subspace.necessary",
                               oc_evidence, "O_c(A,C) = {0}"))
    else:
        report.add(Certificate("coordinate_subspace_trivial", FAILS, "coordinate_subspace.necessary",
                               oc_evidence, reason="a nonzero A-invariant coordinate subspace lies in "
                                                   "Ker(C); Σ is not observable"))
    consistent = not (polynomial and tower.observable and oc)
    report.add(Certificate(
        "coordinate_subspace_consistency", HOLDS if consistent else FAILS, "coordinate_subspace.necessary",
        {"r_aux_polynomial": polynomial, "r_aux_semi_algebraically_observable": tower.observable,
         "coordinate_subspace_trivial": not oc},
        reason=None if consistent else "full observability rank contradicts a nontrivial O_c(A,C)",
    ))
    return report


def existence_necessary_check(sys: RnnSystem, options: AnalysisOptions = AnalysisOptions()) -> CertificateReport:
    """Finite transcendence-degree bound witnessed by R(Sigma)."""
    imap = index_map(sys)
    bound = sys.n * (1 + imap.K * imap.N)
    r_sigma = build_r_sigma(sys)
    tower = observability_rank(r_sigma, options.depth_cap, options.num_points, options.seed)
    report = CertificateReport()
    report.add(Certificate(
        "existence_necessary_condition", HOLDS, "existence.necessary_condition",
        {
            "trdeg_bound": bound,
            "dim_r_sigma": r_sigma.dim,
            "r_sigma_rank": tower.rank,
            "rank_direction": "trdeg of the input-output map's observation algebra is at most "
                              "trdeg of R(Σ)'s, which is at least the reported rank and at most the bound",
        },
        f"trdeg A_obs(p) <= {bound}",
    ))
    return report
