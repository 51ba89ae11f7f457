"""Fibers of the Cannon-Thurston map over rational points of the mapping torus boundary.

For ``g = w t^m`` the preimage of ``g^inf`` is the set of attracting periodic
points of the boundary map of ``psi = ad_w o phi^m``.  We find those points
by iterating seeds, then check pairwise identifications against the
lamination language matching the sign of ``m``.  Every degree reported is
a witnessed lower bound.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from scipy.cluster.hierarchy import DisjointSet

from .automorphism import (
    Automorphism,
    BudgetExceeded,
    IteratedRay,
    MappingTorusElement,
    conjugation_automorphism,
    converged_prefix,
    iterate_truncated,
    mt_elements,
    mt_inverse,
    mt_multiply,
    reduced_words,
)
from .config import Config
from .lamination import FactorLanguage, LeafKind, diag_components, leaf_test, mitra_language
from .parallel import parallel_map
from .words import (
    Basis,
    PeriodicRay,
    Ray,
    RayEquality,
    RayError,
    common_prefix_length,
    compare_rays,
    invert,
    multiply,
    periodic_ray,
    shortlex_key,
)

log = logging.getLogger(__name__)


class InvariantViolation(RuntimeError):
    """A proven bound failed; since degrees are lower bounds this signals a bug."""

    def __init__(self, message: str, reproducer: dict):
        super().__init__(message)
        self.reproducer = reproducer


@dataclass(frozen=True)
class Thresholds:
    two_n: int
    two_n_minus_2: int
    four_n_minus_5: int
    four_n_minus_1: int

    @classmethod
    def of(cls, rank: int) -> "Thresholds":
        return cls(2 * rank, 2 * rank - 2, 4 * rank - 5, 4 * rank - 1)


def classify(degree: int) -> str:
    if degree <= 1:
        return "simple"
    return "regular" if degree == 2 else "singular"


# ---------------------------------------------------------------------------
# attracting rays


def seed_pool(rank: int, conj_radius: int) -> list:
    """Letters and inverses, then their conjugates ``u x u^-1`` with ``|u| <= conj_radius``."""
    letters = [w[0] for w in reduced_words(rank, 1, 1)]
    seeds = [(x,) for x in letters]
    seen = set(seeds)
    for u in reduced_words(rank, conj_radius, 1):
        for x in letters:
            s = multiply(u, (x,), invert(u))
            if s not in seen:
                seen.add(s)
                seeds.append(s)
    return seeds


def attracting_rays(psi: Automorphism, depth: int, period_max: int, seeds: Optional[Sequence] = None,
                    max_steps: int = 240) -> list:
    """Attracting periodic boundary points of ``psi`` reached from ``seeds``.

    Each seed is iterated once (prefixes only) and its orbit checked for
    convergence along periods ``1..period_max``; the least converging
    period wins.  Rays are deduplicated by their ``depth``-prefix.  If no
    seed converges, letters fixed by ``psi`` contribute ``x^inf``.
    """
    if depth < 1 or period_max < 1:
        raise ValueError("depth and period_max must be >= 1")
    if seeds is None:
        seeds = seed_pool(psi.rank, 2)
    keep = max(4 * depth, 128)
    found = {}  # prefix -> ray
    dropped = over_budget = 0
    for seed in seeds:
        steps = 4 * period_max
        resolved = False
        while steps <= max_steps and not resolved:
            try:
                seq = iterate_truncated(psi, seed, steps, keep)
            except BudgetExceeded:
                over_budget += 1
                break
            for p in range(1, period_max + 1):
                hit = converged_prefix(seq, p, depth, keep)
                if hit is None:
                    continue
                step, _ = hit
                # every phase of a periodic orbit is itself an attracting point
                for i in range(p):
                    sub = seq[step + i::p]
                    if len(sub) < 3:
                        continue
                    known = _certified(sub, keep)
                    if len(known) < depth:
                        continue
                    pre = known[:depth]
                    if pre not in found:
                        found[pre] = IteratedRay(psi, seq[step + i] if i else seed, p, known=known,
                                                 max_steps=max_steps)
                resolved = True
                break
            steps *= 2
        if not resolved:
            dropped += 1
    if dropped:
        log.debug("%d seeds did not converge", dropped)
    rays = list(found.values())
    if not rays and over_budget:
        raise BudgetExceeded(f"attracting-ray search: {over_budget} seeds exceeded the length budget")
    if not rays:
        for x in sorted({s[0] for s in seeds if len(s) == 1}):
            if psi.image(x) == (x,):
                rays.append(PeriodicRay((), (x,)))
        if not rays:
            log.info("no convergent seed for %s", psi.images)
    return sorted(rays, key=lambda r: shortlex_key(r.prefix(depth)))


def _certified(sub: list, keep: int) -> tuple:
    trusted = keep // 2
    a, b, c = (w[:trusted] for w in sub[:3])
    n = min(common_prefix_length(a, b), common_prefix_length(b, c))
    return a[:n]


# ---------------------------------------------------------------------------
# reports


@dataclass
class FiberReport:
    g: MappingTorusElement
    rays: list
    partition: list
    degree_lower_bound: int
    cls: str
    type: str
    depth: int
    stabilized: bool
    exhaustive: bool = False
    consistent_pairs: list = field(default_factory=list)
    undecided_pairs: list = field(default_factory=list)
    cross_violations: list = field(default_factory=list)
    rank: int = 0

    @property
    def singular(self) -> bool:
        return self.cls == "singular"

    def to_json(self, basis: Basis, probe: int, config: Optional[Config] = None, sigma: int = None) -> dict:
        th = Thresholds.of(basis.rank)
        d = {
            "element": {"w": basis.format(self.g.w), "m": self.g.m},
            "rays": [basis.format(r.prefix(probe)) for r in self.rays],
            "partition": self.partition,
            "degree_lower_bound": self.degree_lower_bound,
            "class": self.cls,
            "type": self.type,
            "depth": self.depth,
            "stabilized": self.stabilized,
            "exhaustive_at_bounds": self.exhaustive,
            "undecided_pairs": self.undecided_pairs,
            "cross_check_violations": self.cross_violations,
            "bounds": {
                "two_n": th.two_n,
                "two_n_minus_2": th.two_n_minus_2,
                "four_n_minus_5": th.four_n_minus_5,
                "four_n_minus_1": th.four_n_minus_1,
                "sigma_found": int(self.singular) if sigma is None else sigma,
            },
        }
        if config is not None:
            d["config"] = config.as_dict()
        return d


def _check_degree(report: FiberReport, rank: int) -> None:
    if report.degree_lower_bound > 2 * rank:
        raise InvariantViolation(
            f"degree lower bound {report.degree_lower_bound} exceeds 2N = {2 * rank}",
            {"element": [list(report.g.w), report.g.m],
             "rays": [list(r.prefix(32)) for r in report.rays]})


def fiber_report(phi: Automorphism, g: MappingTorusElement, languages: tuple, cfg: Config) -> FiberReport:
    """Witnessed fiber of ``g^inf`` for ``m != 0``.

    ``languages`` is ``(Lambda_phi, Lambda_phi^-1)``; points of ``m >= 1``
    are clustered in the first, the others in the second, and every
    identified pair is re-tested in the opposite language.
    """
    if g.m == 0:
        raise ValueError("fiber_report needs m != 0; use simple_point_check for elements of F_N")
    k, slack, probe = cfg.depth, cfg.leaf_slack, cfg.probe
    for lang in languages:
        if lang.depth < k:
            raise ValueError("language depth below test depth")
    psi = conjugation_automorphism(phi, g)
    psi = Automorphism(psi.basis, psi.images, psi.inverse_images, cfg.budget)
    rays = attracting_rays(psi, probe, cfg.period_max, seed_pool(phi.rank, cfg.seed_radius), cfg.max_steps)
    own, other = languages if g.m > 0 else languages[::-1]
    comps = diag_components(rays, own, k, slack, probe)
    degree = len(comps.groups[0]) if rays else 1
    stabilized = own.stabilized and other.stabilized
    violations = []
    if stabilized:
        for i, j in comps.consistent_pairs:
            v = leaf_test(other, rays[i], rays[j], k, slack, probe)
            if v.kind is not LeafKind.NO:
                violations.append([i, j])
    cls = classify(degree)
    if comps.undecided_pairs or not rays:
        cls = "undetermined"
    typ = "not_applicable"
    if cls in ("regular", "singular"):
        typ = "phi" if g.m > 0 else "phi_inverse"
    report = FiberReport(
        g=g, rays=rays, partition=comps.groups, degree_lower_bound=degree, cls=cls, type=typ,
        depth=k, stabilized=stabilized, exhaustive=stabilized and not comps.undecided_pairs,
        consistent_pairs=comps.consistent_pairs, undecided_pairs=comps.undecided_pairs,
        cross_violations=violations, rank=phi.rank)
    _check_degree(report, phi.rank)
    return report


@dataclass
class SimpleVerdict:
    verdict: str          # PASS | FAIL | UNDECIDED
    candidates: int
    survivors: list       # indices of candidates consistent in some language
    undecided: list
    warning: str = ""


def candidate_pool(phi: Automorphism, w: Sequence[int], cfg: Config) -> list:
    """Periodic rays ``u^inf`` with ``|u| <= pool_len`` and attracting rays of ``w t^(+-1)``, ``t^(+-1)``."""
    pool = [periodic_ray(u) for u in reduced_words(phi.rank, cfg.pool_len, 1)]
    seeds = seed_pool(phi.rank, cfg.seed_radius)
    for g in (MappingTorusElement(tuple(w), 1), MappingTorusElement(tuple(w), -1),
              MappingTorusElement((), 1), MappingTorusElement((), -1)):
        if g.m < 0 and not phi.invertible:
            continue
        psi = conjugation_automorphism(phi, g)
        pool.extend(attracting_rays(psi, cfg.probe, cfg.period_max, seeds, cfg.max_steps))
    return pool


def simple_point_check(phi: Automorphism, w: Sequence[int], languages: tuple, cfg: Config,
                       pool: Optional[list] = None) -> SimpleVerdict:
    """No candidate ray may be identified with ``w^inf`` in either language."""
    w = tuple(w)
    if not w:
        raise ValueError("w must be nontrivial")
    x = periodic_ray(w)
    if pool is None:
        pool = candidate_pool(phi, w, cfg)
    cands = [y for y in pool if compare_rays(x, y, cfg.probe) is RayEquality.DISTINCT]
    if not cands:
        return SimpleVerdict("PASS", 0, [], [], warning="empty candidate pool")
    survivors, undecided = [], []
    for i, y in enumerate(cands):
        verdicts = [leaf_test(lang, x, y, cfg.depth, cfg.leaf_slack, cfg.probe) for lang in languages]
        if any(v.consistent for v in verdicts):
            survivors.append(i)
        elif any(v.kind is LeafKind.UNDECIDED for v in verdicts):
            undecided.append(i)
    verdict = "FAIL" if survivors else ("UNDECIDED" if undecided else "PASS")
    return SimpleVerdict(verdict, len(cands), survivors, undecided)


# ---------------------------------------------------------------------------
# bounds


@dataclass
class BoundsCheck:
    rank: int
    degree_flags: list            # (element, degree, ok)
    type_sums: dict               # type -> sum of (deg - 2) over families
    total_sum: int
    sigma: int
    pair_sums: list               # (element, deg g^inf, deg g^-inf, ok, types_differ)
    families: list = field(default_factory=list)

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds.of(self.rank)

    def violations(self) -> list:
        th = self.thresholds
        out = [f"deg({e}) = {d} > {th.two_n}" for e, d, ok in self.degree_flags if not ok]
        out += [f"{t}-type sum {s} > {th.two_n_minus_2}" for t, s in self.type_sums.items()
                if s > th.two_n_minus_2]
        if self.total_sum > th.four_n_minus_5:
            out.append(f"total sum {self.total_sum} > {th.four_n_minus_5}")
        if self.sigma > th.four_n_minus_5:
            out.append(f"orbit count {self.sigma} > {th.four_n_minus_5}")
        out += [f"deg({e}^inf) + deg({e}^-inf) = {a + b} > {th.four_n_minus_1}"
                for e, a, b, ok, _ in self.pair_sums if not ok]
        out += [f"{e}: both ends singular of the same type" for e, a, b, ok, differ in self.pair_sums
                if differ is False]
        return out

    @property
    def ok(self) -> bool:
        return not self.violations()

    def to_json(self) -> dict:
        th = self.thresholds
        return {
            "rank": self.rank,
            "thresholds": {"two_n": th.two_n, "two_n_minus_2": th.two_n_minus_2,
                           "four_n_minus_5": th.four_n_minus_5, "four_n_minus_1": th.four_n_minus_1},
            "type_sums": self.type_sums,
            "total_sum": self.total_sum,
            "sigma_found": self.sigma,
            "families": self.families,
            "degree_ok": all(ok for _, _, ok in self.degree_flags),
            "pair_sums": [{"element": e, "deg_plus": a, "deg_minus": b, "ok": ok, "types_differ": d}
                          for e, a, b, ok, d in self.pair_sums],
            "violations": self.violations(),
        }


def pair_degree_check(phi: Automorphism, g: MappingTorusElement, languages: tuple, cfg: Config,
                      reports: Optional[dict] = None) -> tuple:
    """Reports for ``g^inf`` and ``g^-inf``, whether their degrees sum to at most 4N - 1,
    and whether two singular ends have different types (None if not both singular)."""
    if g.m == 0:
        raise ValueError("pair_degree_check needs m != 0")
    reports = {} if reports is None else reports
    gi = mt_inverse(phi, g)
    for h in (g, gi):
        if h not in reports:
            reports[h] = fiber_report(phi, h, languages, cfg)
    a, b = reports[g], reports[gi]
    ok = a.degree_lower_bound + b.degree_lower_bound <= 4 * phi.rank - 1
    differ = None
    if a.singular and b.singular:
        differ = a.type != b.type
    return a, b, ok, differ


def hull_signature(rays: Sequence[Ray], probe: int, tail: int = 24) -> Optional[tuple]:
    """Translation-invariant fingerprint of a set of >= 3 boundary points.

    Branch points of the convex hull are the medians of triples; the
    fingerprint is the least sorted list of ray prefixes seen from a
    branch point.  Equal fingerprints mean the sets are F_N-translates
    (up to ``tail`` letters past the branch point).
    """
    if len(rays) < 3:
        return None
    try:
        pre = [r.prefix(probe + tail) for r in rays]
    except RayError:
        return None
    cp = {}
    for i, j in itertools.combinations(range(len(pre)), 2):
        cp[i, j] = common_prefix_length(pre[i], pre[j])
    branches = set()
    for i, j, l in itertools.combinations(range(len(pre)), 3):
        c, best = max((cp[i, j], (i, j)), (cp[i, l], (i, l)), (cp[j, l], (j, l)))
        branches.add(pre[best[0]][:c])
    sigs = []
    for b in branches:
        if len(b) > probe:
            return None
        seen = []
        for p in pre:
            c = common_prefix_length(b, p)
            v = invert(b[c:]) + p[c:]
            seen.append(v[:tail])
        sigs.append(tuple(sorted(seen, key=shortlex_key)))
    return min(sigs, key=lambda s: [shortlex_key(x) for x in s])


def is_proper_power(phi: Automorphism, g: MappingTorusElement, radius: int) -> bool:
    """Bounded search for ``h`` with ``h^e = g``, ``e >= 2``, ``|h.w| <= radius``."""
    for e in range(2, abs(g.m) + 1):
        if g.m % e:
            continue
        for v in reduced_words(phi.rank, radius):
            h = MappingTorusElement(v, g.m // e)
            p = h
            for _ in range(e - 1):
                p = mt_multiply(phi, p, h)
            if p == g:
                return True
    return False


def fn_conjugates(phi: Automorphism, g: MappingTorusElement, radius: int) -> set:
    """``u g u^-1`` for all ``|u| <= radius``."""
    out = set()
    for u in reduced_words(phi.rank, radius):
        out.add(MappingTorusElement(multiply(u, g.w, _power(phi, g.m, invert(u))), g.m))
    return out


def _power(phi, m, u):
    from .automorphism import power_apply

    return power_apply(phi, m, u)


@dataclass
class SearchResult:
    candidates: list
    reports: dict          # element -> FiberReport (candidates and their inverses)
    families: list         # list of lists of elements, one list per F_N-orbit of singular points
    bounds: BoundsCheck
    notes: list = field(default_factory=list)

    def to_json(self, basis: Basis, cfg: Config) -> dict:
        fmt = lambda g: g.format(basis)  # noqa: E731
        return {
            "config": cfg.as_dict(),
            "candidates": [fmt(g) for g in self.candidates],
            "reports": [self.reports[g].to_json(basis, cfg.probe) for g in sorted(self.reports, key=_elem_key)],
            "families": [{"elements": [fmt(g) for g in fam],
                          "degree_lower_bound": self.reports[fam[0]].degree_lower_bound,
                          "type": self.reports[fam[0]].type} for fam in self.families],
            "bounds": self.bounds.to_json(),
            "notes": self.notes,
        }


def _elem_key(g: MappingTorusElement):
    return (abs(g.m), -g.m, shortlex_key(g.w))


def enumerate_candidates(phi: Automorphism, cfg: Config) -> list:
    """``w t^m`` with ``|w| <= word_radius``, ``1 <= |m| <= exp_max``; proper powers and
    bounded F_N-conjugates of earlier candidates are skipped."""
    covered = set()
    out = []
    for g in mt_elements(phi.rank, cfg.word_radius, cfg.exp_max):
        if g.m < 0 and not phi.invertible:
            continue
        if g in covered or is_proper_power(phi, g, cfg.conjugator_radius):
            continue
        out.append(g)
        covered |= fn_conjugates(phi, g, cfg.conjugator_radius)
    return out


def _report_task(args):
    phi, g, languages, cfg = args
    return fiber_report(phi, g, languages, cfg)


def singular_search(phi: Automorphism, languages: tuple, cfg: Config) -> SearchResult:
    cands = enumerate_candidates(phi, cfg)
    elements = list(cands)
    for g in cands:
        gi = mt_inverse(phi, g)
        if gi not in elements:
            elements.append(gi)
    done = parallel_map(_report_task, [(phi, g, languages, cfg) for g in elements], cfg.jobs)
    reports = dict(zip(elements, done))

    pairs = []
    for g in cands:
        a, b, ok, differ = pair_degree_check(phi, g, languages, cfg, reports)
        pairs.append((g.format(phi.basis), a.degree_lower_bound, b.degree_lower_bound, ok, differ))

    singular = sorted((g for g, r in reports.items() if r.singular), key=_elem_key)
    families = group_families(phi, singular, reports, cfg)
    type_sums = {"phi": 0, "phi_inverse": 0}
    for fam in families:
        r = reports[fam[0]]
        type_sums[r.type] += r.degree_lower_bound - 2
    bounds = BoundsCheck(
        rank=phi.rank,
        degree_flags=[(g.format(phi.basis), r.degree_lower_bound, r.degree_lower_bound <= 2 * phi.rank)
                      for g, r in sorted(reports.items(), key=lambda kv: _elem_key(kv[0]))],
        type_sums=type_sums,
        total_sum=sum(type_sums.values()),
        sigma=len(families),
        pair_sums=pairs,
        families=[[g.format(phi.basis) for g in fam] for fam in families],
    )
    notes = []
    if not families:
        notes.append("no witnesses at bounds")
    for t in ("phi", "phi_inverse"):
        if not any(reports[f[0]].type == t for f in families):
            notes.append(f"expected at least one singular family of {t}-type; none found at these bounds")
    return SearchResult(cands, reports, families, bounds, notes)


def group_families(phi: Automorphism, singular: list, reports: dict, cfg: Config) -> list:
    """Group singular elements into F_N-orbits of their fixed points."""
    dsu = DisjointSet(range(len(singular)))
    sigs = [hull_signature(reports[g].rays, cfg.probe) for g in singular]
    index = {g: i for i, g in enumerate(singular)}
    for i, g in enumerate(singular):
        for h in fn_conjugates(phi, g, cfg.conjugator_radius):
            j = index.get(h)
            if j is not None:
                dsu.merge(i, j)
        for j in range(i):
            if sigs[i] is not None and sigs[i] == sigs[j] and reports[singular[j]].type == reports[g].type:
                dsu.merge(i, j)
    groups = [sorted((singular[i] for i in s), key=_elem_key) for s in dsu.subsets()]
    return sorted(groups, key=lambda fam: _elem_key(fam[0]))


def build_languages(phi: Automorphism, cfg: Config) -> tuple:
    """``(Lambda_phi, Lambda_phi^-1)`` approximations per ``cfg``."""
    kw = dict(ball_radius=cfg.ball, k=cfg.depth, n_max=cfg.n_max, stall=cfg.stall,
              burn_in=cfg.orbit_burn_in, jobs=cfg.jobs)
    phi = Automorphism(phi.basis, phi.images, phi.inverse_images, cfg.budget)
    return mitra_language(phi, **kw), mitra_language(phi.inverse(), **kw)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
