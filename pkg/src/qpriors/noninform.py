"""Relative entropies between priors and the comparative noninformativity test.

Prior p1 is judged more noninformative than p2 when conditioning p1 on the
test likelihood moves it toward p2 (S(post1 || p2) < S(p1 || p2)) while
conditioning p2 moves it away from p1 (S(post2 || p1) > S(p2 || p1)).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._io import csv_text
from .bayes import MeasurementSpec, Posterior, likelihood, posterior
from .errors import IntegrationError, SupportMismatchError, ValidationError
from .priors import PriorDensity
from .quadrature import integrate, integrate_1d

FIRST = "first_more_noninformative"
SECOND = "second_more_noninformative"
INCONCLUSIVE = "inconclusive"
KL_CLAMP = 1e-9
#: posterior-stage integrals are 3D with boundary singularities; 1e-7 is ample
POSTERIOR_REL_TOL = 1e-7


@dataclass(frozen=True)
class KLResult:
    value: float
    error_estimate: float
    evals: int
    p: str = ""
    q: str = ""


def _log_ratio(a, b, where):
    bad = (a > 0) & (b <= 0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SupportMismatchError(
            "first density is positive where the second vanishes; KL diverges",
            point=tuple(float(v) for v in where[:, k]),
        )
    pos = a > 0
    return np.where(pos, np.log(np.where(pos, a, 1.0) / np.where(pos, b, 1.0)), 0.0)


def _check_support(p, q):
    if tuple(p.coords) != tuple(q.coords):
        raise ValidationError(f"domains differ: {p.coords} vs {q.coords}")
    for (a0, a1), (b0, b1) in zip(p.domain, q.domain):
        if a0 < b0 - 1e-15 or a1 > b1 + 1e-15:
            raise SupportMismatchError(
                f"support of {getattr(p, 'name', 'p')} extends beyond {getattr(q, 'name', 'q')}",
                point=(a0, a1),
            )


def _finish(value, err, evals, p, q) -> KLResult:
    if -KL_CLAMP < value < 0:
        value = 0.0
    return KLResult(float(value), float(err), int(evals), getattr(p, "name", ""), getattr(q, "name", ""))


def kl(p, q, rel_tol=1e-10) -> KLResult:
    """S(p || q) = integral of p log(p/q), in nats.

    ``p`` may be a PriorDensity or a Posterior; ``q`` a PriorDensity. Two
    rotationally invariant priors reduce to a single radial integral.
    """
    _check_support(p, q)
    if isinstance(p, PriorDensity) and p.radial_only and q.radial_only:
        lo, hi = p.core_domain[0]

        def f(r):
            a = p.radial(r)
            b = q.radial(r)
            return a * _log_ratio(a, b, r[None, :])

        res = integrate_1d(f, lo, hi, transform="sqrt_boundary_upper", rel_tol=rel_tol, abs_tol=1e-14)
        if not res.converged:
            raise IntegrationError(f"KL({p.name}||{q.name}): {res.message}", res)
        return _finish(res.value, res.error_estimate, res.evals, p, q)
    if isinstance(p, Posterior):
        return _kl_posterior(p, q, rel_tol)
    spec = p.spec(rel_tol=max(rel_tol, 1e-8 if len(p.coords) <= 3 else 1e-5), abs_tol=1e-14)

    def g(x):
        a = p(x)
        return a * _log_ratio(a, q(x), x)

    res = integrate(g, spec)
    if not res.converged:
        raise IntegrationError(f"KL({p.name}||{q.name}): {res.message}", res)
    return _finish(res.value, res.error_estimate, res.evals, p, q)


def _kl_posterior(post: Posterior, q: PriorDensity, rel_tol) -> KLResult:
    # S(post||q) = (1/Z) int p L [log(p/q) + log L] - log Z, all in one pass
    prior, like = post.prior, post.like
    spec = prior.spec(rel_tol=max(rel_tol, POSTERIOR_REL_TOL if len(prior.coords) <= 3 else 1e-5), abs_tol=1e-15)

    def g(x):
        a = prior(x)
        lk = like(x)
        w = a * lk
        loglk = np.where(lk > 0, np.log(np.where(lk > 0, lk, 1.0)), 0.0)
        return np.stack([w, w * _log_ratio(a, q(x), x), w * loglk])

    res = integrate(g, spec)
    if not res.converged:
        raise IntegrationError(f"KL({post.name}||{q.name}): {res.message}", res)
    z, a, b = res.value
    ez, ea, eb = res.error_estimate
    value = (a + b) / z - math.log(z)
    err = (abs(ea) + abs(eb)) / z + abs(ez) * (abs(a + b) / z**2 + 1 / z)
    return _finish(value, err, res.evals, post, q)


# -- Clarke comparison -----------------------------------------------------------


@dataclass(frozen=True)
class Stage:
    power: float
    s12_post: float
    s21_post: float
    verdict: str


def _verdict(s12, s21, s12_post, s21_post) -> str:
    if s12_post < s12 and s21_post > s21:
        return FIRST
    if s21_post < s21 and s12_post > s12:
        return SECOND
    return INCONCLUSIVE


@dataclass(frozen=True)
class ClarkeVerdict:
    first: str
    second: str
    s12: float
    s21: float
    s12_post: float
    s21_post: float
    verdict: str
    power: float
    stages: tuple = field(default=(), compare=False)

    @property
    def winner(self) -> str | None:
        return {FIRST: self.first, SECOND: self.second}.get(self.verdict)

    def stage(self, power: float) -> Stage:
        for s in self.stages:
            if math.isclose(s.power, power):
                return s
        raise KeyError(power)

    def mirrored(self) -> "ClarkeVerdict":
        flip = {FIRST: SECOND, SECOND: FIRST, INCONCLUSIVE: INCONCLUSIVE}
        st = tuple(Stage(s.power, s.s21_post, s.s12_post, flip[s.verdict]) for s in self.stages)
        return ClarkeVerdict(
            self.second, self.first, self.s21, self.s12, self.s21_post, self.s12_post,
            flip[self.verdict], self.power, st,
        )


def clarke_compare(
    p1: PriorDensity, p2: PriorDensity, testspec: MeasurementSpec | None = None, extra_powers=(1.0,)
) -> ClarkeVerdict:
    """Run the comparison; the verdict uses ``testspec`` (default: 3 pairs, power 1/2).

    Stages for ``extra_powers`` are computed as well and kept in ``stages``.
    """
    testspec = testspec or MeasurementSpec.canonical(0.5)
    s12 = kl(p1, p2).value
    s21 = kl(p2, p1).value
    powers = [testspec.power] + [pw for pw in extra_powers if not math.isclose(pw, testspec.power)]
    stages = []
    for pw in powers:
        like = likelihood(testspec.with_power(pw))
        a = kl(posterior(p1, like), p2).value
        b = kl(posterior(p2, like), p1).value
        stages.append(Stage(pw, a, b, _verdict(s12, s21, a, b)))
    main = stages[0]
    stages.sort(key=lambda s: s.power)
    return ClarkeVerdict(
        p1.name, p2.name, s12, s21, main.s12_post, main.s21_post, main.verdict, testspec.power,
        tuple(stages),
    )


# -- ranking -----------------------------------------------------------------------


@dataclass
class RankingReport:
    names: list
    verdicts: dict  # (a, b) -> ClarkeVerdict for a before b in input order
    order: list | None
    transitive: bool
    ties: list
    inconclusive: list

    def matrix(self) -> list[list[str]]:
        """Row a, column b: '>' when a is more noninformative than b."""
        rows = []
        for a in self.names:
            row = []
            for b in self.names:
                if a == b:
                    row.append("")
                    continue
                v = self.pair(a, b)
                row.append(">" if v.winner == a else "<" if v.winner == b else "?")
            rows.append(row)
        return rows

    def pair(self, a, b) -> ClarkeVerdict:
        if (a, b) in self.verdicts:
            return self.verdicts[(a, b)]
        return self.verdicts[(b, a)].mirrored()

    def ranking_line(self) -> str:
        if self.order is None:
            return "no total order (" + ("intransitive" if not self.transitive else "inconclusive pairs") + ")"
        return " > ".join(self.order)

    def csv(self, power: float | None = None) -> str:
        rows = []
        for a, b in itertools.permutations(self.names, 2):
            v = self.pair(a, b)
            if power is None:
                rows.append((a, b, v.power, v.s12, v.s21, v.s12_post, v.s21_post, v.verdict))
            else:
                s = v.stage(power)
                rows.append((a, b, power, v.s12, v.s21, s.s12_post, s.s21_post, s.verdict))
        return csv_text(("p1", "p2", "power", "S12", "S21", "S12_post", "S21_post", "verdict"), rows)

    def markdown(self) -> str:
        lines = ["| p1 | p2 | power | S12 | S21 | S12_post | S21_post | verdict |", "|---|---|---|---|---|---|---|---|"]
        for a, b in itertools.permutations(self.names, 2):
            v = self.pair(a, b)
            for s in v.stages:
                lines.append(
                    f"| {a} | {b} | {s.power:g} | {v.s12:.7g} | {v.s21:.7g} | {s.s12_post:.7g} | "
                    f"{s.s21_post:.7g} | {s.verdict} |"
                )
        lines.append("")
        lines.append(f"Ranking (decreasing noninformativity): {self.ranking_line()}")
        if self.ties:
            lines.append(f"Ties: {', '.join('='.join(t) for t in self.ties)}")
        return "\n".join(lines) + "\n"


def rank(priors, testspec: MeasurementSpec | None = None, workers: int = 1, extra_powers=(1.0,)) -> RankingReport:
    """All pairwise comparisons and, when consistent, the total order."""
    priors = list(priors)
    if len(priors) < 2:
        raise ValidationError("rank needs at least two priors")
    names = [p.name for p in priors]
    pairs = list(itertools.combinations(range(len(priors)), 2))

    def run(ij):
        i, j = ij
        return clarke_compare(priors[i], priors[j], testspec, extra_powers)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, pairs))
    else:
        results = [run(ij) for ij in pairs]
    verdicts = {(names[i], names[j]): v for (i, j), v in zip(pairs, results)}

    ties, inconclusive = [], []
    beats = {n: set() for n in names}
    for (a, b), v in verdicts.items():
        if v.winner is None:
            if a == b or (abs(v.s12) <= KL_CLAMP and abs(v.s21) <= KL_CLAMP):
                ties.append((a, b))
            else:
                inconclusive.append((a, b))
        else:
            loser = b if v.winner == a else a
            beats[v.winner].add(loser)

    # a total order exists iff every pair is decided and the wins form a chain
    order = sorted(names, key=lambda n: -len(beats[n]))
    transitive = all(
        not (b in beats[a] and a in beats[b]) for a, b in itertools.combinations(names, 2)
    ) and all(
        c in beats[a] for a in names for b in beats[a] for c in beats[b] if c != a
    )
    complete = not ties and not inconclusive
    chain = complete and all(order[k + 1] in beats[order[k]] for k in range(len(order) - 1))
    return RankingReport(names, verdicts, order if (transitive and chain) else None, transitive, ties, inconclusive)
