"""Tables and figure data for the full reproduction report."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models
from ._io import atomic_write, csv_text, fmt
from .bayes import CLOSED_GAINS, MeasurementSpec, info_gain, info_gain_qext, likelihood
from .config import Config
from .errors import QPriorError
from .metrics import closed, degeneracy
from .metrics.closed import bures_trunc_q_integral, f_bures_q
from .metrics.fisher import fisher_numeric, husimi_volume_reduced
from .metrics.hubner import hubner_metric
from .noninform import kl, rank
from .priors import (
    BTRUNC_MASS,
    build_prior,
    husimi_q_peak,
    marginal,
    pure_state_dominance,
    r_marginal_tail,
)
from .quadrature import IntegrationSpec, integrate

log = logging.getLogger(__name__)

RANKED = ("p_B", "p_Btrunc", "p_F", "p_Fq1")
EXPECTED_ORDER = ("p_Fq1", "p_B", "p_Btrunc", "p_F")

#: reference KL statistics: (p, q, stage power or None for prior-prior, value)
KL_REFERENCE = (
    ("p_B", "p_Btrunc", None, 0.101846),
    ("p_Btrunc", "p_B", None, 0.0661775),
    ("p_B", "p_Btrunc", 1.0, 0.169782),
    ("p_Btrunc", "p_B", 1.0, 0.197657),
    ("p_B", "p_Btrunc", 0.5, 0.093849),
    ("p_Btrunc", "p_B", 0.5, 0.114669),
    ("p_F", "p_Fq1", None, 0.229666),
    ("p_Fq1", "p_F", None, 0.170145),
    ("p_F", "p_Fq1", 1.0, 0.70766),
    ("p_Fq1", "p_F", 1.0, 0.0641738),
    ("p_B", "p_Fq1", None, 0.148269),
    ("p_Fq1", "p_B", None, 0.0989669),
    ("p_B", "p_Fq1", 0.5, 0.283218),
    ("p_Fq1", "p_B", 0.5, 0.0842879),
    ("p_Btrunc", "p_Fq1", None, 0.105463),
    ("p_Fq1", "p_Btrunc", None, 0.0914175),
    ("p_Btrunc", "p_F", None, 0.0191948),
    ("p_F", "p_Btrunc", None, 0.0234599),
    ("p_Btrunc", "p_F", 0.5, 0.0143147),
    ("p_F", "p_Btrunc", 0.5, 0.1047772),
)
KL_TOL = 0.02

GAIN_REFERENCE = (
    # (label, spec, unextended value, extended value)
    ("one up/down pair along z", "z:1,1", 7 / 6 - math.log(3), 0.0597923),
    ("single up along z", "z:1,0", 0.140186, 0.134651),
    ("two up along z", "z:2,0", 59 / 30 - math.log(5), 0.349601),
)

HUSIMI_PEAK = (3.59782, 0.448488)

FIGURE_FILES = (
    ("fig_biasedness_r_marginals.csv", "r-marginals of p_Fq1, p_B, p_Btrunc, p_F"),
    ("fig_f_bures_q.csv", "f_Bures_q(t) for several q"),
    ("fig_bures_qr_2d.csv", "truncated extended Bures density over (q, r)"),
    ("fig_bures_q_marginal.csv", "its q-marginal"),
    ("fig_bures_r_marginal.csv", "its r-marginal"),
    ("fig_husimi_qr_2d.csv", "escort-Husimi Fisher density over (q, r)"),
    ("fig_husimi_q_marginal.csv", "its q-marginal"),
    ("fig_husimi_r_marginal.csv", "its r-marginal"),
    ("kl_pairs.csv", "pairwise statistics, power 1/2 stage"),
    ("kl_pairs_power1.csv", "pairwise statistics, power 1 stage"),
)
NORMALIZATION_REFERENCE = {"p_F": 1.39350989, "p_Fq1": 0.24559293}


@dataclass
class Section:
    title: str
    lines: list = field(default_factory=list)
    checks: list = field(default_factory=list)  # (label, ok)

    def table(self, header, rows):
        self.lines.append("| " + " | ".join(header) + " |")
        self.lines.append("|" + "---|" * len(header))
        for row in rows:
            self.lines.append("| " + " | ".join(_cell(v) for v in row) + " |")
        self.lines.append("")

    def check(self, label, ok):
        self.checks.append((label, bool(ok)))

    def markdown(self) -> str:
        out = [f"## {self.title}", ""] + self.lines
        if self.checks:
            out += [f"- [{'x' if ok else ' '}] {label}" for label, ok in self.checks]
            out.append("")
        return "\n".join(out)


def _cell(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.7g}"
    return str(v)


def rel(a, b):
    return abs(a - b) / abs(b)


class Report:
    """Builds every section; figure CSVs go to ``out``."""

    def __init__(self, config: Config, out: Path, workers: int = 1):
        self.cfg = config
        self.out = Path(out)
        self.workers = workers
        self.sections: list[Section] = []
        self._priors = {}

    def prior(self, name):
        if name not in self._priors:
            self._priors[name] = build_prior(name, self.cfg)
        return self._priors[name]

    def write(self, name, text):
        path = atomic_write(self.out / name, text)
        log.info("wrote %s", path)
        return path

    # -- sections ----------------------------------------------------------------

    def metrics(self):
        sec = Section("Metric oracles and degeneracy")
        rng_seed = self.cfg.seed
        fams = {
            "bloch": (models.BLOCH, degeneracy.sample_bloch,
                      lambda a: closed.bures_bloch_closed(models.BlochPoint(*a))),
            "escort q=1": (models.ESCORT, lambda g: (1.0,) + degeneracy.sample_bloch(g),
                           lambda a: closed.bures_extended_closed(models.EscortPoint.of(*a))),
            "escort": (models.ESCORT, degeneracy.sample_escort,
                       lambda a: closed.bures_extended_closed(models.EscortPoint.of(*a))),
            "spin1": (models.SPIN1, degeneracy.sample_spin1,
                      lambda a: closed.spin1_bures_closed(models.SpinOneFamilyPoint(*a))),
        }
        rows = []
        for label, (fam, sampler, ref) in fams.items():
            worst = oracle_check(fam, sampler, ref, 100, rng_seed)
            rows.append((label, 100, worst, worst < 1e-5))
            sec.check(f"numeric Bures vs closed form ({label}) below 1e-5", worst < 1e-5)
        rng = np.random.default_rng(rng_seed)
        worst = 0.0
        for _ in range(20):
            r = float(rng.uniform(0.02, 0.98))
            g = fisher_numeric(models.EscortPoint.of(1.0, r, 1.0, 0.5))
            c = closed.fisher_husimi_extended_q1_closed(models.BlochPoint(r, 1.0, 0.5))
            worst = max(worst, g.relative_deviation(c))
        rows.append(("Husimi Fisher q=1", 20, worst, worst < 1e-5))
        sec.check("numeric Fisher vs closed form at q=1 below 1e-5", worst < 1e-5)
        sec.lines.append("Maximum relative deviation (Frobenius) of numeric from closed tensors:")
        sec.lines.append("")
        sec.table(("family", "points", "max deviation", "ok"), rows)

        scans = degeneracy_scans(self.cfg.seed)
        sec.table(
            ("tensor", "samples", "max |det|/scale", "threshold", "null"),
            [(k, s.n, s.max_ratio, thr, s.max_ratio < thr) for k, (s, thr) in scans.items()],
        )
        for k, (s, thr) in scans.items():
            if k.startswith("Bloch"):
                sec.check("Bloch Bures determinant non-null (positive control)", s.max_ratio > thr)
            else:
                sec.check(f"{k}: determinant null", s.max_ratio < thr)
        p = models.AbeRajPoint(0.1, 4.0)
        sub = closed.aberaj_metric_q1(p).sub(("b_q", "sigma_q2")).det
        cand = closed.aberaj_volume_candidates(p)
        sec.lines.append(
            f"Abe-Rajagopal (b_q, sigma_q2) block determinant at (0.1, 4.0): {fmt(sub)}; "
            f"sigma_q2 reading {fmt(cand['sigma_q2'])}, sigma_q reading {fmt(cand['sigma_q'])}. "
            f"Matching reading: {'sigma_q2' if rel(sub, cand['sigma_q2']) < 1e-10 else 'sigma_q'}."
        )
        sec.lines.append("")
        ratios = [(q, models.printed_escort_prefactor_ratio(q, 0.5), 2 ** (1 - q)) for q in (0.5, 1, 2, 5)]
        sec.lines.append("Escort-Husimi closed prefactor over the self-normalizing constant (r=0.5):")
        sec.lines.append("")
        sec.table(("q", "ratio", "2^(1-q)"), ratios)
        return sec

    def normalizations(self):
        sec = Section("Normalization constants")
        rows = []
        for name, ref in NORMALIZATION_REFERENCE.items():
            p = self.prior(name)
            m = p.mass(rel_tol=1e-8).value
            rows.append((name, p.normalization, ref, rel(p.normalization, ref), m))
            sec.check(f"{name} normalization within 1e-4 of {ref}", rel(p.normalization, ref) < 1e-4)
        for name in ("p_B", "p_Btrunc"):
            p = build_prior(name, self.cfg.replace(pb_convention="sqrt"))
            m = p.mass(rel_tol=1e-8).value
            rows.append((name, p.normalization, "", "", m))
            sec.check(f"{name} integrates to 1 within 1e-6", abs(m - 1) < 1e-6)
        sec.table(("prior", "normalization", "reference", "rel. deviation", "total mass"), rows)
        sec.lines.append(f"Raw truncated q=1 Bures mass: {fmt(BTRUNC_MASS)} (pi (1 + log 4) / 24).")
        sec.lines.append("")
        return sec

    def closed_marginals(self):
        sec = Section("Truncated extended Bures marginals")
        b4 = self.prior("p_Bqext4D")
        rows = []
        for q in (1.0, 2.0, 10.0):
            spec = IntegrationSpec(
                ((0.0, 1.0), (0.0, math.pi), (0.0, 2 * math.pi)),
                rel_tol=1e-10,
                transforms=("sqrt_boundary_upper", "none", "none"),
            )
            val = integrate(lambda x, q=q: closed.bures_trunc_volume(q, x[0], x[1]), spec).value
            ref = math.pi * (1 + math.log(4)) / (24 * q)
            rows.append((q, val, ref, rel(val, ref)))
            sec.check(f"ball integral at q={q:g} matches pi(1+log4)/(24q) within 1e-4", rel(val, ref) < 1e-4)
        sec.table(("q", "quadrature", "closed", "rel. deviation"), rows)
        rows = []
        for r in (0.05, 0.3, 0.5, 0.8, 0.95):
            curve = marginal(b4, "r", [r], normalized=False, rel_tol=1e-11)
            closed_v = float(bures_trunc_q_integral(self.cfg.q_min, self.cfg.q_max, r))
            rows.append((r, curve.values[0], closed_v, rel(curve.values[0], closed_v)))
            sec.check(f"antiderivative difference at r={r} within 1e-5", rel(curve.values[0], closed_v) < 1e-5)
        sec.lines.append(f"r-marginal over q in [{self.cfg.q_min:g}, {self.cfg.q_max:g}]:")
        sec.lines.append("")
        sec.table(("r", "quadrature", "antiderivative difference", "rel. deviation"), rows)
        return sec

    def kl_table(self):
        sec = Section("Relative entropies and the noninformativity test")
        priors = [self.prior(n) for n in RANKED]
        t0 = time.perf_counter()
        rep = rank(priors, MeasurementSpec.canonical(0.5), workers=self.workers)
        log.info("ranking took %.1fs", time.perf_counter() - t0)
        rows = []
        for p, q, power, ref in KL_REFERENCE:
            v = rep.pair(p, q)
            val = v.s12 if power is None else v.stage(power).s12_post
            stage = "prior" if power is None else f"posterior (power {power:g})"
            ok = rel(val, ref) < KL_TOL
            rows.append((p, q, stage, val, ref, rel(val, ref), ok))
            sec.check(f"S({'post ' if power else ''}{p} || {q}) = {ref} within 2%", ok)
        sec.table(("p", "q", "stage", "computed", "reference", "rel. deviation", "within 2%"), rows)
        sec.lines.append("All pairwise statistics, both posterior stages:")
        sec.lines.append("")
        sec.lines.append(rep.markdown())
        sec.check(f"ranking is {' > '.join(EXPECTED_ORDER)}", rep.order == list(EXPECTED_ORDER))
        sec.check("pairwise verdicts transitive", rep.transitive)
        self.write("kl_pairs.csv", rep.csv(0.5))
        self.write("kl_pairs_power1.csv", rep.csv(1.0))
        return sec

    def dominance(self):
        sec = Section("Pointwise dominance of the r-marginals")
        priors = [self.prior(n) for n in EXPECTED_ORDER]
        d = pure_state_dominance(priors, 0.005, 20, expected=EXPECTED_ORDER)
        rows = []
        for r, o in zip(d.radii, d.orders):
            vals = [float(self.prior(n).radial(np.array([r]))[0]) for n in EXPECTED_ORDER]
            rows.append((f"{r:.5f}", " > ".join(o), *vals, tuple(o) == EXPECTED_ORDER))
        sec.table(("r", "order", *EXPECTED_ORDER, "expected order"), rows)
        for a, b, r_star in d.crossovers:
            sec.lines.append(f"Crossover of {a} and {b} at r = {r_star:.10f}.")
        sec.lines.append("")
        sec.lines.append(
            f"Radii with the expected order: {d.n_matching} of {len(d.radii)}. "
            f"Order at r = {d.near_zero_radius}: {' > '.join(d.near_zero_order)} "
            f"(exact reverse of the expected order: {d.near_zero_is_reverse})."
        )
        sec.lines.append("")
        sec.check("expected order at all 20 radii in [0.995, 1)", d.matches_expected)
        sec.check("order near r=0 differs from the exact reverse", d.near_zero_is_reverse is False)
        grid = np.linspace(0, 1, self.cfg.grid_size + 2)[1:-1]
        grid = np.concatenate([grid, 1 - np.geomspace(0.005, 1e-6, 40)])
        rows = []
        for n in EXPECTED_ORDER:
            rows += [(n, g, v) for g, v in zip(grid, self.prior(n).radial(grid))]
        self.write("fig_biasedness_r_marginals.csv", csv_text(("prior", "r", "density"), rows))
        return sec

    def gains(self):
        sec = Section("Information gains")
        pb = build_prior("p_B", self.cfg.replace(pb_convention="sqrt"))
        b4 = self.prior("p_Bqext4D")
        rows = []
        for label, text, ref3, ref4 in GAIN_REFERENCE:
            spec = MeasurementSpec.parse(text)
            g3 = info_gain(pb, likelihood(spec), rel_tol=1e-10).value
            t0 = time.perf_counter()
            g4 = info_gain_qext(b4, spec)
            dt = time.perf_counter() - t0
            log.info("4D gain %s: %.1fs", text, dt)
            rows.append((label, text, g3, ref3, g4.value, ref4, g4.evals))
            sec.check(f"{label}: unextended {ref3:.7g} within 1e-4", abs(g3 - ref3) < 1e-4)
            sec.check(f"{label}: extended {ref4} within 2%", rel(g4.value, ref4) < 0.02)
            sec.check(f"{label}: unextended exceeds extended", g3 > g4.value)
        sec.table(
            ("measurement", "spec", "p_B gain", "reference", "4D gain", "reference", "evals"), rows
        )
        sec.lines.append(
            f"Closed forms: 7/6 - log 3 = {fmt(CLOSED_GAINS['pair'])}, 59/30 - log 5 = {fmt(CLOSED_GAINS['two_up'])}."
        )
        sec.lines.append("")
        rows = []
        for text in ("x:1,1 z:1,1", "x:1,1 y:1,1 z:1,1"):
            spec = MeasurementSpec.parse(text)
            g3 = info_gain(pb, likelihood(spec), rel_tol=1e-10)
            g4 = info_gain_qext(b4, spec)
            rows.append((text, g3.value, g3.evals, g4.value, g4.error_estimate, g4.evals))
        sec.lines.append("Integrator effort for measurements along more than one axis:")
        sec.lines.append("")
        sec.table(("spec", "p_B gain", "evals", "4D gain", "4D error estimate", "4D evals"), rows)
        return sec

    def husimi(self):
        sec = Section("General-q Husimi marginals")
        pk = husimi_q_peak(self.cfg)
        sec.table(
            ("quantity", "value", "reference"),
            [
                ("peak location", pk["q_peak"], HUSIMI_PEAK[0]),
                ("raw peak height", pk["raw_value"], HUSIMI_PEAK[1]),
                ("normalized peak height", pk["normalized_value"], ""),
                ("normalization over q range", pk["normalization"], ""),
            ],
        )
        conv = "raw" if rel(pk["raw_value"], HUSIMI_PEAK[1]) < 0.05 else "normalized"
        sec.lines.append(f"The reference peak height is reproduced by the {conv} marginal.")
        sec.lines.append("")
        sec.check("peak location within 0.05 of 3.59782", abs(pk["q_peak"] - HUSIMI_PEAK[0]) < 0.05)
        sec.check(
            "peak height within 5% of 0.448488 (raw convention)", rel(pk["raw_value"], HUSIMI_PEAK[1]) < 0.05
        )
        f4 = self.prior("p_Fqext4D")
        radii = np.array([0.98, 0.99, 0.995, 0.999, 0.9995, 0.9999])
        tail = r_marginal_tail(f4, radii, rel_tols=(1e-5, 1e-10))
        rows = []
        for i, r in enumerate(radii):
            rows.append((r, *(tail["by_tolerance"][t]["values"][i] for t in (1e-5, 1e-10))))
        sec.table(("r", "density (tol 1e-5)", "density (tol 1e-10)"), rows)
        up = {t: v["upturn"] for t, v in tail["by_tolerance"].items()}
        sec.lines.append(
            f"Upturn near r=1: {up}; max relative change between tolerances {tail['max_rel_change']:.2e}."
        )
        sec.lines.append("")
        return sec

    def figures(self):
        sec = Section("Figure data")
        cfg = self.cfg
        t = np.linspace(0.001, 0.999, cfg.grid_size)
        rows = [(q, ti, f) for q in (0.5, 1.0, 1.5, 2.0, 5.0) for ti, f in zip(t, f_bures_q(t, q))]
        self.write("fig_f_bures_q.csv", csv_text(("q", "t", "f"), rows))
        n = min(cfg.grid_size, 100)
        qs = np.geomspace(cfg.q_min, cfg.q_max, n)
        rs = np.linspace(0, 1, n + 2)[1:-1]
        qq, rr = np.meshgrid(qs, rs, indexing="ij")
        bures2d = 4 * math.pi * closed.bures_trunc_volume(qq, rr)
        self.write("fig_bures_qr_2d.csv", csv_text(("q", "r", "density"), zip(qq.ravel(), rr.ravel(), bures2d.ravel())))
        hus2d = 4 * math.pi * husimi_volume_reduced(qq, rr)
        self.write("fig_husimi_qr_2d.csv", csv_text(("q", "r", "density"), zip(qq.ravel(), rr.ravel(), hus2d.ravel())))
        for name, tag in (("p_Bqext4D", "bures"), ("p_Fqext4D", "husimi")):
            p = self.prior(name)
            for var in ("q", "r"):
                curve = marginal(p, var, normalized=False, rel_tol=1e-8)
                self.write(f"fig_{tag}_{var}_marginal.csv", curve.csv())
        sec.lines.append(
            "Raw (unnormalized) marginals of the 4D volume elements; 2D grids are the angle-integrated "
            "volume element over (q, r)."
        )
        sec.lines.append("")
        sec.table(("file", "content"), FIGURE_FILES)
        return sec

    def sensitivity(self):
        sec = Section("Appendix: p_B convention sensitivity")
        cfg = self.cfg.replace(pb_convention="printed")
        pb = build_prior("p_B", cfg)
        sec.lines.append(
            f"Density r^2 sin(theta1) / (8 (1 - r^2)) truncated at r = 1 - {cfg.pb_delta:g}, "
            f"normalization {fmt(pb.normalization)}."
        )
        sec.lines.append("")
        rows = []
        for other in ("p_Btrunc", "p_F", "p_Fq1"):
            q = self.prior(other)
            for a, b in ((pb, q), (q, pb)):
                try:
                    v = fmt(kl(a, b).value)
                except QPriorError as exc:
                    v = f"undefined ({type(exc).__name__})"
                rows.append((a.name + ("*" if a is pb else ""), b.name + ("*" if b is pb else ""), v))
        sec.table(("p", "q", "S(p||q)"), rows)
        sec.lines.append("(* printed convention.) The reverse direction diverges because the truncated density vanishes on r > 1 - delta.")
        sec.lines.append("")
        return sec

    SECTIONS = ("metrics", "normalizations", "closed_marginals", "kl_table", "dominance",
                "gains", "husimi", "figures", "sensitivity")

    def run(self, include=SECTIONS, concurrent=True):
        """Compute sections (concurrently when ``workers`` > 1) and write summary.md."""

        def one(name):
            t0 = time.perf_counter()
            sec = getattr(self, name)()
            log.info("section %s: %.1fs", name, time.perf_counter() - t0)
            return sec

        if concurrent and self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as ex:
                self.sections = list(ex.map(one, include))
        else:
            self.sections = [one(n) for n in include]
        return self.summary()

    def summary(self) -> str:
        checks = [c for s in self.sections for c in s.checks]
        passed = sum(ok for _, ok in checks)
        head = [
            "# qprior reproduction report",
            "",
            f"Configuration: q in [{self.cfg.q_min:g}, {self.cfg.q_max:g}], p_B convention "
            f"{self.cfg.pb_convention}, rel_tol {self.cfg.rel_tol:g} (4D {self.cfg.rel_tol_4d:g}).",
            "",
            f"Checks passed: {passed} of {len(checks)}.",
            "",
        ]
        text = "\n".join(head + [s.markdown() for s in self.sections])
        self.write("summary.md", text)
        return text


def oracle_check(family, sampler, reference, n, seed, method="central") -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        args = sampler(rng)
        g = hubner_metric(family, args, method=method)
        worst = max(worst, g.relative_deviation(reference(args)))
    return worst


def degeneracy_scans(seed: int, n_closed=1000, n_numeric=200):
    def ext(q, r, a, b):
        return closed.bures_extended_closed(models.EscortPoint.of(q, r, a, b))

    return {
        "extended Bures (closed, untruncated)": (
            degeneracy.degeneracy_scan(ext, lambda g: degeneracy.sample_escort(g, (0.5, 500.0), 0.999), n_closed, seed),
            1e-10,
        ),
        "q-extended 3x3 family (numeric)": (
            degeneracy.degeneracy_scan(
                lambda *a: hubner_metric(models.SPIN1_ESCORT, a), degeneracy.sample_spin1_escort, n_numeric, seed
            ),
            1e-7,
        ),
        "Abe-Rajagopal q=1": (
            degeneracy.degeneracy_scan(
                lambda b, s: closed.aberaj_metric_q1(models.AbeRajPoint(b, s)), degeneracy.sample_aberaj, 100, seed
            ),
            1e-10,
        ),
        "Bloch Bures (positive control)": (
            degeneracy.degeneracy_scan(
                lambda *a: closed.bures_bloch_closed(models.BlochPoint(*a)), degeneracy.sample_bloch, 100, seed
            ),
            1e-10,
        ),
    }
