"""Command-line interface: ``qprior <command> ...``.

Data goes to stdout, diagnostics to stderr. Exit status is 0 on success,
2 on a domain or numerical error and 64 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import models
from ._io import atomic_write, csv_text, fmt
from .bayes import MeasurementSpec, info_gain, info_gain_qext, likelihood, posterior
from .config import Config, load_config
from .errors import QPriorError, ValidationError
from .metrics import closed, degeneracy
from .metrics.fisher import fisher_numeric
from .metrics.hubner import hubner_metric
from .noninform import kl, rank
from .priors import PRIOR_NAMES, REFERENCE_NORMALIZATION, build_prior, marginal

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64

log = logging.getLogger("qprior")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- metric families ---------------------------------------------------------------

# name -> (numeric family or None, closed form or None, sampler)
FAMILIES = {
    "bloch": (
        models.BLOCH,
        lambda a: closed.bures_bloch_closed(models.BlochPoint(*a)),
        degeneracy.sample_bloch,
    ),
    "escort": (
        models.ESCORT,
        lambda a: closed.bures_extended_closed(models.EscortPoint.of(*a)),
        degeneracy.sample_escort,
    ),
    "spin1": (
        models.SPIN1,
        lambda a: closed.spin1_bures_closed(models.SpinOneFamilyPoint(*a)),
        degeneracy.sample_spin1,
    ),
    "spin1_escort": (models.SPIN1_ESCORT, None, degeneracy.sample_spin1_escort),
    "aberaj": (None, lambda a: closed.aberaj_metric_q1(models.AbeRajPoint(*a)), degeneracy.sample_aberaj),
    "husimi": (
        None,
        lambda a: closed.fisher_husimi_extended_q1_closed(models.BlochPoint(*a[1:])),
        lambda rng: (1.0,) + degeneracy.sample_bloch(rng),
    ),
}
FAMILY_NAMES = tuple(FAMILIES)


def _numeric(family, args):
    fam, _, _ = FAMILIES[family]
    if family == "husimi":
        return fisher_numeric(models.EscortPoint.of(*args))
    if fam is None:
        return None
    return hubner_metric(fam, args)


def _parse_point(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--point must be comma-separated numbers, got {text!r}") from None


def _emit(header, rows):
    sys.stdout.write(csv_text(header, rows))


def cmd_metric(args, cfg: Config) -> int:
    fam, ref, sampler = FAMILIES[args.family]
    if args.action == "eval":
        if args.point is None:
            raise UsageError("metric eval needs --point")
        point = _parse_point(args.point)
        if args.family == "husimi" and len(point) == 3:
            point = (1.0,) + point
        g_closed = ref(point) if ref is not None and args.source != "numeric" else None
        g_num = _numeric(args.family, point) if args.source != "closed" else None
        g = g_closed if g_closed is not None else g_num
        if g is None:
            raise UsageError(f"no {args.source} tensor for family {args.family}")
        rows = [(name, *row) for name, row in zip(g.coords, g.g)]
        rows += [
            ("det", g.det),
            ("det_ratio", g.det_ratio),
            ("volume_element", np.sqrt(max(g.det, 0.0))),
            ("degenerate", str(g.is_degenerate()).lower()),
        ]
        if g_closed is not None and g_num is not None:
            rows.append(("deviation", g_num.relative_deviation(g_closed)))
        _emit(("coords", *g.coords), rows)
        return EXIT_OK

    rng = np.random.default_rng(cfg.seed)
    n = args.samples
    if args.action == "check":
        if ref is None or (fam is None and args.family != "husimi"):
            raise UsageError(f"family {args.family} has no closed/numeric pair to check")
        worst, at = 0.0, None
        for _ in range(n):
            a = sampler(rng)
            d = _numeric(args.family, a).relative_deviation(ref(a))
            if d >= worst:
                worst, at = d, a
        _emit(("family", "samples", "max_relative_deviation", "argmax"),
              [(args.family, n, worst, " ".join(fmt(v) for v in at))])
        return EXIT_OK

    # detnull
    if args.family == "escort":
        # untruncated extended Bures over the full q range
        def metric(*a):
            return ref(a)

        def sampler(g):  # noqa: F811
            return degeneracy.sample_escort(g, (cfg.q_min, cfg.q_max), 0.999)
    elif ref is not None and args.source != "numeric":
        def metric(*a):
            return ref(a)
    else:
        def metric(*a):
            return _numeric(args.family, a)

    rep = degeneracy.degeneracy_scan(metric, sampler, n, seed=cfg.seed, tol=args.tol)
    _emit(("family", "samples", "max_det_ratio", "min_det_ratio", "tol", "null"),
          [(args.family, n, rep.max_ratio, rep.min_ratio, args.tol, str(rep.degenerate).lower())])
    log.info(rep.summary())
    return EXIT_OK


# -- priors ------------------------------------------------------------------------


def cmd_prior(args, cfg: Config) -> int:
    p = build_prior(args.name, cfg)
    if args.action == "normalize":
        m = p.mass(rel_tol=cfg.rel_tol if len(p.core_coords) == 1 else cfg.rel_tol_4d).value
        ref = REFERENCE_NORMALIZATION.get(p.name)
        dev = "" if ref is None else abs(p.normalization - ref) / ref
        _emit(("name", "normalization", "mass", "reference", "relative_deviation"),
              [(p.name, p.normalization, m, "" if ref is None else ref, dev)])
        return EXIT_OK
    var = args.var or "r"
    grid = None
    if args.points:
        grid = np.array(_parse_point(args.points))
    elif var == "q":
        grid = np.geomspace(cfg.q_min, cfg.q_max, cfg.grid_size)
    curve = marginal(p, var, grid, normalized=not args.raw, rel_tol=max(cfg.rel_tol, 1e-10))
    if args.out:
        path = curve.write_csv(args.out)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(curve.csv())
    return EXIT_OK


# -- relative entropy, ranking, information gain ----------------------------------------


def _spec(text, default: MeasurementSpec | None = None) -> MeasurementSpec:
    if text is None:
        return default
    try:
        return MeasurementSpec.parse(text)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None


def cmd_kl(args, cfg: Config) -> int:
    p = build_prior(args.p, cfg)
    q = build_prior(args.q, cfg)
    if args.posterior is not None:
        spec = _spec(args.spec, MeasurementSpec.canonical()).with_power(args.posterior)
        p = posterior(p, likelihood(spec))
    res = kl(p, q)
    _emit(("p", "q", "kl_nats", "error_estimate"), [(res.p, res.q, res.value, res.error_estimate)])
    return EXIT_OK


def cmd_rank(args, cfg: Config) -> int:
    names = [n.strip() for n in args.priors.split(",") if n.strip()]
    bad = [n for n in names if n not in PRIOR_NAMES]
    if bad:
        raise UsageError(f"unknown prior(s): {', '.join(bad)}")
    spec = _spec(args.spec, MeasurementSpec.canonical(0.5))
    rep = rank([build_prior(n, cfg) for n in names], spec, workers=args.workers)
    if args.format == "csv":
        sys.stdout.write(rep.csv())
    else:
        sys.stdout.write(rep.markdown())
    if args.out:
        atomic_write(args.out, rep.csv())
    return EXIT_OK


def cmd_infogain(args, cfg: Config) -> int:
    spec = _spec(args.spec)
    p = build_prior(args.prior, cfg)
    if args.q_extended:
        if "q" not in p.coords:
            raise UsageError(f"--q-extended needs a prior over q, got {p.name}")
        res = info_gain_qext(p, spec, rel_tol=cfg.rel_tol_4d)
    else:
        res = info_gain(p, likelihood(spec), rel_tol=cfg.rel_tol)
    _emit(("prior", "spec", "gain_nats", "evidence", "error_estimate", "evals"),
          [(p.name, spec.text(), res.value, res.evidence, res.error_estimate, res.evals)])
    return EXIT_OK


def cmd_report(args, cfg: Config) -> int:
    from .report import Report

    out = Path(args.out or cfg.out_dir)
    rep = Report(cfg, out, workers=args.workers)
    sections = Report.SECTIONS if args.all or not args.section else tuple(args.section)
    rep.run(sections)
    print(out / "summary.md")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qprior", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--config", help="key = value config file (default: $QPRIOR_CONFIG)")
    parser.add_argument("--q-min", type=float)
    parser.add_argument("--q-max", type=float)
    parser.add_argument("--pb-convention", choices=("sqrt", "printed"))
    parser.add_argument("--rel-tol", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("metric", help="evaluate, check or scan metric tensors")
    m.add_argument("action", choices=("eval", "check", "detnull"))
    m.add_argument("--family", required=True, choices=FAMILY_NAMES)
    m.add_argument("--point", help="comma-separated parameters")
    m.add_argument("--samples", type=int, default=100)
    m.add_argument("--source", choices=("closed", "numeric", "both"), default="both")
    m.add_argument("--tol", type=float, default=1e-10, help="degeneracy threshold")
    m.set_defaults(func=cmd_metric)

    p = sub.add_parser("prior", help="normalization constants and marginals")
    p.add_argument("action", choices=("normalize", "marginal"))
    p.add_argument("--name", required=True, choices=PRIOR_NAMES)
    p.add_argument("--var", choices=("r", "q"))
    p.add_argument("--points", help="comma-separated grid (default: config grid)")
    p.add_argument("--raw", action="store_true", help="unnormalized volume-element marginal")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prior)

    k = sub.add_parser("kl", help="relative entropy S(p||q) in nats")
    k.add_argument("--p", required=True, choices=PRIOR_NAMES)
    k.add_argument("--q", required=True, choices=PRIOR_NAMES)
    k.add_argument("--posterior", type=float, metavar="POW", help="condition p on the test likelihood^POW")
    k.add_argument("--spec", help="measurement spec (default: one up/down pair per axis)")
    k.set_defaults(func=cmd_kl)

    r = sub.add_parser("rank", help="pairwise noninformativity test and ranking")
    r.add_argument("--priors", required=True)
    r.add_argument("--spec", help="test likelihood (default: x:1,1 y:1,1 z:1,1 pow:1/2)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    r.add_argument("--out", help="also write the CSV table here")
    r.set_defaults(func=cmd_rank)

    i = sub.add_parser("infogain", help="information gain of a measurement")
    i.add_argument("--prior", required=True, choices=PRIOR_NAMES)
    i.add_argument("--spec", required=True)
    i.add_argument("--q-extended", action="store_true")
    i.set_defaults(func=cmd_infogain)

    rp = sub.add_parser("report", help="write every table and figure CSV")
    rp.add_argument("--all", action="store_true")
    rp.add_argument("--section", action="append", choices=(
        "metrics", "normalizations", "closed_marginals", "kl_table", "dominance",
        "gains", "husimi", "figures", "sensitivity"))
    rp.add_argument("--out")
    rp.add_argument("--workers", type=int, default=4)
    rp.set_defaults(func=cmd_report)
    return parser


def _config(args) -> Config:
    overrides = {
        k: v
        for k, v in (
            ("q_min", args.q_min),
            ("q_max", args.q_max),
            ("pb_convention", args.pb_convention),
            ("rel_tol", args.rel_tol),
            ("seed", args.seed),
        )
        if v is not None
    }
    return load_config(args.config, **overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _config(args)
    except (QPriorError, OSError) as exc:
        print(f"qprior: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qprior: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QPriorError, ArithmeticError) as exc:
        print(f"qprior: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
