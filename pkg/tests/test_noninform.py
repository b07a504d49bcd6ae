import numpy as np
import pytest

from qpriors.bayes import MeasurementSpec, likelihood, posterior
from qpriors.config import Config
from qpriors.errors import SupportMismatchError
from qpriors.noninform import FIRST, INCONCLUSIVE, SECOND, clarke_compare, kl, rank
from qpriors.priors import build_prior, custom_prior


@pytest.fixture(scope="module")
def priors():
    return {n: build_prior(n) for n in ("p_B", "p_Btrunc", "p_F", "p_Fq1")}


def test_kl_self_zero(priors):
    for p in priors.values():
        assert kl(p, p).value == 0.0


def test_kl_nonnegative(priors):
    names = list(priors)
    for a in names:
        for b in names:
            assert kl(priors[a], priors[b]).value >= 0


def test_kl_values(priors):
    assert kl(priors["p_B"], priors["p_Btrunc"]).value == pytest.approx(0.101846, rel=1e-4)
    assert kl(priors["p_F"], priors["p_Fq1"]).value == pytest.approx(0.229666, rel=1e-4)


def test_kl_posterior_nonnegative(priors):
    post = posterior(priors["p_B"], likelihood(MeasurementSpec.canonical(0.5)))
    assert kl(post, priors["p_B"]).value > 0


def test_kl_support_mismatch(priors):
    printed = build_prior("p_B", Config(pb_convention="printed"))
    assert kl(printed, priors["p_F"]).value > 0
    with pytest.raises(SupportMismatchError):
        kl(priors["p_F"], printed)


def test_kl_general_path_matches_radial(priors):
    # force the 3D path through a posterior with a constant likelihood
    post = posterior(priors["p_B"], likelihood(MeasurementSpec.parse("pow:1")))
    assert kl(post, priors["p_Btrunc"]).value == pytest.approx(0.101846, rel=1e-5)


def test_clarke_identical_is_inconclusive(priors):
    v = clarke_compare(priors["p_B"], priors["p_B"])
    assert v.verdict == INCONCLUSIVE and v.winner is None


def test_clarke_mirror(priors):
    v = clarke_compare(priors["p_B"], priors["p_Btrunc"])
    assert v.verdict == FIRST and v.winner == "p_B"
    m = v.mirrored()
    assert m.verdict == SECOND and m.winner == "p_B"
    assert v.stage(1.0).verdict == INCONCLUSIVE


def test_rank_ties():
    a = custom_prior("a", lambda r: 3 * r**2)
    b = custom_prior("b", lambda r: 3 * r**2)
    rep = rank([a, b])
    assert rep.order is None and rep.ties == [("a", "b")]


def test_rank_matrix_and_csv(priors):
    rep = rank([priors["p_B"], priors["p_Btrunc"]])
    assert rep.order == ["p_B", "p_Btrunc"]
    assert rep.matrix() == [["", ">"], ["<", ""]]
    lines = rep.csv().splitlines()
    assert lines[0].startswith("p1,p2,power,S12")
    assert len(lines) == 3
    assert "p_B > p_Btrunc" in rep.markdown()


def test_rank_needs_two(priors):
    with pytest.raises(Exception):
        rank([priors["p_B"]])
