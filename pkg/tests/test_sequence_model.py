import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpcutoff.sequence_model import (
    FlatJ,
    Hoelder,
    Logarithmic,
    Observation,
    PowerDecay,
    RandomSphere,
    SolutionSpec,
    draw_noise,
    forward,
    make_solution,
    make_xi,
    observe,
    solution_spec_from_dict,
    source_factors,
    stream_seed,
    tail_bound,
)
from dpcutoff.spectrum import Exponential, Polynomial, Table


def test_zero_radius_gives_zero_solution():
    for prof in (FlatJ(3), PowerDecay(), RandomSphere(5)):
        x = make_solution(SolutionSpec(Hoelder(1.0), 0.0, prof, n_rep=20), Polynomial(1))
        assert np.all(x == 0)


def test_hoelder_flat_example():
    x = make_solution(SolutionSpec(Hoelder(1.0), 2.0, FlatJ(4), n_rep=10), Polynomial(1))
    expected = np.zeros(10)
    expected[:4] = np.arange(1, 5) ** -0.5
    np.testing.assert_allclose(x, expected, rtol=1e-15)


def test_logarithmic_flat_example():
    x = make_solution(SolutionSpec(Logarithmic(2.0), 1.0, FlatJ(1), n_rep=3), Exponential(1))
    assert x[0] == pytest.approx(1.0, rel=1e-15)
    assert np.all(x[1:] == 0)


def test_logarithmic_needs_sigma_below_one():
    with pytest.raises(ValueError, match="j=1"):
        make_solution(SolutionSpec(Logarithmic(1.0), 1.0, FlatJ(1), n_rep=3), Polynomial(1))


def test_flat_profile_longer_than_representation():
    with pytest.raises(ValueError):
        SolutionSpec(Hoelder(1.0), 1.0, FlatJ(11), n_rep=10)


@pytest.mark.parametrize("prof", [FlatJ(7), PowerDecay(1.0), PowerDecay(0.8), RandomSphere(3)])
@pytest.mark.parametrize(
    "cond,sp",
    [(Hoelder(1.0), Polynomial(1.0)), (Hoelder(0.5), Polynomial(3.0)),
     (Logarithmic(2.0), Exponential(1.0)), (Logarithmic(0.5), Exponential(0.2))],
)
def test_source_ball_membership(prof, cond, sp):
    spec = SolutionSpec(cond, 1.7, prof, n_rep=500)
    x = make_solution(spec, sp)
    factors = source_factors(cond, sp, spec.n_rep)
    keep = factors > 0
    xi = x[keep] / factors[keep]
    assert math.fsum(xi * xi) <= 1.7**2 * (1 + 1e-12)
    np.testing.assert_allclose(xi, make_xi(spec)[keep], rtol=1e-12, atol=0)


def test_power_decay_normalisation():
    xi = make_xi(SolutionSpec(Hoelder(1), 3.0, PowerDecay(1.0), n_rep=1000))
    assert math.fsum(xi * xi) == pytest.approx(9.0, rel=1e-14)
    assert xi[0] / xi[1] == pytest.approx(2.0, rel=1e-14)


def test_tail_bound_formulas():
    spec = SolutionSpec(Hoelder(1.0), 2.0, FlatJ(3), n_rep=99)
    assert tail_bound(spec, Polynomial(1)) == pytest.approx(4.0 / 100, rel=1e-14)
    spec = SolutionSpec(Logarithmic(2.0), 1.0, FlatJ(3), n_rep=9)
    assert tail_bound(spec, Exponential(1)) == pytest.approx(10.0**-2, rel=1e-14)
    # table ending at n_rep: evaluate at the last entry
    t = Table([1.0, 0.5, 0.25])
    spec = SolutionSpec(Hoelder(2.0), 1.0, FlatJ(1), n_rep=3)
    assert tail_bound(spec, t) == pytest.approx(0.25**4, rel=1e-14)


def test_forward_examples():
    assert np.all(forward(np.zeros(5), Polynomial(1)) == 0)
    np.testing.assert_allclose(forward([1, 1, 1], Polynomial(2)), [1, 0.5, 1 / 3], rtol=1e-15)
    np.testing.assert_allclose(forward([2.0], Exponential(2)), [2 * math.exp(-1)], rtol=1e-15)
    assert forward([2.0], Exponential(2))[0] == pytest.approx(0.735759, abs=1e-6)


@given(st.lists(st.floats(-1e3, 1e3, allow_subnormal=False), min_size=1, max_size=50),
       st.floats(0.1, 4.0))
def test_forward_inverse(x, q):
    sp = Polynomial(q)
    x = np.array(x)
    back = forward(x, sp) / sp.values(x.size)
    np.testing.assert_allclose(back, x, rtol=1e-14, atol=0)


def test_observe_determinism_and_validation():
    y_hat = np.linspace(1, 0, 30)
    a = observe(y_hat, 0.1, 40, "gaussian", seed=123)
    b = observe(y_hat, 0.1, 40, "gaussian", seed=123)
    assert a == b
    assert a.y.tobytes() == b.y.tobytes()
    assert a.n == 40
    assert observe(y_hat, 0.1, 40, "gaussian", seed=124) != a
    np.testing.assert_allclose(a.y[30:] / 0.1, draw_noise(40, "gaussian", 123)[30:], rtol=1e-14)
    with pytest.raises(ValueError):
        observe(y_hat, 0.1, 0)
    with pytest.raises(ValueError):
        observe(y_hat, 0.0, 5)
    with pytest.raises(ValueError):
        observe(y_hat, 0.1, 5, "cauchy")


def test_rademacher_support():
    obs = observe(np.zeros(3), 1.0, 1000, "rademacher", seed=1)
    assert set(np.unique(obs.y)) == {-1.0, 1.0}


def test_gaussian_second_moment():
    obs = observe(np.zeros(1), 1.0, 10**5, "gaussian", seed=2)
    assert abs(np.mean(obs.y**2) - 1) <= 0.02


@pytest.mark.parametrize("kind", ["gaussian", "rademacher", "uniform"])
def test_white_noise_moments(kind):
    z = draw_noise(10**6, kind, seed=11)
    assert abs(z.mean()) <= 0.005
    assert abs(z.var() - 1) <= 0.01


def test_stream_seeds_distinct():
    seeds = {stream_seed(42, i, r) for i in range(5) for r in range(200)}
    assert len(seeds) == 1000
    assert stream_seed(42, 1, 2) == stream_seed(42, 1, 2)
    assert stream_seed(42, 1, 2) != stream_seed(43, 1, 2)


def test_observation_file_round_trip(tmp_path):
    obs = observe(np.linspace(1, 0.1, 7), 0.03, 9, "uniform", seed=77)
    path = tmp_path / "obs.txt"
    obs.save(path)
    assert (tmp_path / "obs.txt.json").exists()
    back = Observation.load(path)
    assert back == obs
    assert back.y.tobytes() == obs.y.tobytes()


@settings(max_examples=30)
@given(st.sampled_from(["flat", "power", "sphere"]), st.floats(0.1, 3), st.integers(5, 50))
def test_solution_spec_dict_round_trip(kind, nu, n):
    prof = {"flat": FlatJ(3), "power": PowerDecay(1.5), "sphere": RandomSphere(9)}[kind]
    spec = SolutionSpec(Hoelder(nu), 1.0, prof, n_rep=n)
    assert solution_spec_from_dict(spec.to_dict()) == spec
