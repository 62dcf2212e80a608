import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdecay.arch import brickwork
from qdecay.channels import CondExpectation, Depolarizing, Identity, random_channel
from qdecay.circuits import layer_channel, make_layout
from qdecay.entropy import (
    additive_depth, beta, binary_entropy, chain_iter2_gap, chain_iter_gap, chain_rule_residual, continuity_bound,
    decay_ratio, entropy_to_fixed_point, estimate_sdpi, max_initial_entropy, near_fixed_point_sampler,
    pinsker_residual, relative_entropy,
)
from qdecay.moments import global_twirl, haar_twirl_projector, local_twirl
from qdecay.tensors import SiteLayout, random_density_matrix, random_pure_state


def test_relative_entropy_examples(rng):
    rho = random_density_matrix(4, rng)
    assert abs(relative_entropy(rho, rho)) <= 1e-10
    assert np.isclose(relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2, base=2), 1.0)
    oracle = 0.75 * math.log2(1.5) + 0.25 * math.log2(0.5)
    assert np.isclose(relative_entropy(np.diag([0.75, 0.25]), np.eye(2) / 2, base=2), oracle)
    assert np.isclose(oracle, 0.18872, atol=1e-5)


def test_relative_entropy_support():
    assert math.isinf(relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])))
    assert np.isclose(relative_entropy(np.diag([1.0, 0.0]), np.diag([0.5, 0.5])), math.log(2))
    with pytest.raises(ValueError):
        relative_entropy(np.eye(2) / 2, np.eye(3) / 3)
    with pytest.raises(ValueError):
        relative_entropy(np.diag([1.2, -0.2]), np.eye(2) / 2)


def test_relative_entropy_matches_commuting_formula(rng):
    p, q = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
    u = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))[0]
    rho, sigma = u @ np.diag(p) @ u.conj().T, u @ np.diag(q) @ u.conj().T
    assert np.isclose(relative_entropy(rho, sigma), float(np.sum(p * np.log(p / q))))


def test_chain_rule_examples(rng):
    e = haar_twirl_projector(4, 1)
    omega = np.eye(4) / 4
    assert chain_rule_residual(random_density_matrix(4, rng), e, omega) <= 1e-9
    assert chain_rule_residual(omega, e, omega) == 0.0
    lay = SiteLayout.uniform(2, 2)
    e0 = CondExpectation(local_twirl(lay, [0]))
    worst = max(chain_rule_residual(random_density_matrix(4, rng), e0, omega) for _ in range(100))
    assert worst <= 1e-8


def test_chain_rule_precondition(rng):
    with pytest.raises(ValueError, match="E\\(omega\\)"):
        chain_rule_residual(np.eye(2) / 2, haar_twirl_projector(2, 1), np.diag([1.0, 0.0]))


def test_decay_ratio_examples(rng):
    e = haar_twirl_projector(2, 1)
    rho = random_pure_state(2, rng)
    assert abs(decay_ratio(e, e, rho)) <= 1e-10
    assert np.isclose(decay_ratio(Identity((2,)), e, rho), 1.0)
    assert decay_ratio(Depolarizing(2, 0.5), e, np.eye(2) / 2) is None


def test_decay_ratio_brickwork_layer_against_direct_evaluation():
    spec = brickwork(4)
    layout = make_layout(spec, 1)
    layer = layer_channel(spec.layers[1], layout)  # twirls sites (1, 2)
    e = global_twirl(layout)
    rho = np.zeros((16, 16))
    rho[0, 0] = 1
    ratio = decay_ratio(layer, e, rho)
    # the middle pair becomes maximally mixed: |0><0| (x) I/4 (x) |0><0|, entropy 2 ln 2 of 4 ln 2
    zero = np.diag([1.0, 0.0])
    expected_state = np.kron(np.kron(zero, np.eye(4) / 4), zero)
    assert np.allclose(layer(rho), expected_state)
    assert np.isclose(ratio, relative_entropy(expected_state, np.eye(16) / 16) / (4 * math.log(2)))
    assert np.isclose(ratio, 0.5)


def test_entropy_to_fixed_point():
    assert np.isclose(entropy_to_fixed_point(np.diag([1.0, 0, 0, 0]), haar_twirl_projector(4, 1), base=2), 2.0)


def test_estimate_sdpi_trivial_cases():
    e = haar_twirl_projector(2, 1)
    assert np.isclose(estimate_sdpi(e, e, samples=10, seed=0).lambda_est, 1.0)
    assert abs(estimate_sdpi(Identity((2,)), e, samples=10, seed=0).lambda_est) <= 1e-9
    with pytest.raises(ValueError):
        estimate_sdpi(e, e, samples=0)


@pytest.mark.parametrize("p", [0.2, 0.5])
def test_estimate_sdpi_depolarizing(p):
    """Near the fixed point the qubit depolarizer's ratio tends to (1 - p)^2, the
    supremum; sampled estimates may only overshoot lambda."""
    e = haar_twirl_projector(2, 1)
    ch = Depolarizing(2, p)
    exact = 1 - (1 - p) ** 2
    for sampler in ("haar", "product", "near_fixed"):
        est = estimate_sdpi(ch, e, sampler, samples=60, seed=1)
        assert est.lambda_est >= exact - 1e-9
        assert all(-1e-8 <= r <= 1 + 1e-8 for r in est.ratios)
    close = estimate_sdpi(ch, e, near_fixed_point_sampler(0.01), samples=60, seed=1)
    assert close.lambda_est - exact <= 0.02
    single = estimate_sdpi(ch, e, "haar", samples=100, aux_dim=1, seed=0)
    extended = estimate_sdpi(ch, e, "haar", samples=100, aux_dim=2, seed=0)
    assert extended.lambda_est <= single.lambda_est + 1e-12
    assert extended.worst_state.shape == (4, 4)


def test_estimate_sdpi_is_seeded():
    e = haar_twirl_projector(2, 1)
    a = estimate_sdpi(Depolarizing(2, 0.3), e, samples=20, seed=4)
    b = estimate_sdpi(Depolarizing(2, 0.3), e, samples=20, seed=4)
    assert a.ratios == b.ratios


def test_beta_examples():
    assert beta(0, 0).beta == 1.0
    b = beta(0.1, 0.1)
    oracle = 0.9 / 1.1 - 0.1 / (0.9 * (2 * math.log(2) - 1))
    assert np.isclose(b.beta, oracle) and b.formula_variant == "equal_eps"
    assert 0.5 <= b.beta <= 0.531
    with pytest.raises(ValueError):
        beta(1.0, 0.0)


def test_beta_general_formula_direct():
    eps, delta = 0.01, 0.02
    g = (eps + delta) * (math.log(1 + delta / eps) - 1) + eps
    direct = (1 - 2 * (1 + eps) * delta**2 / g - 4 * eps - eps**2) / ((1 + eps) * (1 + delta))
    assert np.isclose(beta(eps, delta).candidates["general"], direct)


def test_beta_monotone_and_bounded():
    grid = np.linspace(0, 0.3, 31)
    vals = np.array([[beta(e, d).beta for d in grid] for e in grid])
    assert np.all(np.diff(vals, axis=0) <= 1e-12)
    assert np.all(np.diff(vals, axis=1) <= 1e-12)
    assert vals.max() <= 1
    for e in grid[grid <= 0.1]:
        assert beta(e, e).beta >= 0.5


def test_pinsker_examples(rng):
    rho = random_density_matrix(3, rng)
    assert pinsker_residual(rho, rho) <= 1e-12
    r = pinsker_residual(np.diag([1.0, 0.0]), np.eye(2) / 2)
    assert np.isclose(r, 1 - 2 * math.log(2))
    assert pinsker_residual(np.eye(2) / 2, np.diag([1.0, 0.0])) == -math.inf
    worst = max(pinsker_residual(random_density_matrix(2, rng), random_density_matrix(2, rng)) for _ in range(500))
    assert worst <= 1e-8


def test_continuity_bound():
    assert continuity_bound(0, 3) == 0
    assert np.isclose(continuity_bound(1, 0), 2 * math.log(2))
    oracle = 0.5 + 1.1 * (-(1 / 11) * math.log(1 / 11) - (10 / 11) * math.log(10 / 11))
    assert np.isclose(continuity_bound(0.1, 5), oracle)
    assert np.isclose(continuity_bound(0.1, 5), 0.835099, atol=1e-6)
    assert binary_entropy(0) == 0 and np.isclose(binary_entropy(0.5), math.log(2))
    with pytest.raises(ValueError):
        continuity_bound(1.5, 1)


def test_additive_depth():
    assert additive_depth(1.0, 10, 2, 2, 0.01) == 1
    t = additive_depth(0.01, 10, 2, 2, 0.01)
    oracle = math.ceil(math.log(20 * math.log(2) / 2e-4) / -math.log(0.99))
    assert t == oracle == 1110
    assert (0.99**t) * max_initial_entropy(10, 2, 2) <= 2e-4
    for eps in (0.001, 0.01, 0.1, 0.4):
        assert additive_depth(0.05, 8, 2, 3, min(2 * eps, 0.99)) <= additive_depth(0.05, 8, 2, 3, eps)
    with pytest.raises(ValueError):
        additive_depth(0, 4, 1, 2, 0.1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_chain_iter_inequalities(seed):
    rng = np.random.default_rng(seed)
    lay = SiteLayout.uniform(3, 2)
    rho = random_density_matrix(8, rng)
    e_prime = CondExpectation(local_twirl(lay, [int(rng.integers(3))]))
    psi = random_channel(8, 2, rng)
    assert chain_iter_gap(rho, psi, e_prime) >= -1e-8
    twirls = [CondExpectation(local_twirl(lay, s)) for s in ([0, 1], [1, 2], [0])[: int(rng.integers(2, 4))]]
    assert chain_iter2_gap(rho, twirls) >= -1e-8
