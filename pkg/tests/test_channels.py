import numpy as np
import pytest
import scipy.linalg

from qdecay import config
from qdecay.channels import (
    Composition, Depolarizing, Identity, KrausChannel, LocalComposition, Mixture, adjoint, apply, cb_return_time,
    choi, commutes, is_cptp, random_channel, relative_error, sdpi_from_return_time, superop,
    validate_cond_expectation,
)
from qdecay.config import CapacityError
from qdecay.moments import haar_twirl_projector
from qdecay.tensors import partial_trace, random_density_matrix, random_pure_state


def test_apply_examples(rng):
    rho = random_density_matrix(4, rng)
    assert np.allclose(apply(Identity((4,)), rho), rho)
    zero = np.diag([1.0, 0.0])
    assert np.allclose(apply(Depolarizing(2), zero), np.eye(2) / 2)
    a = LocalComposition((2, 2), [([0], Depolarizing(2, 0.3)), ([1], Depolarizing(2, 0.7))])
    b = LocalComposition((2, 2), [([1], Depolarizing(2, 0.7)), ([0], Depolarizing(2, 0.3))])
    assert np.allclose(a(rho), b(rho))
    with pytest.raises(ValueError):
        apply(Identity((2,)), rho)


def test_choi_examples(rng):
    j = choi(Identity((2,)))
    assert np.linalg.matrix_rank(j) == 1 and np.isclose(np.trace(j), 2)
    assert np.allclose(choi(Depolarizing(2)), np.eye(4) / 2)
    ch = random_channel(3, 2, rng)
    cp, tp = is_cptp(ch)
    assert cp and tp
    assert np.allclose(partial_trace(choi(ch), (3, 3), [0]), np.eye(3))


def test_choi_cap():
    with pytest.raises(CapacityError, match="4096"):
        choi(Identity((64,)), cap=1024)


def test_choi_kraus_matches_local_composition(rng):
    a, b = random_channel(2, 2, rng), random_channel(2, 3, rng)
    local = LocalComposition((2, 2), [([0], a), ([1], b)])
    kraus = KrausChannel([np.kron(ka, kb) for ka in a.kraus for kb in b.kraus], (2, 2))
    assert np.max(np.abs(choi(local) - choi(kraus))) <= 1e-10


def test_superop_and_adjoint(rng):
    ch = random_channel(3, 2, rng)
    x, y = rng.standard_normal((3, 3)), rng.standard_normal((3, 3)) + 1j
    assert np.allclose(superop(ch) @ x.reshape(-1), ch(x).reshape(-1))
    # <Y, Phi(X)> = <Phi*(Y), X>
    assert np.isclose(np.trace(y.conj().T @ ch(x)), np.trace(adjoint(ch)(y).conj().T @ x))


def _oracle_eps_delta(phi, psi):
    """Thresholds from generalized eigenvalues of the Choi pencil (full-rank psi)."""
    w = scipy.linalg.eigh(choi(phi), choi(psi), eigvals_only=True)
    return 1 - w.min(), w.max() - 1


def test_relative_error_examples():
    e = Depolarizing(2)
    r = relative_error(e, e)
    assert r.eps == 0 and r.delta == 0 and r.valid
    r = relative_error(Depolarizing(2, 0.9), e)
    eps, delta = _oracle_eps_delta(Depolarizing(2, 0.9), e)
    assert np.isclose(eps, 0.1) and np.isclose(delta, 0.3)
    # feasibility is tested at CP_TOL, which shifts thresholds by about tol / min eig of Choi(psi)
    assert abs(r.eps - eps) <= 1e-7 and abs(r.delta - delta) <= 1e-7


def test_relative_error_mixture(rng):
    psi, theta = Depolarizing(3), random_channel(3, 2, rng)
    for a in (0.05, 0.2, 0.5):
        r = relative_error(Mixture([1 - a, a], [psi, theta]), psi)
        assert r.eps <= a + r.bisection_tol + 1e-9


def test_relative_error_support_leak():
    r = relative_error(Depolarizing(2), Identity((2,)))
    assert not r.valid and np.isinf(r.delta)


def test_cb_return_time_examples():
    e = haar_twirl_projector(2, 1)
    assert cb_return_time(e, e, 10) == 1
    assert cb_return_time(Depolarizing(2, 0.5), e, 20) == 3
    assert cb_return_time(Identity((2,)), e, 10) is None
    with pytest.raises(ValueError):
        g = 0.3
        damping = KrausChannel([np.diag([1, np.sqrt(1 - g)]), np.array([[0, np.sqrt(g)], [0, 0]])])
        cb_return_time(damping, e, 5)


def test_cb_return_time_monotone_in_window(rng):
    e = haar_twirl_projector(2, 1)
    for p in (0.1, 0.3, 0.6):
        tight = cb_return_time(Depolarizing(2, p), e, 200)
        loose = cb_return_time(Depolarizing(2, p), e, 200, lower=0.8, upper=1.2)
        assert loose <= tight


def test_sdpi_from_return_time():
    assert sdpi_from_return_time(1) == 0.5
    assert np.isclose(sdpi_from_return_time(3), 1 / 6)
    assert np.isclose(sdpi_from_return_time(50), 0.01)
    with pytest.raises(ValueError):
        sdpi_from_return_time(0)


def test_validate_cond_expectation():
    e = validate_cond_expectation(Depolarizing(2))
    assert e.idempotent and e.self_adjoint and e.valid
    e = validate_cond_expectation(haar_twirl_projector(2, 2))
    assert e.valid
    e = validate_cond_expectation(Depolarizing(2, 0.5))
    assert not e.idempotent


def test_commutes():
    e = Depolarizing(2)
    assert commutes(Depolarizing(2, 0.3), e)
    flip = KrausChannel(np.array([[0, 1], [1, 0]]))
    dephase = KrausChannel([np.diag([1, 0]), np.diag([0, 1])])
    reset = KrausChannel([np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])])
    assert commutes(flip, dephase)
    assert not commutes(Composition([flip, Depolarizing(2, 0.2)]), reset)


def test_config_cap_read_at_call_time(monkeypatch):
    monkeypatch.setattr(config, "CHOI_DIM_CAP", 8)
    with pytest.raises(CapacityError):
        choi(Identity((4,)))


def test_data_processing_random(rng):
    from qdecay.entropy import relative_entropy
    for _ in range(50):
        d = int(rng.integers(2, 9))
        rho, sigma = random_density_matrix(d, rng), random_pure_state(d, rng) * 0.5 + np.eye(d) / (2 * d)
        phi = random_channel(d, 2, rng)
        assert relative_entropy(phi(rho), phi(sigma)) <= relative_entropy(rho, sigma) + 1e-8
