"""Relative entropy, decay-ratio estimation and the scalar entropy bounds.

Entropies are returned as plain floats (``math.inf`` on support violation).
``base=None`` means the natural logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import config
from .channels import Channel, CondExpectation, extend
from .tensors import as_matrix, random_density_matrix, random_product_state, random_pure_state, trace_norm

SUPPORT_TOL = 1e-8


def _xlogx(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = w[pos] * np.log(w[pos])
    return out


def relative_entropy(rho, sigma, base: float | None = None, tol: float | None = None) -> float:
    """Umegaki relative entropy ``D(rho || sigma) = tr rho (log rho - log sigma)``.

    Returns ``math.inf`` when more than ``SUPPORT_TOL`` of ``rho``'s weight
    lies outside the support of ``sigma``.
    """
    tol = config.PSD_TOL if tol is None else tol
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    wr = np.linalg.eigvalsh(rho)
    ws, vs = np.linalg.eigh(sigma)
    if wr.min() < -tol or ws.min() < -tol:
        raise ValueError("relative_entropy needs PSD arguments")
    wr = np.clip(wr, 0, None)
    # diagonal of rho in sigma's eigenbasis
    p = np.einsum("ai,ab,bi->i", vs.conj(), rho, vs).real
    supp = ws > tol
    if p[~supp].sum() > SUPPORT_TOL:
        return math.inf
    d = _xlogx(wr).sum() - (p[supp] * np.log(ws[supp])).sum()
    if base is not None:
        d /= math.log(base)
    return float(max(d, 0.0)) if d > -1e-9 else float(d)


def entropy_to_fixed_point(x, e, base: float | None = None) -> float:
    """``D(x || E(''))``, i.e. ``D(x || E(x))``."""
    x = as_matrix(x)
    return relative_entropy(x, e(x), base)


def chain_rule_residual(rho, e, omega, precondition_tol: float = 1e-8) -> float:
    """``|D(rho||omega) - D(rho||E rho) - D(E rho||omega)|`` for ``E(omega) = omega``.

    Raises ``ValueError`` when ``omega`` is not a fixed point of ``E``.
    """
    rho, omega = as_matrix(rho), as_matrix(omega)
    drift = np.max(np.abs(e(omega) - omega))
    if drift > precondition_tol:
        raise ValueError(f"E(omega) != omega (max deviation {drift:.2e})")
    erho = e(rho)
    lhs = relative_entropy(rho, omega)
    rhs = relative_entropy(rho, erho) + relative_entropy(erho, omega)
    if math.isinf(lhs) and math.isinf(rhs):
        return 0.0
    return abs(lhs - rhs)


def decay_ratio(phi: Channel, e, rho, min_entropy: float = 1e-10) -> float | None:
    """``D(phi(rho) || phi(E rho)) / D(rho || E rho)``, or ``None`` if ``rho`` is
    (numerically) a fixed point of ``E``."""
    rho = as_matrix(rho)
    erho = e(rho)
    den = relative_entropy(rho, erho)
    if den <= min_entropy:
        return None
    return relative_entropy(phi(rho), phi(erho)) / den


Sampler = Callable[[np.random.Generator, CondExpectation], np.ndarray]


def product_sampler(rng: np.random.Generator, e) -> np.ndarray:
    """Product of Haar-random pure states on every tensor factor."""
    return random_product_state(e.dims, rng)


def haar_pure_sampler(rng: np.random.Generator, e) -> np.ndarray:
    """Haar-random global pure state."""
    return random_pure_state(e.dim, rng)


def near_fixed_point_sampler(weight: float = 0.05) -> Sampler:
    """Rank-2 perturbations of fixed points: ``(1-w) E(sigma) + w psi`` with random
    mixed ``sigma`` and pure ``psi``.  Such states tend to probe the worst ratio."""

    def sample(rng: np.random.Generator, e) -> np.ndarray:
        sigma = random_density_matrix(e.dim, rng, rank=2)
        return (1 - weight) * e(sigma) + weight * random_pure_state(e.dim, rng)

    return sample


SAMPLERS = {
    "product": product_sampler,
    "haar": haar_pure_sampler,
    "near_fixed": near_fixed_point_sampler(),
}


@dataclass
class DecayEstimate:
    """Heuristic decay constant over a finite set of sampled states.

    ``lambda_est = 1 - max(ratios)`` upper-bounds the true SDPI constant of the
    channel only in the sense that it is attained on the samples; it is not a
    certificate for all inputs.
    """

    lambda_est: float
    samples: int
    aux_dim: int
    worst_state: np.ndarray | None
    ratios: list[float] = field(default_factory=list)
    skipped: int = 0


def estimate_sdpi(phi: Channel, e, sampler: Sampler | str = "haar", samples: int = 100,
                  aux_dim: int = 1, seed=None) -> DecayEstimate:
    """Estimate the (complete, if ``aux_dim > 1``) decay constant of ``phi``
    toward ``E`` from ``samples`` states on system (x) auxiliary."""
    if samples < 1 or aux_dim < 1:
        raise ValueError("need samples >= 1 and aux_dim >= 1")
    sampler = SAMPLERS[sampler] if isinstance(sampler, str) else sampler
    ch = phi.channel if isinstance(phi, CondExpectation) else phi
    e_ch = e.channel if isinstance(e, CondExpectation) else e
    phi_x = extend(ch, aux_dim)
    e_x = CondExpectation(extend(e_ch, aux_dim))
    ss = np.random.SeedSequence(seed)
    ratios, states, skipped = [], [], 0
    for child in ss.spawn(samples):
        rho = sampler(np.random.default_rng(child), e_x)
        r = decay_ratio(phi_x, e_x, rho)
        if r is None:
            skipped += 1
            continue
        ratios.append(r)
        states.append(rho)
    if not ratios:
        raise ValueError("every sampled state is a fixed point; decay is undefined")
    worst = int(np.argmax(ratios))
    return DecayEstimate(1.0 - ratios[worst], samples, aux_dim, states[worst], ratios, skipped)


@dataclass(frozen=True)
class BetaParams:
    eps: float
    delta: float
    beta: float
    formula_variant: str
    candidates: dict


def _beta_general(eps: float, delta: float) -> float:
    if eps == 0.0:
        frac = 0.0
    elif delta == 0.0:
        # limit delta -> 0 of the fraction below
        frac = 4 * eps * (1 + eps)
    else:
        x = delta / eps
        # (eps + delta)(ln(1 + delta/eps) - 1) + eps  ==  eps ((1 + x) ln(1 + x) - x)
        g = eps * ((1 + x) * math.log1p(x) - x)
        frac = 2 * (1 + eps) * delta**2 / g
    return (1 - frac - 4 * eps - eps**2) / ((1 + eps) * (1 + delta))


def _beta_equal(eps: float) -> float:
    if eps >= 1:
        return -math.inf
    return (1 - eps) / (1 + eps) - eps / ((1 - eps) * (2 * math.log(2) - 1))


def beta(eps: float, delta: float) -> BetaParams:
    """Entropy-comparison factor for ``(1-eps) E <= Psi <= (1+delta) E``.

    Takes the best of the general two-parameter bound and the equal-parameter
    bounds evaluated at ``m = max(eps, delta)`` (valid because the hypothesis
    only weakens as either parameter grows): the closed form, ``1 - 12 m``,
    and ``1/2`` for ``m <= 1/10``.  Never below the trivial value 0.
    """
    if not (0 <= eps < 1 and 0 <= delta < 1):
        raise ValueError("beta needs eps, delta in [0, 1)")
    m = max(eps, delta)
    cands = {
        "general": _beta_general(eps, delta),
        "equal_eps": _beta_equal(m),
        "linear_bound": 1 - 12 * m,
        "trivial": 0.0,
    }
    if m <= 0.1:
        cands["equal_eps"] = max(cands["equal_eps"], 0.5)
    variant = max(cands, key=lambda name: cands[name])
    return BetaParams(eps, delta, min(cands[variant], 1.0), variant, cands)


def pinsker_residual(rho, sigma, constant: float = 2.0) -> float:
    """``||rho - sigma||_1^2 - constant * D_nat(rho || sigma)``; non-positive when
    Pinsker's inequality holds (``constant = 2`` is the standard form)."""
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    d = relative_entropy(rho, sigma)
    if math.isinf(d):
        return -math.inf
    return trace_norm(rho - sigma) ** 2 - constant * d


def binary_entropy(p: float) -> float:
    """Binary entropy in nats."""
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log1p(-p)


def continuity_bound(eps: float, sup_d: float) -> float:
    """``eps * sup_d + (1 + eps) h(eps / (1 + eps))`` (h in nats)."""
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    if sup_d < 0:
        raise ValueError("sup_d must be non-negative")
    return eps * sup_d + (1 + eps) * binary_entropy(eps / (1 + eps))


def max_initial_entropy(n: int, k: int, q: int) -> float:
    """``k n ln q``: bound on ``D(rho || E rho)`` for states on ``k`` copies of ``n`` qudits."""
    return k * n * math.log(q)


def additive_depth(lam: float, n: int, k: int, q: int, eps_target: float) -> int:
    """Number of applications of a ``lam``-decaying channel after which Pinsker
    guarantees trace distance at most ``eps_target``.

    Smallest ``t`` with ``(1 - lam)^t k n ln q <= 2 eps_target^2``.
    """
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    if not 0 < eps_target < 1:
        raise ValueError("eps_target must lie in (0, 1)")
    if lam == 1:
        return 1
    d_max = max_initial_entropy(n, k, q)
    target = 2 * eps_target**2
    if d_max <= target:
        return 1
    t = math.ceil(math.log(d_max / target) / -math.log1p(-lam))
    return max(t, 1)


def chain_iter_gap(rho, psi: Channel, e_prime) -> float:
    """``D(rho||Psi rho) + D(rho||E' rho) - D(rho||E' Psi rho)`` (non-negative)."""
    rho = as_matrix(rho)
    return (relative_entropy(rho, psi(rho)) + relative_entropy(rho, e_prime(rho))
            - relative_entropy(rho, e_prime(psi(rho))))


def chain_iter2_gap(rho, expectations: Sequence) -> float:
    """``sum_i D(rho||E_i rho) - D(rho||E_{j1} ... E_{jn} rho)``, the composition
    applied right to left over the given list."""
    rho = as_matrix(rho)
    lhs = sum(relative_entropy(rho, e(rho)) for e in expectations)
    y = rho
    for e in reversed(expectations):
        y = e(y)
    return lhs - relative_entropy(rho, y)

