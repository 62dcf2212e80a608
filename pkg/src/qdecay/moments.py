"""Exact k-fold Haar twirls from Schur-Weyl duality, plus a Monte-Carlo oracle.

The Haar twirl ``X -> E[U^{(x)k} X U^{(x)k}^dagger]`` is the orthogonal
(Hilbert-Schmidt) projection onto ``span{P_sigma : sigma in S_k}``.  With the
Gram matrix ``G[s, t] = tr(P_s^dagger P_t) = d^{cycles(s^-1 t)}`` it reads

    E(X) = sum_{s,t} G^+[t, s] tr(P_s^dagger X) P_t.

The Moore-Penrose inverse keeps this valid for ``d < k`` where the
permutation operators are linearly dependent.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations as _itperms
from math import factorial, prod
from typing import Sequence

import numpy as np

from . import config
from .channels import Channel, CondExpectation, LocalComposition
from .config import CapacityError
from .tensors import SiteLayout


def permutations(k: int) -> list[tuple[int, ...]]:
    """All elements of ``S_k`` as tuples ``sigma`` with ``sigma[j]`` the image of ``j``."""
    return list(_itperms(range(k)))


def compose_perms(s: Sequence[int], t: Sequence[int]) -> tuple[int, ...]:
    """``(s t)(j) = s(t(j))``."""
    return tuple(s[t[j]] for j in range(len(t)))


def invert_perm(s: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(s)
    for j, sj in enumerate(s):
        inv[sj] = j
    return tuple(inv)


def cycle_count(s: Sequence[int]) -> int:
    seen = [False] * len(s)
    cycles = 0
    for start in range(len(s)):
        if not seen[start]:
            cycles += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = s[j]
    return cycles


def permutation_operator(sigma: Sequence[int], d: int) -> np.ndarray:
    """``P_sigma`` on ``(C^d)^{(x)k}``: moves tensor factor ``j`` to slot ``sigma(j)``.

    With this convention ``P_s P_t = P_{s t}``.
    """
    k = len(sigma)
    dim = d**k
    inv = invert_perm(sigma)
    basis = np.eye(dim).reshape((d,) * k + (dim,))
    return basis.transpose(list(inv) + [k]).reshape(dim, dim)


@dataclass(frozen=True)
class GramMatrix:
    """Gram data of the permutation operators for given ``(d, k)``."""

    d: int
    k: int
    perms: tuple[tuple[int, ...], ...]
    entries: np.ndarray
    pseudo_inverse: np.ndarray

    @property
    def invertible(self) -> bool:
        return self.d >= self.k


@lru_cache(maxsize=64)
def gram_matrix(d: int, k: int) -> GramMatrix:
    perms = tuple(permutations(k))
    g = np.array([[float(d) ** cycle_count(compose_perms(invert_perm(s), t)) for t in perms] for s in perms])
    # relative cutoff: the Schur-Weyl span is rank-deficient for d < k
    w, v = np.linalg.eigh(g)
    keep = w > 1e-9 * w.max()
    ginv = (v[:, keep] / w[keep]) @ v[:, keep].T
    return GramMatrix(d, k, perms, g, ginv)


@lru_cache(maxsize=32)
def _perm_stack(d: int, k: int) -> np.ndarray:
    return np.stack([permutation_operator(s, d) for s in permutations(k)])


class HaarTwirl(Channel):
    """Exact k-fold Haar twirl on ``(C^d)^{(x)k}``.

    ``dims`` may refine each copy into several factors (e.g. ``d = 4`` as two
    qubits per copy); it only affects how the channel embeds into larger
    layouts.
    """

    variant = "haar_twirl"

    def __init__(self, d: int, k: int, dims: Sequence[int] | None = None):
        if k < 1 or d < 1:
            raise ValueError("need d >= 1 and k >= 1")
        if k > config.K_CAP:
            raise CapacityError(f"k={k} exceeds the twirl cap K_CAP={config.K_CAP} ({factorial(k)} permutations)")
        if d**k > config.STATE_DIM_CAP:
            raise CapacityError(f"twirl dimension d**k = {d**k} exceeds STATE_DIM_CAP={config.STATE_DIM_CAP}")
        dims = (d,) * k if dims is None else tuple(dims)
        if prod(dims) != d**k:
            raise ValueError(f"dims {dims} do not multiply to d**k = {d**k}")
        super().__init__(dims)
        self.d, self.k = d, k
        self.gram = gram_matrix(d, k)
        self.perm_ops = _perm_stack(d, k)

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        # P_sigma is real, so tr(P^dagger X) = sum_ab P[a, b] X[a, b]
        coeff = np.einsum("sab,...ab->...s", self.perm_ops, x)
        coeff = coeff @ self.gram.pseudo_inverse.T
        return np.einsum("...t,tab->...ab", coeff, self.perm_ops)


def haar_twirl_projector(d: int, k: int, dims: Sequence[int] | None = None) -> CondExpectation:
    """Conditional expectation onto the commutant of ``{U^{(x)k} : U in U(d)}``.

    Flags are left unchecked; run
    :func:`qdecay.channels.validate_cond_expectation` to verify them.
    """
    return CondExpectation(HaarTwirl(d, k, dims))


def local_twirl(layout: SiteLayout, sites: Sequence[int], k: int | None = None) -> LocalComposition:
    """k-fold Haar twirl on the joint system of ``sites``, identity elsewhere.

    The ``k`` copies of ``sites`` are gathered copy-major, twirled as one
    ``(prod q_s)^k``-dimensional system and scattered back.
    """
    if k is not None and k != layout.copies:
        raise ValueError(f"k={k} does not match layout copies={layout.copies}")
    sites = sorted(set(int(s) for s in sites))
    if not sites:
        raise ValueError("local_twirl needs at least one site")
    if sites[0] < 0 or sites[-1] >= layout.n:
        raise ValueError(f"sites {sites} out of range for n={layout.n}")
    positions = layout.site_factors(sites)
    d_local = prod(layout.local_dims[s] for s in sites)
    twirl = HaarTwirl(d_local, layout.copies, [layout.factor_dims[p] for p in positions])
    return LocalComposition(layout.factor_dims, [(positions, twirl)])


def global_twirl(layout: SiteLayout) -> CondExpectation:
    """Haar twirl over all sites; copy-major ordering makes it a plain ``HaarTwirl``."""
    d = prod(layout.local_dims)
    return CondExpectation(HaarTwirl(d, layout.copies, layout.factor_dims))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_unitaries(d: int, size: int, rng_seed=None) -> np.ndarray:
    """``size`` independent Haar unitaries, shape ``(size, d, d)``.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved into
    ``Q`` so the distribution is exactly left/right invariant.
    """
    rng = _rng(rng_seed)
    # real and imaginary parts drawn per sample, so splitting into batches keeps the stream
    g = rng.standard_normal((size, d, d, 2))
    z = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_sample_unitary(d: int, rng_seed=None) -> np.ndarray:
    return haar_unitaries(d, 1, rng_seed)[0]


def _tensor_power(u: np.ndarray, k: int) -> np.ndarray:
    out = u
    for _ in range(k - 1):
        b, a = out.shape[0], out.shape[-1] * u.shape[-1]
        out = np.einsum("bij,bkl->bikjl", out, u).reshape(b, a, a)
    return out


def mc_twirl(x: np.ndarray, d: int, k: int, samples: int, seed=None, batch: int = 2_000,
             return_stderr: bool = False):
    """Monte-Carlo estimate of the Haar twirl of ``x`` (shape ``(..., d^k, d^k)``).

    With ``return_stderr`` the entrywise standard errors of the real and
    imaginary parts are returned as well, as ``(mean, se_real, se_imag)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = _rng(seed)
    x = np.asarray(x, dtype=complex)
    total = np.zeros(x.shape, dtype=complex)
    sq_re = np.zeros(x.shape)
    sq_im = np.zeros(x.shape)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        uk = _tensor_power(haar_unitaries(d, b, rng), k)
        ub = uk.reshape((b,) + (1,) * (x.ndim - 2) + uk.shape[1:])
        y = ub @ x @ np.conj(np.swapaxes(ub, -1, -2))
        total += y.sum(axis=0)
        sq_re += (y.real**2).sum(axis=0)
        sq_im += (y.imag**2).sum(axis=0)
        done += b
    mean = total / samples
    if not return_stderr:
        return mean
    n = samples
    denom = max(n - 1, 1)
    var_re = np.maximum(sq_re / n - mean.real**2, 0.0) * n / denom
    var_im = np.maximum(sq_im / n - mean.imag**2, 0.0) * n / denom
    return mean, np.sqrt(var_re / n), np.sqrt(var_im / n)
