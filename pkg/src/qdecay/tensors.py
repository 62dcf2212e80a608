"""Dense linear algebra on multi-site, k-copy Hilbert spaces.

Tensor factors are ordered copy-major: copy 0 holds sites ``0..n-1``, then
copy 1 holds sites ``0..n-1`` again, and so on.  Every module in the package
shares this convention, so "the k copies of sites S" is a strided gather of
factor positions.

Operators may carry leading batch dimensions, i.e. shape ``(..., D, D)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from . import config


@dataclass(frozen=True)
class SiteLayout:
    """Index layout of ``copies`` copies of an ``n``-site register.

    Parameters
    ----------
    local_dims : tuple of int
        Dimension of each site, all at least 2.
    copies : int
        Number of tensor copies ``k``.
    """

    local_dims: tuple[int, ...]
    copies: int = 1

    def __post_init__(self):
        object.__setattr__(self, "local_dims", tuple(int(q) for q in self.local_dims))
        if len(self.local_dims) < 1:
            raise ValueError("layout needs at least one site")
        if any(q < 2 for q in self.local_dims):
            raise ValueError(f"site dimensions must be >= 2, got {self.local_dims}")
        if self.copies < 1:
            raise ValueError(f"copies must be >= 1, got {self.copies}")

    @classmethod
    def uniform(cls, n: int, q: int = 2, copies: int = 1) -> "SiteLayout":
        return cls((q,) * n, copies)

    @property
    def n(self) -> int:
        return len(self.local_dims)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return self.local_dims * self.copies

    @property
    def total_dim(self) -> int:
        return prod(self.factor_dims)

    def factor_index(self, copy: int, site: int) -> int:
        if not (0 <= copy < self.copies and 0 <= site < self.n):
            raise IndexError(f"(copy={copy}, site={site}) outside layout")
        return copy * self.n + site

    def site_factors(self, sites: Sequence[int]) -> list[int]:
        """Factor positions of the given sites across all copies, copy-major."""
        return [self.factor_index(c, s) for c in range(self.copies) for s in sites]


def factor_dims(layout) -> tuple[int, ...]:
    """Accept a :class:`SiteLayout` or a plain sequence of factor dimensions."""
    if isinstance(layout, SiteLayout):
        return layout.factor_dims
    return tuple(int(d) for d in layout)


def _check_square(op: np.ndarray, dims: tuple[int, ...]) -> int:
    dim = prod(dims)
    if op.ndim < 2 or op.shape[-1] != dim or op.shape[-2] != dim:
        raise ValueError(f"operator shape {op.shape} does not match factor dims {dims} (D={dim})")
    return dim


@dataclass(frozen=True)
class QState:
    """A validated density matrix together with its layout."""

    matrix: np.ndarray
    layout: SiteLayout

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        _check_square(m, self.layout.factor_dims)
        check_density(m)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class HermitianOp:
    matrix: np.ndarray
    layout: SiteLayout | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if not np.allclose(m, m.conj().swapaxes(-1, -2), atol=config.PSD_TOL, rtol=0):
            raise ValueError("operator is not Hermitian")
        object.__setattr__(self, "matrix", m)


def as_matrix(x) -> np.ndarray:
    """Raw complex array from an ndarray, :class:`QState` or :class:`HermitianOp`."""
    return np.asarray(getattr(x, "matrix", x), dtype=complex)


def dagger(op: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(op, -1, -2))


def check_density(rho: np.ndarray, tol: float | None = None) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, PSD and unit-trace within ``tol``."""
    tol = config.PSD_TOL if tol is None else tol
    rho = np.asarray(rho)
    herm_err = np.max(np.abs(rho - dagger(rho)))
    if herm_err > tol:
        raise ValueError(f"state is not Hermitian (max deviation {herm_err:.2e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise ValueError(f"state trace is {tr!r}, expected 1")
    wmin = np.linalg.eigvalsh(rho).min()
    if wmin < -tol:
        raise ValueError(f"state has negative eigenvalue {wmin:.3e}")


def permute_factors(op: np.ndarray, layout, perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: ``P op P^dagger`` with factor ``i`` of the result
    taken from factor ``perm[i]`` of the input (``np.transpose`` semantics)."""
    dims = factor_dims(layout)
    op = np.asarray(op)
    dim = _check_square(op, dims)
    nf = len(dims)
    perm = list(perm)
    if sorted(perm) != list(range(nf)):
        raise ValueError(f"{perm} is not a permutation of {nf} factors")
    batch = op.shape[:-2]
    nb = len(batch)
    t = op.reshape(batch + dims + dims)
    axes = list(range(nb)) + [nb + p for p in perm] + [nb + nf + p for p in perm]
    return t.transpose(axes).reshape(batch + (dim, dim))


def partial_trace(op: np.ndarray, layout, keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not in ``keep``; kept factors stay in ascending order.

    An empty ``keep`` returns the full trace as a ``1 x 1`` matrix.
    """
    dims = factor_dims(layout)
    op = np.asarray(op)
    _check_square(op, dims)
    keep = sorted(set(int(i) for i in keep))
    if any(i < 0 or i >= len(dims) for i in keep):
        raise ValueError(f"keep={keep} out of range for {len(dims)} factors")
    traced = [i for i in range(len(dims)) if i not in keep]
    moved = permute_factors(op, dims, keep + traced)
    dk = prod(dims[i] for i in keep)
    dt = prod(dims[i] for i in traced)
    batch = op.shape[:-2]
    t = moved.reshape(batch + (dk, dt, dk, dt))
    return np.einsum("...atbt->...ab", t)


def apply_on_factors(op: np.ndarray, layout, positions: Sequence[int], fn) -> np.ndarray:
    """Apply a linear map ``fn`` to the factors at ``positions`` of ``op``.

    ``fn`` receives arrays of shape ``(..., Ds, Ds)`` (``Ds`` the product of the
    selected dims) and must preserve that shape; all other factors ride along as
    batch indices, so the result is ``(fn (x) Id)(op)``.
    """
    dims = factor_dims(layout)
    op = np.asarray(op)
    dim = _check_square(op, dims)
    positions = [int(p) for p in positions]
    rest = [i for i in range(len(dims)) if i not in positions]
    order = positions + rest
    ds = prod(dims[p] for p in positions)
    dr = dim // ds
    batch = op.shape[:-2]
    nb = len(batch)
    t = permute_factors(op, dims, order).reshape(batch + (ds, dr, ds, dr))
    t = np.moveaxis(t, (nb + 1, nb + 3), (nb, nb + 1))  # (..., dr, dr, ds, ds)
    t = fn(t)
    t = np.moveaxis(t, (nb, nb + 1), (nb + 1, nb + 3)).reshape(batch + (dim, dim))
    inv = np.argsort(order)
    return permute_factors(t, [dims[i] for i in order], inv)


def herm_log_on_support(op, tol: float | None = None, base: float | None = None):
    """Logarithm of a PSD operator restricted to its support.

    Eigenvalues ``<= tol`` are treated as outside the support and contribute
    zero to the logarithm.

    Returns
    -------
    log_op : ndarray
    support : ndarray
        Orthogonal projector onto the support.
    """
    tol = config.PSD_TOL if tol is None else tol
    m = as_matrix(op)
    w, v = np.linalg.eigh(m)
    if w.min() < -tol:
        raise ValueError(f"operator is not PSD: eigenvalue {w.min():.3e} < -{tol:g}")
    supp = w > tol
    logw = np.zeros_like(w)
    logw[supp] = np.log(w[supp])
    if base is not None:
        logw /= np.log(base)
    vs = v[:, supp]
    return (v * logw) @ dagger(v), vs @ dagger(vs)


def trace_norm(op: np.ndarray) -> float:
    """Schatten-1 norm of a Hermitian operator."""
    return float(np.abs(np.linalg.eigvalsh(op)).sum())


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.einsum("...i,...j->...ij", psi, psi.conj())


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state as a density matrix."""
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return ket_to_dm(psi / np.linalg.norm(psi))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from the induced (Ginibre) measure of the given rank."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_product_state(dims: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Tensor product of independent Haar-random pure states, one per factor."""
    rho = np.ones((1, 1), dtype=complex)
    for d in dims:
        rho = np.kron(rho, random_pure_state(d, rng))
    return rho
