"""Quantum channel representations, CP-order comparisons and CB return times.

Every channel is a callable linear map on operators of shape ``(..., D, D)``
with ``D = prod(dims)``.  Choi matrices use the input-first convention

    J = sum_ij |i><j| (x) Phi(|i><j|),

so ``J[(i, k), (j, l)] = Phi(|i><j|)[k, l]`` and ``tr J = D`` for
trace-preserving maps.  Superoperators act on row-major vectorisations,
``vec(X)[i * D + j] = X[i, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from . import config
from .config import CapacityError
from .tensors import apply_on_factors, as_matrix, check_density, dagger, partial_trace


class Channel:
    """Base class: a linear map on operators over a fixed factor structure."""

    variant = "linear"

    def __init__(self, dims: Sequence[int]):
        self.dims = tuple(int(d) for d in dims)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def then(self, other: "Channel") -> "Composition":
        """``other o self``: apply ``self`` first."""
        return Composition([self, other])

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims})"


class Identity(Channel):
    variant = "identity"

    def __call__(self, x):
        return np.array(x, dtype=complex)


class Depolarizing(Channel):
    """``X -> (1 - p) X + p tr(X) I / D``; ``p = 1`` is the full depolarizer."""

    variant = "depolarizing"

    def __init__(self, dims, p: float = 1.0):
        if isinstance(dims, int):
            dims = (dims,)
        super().__init__(dims)
        self.p = float(p)

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        tr = np.trace(x, axis1=-2, axis2=-1)[..., None, None]
        return (1 - self.p) * x + self.p * tr * np.eye(self.dim) / self.dim


class KrausChannel(Channel):
    variant = "kraus"

    def __init__(self, kraus: Sequence[np.ndarray], dims=None):
        k = np.asarray(kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        dims = (k.shape[-1],) if dims is None else dims
        super().__init__(dims)
        if k.shape[1:] != (self.dim, self.dim):
            raise ValueError(f"Kraus operators of shape {k.shape[1:]} do not match D={self.dim}")
        self.kraus = k

    def __call__(self, x):
        return np.einsum("kab,...bc,kdc->...ad", self.kraus, np.asarray(x, dtype=complex), self.kraus.conj())


class ChoiChannel(Channel):
    variant = "choi"

    def __init__(self, choi: np.ndarray, dims=None):
        choi = np.asarray(choi, dtype=complex)
        d = int(round(np.sqrt(choi.shape[0])))
        super().__init__((d,) if dims is None else dims)
        if choi.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"Choi shape {choi.shape} does not match D={self.dim}")
        self.choi_matrix = choi

    def __call__(self, x):
        d = self.dim
        j = self.choi_matrix.reshape(d, d, d, d)
        return np.einsum("...ij,ikjl->...kl", np.asarray(x, dtype=complex), j)


class LocalComposition(Channel):
    """Ordered product of channels acting on subsets of tensor factors.

    ``pieces`` is a sequence of ``(positions, channel)``; ``channel`` acts on
    the factors at ``positions`` gathered in the listed order and as the
    identity elsewhere.  Pieces are applied first to last.
    """

    variant = "local_composition"

    def __init__(self, dims, pieces: Sequence[tuple[Sequence[int], Channel]]):
        super().__init__(dims)
        checked = []
        for positions, ch in pieces:
            positions = tuple(int(p) for p in positions)
            if len(set(positions)) != len(positions) or any(p < 0 or p >= len(self.dims) for p in positions):
                raise ValueError(f"bad factor positions {positions} for {len(self.dims)} factors")
            local = tuple(self.dims[p] for p in positions)
            if prod(local) != ch.dim:
                raise ValueError(f"local channel dim {ch.dim} != product of dims {local}")
            checked.append((positions, ch))
        self.pieces = checked

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        for positions, ch in self.pieces:
            x = apply_on_factors(x, self.dims, positions, ch)
        return x


class Composition(Channel):
    """Sequential composition; ``channels[0]`` is applied first."""

    variant = "composition"

    def __init__(self, channels: Sequence[Channel]):
        channels = list(channels)
        if not channels:
            raise ValueError("empty composition")
        super().__init__(channels[0].dims)
        for ch in channels:
            if ch.dim != self.dim:
                raise ValueError("composed channels must share a dimension")
        self.channels = channels

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        for ch in self.channels:
            x = ch(x)
        return x


class Mixture(Channel):
    """Convex combination ``sum_i w_i Phi_i``."""

    variant = "mixture"

    def __init__(self, weights: Sequence[float], channels: Sequence[Channel]):
        w = np.asarray(weights, dtype=float)
        channels = list(channels)
        if len(w) != len(channels) or not channels:
            raise ValueError("weights and channels must be non-empty and of equal length")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("mixture weights must be a probability vector")
        super().__init__(channels[0].dims)
        self.weights = w
        self.channels = channels

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        return sum(w * ch(x) for w, ch in zip(self.weights, self.channels))


def extend(ch: Channel, aux_dim: int) -> Channel:
    """``ch (x) Id_aux`` with the auxiliary factor appended last."""
    if aux_dim == 1:
        return ch
    return LocalComposition(ch.dims + (int(aux_dim),), [(range(len(ch.dims)), ch)])


@dataclass
class CondExpectation:
    """A channel expected to be an idempotent, HS-self-adjoint projection.

    ``idempotent`` and ``self_adjoint`` are ``None`` until checked by
    :func:`validate_cond_expectation`.
    """

    channel: Channel
    idempotent: bool | None = None
    self_adjoint: bool | None = None

    def __call__(self, x):
        return self.channel(x)

    @property
    def dims(self):
        return self.channel.dims

    @property
    def dim(self):
        return self.channel.dim

    @property
    def valid(self) -> bool:
        return bool(self.idempotent and self.self_adjoint)


@dataclass(frozen=True)
class ComparabilityResult:
    """Two-sided CP-order comparison ``(1 + delta) Psi >= Phi >= (1 - eps) Psi``.

    ``eps`` and ``delta`` are the feasible ends of the final bisection
    brackets, so the orderings hold (to ``tol``) at the returned values and the
    true thresholds lie at most ``bisection_tol`` below them.
    """

    eps: float
    delta: float
    bisection_tol: float
    tol: float
    valid: bool


def _as_channel(ch) -> Channel:
    return ch.channel if isinstance(ch, CondExpectation) else ch


def choi(ch, cap: int | None = None) -> np.ndarray:
    """Choi matrix of ``ch`` (see module docstring for the convention)."""
    ch = _as_channel(ch)
    cap = config.CHOI_DIM_CAP if cap is None else cap
    if isinstance(ch, ChoiChannel):
        return ch.choi_matrix
    d = ch.dim
    if d * d > cap:
        raise CapacityError(f"Choi matrix needs dimension {d * d} (D={d}), above cap {cap}")
    out = np.empty((d, d, d, d), dtype=complex)  # [i, k, j, l]
    eye = np.eye(d, dtype=complex)
    # one row index i at a time keeps the basis batch at d**3 entries
    for i in range(d):
        basis = np.zeros((d, d, d), dtype=complex)
        basis[:, i, :] = eye
        out[i] = np.moveaxis(ch(basis), 0, 1)
    return out.reshape(d * d, d * d)


def choi_to_superop(j: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(j.shape[0])))
    return j.reshape(d, d, d, d).transpose(1, 3, 0, 2).reshape(d * d, d * d)


def superop_to_choi(s: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(s.shape[0])))
    return s.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def superop(ch, cap: int | None = None) -> np.ndarray:
    """Matrix ``S`` with ``vec(ch(X)) = S vec(X)``."""
    return choi_to_superop(choi(ch, cap))


def adjoint(ch) -> ChoiChannel:
    """Hilbert-Schmidt adjoint, built by swapping the Choi factors and conjugating."""
    ch = _as_channel(ch)
    d = ch.dim
    j = choi(ch).reshape(d, d, d, d)
    return ChoiChannel(j.transpose(1, 0, 3, 2).conj().reshape(d * d, d * d), ch.dims)


def min_eig(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(h)[0])


def is_cptp(ch, tol: float | None = None) -> tuple[bool, bool]:
    """``(completely_positive, trace_preserving)`` from the Choi matrix."""
    tol = config.CP_TOL if tol is None else tol
    j = choi(ch)
    d = _as_channel(ch).dim
    tp = np.allclose(partial_trace(j, (d, d), [0]), np.eye(d), atol=tol, rtol=0)
    return min_eig(j) >= -tol, tp


def apply(ch, rho, check: bool = True) -> np.ndarray:
    """Apply ``ch`` to a state and (optionally) validate the output state."""
    ch = _as_channel(ch)
    rho = as_matrix(rho)
    if rho.shape != (ch.dim, ch.dim):
        raise ValueError(f"state of shape {rho.shape} does not fit channel of dimension {ch.dim}")
    out = ch(rho)
    if check:
        check_density(out, tol=config.CP_TOL)
    return out


def _bisect(feasible, lo: float, hi: float, steps: int) -> tuple[float, float]:
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def relative_error(phi, psi, tol: float | None = None, steps: int = 60) -> ComparabilityResult:
    """Smallest ``eps`` with ``phi >= (1 - eps) psi`` and smallest ``delta`` with
    ``(1 + delta) psi >= phi`` in the completely-positive order.

    Each threshold is found by bisection on the minimum Choi eigenvalue of the
    difference map.  ``delta`` is ``inf`` when no finite value works (the
    support of ``phi``'s Choi matrix leaks out of ``psi``'s).
    """
    tol = config.CP_TOL if tol is None else tol
    jp, js = choi(phi), choi(psi)
    if jp.shape != js.shape:
        raise ValueError("channels act on different dimensions")
    for name, j in (("phi", jp), ("psi", js)):
        if min_eig(j) < -tol:
            raise ValueError(f"{name} is not completely positive")

    def eps_ok(e):
        return min_eig(jp - (1 - e) * js) >= -tol

    def delta_ok(dl):
        return min_eig((1 + dl) * js - jp) >= -tol

    width = 0.0
    if eps_ok(0.0):
        eps = 0.0
    else:
        lo, eps = _bisect(eps_ok, 0.0, 1.0, steps)
        width = max(width, eps - lo)

    if delta_ok(0.0):
        delta = 0.0
    else:
        hi = 1.0
        while not delta_ok(hi):
            hi *= 2
            if hi > 1e12:
                return ComparabilityResult(eps, float("inf"), width, tol, False)
        lo, delta = _bisect(delta_ok, hi / 2 if hi > 1 else 0.0, hi, steps)
        width = max(width, delta - lo)
    return ComparabilityResult(eps, delta, width, tol, True)


def cb_return_time(phi, e, t_max: int, lower: float = 0.9, upper: float = 1.1,
                   tol: float = 1e-9) -> int | None:
    """Smallest ``t <= t_max`` with ``lower E <=_cp (phi* phi)^t <=_cp upper E``.

    Returns ``None`` when no such ``t`` exists up to ``t_max``.  Raises
    ``ValueError`` if ``phi`` is not unital.
    """
    phi = _as_channel(phi)
    d = phi.dim
    if not np.allclose(phi(np.eye(d)), np.eye(d), atol=config.CP_TOL, rtol=0):
        raise ValueError("cb_return_time requires a unital channel")
    je = choi(e)
    s = superop(adjoint(phi)) @ superop(phi)
    st = np.eye(d * d, dtype=complex)
    for t in range(1, t_max + 1):
        st = s @ st
        jt = superop_to_choi(st)
        if min_eig(jt - lower * je) >= -tol and min_eig(upper * je - jt) >= -tol:
            return t
    return None


def sdpi_from_return_time(t_cb: int) -> float:
    """Decay constant ``1 / (2 t_cb)`` implied by a CB return time."""
    if t_cb < 1:
        raise ValueError("t_cb must be a positive integer")
    return 1.0 / (2 * t_cb)


def validate_cond_expectation(e, atol: float = 1e-8) -> CondExpectation:
    """Check idempotence and Hilbert-Schmidt self-adjointness numerically.

    Both tests run on the superoperator, i.e. on the full matrix-unit basis.
    Failed checks come back as ``False`` flags; nothing is raised.
    """
    ch = _as_channel(e)
    s = superop(ch)
    idem = bool(np.max(np.abs(s @ s - s)) <= atol)
    selfadj = bool(np.max(np.abs(s - dagger(s))) <= atol)
    return CondExpectation(ch, idem, selfadj)


def commutes(phi, e, atol: float = 1e-8) -> bool:
    """Whether ``phi o e == e o phi`` as superoperators."""
    a, b = superop(phi), superop(e)
    return bool(np.max(np.abs(a @ b - b @ a)) <= atol)


def random_channel(d: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """Random CPTP map on ``C^d`` with ``n_kraus`` Kraus operators, cut from a
    random ``(n_kraus d) x d`` isometry."""
    z = rng.standard_normal((n_kraus * d, d)) + 1j * rng.standard_normal((n_kraus * d, d))
    v, _ = np.linalg.qr(z)
    return KrausChannel(v.reshape(n_kraus, d, d), (d,))
