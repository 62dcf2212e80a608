"""k-fold twirl channels of architecture layers and entropy trajectories."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .arch import ArchitectureSpec, ParallelLayer, UnstructuredLayer
from .channels import Channel, Composition, Identity, LocalComposition, Mixture
from .config import CapacityError
from .entropy import relative_entropy
from .moments import global_twirl, local_twirl
from .tensors import SiteLayout


def make_layout(spec: ArchitectureSpec, k: int) -> SiteLayout:
    layout = SiteLayout.uniform(spec.n, spec.q, k)
    if layout.total_dim > config.STATE_DIM_CAP:
        raise CapacityError(f"state dimension q^(nk) = {spec.q}^{spec.n * k} = {layout.total_dim} "
                            f"exceeds STATE_DIM_CAP={config.STATE_DIM_CAP}")
    return layout


def _cluster_twirls(layout: SiteLayout, clusters: Sequence[Sequence[int]]) -> Channel:
    if not clusters:
        return Identity(layout.factor_dims)
    pieces = [local_twirl(layout, c).pieces[0] for c in clusters]
    return LocalComposition(layout.factor_dims, pieces)


def layer_channel(layer, layout: SiteLayout) -> Channel:
    """Twirl channel of one layer.

    A parallel layer twirls each cluster.  An unstructured layer with measure
    ``"spurious"`` applies its listed gates in order (a single realisation);
    otherwise it applies one random edge gate, drawn with probability ``p``.
    """
    if isinstance(layer, ParallelLayer):
        return _cluster_twirls(layout, layer.clusters)
    if isinstance(layer, UnstructuredLayer):
        edges = [(i, j, p) for i, j, p in layer.edges if p > 0]
        if layer.measure == "spurious":
            if not edges:
                return Identity(layout.factor_dims)
            return Composition([_cluster_twirls(layout, [(i, j)]) for i, j, _ in edges])
        weights = np.array([p for *_, p in edges])
        return Mixture(weights / weights.sum(), [_cluster_twirls(layout, [(i, j)]) for i, j, _ in edges])
    raise TypeError(f"unknown layer type {type(layer).__name__}")


def circuit_channel(spec: ArchitectureSpec, k: int, layers: Sequence | None = None) -> Channel:
    """All layers of ``spec`` applied in order: one step of the circuit."""
    layout = make_layout(spec, k)
    layers = spec.layers if layers is None else layers
    return Composition([layer_channel(layer, layout) for layer in layers])


@dataclass
class Trajectory:
    """``entropy[t] = D(Phi^t rho || E rho)`` for ``t = 0..len-1``."""

    entropy: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        """Per-step ratios ``entropy[t] / entropy[t-1]``; NaN once the previous value is 0."""
        prev, cur = self.entropy[:-1], self.entropy[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(prev > 0, cur / np.where(prev > 0, prev, 1.0), np.nan)


def entropy_trajectory(steps: Sequence[Channel] | Channel, e, rho, n_steps: int | None = None,
                       base: float | None = None) -> Trajectory:
    """Relative entropy to the fixed point along repeated channel applications.

    ``steps`` is either one channel applied ``n_steps`` times or an explicit
    list of per-step channels.  The reference ``E(rho)`` is computed once;
    it is preserved because each step commutes with ``E``.
    """
    if isinstance(steps, Channel):
        if n_steps is None:
            raise ValueError("n_steps is required with a single channel")
        steps = [steps] * n_steps
    ref = e(rho)
    x = np.asarray(rho, dtype=complex)
    values = [relative_entropy(x, ref, base)]
    for ch in steps:
        x = ch(x)
        values.append(relative_entropy(x, ref, base))
    return Trajectory(np.array(values))


def fixed_point_projection(spec: ArchitectureSpec, k: int):
    """Global Haar twirl on all sites: the fixed-point projection of any
    architecture whose cluster graph is connected."""
    return global_twirl(make_layout(spec, k))
