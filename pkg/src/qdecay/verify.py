"""Self-check suites: exact identities, oracle agreement and graph audits.

Each suite returns a :class:`SuiteResult` listing named checks.  The command
line ``verify`` command and the acceptance tests both run these.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import arch, bounds, walks
from .channels import Depolarizing, random_channel, relative_error, validate_cond_expectation, cb_return_time
from .circuits import circuit_channel, entropy_trajectory, fixed_point_projection
from .entropy import chain_rule_residual, decay_ratio, pinsker_residual, relative_entropy
from .moments import global_twirl, haar_twirl_projector, local_twirl, mc_twirl, permutation_operator, permutations
from .channels import CondExpectation, Composition
from .tensors import SiteLayout, random_density_matrix, random_pure_state


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.ok), None)

    def add(self, name: str, ok, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return bool(ok)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{self.name}: {status} ({sum(c.ok for c in self.checks)}/{len(self.checks)} checks, {self.seconds:.1f}s)"
        bad = self.first_failure
        if bad is not None:
            line += f"; first failure: {bad.name} {bad.detail}"
        return line


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ----------------------------------------------------------------------------
# twirl projectors
# ----------------------------------------------------------------------------

DEFAULT_DK = ((2, 1), (3, 1), (2, 2), (3, 2), (2, 3))


@_timed
def moments_suite(pairs=DEFAULT_DK, inputs: int = 20, samples: int = 100_000, seed=0,
                  n_se: float = 5.0) -> SuiteResult:
    """Projector validity, invariance of every ``P_sigma`` and agreement with
    Monte-Carlo Haar averages within ``n_se`` standard errors."""
    res = SuiteResult("moments")
    rng = np.random.default_rng(seed)
    for d, k in pairs:
        e = validate_cond_expectation(haar_twirl_projector(d, k))
        res.add(f"(d={d},k={k}) idempotent", e.idempotent)
        res.add(f"(d={d},k={k}) HS self-adjoint", e.self_adjoint)
        fix = max(np.max(np.abs(e(p) - p)) for p in (permutation_operator(s, d) for s in permutations(k)))
        res.add(f"(d={d},k={k}) fixes P_sigma", fix <= 1e-10, f"max deviation {fix:.2e}")
        dim = d**k
        x = rng.standard_normal((inputs, dim, dim)) + 1j * rng.standard_normal((inputs, dim, dim))
        mean, se_re, se_im = mc_twirl(x, d, k, samples, seed=rng, return_stderr=True)
        exact = e(x)
        # floor absorbs entries whose sample variance is zero up to rounding
        z_re = np.abs(mean.real - exact.real) - n_se * se_re
        z_im = np.abs(mean.imag - exact.imag) - n_se * se_im
        worst = max(z_re.max(), z_im.max())
        res.add(f"(d={d},k={k}) Monte-Carlo within {n_se:g} SE", worst <= 1e-10,
                f"worst excess {worst:.3e}")
    return res


# ----------------------------------------------------------------------------
# entropy identities
# ----------------------------------------------------------------------------

def random_local_expectation(rng: np.random.Generator, max_n: int = 3, ks=(1, 2), q: int = 2):
    """Twirl on a random non-empty subset of sites of a random small layout."""
    while True:
        n = int(rng.integers(1, max_n + 1))
        k = int(rng.choice(ks))
        if q ** (n * k) <= 64:
            break
    layout = SiteLayout.uniform(n, q, k)
    size = int(rng.integers(1, n + 1))
    sites = sorted(rng.choice(n, size=size, replace=False).tolist())
    return layout, sites, CondExpectation(local_twirl(layout, sites))


@_timed
def entropy_suite(trials: int = 200, instances: int = 500, seed=1, tol: float = 1e-8) -> SuiteResult:
    """Chain rule for conditional expectations, data processing and Pinsker."""
    res = SuiteResult("entropy")
    ss = np.random.SeedSequence(seed)
    chain_ss, dpi_ss = ss.spawn(2)
    worst = 0.0
    for child in chain_ss.spawn(trials):
        rng = np.random.default_rng(child)
        layout, _, e = random_local_expectation(rng)
        dim = layout.total_dim
        rank = int(rng.integers(1, dim + 1))
        rho = random_density_matrix(dim, rng, rank=rank)
        omega = e(random_density_matrix(dim, rng))
        worst = max(worst, chain_rule_residual(rho, e, omega))
    res.add(f"chain rule on {trials} triples", worst <= tol, f"max residual {worst:.2e}")
    res.data["chain_max_residual"] = worst
    dpi_worst, pin_worst = -math.inf, -math.inf
    for child in dpi_ss.spawn(instances):
        rng = np.random.default_rng(child)
        d = int(rng.integers(2, 17))
        rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
        sigma = random_density_matrix(d, rng)
        phi = random_channel(d, int(rng.integers(1, 4)), rng)
        gap = relative_entropy(phi(rho), phi(sigma)) - relative_entropy(rho, sigma)
        dpi_worst = max(dpi_worst, gap)
        pin_worst = max(pin_worst, pinsker_residual(rho, sigma))
    res.add(f"data processing on {instances} instances", dpi_worst <= tol, f"max excess {dpi_worst:.2e}")
    res.add(f"Pinsker on {instances} instances", pin_worst <= tol, f"max excess {pin_worst:.2e}")
    res.data.update(dpi_max_excess=dpi_worst, pinsker_max_excess=pin_worst)
    return res


# ----------------------------------------------------------------------------
# graphs
# ----------------------------------------------------------------------------

@_timed
def walks_suite(trees: int = 500, max_nodes: int = 50, seed=2) -> SuiteResult:
    """Traversing walks, segment audits and tree edge colourings on random trees."""
    res = SuiteResult("walks")
    rng = np.random.default_rng(seed)
    bad_visits = bad_audit = bad_color = 0
    for _ in range(trees):
        size = int(rng.integers(2, max_nodes + 1))
        tree = nx.random_labeled_tree(size, seed=int(rng.integers(2**31)))
        walk = walks.traversing_walk(tree)
        ell = walk.max_degree
        ok_walk = (all(tree.has_edge(a, b) for a, b in zip(walk.node_sequence, walk.node_sequence[1:]))
                   and all(1 <= walk.visit_counts[v] <= max(tree.degree[v], 1) for v in tree.nodes))
        bad_visits += not ok_walk
        plan = walks.segment_walk(walk, int(rng.integers(1, max(2, size // 2) + 1)))
        bad_audit += not walks.audit_segments(plan)["ok"]
        colors = walks.color_tree_edges(list(tree.edges))
        bad_color += not (walks.is_proper_coloring(colors) and len(colors) <= ell
                          and sum(map(len, colors)) == tree.number_of_edges())
    res.add(f"walk visit counts in [1, deg] ({trees} trees)", bad_visits == 0, f"{bad_visits} bad")
    res.add("segment audits", bad_audit == 0, f"{bad_audit} bad")
    res.add("proper colourings with <= max-degree colours", bad_color == 0, f"{bad_color} bad")
    return res


@_timed
def arch_suite(max_n: int = 100, dims=(1, 2, 3), sides=(4, 6, 8), chunk_n: int = 20, r: int = 4) -> SuiteResult:
    """Cluster graphs, Hamiltonian paths and chunk observations of the generators."""
    res = SuiteResult("arch")
    bad = []
    for n in range(3, max_n + 1):
        cg = arch.cluster_graph(arch.brickwork(n))
        ps = arch.hamiltonian_path(cg)
        if not (cg.connected and cg.bipartite_by_layer and ps.path and arch.is_hamiltonian_path(cg.graph, ps.path)):
            bad.append(f"brickwork({n})")
    res.add(f"brickwork paths n=3..{max_n}", not bad, ", ".join(bad[:5]))
    bad = []
    for D in dims:
        for side in sides:
            cg = arch.cluster_graph(arch.lattice(D, side))
            ps = arch.hamiltonian_path(cg)
            if not (cg.connected and cg.bipartite_by_layer and ps.path and arch.is_hamiltonian_path(cg.graph, ps.path)):
                bad.append(f"lattice({D},{side})")
    res.add(f"lattice paths D<={max(dims)}, side<={max(sides)}", not bad, ", ".join(bad))
    cg = arch.cluster_graph(arch.brickwork(chunk_n))
    plan = arch.chunk_partitions(arch.hamiltonian_path(cg).path, r, site_map=cg.site_map)
    obs = plan.observations
    res.add(f"observation 1 on brickwork({chunk_n}), r={r}", obs["obs1"], f"overlaps {obs['overlaps']}")
    res.add("observation 2", obs["obs2"])
    res.add("observation 3", obs["obs3"], f"skipped {plan.skipped1} / {plan.skipped2}")
    res.add("chunk covers", obs["cover1"] and obs["cover2"])
    return res


# ----------------------------------------------------------------------------
# gluing and composition
# ----------------------------------------------------------------------------

@_timed
def glue_suite(n: int = 5, k: int = 1, states: int = 50, seed=3) -> SuiteResult:
    """Twirls on ``AB`` then ``BC`` (``A``, ``C`` single sites) against the
    global twirl: measured relative error versus the gluing bound, and the
    composed decay ratio versus the composition bound."""
    res = SuiteResult("glue")
    layout = SiteLayout.uniform(n, 2, k)
    e1 = local_twirl(layout, range(0, n - 1))
    e2 = local_twirl(layout, range(1, n))
    composed = Composition([e1, e2])
    e = global_twirl(layout)
    cmp = relative_error(composed, e)
    bound = bounds.glue_error(0, 0, k, 2 ** ((n - 2) * k)).value
    res.data.update(eps=cmp.eps, delta=cmp.delta, glue_bound=bound)
    res.add("relative error <= glue bound", cmp.valid and cmp.eps <= bound,
            f"eps={cmp.eps:.3e}, delta={cmp.delta:.3e}, bound={bound}")
    if cmp.valid and cmp.delta < 1:
        lam = bounds.compose_sdpi([1.0, 1.0], cmp.eps, cmp.delta).value
        rng = np.random.default_rng(seed)
        ratios = [r for r in (decay_ratio(composed, e, random_pure_state(layout.total_dim, rng)) for _ in range(states))
                  if r is not None]
        worst = max(ratios)
        res.data.update(compose_lambda=lam, max_ratio=worst)
        res.add("composed decay ratio <= 1 - compose bound", worst <= 1 - lam + 1e-6,
                f"max ratio {worst:.3e}, 1 - lambda = {1 - lam:.3e}")
    else:
        res.add("composition bound applicable (delta < 1)", False, f"delta={cmp.delta}")
    return res


# ----------------------------------------------------------------------------
# brickwork decay and CB return time
# ----------------------------------------------------------------------------

@_timed
def brickwork_suite(n: int = 4, k: int = 1, samples: int = 10, layers: int = 50, seed=4) -> SuiteResult:
    """Entropy trajectories of repeated brickwork steps."""
    res = SuiteResult("brickwork")
    spec = arch.brickwork(n)
    step = circuit_channel(spec, k)
    e = fixed_point_projection(spec, k)
    rng = np.random.default_rng(seed)
    dim = 2 ** (n * k)
    mono, final, ratios = True, 0.0, []
    for _ in range(samples):
        rho = random_pure_state(dim, rng)
        tr = entropy_trajectory(step, e, rho, layers)
        mono &= bool(np.all(np.diff(tr.entropy) <= 1e-8))
        final = max(final, tr.entropy[-1])
        ratios.append(decay_ratio(step, e, rho))
    worst = max(r for r in ratios if r is not None)
    res.data.update(final_entropy=final, max_ratio=worst)
    res.add("trajectory non-increasing", mono)
    res.add(f"entropy <= 1e-6 after {layers} steps", final <= 1e-6, f"max {final:.2e}")
    res.add("strict contraction per step", worst < 1, f"max ratio {worst:.3e}")
    return res


@_timed
def cbrt_suite() -> SuiteResult:
    """CB return times of a projection onto itself and of a qubit depolarizer."""
    res = SuiteResult("cbrt")
    e = haar_twirl_projector(2, 1)
    t_e = cb_return_time(e, e, 10)
    res.add("t_cb(E, E) = 1", t_e == 1, f"got {t_e}")
    t_dep = cb_return_time(Depolarizing(2, 0.5), e, 20)
    res.add("t_cb(depolarizing 1/2) = 3", t_dep == 3, f"got {t_dep}")
    return res


@_timed
def bounds_suite() -> SuiteResult:
    """Formula values against direct scalar evaluation."""
    res = SuiteResult("bounds")
    cases = [
        ("parallel_r(2,2,1024,1/24)", bounds.parallel_r(2, 2, 1024, 1 / 24).value, 42, 0),
        ("glue_error(0,0,2,1024)", bounds.glue_error(0, 0, 2, 1024).value, 20 / 1024, 1e-15),
        ("parallel_lambda(2,2,1024,1)", bounds.parallel_lambda(2, 2, 1024, 1).value,
         2 / (6 * math.log2(5670 * 4 * 4 * 1024)), 1e-12),
        ("tree_lambda example", bounds.tree_lambda(2, 1, 16, 2, 0.5, 1 / 30, 1).value, 0.5 / 30 / (4 * 366), 1e-15),
    ]
    for name, got, want, tol in cases:
        res.add(name, abs(got - want) <= tol * max(1, abs(want)), f"got {got}, want {want}")
    b = bounds.compose_sdpi([1.0], 0.1, 0.1).value
    res.add("beta(0.1, 0.1) in [0.5, 0.531]", 0.5 <= b <= 0.531, f"got {b}")
    return res


SUITES = {
    "moments": moments_suite,
    "entropy": entropy_suite,
    "walks": walks_suite,
    "arch": arch_suite,
    "glue": glue_suite,
    "brickwork": brickwork_suite,
    "cbrt": cbrt_suite,
    "bounds": bounds_suite,
}
