"""Closed-form decay constants, gluing errors and depths.

Every calculator returns a :class:`BoundReport` that echoes its inputs and
lists each validity precondition with a pass/fail flag.  Where the source
states a formula one way and derives it another, both variants are
available (``as_stated`` / ``as_derived``) and reported side by side.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .entropy import beta

AS_STATED = "as_stated"
AS_DERIVED = "as_derived"


@dataclass
class BoundReport:
    formula_id: str
    inputs: dict
    value: float
    variant: str | None = None
    validity: list[tuple[str, bool]] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def valid(self) -> bool:
        return all(ok for _, ok in self.validity)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["validity"] = [{"name": n, "ok": bool(ok)} for n, ok in self.validity]
        return d

    def to_json(self, **kw) -> str:
        """Strict JSON: non-finite numbers become the strings ``"inf"``, ``"-inf"``, ``"nan"``."""
        return json.dumps(_finite(self.to_dict()), allow_nan=False, default=_json_default, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        d = dict(d)
        d["validity"] = [(v["name"], v["ok"]) for v in d.get("validity", [])]
        if isinstance(d.get("value"), str):
            d["value"] = float(d["value"])
        return cls(**d)


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _json_default(x):
    if hasattr(x, "item"):
        return _finite(x.item())
    raise TypeError(f"cannot serialise {type(x).__name__}")


def reports_to_csv(reports: Iterable[BoundReport]) -> str:
    """Flatten reports (e.g. from a sweep) into CSV, one row per report."""
    rows = []
    for r in reports:
        row = {"formula_id": r.formula_id, "variant": r.variant or "", "value": r.value, "valid": r.valid}
        row.update({f"in_{k}": v for k, v in r.inputs.items()})
        row.update({f"x_{k}": v for k, v in r.extras.items() if not isinstance(v, (dict, list))})
        row.update({f"ok_{n}": ok for n, ok in r.validity})
        rows.append(row)
    cols = list(dict.fromkeys(k for row in rows for k in row))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _log(x: float, base: float) -> float:
    return math.log(x) / math.log(base)


def _ceil(x: float) -> int:
    # absorb floating-point fuzz on values that are integers mathematically
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)


def _check_variant(variant: str):
    if variant not in (AS_STATED, AS_DERIVED):
        raise ValueError(f"variant must be {AS_STATED!r} or {AS_DERIVED!r}")


def glue_error(eps1: float, eps2: float, k: int, dim_b: float) -> BoundReport:
    """Relative error of ``U_AB U_BC`` from designs on ``AB`` and ``BC``:
    ``(1 + eps1)(1 + eps2)(1 + 5k^2/|B|) - 1``."""
    if dim_b <= 0:
        raise ValueError("dim_B must be positive")
    value = (1 + eps1) * (1 + eps2) * (1 + 5 * k**2 / dim_b) - 1
    return BoundReport("glue", {"eps1": eps1, "eps2": eps2, "k": k, "dim_B": dim_b}, value,
                       validity=[("dim_B >= 5k^2", dim_b >= 5 * k**2)])


def glue_chain(overlap_dims: Sequence[float], k: int) -> BoundReport:
    """Accumulated gluing error over overlaps ``A_j``: exact product
    ``prod(1 + 5k^2/|A_j|) - 1`` and the bound ``exp(1 + 5k^2 sum 1/|A_j|) - 1``."""
    dims = list(overlap_dims)
    if any(a <= 0 for a in dims):
        raise ValueError("overlap dimensions must be positive")
    if not dims:
        return BoundReport("glue_chain", {"overlap_dims": dims, "k": k}, 0.0,
                           extras={"exact": 0.0, "exp_bound": 0.0})
    exact = math.prod(1 + 5 * k**2 / a for a in dims) - 1
    bound = math.exp(1 + 5 * k**2 * sum(1 / a for a in dims)) - 1
    return BoundReport("glue_chain", {"overlap_dims": dims, "k": k}, exact,
                       validity=[("all |A_j| >= 5k^2", all(a >= 5 * k**2 for a in dims))],
                       extras={"exact": exact, "exp_bound": bound})


def parallel_r(q: int, k: int, n: int, eps: float, variant: str = AS_STATED) -> BoundReport:
    """Chunk size for the two-layer chunking argument.

    ``as_stated``: ``2 ceil(log_q(k^2 n / eps) + log_q 10 + 1)``;
    ``as_derived``: ``2 ceil(log_q(10 q^2 k^2 n / eps) + 1)``.
    """
    _check_variant(variant)
    r = _parallel_r_value(q, k, n, eps, variant)
    other = _parallel_r_value(q, k, n, eps, AS_DERIVED if variant == AS_STATED else AS_STATED)
    return BoundReport("parallel_r", {"q": q, "k": k, "n": n, "eps": eps}, r, variant,
                       validity=[("r < n/4", r < n / 4), ("0 < eps <= 1/2", 0 < eps <= 0.5),
                                 ("n, k, q >= 2", min(n, k, q) >= 2)],
                       extras={"other_variant": other})


def _parallel_r_value(q, k, n, eps, variant):
    if variant == AS_STATED:
        return 2 * _ceil(_log(k**2 * n / eps, q) + _log(10, q) + 1)
    return 2 * _ceil(_log(10 * q**2 * k**2 * n / eps, q) + 1)


def _expm1(x: float) -> float:
    return math.expm1(x) if x < 700 else math.inf


def _parallel_delta_value(q, k, n, r, variant):
    if variant == AS_STATED:
        return _expm1(1 + 20 * k**2 * n / (r * q ** (r / 2 - 1)))
    return _expm1(1 + 10 * k**2 * n / (q ** (r - 1) * r))


def parallel_delta(q: int, k: int, n: int, r: int, variant: str = AS_STATED) -> BoundReport:
    """Gluing error ``delta`` of the chunked two-layer architecture.

    ``as_stated``: ``exp(1 + 20 k^2 n / (r q^{r/2-1})) - 1``;
    ``as_derived``: ``exp(1 + 10 k^2 n / (q^{r-1} r)) - 1``.
    Both exceed ``e - 1`` because of the constant 1 in the exponent, so the
    ``delta < 1`` flag needed downstream never holds; it is reported, not hidden.
    """
    _check_variant(variant)
    if r < 2 or r % 2:
        raise ValueError("r must be even and >= 2")
    value = _parallel_delta_value(q, k, n, r, variant)
    stated = _parallel_delta_value(q, k, n, r, AS_STATED)
    derived = _parallel_delta_value(q, k, n, r, AS_DERIVED)
    return BoundReport("parallel_delta", {"q": q, "k": k, "n": n, "r": r}, value, variant,
                       validity=[("delta < 1", value < 1)],
                       extras={AS_STATED: stated, AS_DERIVED: derived,
                               "difference": stated - derived if math.isfinite(stated + derived) else math.nan})


def parallel_lambda(q: int, k: int, n: int, c_k: float) -> BoundReport:
    """CSDPI constant of two layers of a 2-layer parallel architecture:
    ``2 / (3 k C(k) log_q(5670 q^2 k^2 n))``."""
    if c_k <= 0:
        raise ValueError("C(k) must be positive")
    value = 2 / (3 * k * c_k * _log(5670 * q**2 * k**2 * n, q))
    return BoundReport("parallel_lambda", {"q": q, "k": k, "n": n, "C_k": c_k}, value,
                       validity=[("inputs >= 1", min(q, k, n) >= 1)],
                       notes="decay constant of the squared layer channel")


def c_qk(q: int, k: int, mode: str = "general_bound", value: float | None = None,
         log_base: float | str = "e") -> BoundReport:
    """Brickwork convergence constant ``C(q, k)``.

    ``general_bound`` evaluates ``261000 ceil(log_q 4k)^2 q^2 k^(5 + 3.1/log q)``
    with ``log q`` taken in ``log_base`` (``"e"``, 2 or ``"q"``);
    ``user_override`` passes ``value`` through (e.g. a polylog qubit constant).
    """
    inputs = {"q": q, "k": k, "mode": mode, "log_base": log_base}
    if mode == "user_override":
        if value is None or value <= 0:
            raise ValueError("user_override needs a positive value")
        inputs["value"] = value
        return BoundReport("c_qk", inputs, float(value), notes="user-supplied constant")
    if mode != "general_bound":
        raise ValueError(f"unknown mode {mode!r}")
    if log_base == "e":
        logq = math.log(q)
    elif log_base == "q":
        logq = 1.0
    else:
        logq = _log(q, float(log_base))
    result = 261000 * _ceil(_log(4 * k, q)) ** 2 * q**2 * k ** (5 + 3.1 / logq)
    return BoundReport("c_qk", inputs, result, validity=[("q >= 2", q >= 2), ("k >= 1", k >= 1)])


def parallel_depth(q: int, k: int, n: int, eps: float, ell: int, c_qk_value: float) -> BoundReport:
    """Smallest ``m >= (2kn + log_q(1/eps)) 4 C(q,k)^(ell-1)``: depth after which an
    ``ell``-layer parallel circuit on ``n`` sites is an ``eps`` relative-error design."""
    m = _ceil((2 * k * n + _log(1 / eps, q)) * 4 * c_qk_value ** (ell - 1))
    return BoundReport("parallel_depth", {"q": q, "k": k, "n": n, "eps": eps, "ell": ell, "C_qk": c_qk_value},
                       m, validity=[("0 < eps < 1", 0 < eps < 1), ("ell >= 2", ell >= 2)])


def _segment_sites(q, k, n, ell, eps_prime):
    return 2 * ell * _ceil(_log(60 * k**2 * n / eps_prime, q))


def tree_lambda(q: int, k: int, n: int, ell: int, eps_prime: float, min_p_lambda: float,
                c_qk_value: float) -> BoundReport:
    """Decay constant of a random-gate layer on a tree of maximum degree ``ell``:
    ``(1 - eps') min(p lambda) / (4 f)`` with ``f = parallel_depth(eps=1/10)`` on
    ``2 ell ceil(log_q(60 k^2 n / eps'))`` sites."""
    sites = _segment_sites(q, k, n, ell, eps_prime)
    f = parallel_depth(q, k, sites, 0.1, ell, c_qk_value).value
    value = (1 - eps_prime) * min_p_lambda / (4 * f)
    upper = q**n / (60 * k**2 * n)
    return BoundReport("tree_lambda",
                       {"q": q, "k": k, "n": n, "ell": ell, "eps_prime": eps_prime,
                        "min_p_lambda": min_p_lambda, "C_qk": c_qk_value},
                       value, AS_DERIVED,
                       validity=[("0 < eps' <= q^n/(60 k^2 n)", 0 < eps_prime <= upper)],
                       extras={"segment_sites": sites, "f": f, "numerator": (1 - eps_prime) * min_p_lambda,
                               "denominator": 4 * f})


def random_graph_lambda(q: int, k: int, n: int, ell: int, eps: float, min_p_lambda: float,
                        c_qk_value: float, variant: str = AS_DERIVED, connected: bool = True) -> BoundReport:
    """Decay constant of a random-gate layer on a connected graph of max degree ``ell``.

    ``as_stated`` reproduces the closed form as printed: ``C^(ell-1)`` in the
    numerator and ``log_q(1/10)`` (negative) in the denominator.
    ``as_derived`` substitutes the parallel depth into the tree bound, with
    ``min_p_lambda`` taken over a spanning tree.
    """
    _check_variant(variant)
    stated = (4 * (1 - eps) * c_qk_value ** (ell - 1) * min_p_lambda
              / (2 * k * 2 * ell * _ceil(_log(60 * k**2 * n / eps, q)) + _log(1 / 10, q)))
    derived = tree_lambda(q, k, n, ell, eps, min_p_lambda, c_qk_value)
    value = stated if variant == AS_STATED else derived.value
    return BoundReport("random_graph_lambda",
                       {"q": q, "k": k, "n": n, "ell": ell, "eps": eps, "min_p_lambda": min_p_lambda,
                        "C_qk": c_qk_value},
                       value, variant,
                       validity=[("connected graph", bool(connected))] + derived.validity,
                       extras={AS_STATED: stated, AS_DERIVED: derived.value, "ratio_stated_over_derived": stated / derived.value})


def complete_graph_params(n: int) -> dict:
    """Effective degree and minimum edge probability of the uniform complete graph,
    treated as an average over Hamiltonian paths (effective ``ell = 2``)."""
    return {"ell": 2, "min_p": 2 / (n * (n - 1))}


def compose_sdpi(lambdas: Sequence[float], eps: float, delta: float) -> BoundReport:
    """``min(lambdas) * beta(eps, delta)`` for a composition whose projections
    compose to within ``(eps, delta)`` of the joint projection."""
    lambdas = list(lambdas)
    if not lambdas or any(not 0 < lam <= 1 for lam in lambdas):
        raise ValueError("lambdas must be non-empty and in (0, 1]")
    b = beta(eps, delta)
    return BoundReport("compose_sdpi", {"lambdas": lambdas, "eps": eps, "delta": delta},
                       min(lambdas) * b.beta, validity=[("0 <= eps, delta < 1", True)],
                       extras={"beta": b.beta, "beta_variant": b.formula_variant})


def brickwork_lambda(n: int, k: int, prefactor: float = 1.0, c_k: float | None = None) -> BoundReport:
    """Decay constant of two qubit brickwork layers from :func:`parallel_lambda`
    with ``C(k) = max(1, prefactor * (log2 k)^7)`` unless ``c_k`` is given."""
    if c_k is None:
        c_k = max(1.0, prefactor * math.log2(k) ** 7) if k > 1 else 1.0
    base = parallel_lambda(2, k, n, c_k)
    return BoundReport("brickwork_lambda", {"n": n, "k": k, "prefactor": prefactor, "C_k": c_k}, base.value,
                       extras={"regime": "unknown-constant regime (k <= a 2^(2n/5), a unknown)"},
                       notes="C(k) convention: unit prefactor on (log2 k)^7 unless supplied; "
                             "regime flag is unknown-constant")
