"""Relative entropy to the fixed point under repeated 1D brickwork steps.

Run: python3 demos/brickwork_decay.py
"""
import numpy as np

from qdecay.arch import brickwork
from qdecay.circuits import circuit_channel, entropy_trajectory, fixed_point_projection
from qdecay.tensors import random_pure_state

rng = np.random.default_rng(0)
for n, k in ((4, 1), (3, 2)):
    spec = brickwork(n)
    step, e = circuit_channel(spec, k), fixed_point_projection(spec, k)
    tr = entropy_trajectory(step, e, random_pure_state(2 ** (n * k), rng), 8, base=2)
    print(f"n={n} k={k}: D_t (bits) =", " ".join(f"{v:.3e}" for v in tr.entropy))
    print("  step ratios:", " ".join(f"{v:.3f}" for v in tr.ratios if np.isfinite(v)))
