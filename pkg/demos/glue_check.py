"""Gluing two overlapping local twirls and comparing with the global twirl.

A and C are single qubits and B is the middle block.  The measured
relative error is set against the gluing bound for each k.

Run: python3 demos/glue_check.py
"""
from qdecay.bounds import compose_sdpi, glue_error
from qdecay.channels import Composition, relative_error
from qdecay.moments import global_twirl, local_twirl
from qdecay.tensors import SiteLayout

for n, k in ((3, 1), (4, 1), (5, 1)):
    layout = SiteLayout.uniform(n, 2, k)
    composed = Composition([local_twirl(layout, range(0, n - 1)), local_twirl(layout, range(1, n))])
    cmp = relative_error(composed, global_twirl(layout))
    bound = glue_error(0, 0, k, 2 ** ((n - 2) * k)).value
    line = f"n={n} k={k}: eps={cmp.eps:.4f} delta={cmp.delta:.4f} bound={bound:.4f}"
    if cmp.delta < 1:
        line += f" compose lambda={compose_sdpi([1.0, 1.0], cmp.eps, cmp.delta).value:.4f}"
    print(line)
