"""Table of the closed-form bounds for growing system size.

Run: python3 demos/bounds_table.py
"""
from qdecay import bounds

print(f"{'n':>6} {'r':>4} {'r_derived':>9} {'lambda_par':>11} {'brick_lambda':>12}")
for n in (64, 256, 1024, 4096, 16384):
    r = bounds.parallel_r(2, 2, n, 1 / 24)
    lam = bounds.parallel_lambda(2, 2, n, 1).value
    brick = bounds.brickwork_lambda(n, 2).value
    print(f"{n:>6} {r.value:>4} {r.extras['other_variant']:>9} {lam:>11.5f} {brick:>12.5f}")

t = bounds.tree_lambda(2, 1, 16, 2, 0.5, 1 / 30, 1)
print(f"\ntree example: sites={t.extras['segment_sites']} f={t.extras['f']} lambda={t.value:.5e}")
print("parallel gluing delta (as stated, as derived) for n=1024, r=42:",
      bounds.parallel_delta(2, 2, 1024, 42).extras["as_stated"],
      bounds.parallel_delta(2, 2, 1024, 42).extras["as_derived"])
