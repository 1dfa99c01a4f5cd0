"""Entropy and neighbour-count dimension estimates next to the similarity dimension.

Run:  python3 demos/dimension_drop.py
"""
from fractions import Fraction as F

from condensation_lab.dimension import dim_estimate
from condensation_lab.symbolic_ifs import ParamPair

for t in (F(1, 5), F(3, 10)):
    p = ParamPair(F(3, 10), t)
    print(f"t = {t}")
    for n in (4, 6, 8, 10):
        r = dim_estimate(p, n)
        print(f"  n={n:2d}  dim_S={r.dim_similarity:.4f}  entropy={r.dim_entropy:.4f}  counts={r.dim_combined:.4f}")
