"""Minimal level-n gaps for an overlapping and a separated parameter pair.

Run:  python3 demos/overlap_vs_separation.py
"""
from fractions import Fraction as F

from condensation_lab.separation import detect_exact_overlap, min_gap
from condensation_lab.symbolic_ifs import ParamPair, format_word3

pairs = {"t = lambda (overlap)": ParamPair(F(3, 10), F(3, 10)),
         "t = 1/5 (separated)": ParamPair(F(3, 10), F(1, 5))}

for label, p in pairs.items():
    print(label)
    for n in range(1, 11):
        g = min_gap(p, n)
        words = " vs ".join(format_word3(w) for w in g.pair)
        print(f"  n={n:2d}  gap={float(g.delta):.3e}  ({words})")
    rep = detect_exact_overlap(p, 10)
    print(f"  exact overlap up to level 10: {rep.found}\n")
