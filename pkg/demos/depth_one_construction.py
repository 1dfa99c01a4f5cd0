"""One level of the nested-interval construction with eta_n = 2^(-n^2).

Builds the root and its two children, then assembles parameter boxes and
prints the gap table at the designated point of each box.  Takes a few
seconds.  A second level is out of reach: the run ends with the budget
diagnostic instead.

Run:  python3 demos/depth_one_construction.py
"""
from condensation_lab.construction import construct, eta_builtin
from condensation_lab.errors import BudgetExceeded

eta = eta_builtin("nsq")
tree, bundles = construct(eta, 1, 12)
for omega, node in sorted(tree.nodes.items()):
    print(f"node '{omega}': word length {node.length}, interval width 2^{-node.length ** 2}, ok = {node.ok}")
for b in bundles:
    print(f"\nbundle {b.omega_prefix}: ok = {b.ok}")
    for row in b.table:
        print(f"  n={row['n']:2d}  gap={row['delta_n']['decimal']:<24} bound={row['eta_prime_n']['decimal']}")

try:
    construct(eta, 2, 12, tree.certs)
except BudgetExceeded as exc:
    print("\nsecond level:", exc)
