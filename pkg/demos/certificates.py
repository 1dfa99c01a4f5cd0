"""The word-independent inequality certificates that the construction relies on.

Run:  python3 demos/certificates.py
"""
from condensation_lab.construction import base_root, global_certificates
from condensation_lab.numerics import decimal_str

root = base_root()
print("crossing of the two base words:", decimal_str(root.enclosure.lo), "..", decimal_str(root.enclosure.hi))
print(f"cross-difference = ({root.quotient}) * ({root.quadratic})")

certs = global_certificates()
t = certs.trans
print(f"derivative of the projection difference in [{float(t.lower):.5f}, {float(t.upper):.5f}]")
print("working constant delta =", t.delta)
print("covering of projected children:", certs.covering.status.value)
print("location certificates:", {k: v.status.value for k, v in certs.location.items()})
print("mean-value derivative bound:", float(certs.combined_derivative), "< 1/delta =", float(1 / certs.delta))
