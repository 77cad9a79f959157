"""Which filter type and which band? Minimal orders at delta = 0.001.

The symmetric types (I, II) serve NRTZ and RTZ; the antisymmetric ones (III,
IV) serve RTC and RTCZ, whose j factor they cancel. Type I has no forced zero
in the band and comes out far shorter. The first band needs roughly half the
order of the others for the same bandwidth, because its single don't-care
band is twice as wide.
"""
import numpy as np

from daceq import OrderSpec, minimal_order
from daceq.estimate import estimate_order

delta = 1e-3
print("second band, B = 0.8 pi")
for kind, t in [("rtz", "I"), ("rtz", "II"), ("rtc", "III"), ("rtc", "IV"), ("rtcz", "III"), ("rtcz", "IV")]:
    n, res = minimal_order(OrderSpec(kind, 2, t, 0.8 * np.pi, delta))
    est = estimate_order(kind, 2, t, 0.8 * np.pi, delta)
    print(f"  {kind.upper():5s} Type {t:3s}  N_min = {n:3d}  (estimate {est:3d}, achieved {res.delta_N:.2e})")

print("\nRTZ, Type II, first band against second band")
for b in (0.3, 0.5, 0.7, 0.8):
    n1, _ = minimal_order(OrderSpec("rtz", 1, "II", b * np.pi, delta))
    n2, _ = minimal_order(OrderSpec("rtz", 2, "II", b * np.pi, delta))
    print(f"  B = {b:.1f} pi   NB1 {n1:3d}   NB2 {n2:3d}   ratio {n1 / n2:.2f}")
