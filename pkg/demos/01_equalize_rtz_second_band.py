"""Equalize an RTZ DAC used in its second Nyquist band.

A return-to-zero pulse droops across the band [1.1pi, 1.9pi]. We design the
order-12 Type I equalizer, check it against a dense grid, and look at what the
equalized response does to the droop.
"""
import numpy as np

from daceq import DesignProblem, design, verify_design
from daceq.fir_types import frequency_response
from daceq.pulses import pulse_frequency_response

problem = DesignProblem.create("rtz", nb=2, filter_type="I", order=12, B=0.8 * np.pi)
result = design(problem)
peak, worst = verify_design(result, problem)

print(f"order {problem.order}, {problem.n_free} multipliers, delay K = {problem.delay.K} samples")
print(f"minimax error on the design grid  {result.delta_N:.3e}")
print(f"peak error on an 8x denser grid   {peak:.3e} at wT = {worst / np.pi:.4f} pi")

w = np.linspace(1.1 * np.pi, 1.9 * np.pi, 9)
P = pulse_frequency_response("rtz", w)
H = frequency_response(result.coefficients, w)
print("\n  wT/pi    |P|/T   |H P|/T")
for wi, p, hp in zip(w / np.pi, np.abs(P), np.abs(H * P)):
    print(f"  {wi:5.2f}   {p:.4f}   {hp:.6f}")

# the residual error is real once the linear phase e^{-jwK} is taken out
E = H * P * np.exp(1j * w * problem.delay.K) - 1
print(f"\nlargest imaginary part of the de-delayed error: {np.abs(E.imag).max():.1e}")
