"""Steer a 4x4 transmit beam and look at what gain tapering costs.

With unit gains the array gain toward the steered direction is exactly m = 16.
Scaling every gain by g scales the gain by g**2, and a tapered profile trades
peak gain for lower sidelobes. The script prints a coarse azimuth cut.
"""

import numpy as np

from fdsis import ArrayLayout, SteeringAngles, build_tx_beam, directivity, directivity_degradation

layout = ArrayLayout(4, 4)
steer = SteeringAngles.from_degrees(60, 45)

uniform = build_tx_beam(layout, steer)
print(f"unit gains: directivity {directivity(uniform, steer):.6f} (m = {layout.m})")

for g in (0.95, 0.8, 0.5):
    beam = build_tx_beam(layout, steer, g)
    print(f"all gains {g:.2f}: degradation {directivity_degradation(beam, steer):7.4f}"
          f"  (closed form m(1-g^2) = {layout.m * (1 - g * g):7.4f})")

# Hann-like taper on each axis
w = np.hanning(layout.m_x + 2)[1:-1]
taper = np.kron(w, w) / np.max(np.kron(w, w))
tapered = build_tx_beam(layout, steer, taper)

print("\nazimuth cut at theta = 60 deg (array gain, dB relative to m)")
print(" psi   uniform  tapered")
for psi in range(0, 181, 15):
    at = SteeringAngles.from_degrees(60, psi)
    row = [10 * np.log10(max(directivity(b, at), 1e-12) / layout.m) for b in (uniform, tapered)]
    print(f"{psi:4d}  {row[0]:7.1f}  {row[1]:7.1f}")
