"""Solve the three schemes for one pair of user directions.

MD steers exactly at the users. CM lets the swarm move the four beam angles
while keeping unit gains. NCM also adjusts every element gain. Each scheme is
seeded with the previous one, so the levels can only go down. On a 2x2 tile
NCM often ends up with unit gains and ties CM; the 4x4 tile used here has
enough elements for the gain taper to pay off.
"""

import numpy as np

from fdsis import ArrayLayout, SchemeContext, SteeringAngles, synthetic_channel
from fdsis.sweep import solve_all

ctx = SchemeContext.from_channel(synthetic_channel(), ArrayLayout(4, 4), ArrayLayout(4, 4))
downlink_user = SteeringAngles.from_degrees(90, 60)
uplink_user = SteeringAngles.from_degrees(90, 150)
eps = ctx.constraints.eps_for(16)

for kind, sol in solve_all(downlink_user, uplink_user, ctx, rng_seed=1).items():
    ev = sol.evaluation
    th_d, th_u, ps_d, ps_u = np.degrees(sol.x[:4])
    gains = f"min {sol.x[4:].min():.2f}, mean {sol.x[4:].mean():.2f}"
    print(f"{kind.value:>3}: SI level {ev.si_level_db:7.2f} dB | degradation tx {ev.tx_degradation:.3f}"
          f" rx {ev.rx_degradation:.3f} (eps {eps:.2f})")
    print(f"     angles D ({th_d:.1f}, {ps_d:.1f}) U ({th_u:.1f}, {ps_u:.1f}) deg | gains {gains}")
