"""Compare optimizer coefficient choices on one CM problem.

The constriction setting (the default) contracts the swarm. With inertia above
one the velocities keep growing and particles pile up on the box edges, which
shows up as a flat fitness trace after the first few iterations.
"""

from dataclasses import replace

import numpy as np

from fdsis import ArrayLayout, PsoConfig, SchemeContext, SteeringAngles, run_pso, synthetic_channel
from fdsis.sweep import SchemeKind, scheme_bounds

ctx = SchemeContext.from_channel(synthetic_channel(), ArrayLayout(2, 2), ArrayLayout(2, 2))
problem = ctx.problem(SteeringAngles.from_degrees(90, 30), SteeringAngles.from_degrees(90, 120))
bounds = scheme_bounds(SchemeKind.CM, problem)

settings = {
    "constriction": PsoConfig(),
    "inertia 1.1": PsoConfig.classic(),
    "schedule (T-1)/T": PsoConfig.classic(inertia="schedule"),
}
checkpoints = [0, 10, 25, 50, 100, 150]
print("iteration " + " ".join(f"{t:>8d}" for t in checkpoints))
for name, cfg in settings.items():
    finals = []
    for seed in range(5):
        res = run_pso(replace(cfg, rng_seed=seed), bounds, problem.fitness_batch,
                      baseline=problem.nominal_vector(), batch=True)
        finals.append(10 * np.log10(res.fitness_trace[checkpoints]))
    mean = np.mean(finals, axis=0)
    print(f"{name:>17} " + " ".join(f"{v:8.2f}" for v in mean) + "  dB (mean of 5 seeds)")
