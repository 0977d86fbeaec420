"""Sweep both user azimuths over 0..180 deg and print best/worst/average SI
levels per scheme for a 2x2 URA and a 1x4 ULA of the same size."""

import time

from fdsis import ArrayLayout, SchemeContext, SweepGrid, run_sweep, synthetic_channel

ch = synthetic_channel()
grid = SweepGrid.figure("azimuth")

for shape in ("2x2", "1x4"):
    layout = ArrayLayout.parse(shape)
    ctx = SchemeContext.from_channel(ch, layout, layout)
    t0 = time.perf_counter()
    report = run_sweep(grid, ["MD", "CM", "NCM"], ctx, seed=0)
    print(f"\n{shape} sub-array, {len(grid.cells())} angle pairs, {time.perf_counter() - t0:.1f} s")
    print(report.table())
