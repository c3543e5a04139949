"""
How sharp are the permanent bounds?
===================================

For each erasure probability we simulate JEDI on the two preset codes and
put the empirical failure rate next to the analytical sandwich

    4(U - 1) - (V - 1)  <=  P_err  <=  U - 1

where U is a permanent and V a second-order permanent of the pairwise
confusion matrix. The results land in ``demos/out/`` as CSV plus a small
plot description that ``render_plot.py`` turns into a PNG.

Run with ``python3 demos/bounds_vs_simulation.py [TRIALS]``.
"""

import json
import sys
from pathlib import Path

from beeid import presets
from beeid.estimation import closed_form_upper_bound, theta
from beeid.simulate import contained, parse_grid, plot_spec, sweep, write_csv

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
grid = parse_grid("0.05:0.5:0.05")

for cb in (presets.example1_simplex(), presets.example2()):
    results = sweep(cb, "bec", grid, trials=trials, seed=1, with_bounds=True)
    print(f"\n{cb.name}: M={cb.M}, n={cb.n}, d={cb.min_distance}, {trials} trials per point")
    print(f"{'p':>5} {'lower':>10} {'rate':>10} {'upper':>10} {'closed':>10}  ok")
    for r in results:
        # the crude bound only knows M and the minimum distance
        crude = min(float(closed_form_upper_bound(cb.M, theta("bec", r.p, cb.min_distance))) - 1, 1.0)
        print(f"{r.p:5.2f} {r.bound_lower:10.3e} {r.rate:10.3e} {r.bound_upper:10.3e} {crude:10.3e}  "
              f"{'yes' if contained(r) else 'NO'}")
    csv_path = out / f"{cb.name}_bec.csv"
    write_csv(results, csv_path)
    spec = plot_spec(results, csv_path.name)
    (out / f"{cb.name}_bec.plot.json").write_text(json.dumps(spec, indent=2) + "\n")
    print("wrote", csv_path)
