"""Rebuild the fixture CSVs and golden images under src/dzoa_plots/_fixtures/.

The fixtures are genuine experiment outputs: this script drives the
`dzoa` command-line tool (the producer's public interface) on a small
pinned configuration, copies the resulting trace and sweep CSVs into the
package, and re-renders the goldens with this package's own plotting
functions. Run it only when the file format or the figure style changes,
from the plots/ directory, with both packages installed:

    python3 tools/regenerate_fixtures.py
"""

from __future__ import annotations

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

PACKAGE_DIR = Path(__file__).resolve().parent.parent / "src" / "dzoa_plots"

CONFIG_YAML = """\
graph:
  num_agents: 3
  edges: [[1, 2], [2, 3], [3, 1]]
data:
  samples_per_agent: 4
  p: 2
  noise_std: 0.3
problem:
  eta: 0.5
  rho: 1.0
  c1: 1.0
zo:
  u1: 0.5
  T: 20
  J: 2
  alpha0: null
  R: 1.0
  L: 2.5
privacy:
  epsilons: [0.3, 0.8]
  deltas: [0.001, 0.01]
run:
  num_outer: 8
  seeds: [0, 1]
  workers: 1
  oracle_tol: 1.0e-10
"""


def main() -> int:
    fixtures = PACKAGE_DIR / "_fixtures"
    traces_dir = fixtures / "traces"
    golden = fixtures / "golden"
    for directory in (traces_dir, golden):
        if directory.exists():
            shutil.rmtree(directory)
        directory.mkdir(parents=True)

    with tempfile.TemporaryDirectory() as tmp:
        config_path = Path(tmp) / "config.yaml"
        config_path.write_text(CONFIG_YAML)
        out_dir = Path(tmp) / "out"
        subprocess.run(
            ["dzoa", "sweep", "--config", str(config_path),
             "--out-dir", str(out_dir)],
            check=True,
        )
        shutil.copy(out_dir / "sweep.csv", fixtures / "sweep.csv")
        for trace in sorted(out_dir.glob("*_eps*_delta*_seed*.csv")):
            shutil.copy(trace, traces_dir / trace.name)

    sys.path.insert(0, str(PACKAGE_DIR.parent))
    from dzoa_plots.golden import GOLDEN_NAMES, render_fixture_figures

    rendered = render_fixture_figures(golden)
    for name in GOLDEN_NAMES:
        print(f"golden: {rendered[name]}")
    print(f"fixtures: {fixtures}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
