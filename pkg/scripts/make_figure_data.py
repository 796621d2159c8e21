"""Write (x, y) series for the energy, wavefunction and thermodynamics figures.

Each panel is one CLI sweep per curve, written as CSV under OUTDIR:

    python scripts/make_figure_data.py --outdir figure_data

Curves are named <figure><panel>_<varied>=<value>.csv.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from disclination_qm.cli import main as cli

ALPHA_SWEEP = "alpha:0.1:1:91"

# figure, panel, command, fixed flags, varied flag, values, sweep
PANELS = [
    ("fig2", "a", "spectrum", dict(ell=1, b=1, B=1, phi=0.75), "a", [0.5, 1, 2, 3], ALPHA_SWEEP),
    ("fig2", "b", "spectrum", dict(ell=1, a=1, B=1, phi=0.75), "b", [0.5, 1, 2, 3], ALPHA_SWEEP),
    ("fig2", "c", "spectrum", dict(ell=1, a=1, b=1, phi=0.75), "B", [0, 1, 2, 3], ALPHA_SWEEP),
    ("fig2", "d", "spectrum", dict(ell=1, a=1, b=1, B=2), "phi", [0, 0.25, 0.5, 0.75], ALPHA_SWEEP),
    ("fig4", "a", "thermo", dict(ell=1, a=1, b=1, phi=0.5, beta=0.5), "B", [0, 1, 2, 3], ALPHA_SWEEP),
    ("fig4", "b", "thermo", dict(ell=1, a=1, b=1, B=2, beta=0.5), "phi", [0, 0.25, 0.5, 0.75],
     ALPHA_SWEEP),
    ("fig7", "a", "thermo", dict(ell=1, a=1, b=1, beta=0.5, phi=0.5), "B", [0, 1, 2, 3],
     ALPHA_SWEEP),
    ("fig7", "b", "thermo", dict(ell=1, a=1, b=1, alpha=0.5, phi=0.5), "B", [0, 1, 2, 3],
     "beta:0.1:10:100"),
]

# wavefunction panels: psi against s for n = 1
WAVE_PANELS = [
    ("fig3", "a", dict(ell=1, a=1, b=1, B=1, phi=0.75), "alpha", [0.25, 0.5, 0.75, 1]),
    ("fig3", "b", dict(ell=1, a=1, b=1, alpha=0.75, phi=0.75), "B", [0, 1, 2, 3]),
    ("fig3", "c", dict(ell=1, b=1, B=2, alpha=0.75, phi=0.75), "a", [0.5, 1, 2, 3]),
    ("fig3", "d", dict(ell=1, a=2, B=1, alpha=0.75, phi=0.75), "b", [0.5, 1, 2, 3]),
]


def _flags(params: dict) -> list:
    out = []
    for key, value in params.items():
        out += [f"--{key}", repr(value)]
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="figure_data")
    args = parser.parse_args(argv)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    jobs = []
    for fig, panel, command, fixed, name, values, sweep in PANELS:
        for value in values:
            path = outdir / f"{fig}{panel}_{name}={value}.csv"
            jobs.append([command, "--potential", "anharmonic", *_flags(fixed),
                         f"--{name}", repr(value), "--sweep", sweep, "--format", "csv",
                         "--output", str(path)])
    for fig, panel, fixed, name, values in WAVE_PANELS:
        for value in values:
            path = outdir / f"{fig}{panel}_{name}={value}.csv"
            jobs.append(["wavefunction", "--potential", "anharmonic", "--n", "1", *_flags(fixed),
                         f"--{name}", repr(value), "--points", "301", "--output", str(path)])
    for argv_job in jobs:
        code = cli(argv_job)
        if code != 0:
            print(f"failed ({code}): {' '.join(argv_job)}", file=sys.stderr)
            return code
    print(f"wrote {len(jobs)} series to {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
