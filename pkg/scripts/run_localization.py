"""2-D AOA localization in the indoor office: error CDFs with and without hardware impairments.

Variants: geometric LOS azimuths (solver check), DBF AOA with ideal hardware,
and DBF AOA with per-link timing offsets.

    python3 scripts/run_localization.py --drops 200 --plot
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from common import base_config, parser, plot_cdfs, print_table, run_variant
from nrlocsim.config import apply_assignments

VARIANTS = {
    "truth-aoa": ["system.localization.aoa_method=truth"],
    "hi-off": [],
    "timing-offset": ["hi.to.enabled=true"],
}


def main() -> None:
    p = parser(__doc__.splitlines()[0], "localization.yaml", "localization")
    p.add_argument("--music", action="store_true", help="add a MUSIC variant")
    args = p.parse_args()
    base = base_config(args)
    out = Path(args.out)
    variants = dict(VARIANTS)
    if args.music:
        variants["music"] = ["system.localization.aoa_method=music"]
    results = {name: run_variant(apply_assignments(base, sets), "localization-2d", out, name)
               for name, sets in variants.items()}
    print_table(results)
    for name, res in results.items():
        e = res.errors()
        q = np.quantile(e, [0.5, 0.9], method="inverted_cdf")
        print(f"{name}: median {q[0]:.3g} m, 90% {q[1]:.3g} m, success {np.isfinite(e).mean():.2%}")
    if args.plot:
        plot_cdfs({n: r.errors() for n, r in results.items()}, out / "localization_cdf.png",
                  "position error (m)", (0, 10))


if __name__ == "__main__":
    main()
