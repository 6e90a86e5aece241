"""Beam sweeping at 26 GHz: RMS azimuth error of the best beam against SNR.

Variants cross the BS array size (8x8, 4x4) with the sweep range (+-60,
+-30 deg); the beam count stays at 12.

    python3 scripts/run_beam_sweep.py --drops 200 --plot
"""

from __future__ import annotations

from pathlib import Path

from common import base_config, parser, plot_rmse, print_table, rms_by_snr, run_variant
from nrlocsim.config import with_overrides

ARRAYS = {"8x8": 8, "4x4": 4}
RANGES = {"60": 60.0, "30": 30.0}


def main() -> None:
    args = parser(__doc__.splitlines()[0], "beam_sweep.yaml", "beam_sweep").parse_args()
    base = base_config(args)
    out = Path(args.out)
    results = {}
    for a_name, n in ARRAYS.items():
        for r_name, r in RANGES.items():
            cfg = with_overrides(
                base,
                system={"bs_array": {"rows": n, "cols": n},
                        "user_drop": {"region": "sector", "bs_index": 0, "distance_m": 30.0,
                                      "azimuth_range_deg": [-r, r], "height_m": 1.5, "face_bs": True}},
                abf={"sweep_azimuth_deg": [-r, r]})
            name = f"{a_name}_pm{r_name}"
            results[name] = run_variant(cfg, "beam-sweep", out, name)
    print_table(results)
    if args.plot:
        plot_rmse({n: rms_by_snr(r) for n, r in results.items()}, out / "beam_sweep_rmse.png",
                  "RMS azimuth error (deg)")


if __name__ == "__main__":
    main()
