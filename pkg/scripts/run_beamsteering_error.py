"""Sensitivity of two-beam angle refinement to random phase-shifter errors.

Sweeps the phase-error standard deviation and compares each error CDF
with the error-free quantized reference by a two-sample KS test.

    python3 scripts/run_beamsteering_error.py --drops 500 --sigmas 0 1 2 3 5 --plot
"""

from __future__ import annotations

from pathlib import Path

from scipy.stats import ks_2samp

from common import base_config, parser, plot_cdfs, print_table, run_variant
from nrlocsim.config import with_overrides


def main() -> None:
    p = parser(__doc__.splitlines()[0], "bf_angle.yaml", "beamsteering_error")
    p.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 1.0, 2.0, 3.0], help="phase sigma (deg)")
    p.add_argument("--bits", type=int, default=6, help="phase-shifter resolution")
    args = p.parse_args()
    base = base_config(args)
    out = Path(args.out)
    results = {}
    for s in args.sigmas:
        cfg = with_overrides(base, hi={"beamsteering": {"enabled": True, "bits": args.bits,
                                                        "phase_sigma_deg": s, "amplitude_sigma_db": 0.0}})
        results[f"sigma={s:g}"] = run_variant(cfg, "bf-angle", out, f"sigma_{s:g}")
    print_table(results)
    ref = results[f"sigma={args.sigmas[0]:g}"]
    for label, res in results.items():
        for snr in res.spec.snr_db:
            for v in res.variants():
                stat = ks_2samp(ref.errors(v, snr, failures=None), res.errors(v, snr, failures=None))
                print(f"{label} {v} {snr:g} dB: KS D={stat.statistic:.3f} p={stat.pvalue:.3g}")
    if args.plot:
        snr = ref.spec.snr_db[-1]
        pick = lambda r: next((v for v in r.variants() if v.startswith("two-beam")), r.variants()[0])
        plot_cdfs({k: r.errors(pick(r), snr) for k, r in results.items()},
                  out / f"beamsteering_cdf_{snr:g}dB.png", "angle error (deg)", (0, 10))


if __name__ == "__main__":
    main()
