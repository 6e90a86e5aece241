"""Helpers shared by the experiment scripts: config loading, variant runs, tables and plots."""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from nrlocsim.cases import CaseResult, case_spec, run_case
from nrlocsim.config import SimConfig, apply_assignments, load_config, with_overrides
from nrlocsim.io import summary_rows, write_outputs

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def parser(description: str, config: str, out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", default=str(CONFIGS / config), help="base YAML config")
    p.add_argument("--drops", type=int, help="drops per variant (default: from config)")
    p.add_argument("--seed", type=int, help="master seed (default: from config)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="extra config override")
    p.add_argument("--out", default=str(ROOT / "results" / out), help="output directory")
    p.add_argument("--plot", action="store_true", help="also write PNG figures (needs matplotlib)")
    return p


def base_config(args) -> SimConfig:
    cfg = apply_assignments(load_config(args.config), args.set)
    system = {"workers": args.workers}
    if args.drops is not None:
        system["drops"] = args.drops
    if args.seed is not None:
        system["master_seed"] = args.seed
    return with_overrides(cfg, system=system)


def run_variant(cfg: SimConfig, case: str, out_dir: Path, name: str, **spec) -> CaseResult:
    """Run one case variant and write its tables under ``out_dir/name``."""
    result = run_case(cfg, case_spec(cfg, case, **spec))
    write_outputs(out_dir / name, cfg, result)
    return result


def print_table(results: dict[str, CaseResult]) -> None:
    print(f"{'label':<28}{'variant':<30}{'snr_db':>8}{'n':>6}{'fail':>6}{'mean':>10}{'rmse':>10}{'rms':>10}")
    for label, res in results.items():
        for v, snr, n, fail, mean, rmse, rms in summary_rows(res):
            print(f"{label:<28}{v:<30}{snr:>8g}{n:>6}{fail:>6}{mean:>10.4g}{rmse:>10.4g}{rms:>10.4g}")


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_cdfs(curves: dict[str, np.ndarray], path: Path, xlabel: str, xlim=None) -> None:
    """Empirical CDFs; infinite values (failures) keep the curve below 1."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in curves.items():
        v = np.sort(np.asarray(values, float))
        p = np.arange(1, len(v) + 1) / len(v)
        finite = np.isfinite(v)
        ax.step(v[finite], p[finite], where="post", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("CDF")
    if xlim is not None:
        ax.set_xlim(*xlim)
    ax.set_ylim(0, 1)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_rmse(curves: dict[str, tuple[np.ndarray, np.ndarray]], path: Path, ylabel: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (snr, rmse) in curves.items():
        ax.semilogy(snr, rmse, marker="o", label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def rms_by_snr(result: CaseResult, variant: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-SNR RMS error about zero over the successful drops."""
    snrs = np.array(result.spec.snr_db, float)
    rms = [np.sqrt(np.mean(result.errors(variant, s, failures=None) ** 2)) for s in snrs]
    return snrs, np.array(rms)
