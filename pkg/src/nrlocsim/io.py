"""Plain-text result tables, waveform dumps and the run manifest.

Floats are written with ``repr`` (shortest round-trip form), so identical
results give byte-identical files.  Tuples are joined with ``;``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from importlib import metadata
from pathlib import Path

import numpy as np

from .cases import BeamReport, CaseResult, ResultRow
from .channel.smallscale import PathSet
from .config import SimConfig, dump_config
from .estimation import compute_metrics
from .waveform import BasebandWaveform

RESULT_COLUMNS = ("case", "variant", "drop", "snr_db", "truth", "estimate", "error", "flag", "stream")
CDF_COLUMNS = ("variant", "snr_db", "value", "probability")
SUMMARY_COLUMNS = ("variant", "snr_db", "n", "failures", "mean", "rmse", "rms")
BEAM_COLUMNS = ("variant", "drop", "snr_db", "beam", "az_deg", "el_deg", "rsrp_dbm")
PATH_COLUMNS = ("drop", "link", "path", "delay_s", "power_lin", "aoa_az_deg", "aoa_el_deg",
                "aod_az_deg", "aod_el_deg", "flags")


def fmt(value) -> str:
    """Deterministic text for numbers, tuples and strings."""
    if isinstance(value, (tuple, list, np.ndarray)):
        return ";".join(fmt(v) for v in value)
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(value)


def _write(path: Path, columns, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_results(path, rows: list[ResultRow]) -> Path:
    return _write(Path(path), RESULT_COLUMNS,
                  ((r.case, r.variant, r.drop, r.snr_db, r.truth, r.estimate, r.error, r.flag, r.stream)
                   for r in rows))


def _parse_tuple(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(";")) if text else ()


def read_results(path) -> list[ResultRow]:
    with Path(path).open(newline="") as f:
        return [ResultRow(d["case"], d["variant"], int(d["drop"]), float(d["snr_db"]),
                          _parse_tuple(d["truth"]), _parse_tuple(d["estimate"]), float(d["error"]),
                          d["flag"], d["stream"]) for d in csv.DictReader(f)]


def _groups(result: CaseResult):
    keys = sorted({(r.variant, r.snr_db) for r in result.rows})
    for variant, snr in keys:
        yield variant, snr, result.errors(variant, snr, failures=np.inf)


def write_cdf(path, result: CaseResult) -> Path:
    """Empirical CDF per (variant, SNR); failed drops appear as ``inf``."""
    def rows():
        for variant, snr, e in _groups(result):
            x = np.sort(e)
            p = np.arange(1, len(x) + 1) / len(x)
            for xi, pi in zip(x, p):
                yield variant, snr, xi, pi
    return _write(Path(path), CDF_COLUMNS, rows())


def summary_rows(result: CaseResult) -> list[tuple]:
    """(variant, snr, n, failures, mean, rmse, rms) over the successful drops."""
    out = []
    for variant, snr, e in _groups(result):
        ok = e[np.isfinite(e)]
        if ok.size:
            m = compute_metrics(ok)
            out.append((variant, snr, int(e.size), int(e.size - ok.size), m.mean, m.rmse, m.rms))
        else:
            out.append((variant, snr, int(e.size), int(e.size), np.nan, np.nan, np.nan))
    return out


def write_summary(path, result: CaseResult) -> Path:
    return _write(Path(path), SUMMARY_COLUMNS, summary_rows(result))


def write_beam_reports(path, beams: list[BeamReport]) -> Path:
    return _write(Path(path), BEAM_COLUMNS,
                  ((b.variant, b.drop, b.snr_db, b.beam, b.az_deg, b.el_deg, b.rsrp_dbm) for b in beams))


def write_pathsets(path, pathsets: list[tuple[int, int, PathSet]]) -> Path:
    """One row per path; angles are global, elevation = 90 deg - zenith."""
    def rows():
        for drop, link, ps in pathsets:
            for i in range(ps.n_paths):
                flags = [n for n, on in (("los", ps.is_los[i]), ("ground-reflection",
                                                                 ps.is_ground_reflection[i])) if on]
                yield (drop, link, i, ps.delay_s[i], ps.power[i],
                       np.rad2deg(ps.aoa_az[i]), 90 - np.rad2deg(ps.aoa_zen[i]),
                       np.rad2deg(ps.aod_az[i]), 90 - np.rad2deg(ps.aod_zen[i]), "|".join(flags))
    return _write(Path(path), PATH_COLUMNS, rows())


# ---------------------------------------------------------------------------
# waveform dump

def write_waveform(stem, wf: BasebandWaveform) -> tuple[Path, Path]:
    """``stem.bin``: interleaved re/im float64 little-endian, ports concatenated.
    ``stem.json``: sample rate, FFT/CP lengths, ports and symbol boundaries."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    samples = np.atleast_2d(np.asarray(wf.samples, complex))
    data = np.empty(samples.shape + (2,), "<f8")
    data[..., 0], data[..., 1] = samples.real, samples.imag
    bin_path, meta_path = stem.with_suffix(".bin"), stem.with_suffix(".json")
    bin_path.write_bytes(data.tobytes())
    meta = {"sample_rate_hz": wf.sample_rate_hz, "fft_length": wf.fft_length, "cp_length": wf.cp_length,
            "n_ports": samples.shape[0], "n_samples": samples.shape[1], "n_subcarriers": wf.n_subcarriers,
            "symbol_indices": [int(s) for s in wf.symbol_indices],
            "symbol_starts": [int(s) for s in wf.symbol_starts],
            "body_starts": [int(s) for s in wf.body_starts],
            "dtype": "float64", "byte_order": "little", "layout": "port-major, interleaved re/im"}
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    return bin_path, meta_path


def read_waveform(stem) -> BasebandWaveform:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), "<f8")
    raw = raw.reshape(meta["n_ports"], meta["n_samples"], 2)
    return BasebandWaveform(raw[..., 0] + 1j * raw[..., 1], meta["sample_rate_hz"], meta["fft_length"],
                            meta["cp_length"], np.array(meta["symbol_indices"]), meta["n_subcarriers"])


# ---------------------------------------------------------------------------
# manifest

def config_hash(cfg: SimConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()


def _version(pkg: str) -> str:
    try:
        return metadata.version(pkg)
    except metadata.PackageNotFoundError:
        return "unknown"


def manifest(cfg: SimConfig, result: CaseResult, files: list[Path]) -> dict:
    import scipy
    spec = result.spec
    return {
        "case": spec.case,
        "config_sha256": config_hash(cfg),
        "master_seed": cfg.system.master_seed,
        "drops": spec.drops,
        "only_drop": spec.only_drop,
        "snr_db": list(spec.snr_db),
        "files": sorted(p.name for p in files),
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "nrlocsim": _version("artifact")},
    }


def write_outputs(out_dir, cfg: SimConfig, result: CaseResult, emit_cdf: bool = True) -> list[Path]:
    """Write every table of a case run plus ``config.yaml`` and ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [write_results(out / "results.csv", result.rows), write_summary(out / "summary.csv", result)]
    if emit_cdf:
        files.append(write_cdf(out / "cdf.csv", result))
    if result.spec.emit_beam_reports:
        files.append(write_beam_reports(out / "beams.csv", result.beams))
    if result.spec.emit_pathsets:
        files.append(write_pathsets(out / "pathsets.csv", result.pathsets))
    cfg_path = out / "config.yaml"
    cfg_path.write_text(dump_config(cfg))
    files.append(cfg_path)
    man = out / "manifest.json"
    man.write_text(json.dumps(manifest(cfg, result, files + [man]), indent=2) + "\n")
    return files + [man]
