"""Scenario execution, output bundles and run comparison."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .givens import synthesize_scattering_program
from .lattice import ModelParams, build_fermionic_hamiltonian, number_sector_basis
from .noise import (
    ReadoutModel,
    density_fit,
    extrapolate_run,
    local_model,
    run_zne_experiment,
    zne_csv,
)
from .observables import (
    ObservableSeries,
    delta_density_series,
    density_csv,
    entropy_csv,
    entropy_series,
    hadamard_density_estimate,
    scattering_factorization,
    site_densities,
)
from .oracle import oracle_density_series
from .scenarios import ScenarioConfig, dump_config, validate
from .statevector import (
    DensePropagator,
    apply_program,
    evolve_taylor2,
    ground_state_exact,
    normalized,
)
from .wavepacket import (
    ANTIFERMION,
    FERMION,
    amplitudes_to_csv,
    build_amplitudes,
    packet_creation_matrix,
)

log = logging.getLogger(__name__)

OUTPUT_ENV = "THIRRING_OUTPUT"


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


@dataclass
class RunResult:
    config: ScenarioConfig
    directory: Path
    files: list[Path] = field(default_factory=list)
    series: dict[str, ObservableSeries] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)


def run_tag(mass: float, g: float) -> str:
    return f"m{mass:g}_g{g:g}"


def _write(path: Path, text: str, result: RunResult) -> None:
    path.write_text(text, encoding="utf-8", newline="")
    result.files.append(path)


def _packets(config: ScenarioConfig, mass: float):
    """``(fermion, antifermion)`` amplitude bundles, ``None`` where absent."""
    out = {FERMION: None, ANTIFERMION: None}
    for p in config.packets:
        out[p.species] = build_amplitudes(p.to_spec(config.n_sites), mass, config.n_sites)
    return out[FERMION], out[ANTIFERMION]


def _vacuum(h, n: int, prop: DensePropagator | None) -> np.ndarray:
    if prop is not None:
        return prop.ground_state(n // 2)[1]
    return ground_state_exact(h, sector=number_sector_basis(n, n // 2))[1]


def _excite(vacuum: np.ndarray, n: int, amp_c, amp_d) -> dict[str, np.ndarray]:
    c = packet_creation_matrix(amp_c.position, FERMION) if amp_c is not None else None
    d = packet_creation_matrix(amp_d.position, ANTIFERMION) if amp_d is not None else None
    states = {}
    pair = vacuum
    if c is not None:
        pair = c @ pair
        states["c"] = normalized(c @ vacuum)
    if d is not None:
        pair = d @ pair
        states["d"] = normalized(d @ vacuum)
    states["pair"] = normalized(pair)
    return states


def _evolver(config: ScenarioConfig, h, prop):
    times = config.sample_times()
    if config.method == "taylor2":
        return lambda psi: evolve_taylor2(h, psi, config.dt, times)
    return lambda psi: prop.evolve(psi, times)


def _circuit_states(config, mass, amp_c, amp_d, vacuum, threads):
    times = config.sample_times()

    def one(t):
        prog = synthesize_scattering_program(amp_c.position, amp_d.position, mass, float(t))
        return normalized(apply_program(vacuum, prog))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return np.array(list(pool.map(one, times)))
    return np.array([one(t) for t in times])


def _hadamard_series(config, h, prop, vacuum, amp_c, amp_d, rng) -> ObservableSeries:
    times = config.sample_times()
    n = config.n_sites
    prop = prop or DensePropagator(h, n)
    base = site_densities(vacuum)[0]
    rows = []
    for t in times:
        fs = scattering_factorization(
            vacuum, amp_c.position, amp_d.position,
            evolution=lambda x, t=t: prop.evolve(x, [t])[0],
        )
        rows.append([hadamard_density_estimate(fs, s, config.shots, rng).value for s in range(n)])
    return ObservableSeries(times, np.array(rows) - base, "delta_density")


def _run_static(config: ScenarioConfig, directory: Path, result: RunResult) -> None:
    for mass in config.mass_values():
        for p in config.packets:
            amps = build_amplitudes(p.to_spec(config.n_sites), mass, config.n_sites)
            stem = f"amplitudes_{p.species}_m{mass:g}"
            _write(directory / f"{stem}_momentum.csv", amplitudes_to_csv(amps.momentum), result)
            _write(directory / f"{stem}_position.csv", amplitudes_to_csv(amps.position), result)


def _run_zne(config: ScenarioConfig, directory: Path, result: RunResult, threads: int) -> None:
    n = config.n_sites
    nz = config.noise
    mass = config.mass
    amp_c, amp_d = _packets(config, mass)
    h = build_fermionic_hamiltonian(ModelParams(n, mass, 0.0))
    vacuum = _vacuum(h, n, None)
    model = local_model(n, nz.rate_1q, nz.rate_2q, rng=np.random.default_rng(nz.rate_seed))
    readout = ReadoutModel(nz.readout_p01, nz.readout_p10)
    base = site_densities(vacuum)[0]
    rows = []
    for i, t in enumerate(config.sample_times()):
        prog = synthesize_scattering_program(amp_c.position, amp_d.position, mass, float(t))
        run = run_zne_experiment(
            vacuum, prog, model, nz.gains, nz.instances, nz.shots, readout,
            seed=config.seed + i, threads=threads,
        )
        fits = extrapolate_run(run)
        ideal = site_densities(normalized(apply_program(vacuum, prog)))[0]
        _write(directory / f"zne_t{t:g}.csv", zne_csv(run, fits), result)
        for q, fit in enumerate(fits):
            dens, err = density_fit(fit)
            rows.append([t, q, dens - base[q], err, ideal[q] - base[q], fit.model])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "site", "delta_density", "stderr", "noiseless", "model"])
    for t, q, d, e, ideal, model_name in rows:
        w.writerow([repr(float(t)), q, repr(float(d)), repr(float(e)), repr(float(ideal)), model_name])
    _write(directory / "zne_density.csv", buf.getvalue(), result)


def run_scenario(
    config: ScenarioConfig,
    out_dir: str | Path | None = None,
    threads: int = 1,
) -> RunResult:
    """Validate, compute and write CSVs, SVGs and a manifest for one scenario."""
    validate(config)
    directory = Path(out_dir or config.output_dir or output_root() / config.name)
    directory.mkdir(parents=True, exist_ok=True)
    result = RunResult(config, directory)
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)

    if config.method == "static":
        _run_static(config, directory, result)
    elif "zne" in config.observables:
        _run_zne(config, directory, result, threads)
    else:
        times = config.sample_times()
        n = config.n_sites
        for mass in config.mass_values():
            amp_c, amp_d = _packets(config, mass)
            for g in config.couplings:
                tag = run_tag(mass, g)
                t0 = time.perf_counter()
                if config.method == "oracle":
                    vals = oracle_density_series(
                        mass, n, times,
                        amp_c.momentum if amp_c is not None else None,
                        amp_d.momentum if amp_d is not None else None,
                    )
                    series = ObservableSeries(times, vals, "delta_density")
                    result.series[f"density_{tag}"] = series
                    _write(directory / f"density_{tag}.csv", density_csv(series), result)
                    result.timings[tag] = time.perf_counter() - t0
                    continue
                h = build_fermionic_hamiltonian(ModelParams(n, mass, g))
                prop = DensePropagator(h, n) if config.method == "dense" else None
                vacuum = _vacuum(h, n, prop)
                starts = _excite(vacuum, n, amp_c, amp_d)
                if config.method == "givens-circuit":
                    pair = _circuit_states(config, mass, amp_c, amp_d, vacuum, threads)
                    evolve = None
                else:
                    evolve = _evolver(config, h, prop)
                    pair = evolve(starts["pair"])
                if "density" in config.observables:
                    series = delta_density_series(times, pair, vacuum)
                    result.series[f"density_{tag}"] = series
                    _write(directory / f"density_{tag}.csv", density_csv(series), result)
                if "entropy" in config.observables:
                    s1, s2 = entropy_series(
                        times, pair, evolve(starts["c"]), evolve(starts["d"]), vacuum
                    )
                    result.series[f"S1_{tag}"] = s1
                    result.series[f"S2_{tag}"] = s2
                    _write(directory / f"entropy_{tag}.csv", entropy_csv(s1, s2), result)
                if "hadamard" in config.observables:
                    series = _hadamard_series(config, h, prop, vacuum, amp_c, amp_d, rng)
                    result.series[f"hadamard_{tag}"] = series
                    _write(directory / f"hadamard_{tag}.csv", density_csv(series), result)
                result.timings[tag] = time.perf_counter() - t0

    result.timings["total"] = time.perf_counter() - start
    if config.plots and result.series:
        from .plotting import emit_plots

        for name, series in result.series.items():
            result.files.extend(emit_plots(series, directory / f"{name}.svg"))
    _write_manifest(result)
    return result


def _write_manifest(result: RunResult) -> None:
    import scipy

    manifest = {
        "config": result.config.to_dict(),
        "config_yaml": dump_config(result.config),
        "versions": {
            "thirring": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "timings": result.timings,
        "files": sorted(p.name for p in result.files),
    }
    path = result.directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_manifest_config(directory: str | Path) -> ScenarioConfig:
    data = json.loads((Path(directory) / "manifest.json").read_text(encoding="utf-8"))
    return ScenarioConfig.from_dict(data["config"])


# -- comparison ------------------------------------------------------------------------

GRID_COLUMNS = ("t", "site", "cut", "index", "observable", "gain", "model")


@dataclass(frozen=True)
class ColumnDiff:
    file: str
    column: str
    max_abs: float
    rms: float


@dataclass
class CompareReport:
    tolerance: float
    diffs: list[ColumnDiff]

    @property
    def passed(self) -> bool:
        return all(d.max_abs <= self.tolerance for d in self.diffs)

    def to_text(self) -> str:
        lines = [f"{'file':<32} {'column':<16} {'max_abs':>12} {'rms':>12}"]
        for d in self.diffs:
            lines.append(f"{d.file:<32} {d.column:<16} {d.max_abs:12.3e} {d.rms:12.3e}")
        lines.append(f"{'PASS' if self.passed else 'FAIL'} at tolerance {self.tolerance:g}")
        return "\n".join(lines)


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def compare_runs(dir_a: str | Path, dir_b: str | Path, tolerance: float = 1e-8) -> CompareReport:
    """Per-column max-abs and RMS differences over the CSV files both runs share."""
    dir_a, dir_b = Path(dir_a), Path(dir_b)
    names = sorted({p.name for p in dir_a.glob("*.csv")} & {p.name for p in dir_b.glob("*.csv")})
    if not names:
        raise ValidationError("the runs share no CSV outputs")
    diffs = []
    for name in names:
        head_a, rows_a = _read_csv(dir_a / name)
        head_b, rows_b = _read_csv(dir_b / name)
        if head_a != head_b or len(rows_a) != len(rows_b):
            raise ValidationError(f"{name}: grids differ")
        for j, col in enumerate(head_a):
            col_a = [r[j] for r in rows_a]
            col_b = [r[j] for r in rows_b]
            if col in GRID_COLUMNS:
                if col in ("observable", "model"):
                    same = col == "model" or col_a == col_b
                else:
                    same = np.allclose(np.array(col_a, float), np.array(col_b, float), atol=1e-12)
                if not same:
                    raise ValidationError(f"{name}: column {col!r} differs between runs")
                continue
            a = np.array(col_a, dtype=float)
            b = np.array(col_b, dtype=float)
            delta = np.abs(a - b)
            diffs.append(ColumnDiff(name, col, float(delta.max()), float(math.sqrt(np.mean(delta**2)))))
    return CompareReport(tolerance, diffs)


__all__ = [
    "RunResult",
    "run_scenario",
    "compare_runs",
    "CompareReport",
    "load_manifest_config",
    "output_root",
    "OUTPUT_ENV",
]
