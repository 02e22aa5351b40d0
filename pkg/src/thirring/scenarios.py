"""Run configurations and the builtin figure scenarios."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigurationError
from .statevector import MAX_DENSE_SITES
from .wavepacket import ANTIFERMION, FERMION, WavePacketSpec

METHODS = ("taylor2", "dense", "givens-circuit", "oracle", "static")
OBSERVABLES = ("density", "entropy", "hadamard", "amplitudes", "zne")
MAX_ENTROPY_SITES = 14
MAX_HADAMARD_SITES = 12


@dataclass(frozen=True)
class PacketConfig:
    """Gaussian packet with momenta given in units of ``2 pi / N``."""

    species: str
    mu_n: float
    mu_k_modes: float
    sigma_k_modes: float = 1.0

    def to_spec(self, n_sites: int) -> WavePacketSpec:
        unit = 2 * math.pi / n_sites
        return WavePacketSpec(self.species, self.mu_k_modes * unit, self.mu_n, self.sigma_k_modes * unit)


@dataclass(frozen=True)
class NoiseConfig:
    rate_1q: float = 3e-4
    rate_2q: float = 1.5e-4
    gains: tuple[float, ...] = (1.0, 2.0, 2.5)
    instances: int = 300
    shots: int = 1024
    readout_p01: float = 0.0
    readout_p10: float = 0.0
    rate_seed: int = 5


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n_sites: int
    mass: float = 1.0
    couplings: tuple[float, ...] = (0.0,)
    packets: tuple[PacketConfig, ...] = ()
    method: str = "taylor2"
    dt: float = 2e-3
    t_max: float = 20.0
    sample_dt: float = 0.5
    times: tuple[float, ...] | None = None
    observables: tuple[str, ...] = ("density",)
    shots: int | None = None
    noise: NoiseConfig | None = None
    masses: tuple[float, ...] | None = None
    output_dir: str | None = None
    seed: int = 0
    plots: bool = True
    description: str = ""

    def sample_times(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        count = int(math.floor(self.t_max / self.sample_dt + 1e-9)) + 1
        return np.round(np.arange(count) * self.sample_dt, 12)

    def mass_values(self) -> tuple[float, ...]:
        return self.masses if self.masses is not None else (self.mass,)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["packets"] = [asdict(p) for p in self.packets]
        d["couplings"] = list(self.couplings)
        d["observables"] = list(self.observables)
        for key in ("times", "masses"):
            if d[key] is not None:
                d[key] = list(d[key])
        if self.noise is not None:
            d["noise"] = asdict(self.noise)
            d["noise"]["gains"] = list(self.noise.gains)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "name" not in data or "n_sites" not in data:
            raise ConfigurationError("config needs at least 'name' and 'n_sites'")
        try:
            data["packets"] = tuple(PacketConfig(**p) for p in data.get("packets") or ())
            if data.get("noise") is not None:
                noise = dict(data["noise"])
                if "gains" in noise:
                    noise["gains"] = tuple(float(g) for g in noise["gains"])
                data["noise"] = NoiseConfig(**noise)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc
        for key in ("couplings", "observables", "times", "masses"):
            if data.get(key) is not None:
                val = data[key]
                data[key] = tuple(val) if isinstance(val, (list, tuple)) else (val,)
        if "couplings" in data:
            data["couplings"] = tuple(float(g) for g in data["couplings"])
        return cls(**data)


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} does not hold a mapping")
    return ScenarioConfig.from_dict(data)


def dump_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=True)


def validate(config: ScenarioConfig) -> None:
    """Reject incompatible settings before any computation starts."""
    n = config.n_sites
    if n < 2 or n % 2:
        raise ConfigurationError(f"n_sites must be even and >= 2, got {n}")
    if config.method not in METHODS:
        raise ConfigurationError(f"method must be one of {METHODS}, got {config.method!r}")
    bad = set(config.observables) - set(OBSERVABLES)
    if bad:
        raise ConfigurationError(f"unknown observables {sorted(bad)}")
    for g in config.couplings:
        if not -1 <= g <= 1:
            raise ConfigurationError(f"coupling {g} outside [-1, 1]")
    interacting = any(g != 0 for g in config.couplings)
    if config.method in ("givens-circuit", "oracle") and interacting:
        raise ConfigurationError(f"method {config.method} is exact only for g = 0")
    if config.method == "dense" and n > MAX_DENSE_SITES:
        raise ConfigurationError(f"dense evolution is limited to {MAX_DENSE_SITES} sites")
    if "entropy" in config.observables:
        if n > MAX_ENTROPY_SITES:
            raise ConfigurationError(f"entropy needs N <= {MAX_ENTROPY_SITES}, got {n}")
        if config.method not in ("dense", "taylor2"):
            raise ConfigurationError("entropy needs a state-vector method (dense or taylor2)")
    if "hadamard" in config.observables and n > MAX_HADAMARD_SITES:
        raise ConfigurationError(f"Hadamard assembly is limited to {MAX_HADAMARD_SITES} sites")
    if "zne" in config.observables:
        if config.noise is None:
            raise ConfigurationError("zne needs a noise section")
        if config.method != "givens-circuit":
            raise ConfigurationError("zne runs on the compiled free circuit (givens-circuit)")
        if n > 8:
            raise ConfigurationError("noisy density-matrix simulation is limited to 8 sites")
    species = [p.species for p in config.packets]
    for s in species:
        if s not in (FERMION, ANTIFERMION):
            raise ConfigurationError(f"unknown species {s!r}")
    if config.method != "static":
        if species.count(FERMION) > 1 or species.count(ANTIFERMION) > 1:
            raise ConfigurationError("at most one packet per species")
        if config.method == "givens-circuit" and sorted(species) != [ANTIFERMION, FERMION]:
            raise ConfigurationError("the compiled circuit needs one fermion and one antifermion")
        if "entropy" in config.observables and len(species) != 2:
            raise ConfigurationError("the entropy difference needs a fermion and an antifermion")
    for p in config.packets:
        if p.sigma_k_modes <= 0:
            raise ConfigurationError("packet widths must be positive")
    if config.dt <= 0 or config.t_max < 0 or config.sample_dt <= 0:
        raise ConfigurationError("dt and sample_dt must be positive, t_max non-negative")
    times = config.sample_times()
    if times.size == 0 or np.any(times < 0) or np.any(times > config.t_max + 1e-12):
        raise ConfigurationError("sample times must lie in [0, t_max]")
    if np.any(np.diff(times) < 0):
        raise ConfigurationError("sample times must be sorted")
    if config.method == "taylor2":
        steps = times / config.dt
        if np.any(np.abs(steps - np.rint(steps)) > 1e-6):
            raise ConfigurationError("taylor2 sample times must be multiples of dt")
    if config.shots is not None and config.shots < 1:
        raise ConfigurationError("shots must be positive")


def _pair(n: int, mu_c: float, mu_d: float, modes: float) -> tuple[PacketConfig, ...]:
    return (
        PacketConfig(FERMION, mu_c, modes, 1.0),
        PacketConfig(ANTIFERMION, mu_d, -modes, 1.0),
    )


def _builtin() -> dict[str, ScenarioConfig]:
    out: dict[str, ScenarioConfig] = {}
    out["fig1"] = ScenarioConfig(
        "fig1", 50, masses=(1.0, 100.0), method="static", observables=("amplitudes",),
        packets=_pair(50, 10, 39, 5), t_max=0.0, times=(0.0,), plots=False,
        description="packet amplitudes in momentum and position space, N=50",
    )
    for tag, m in (("fig4a", 0.5), ("fig4b", 0.8), ("fig4c", 1.0)):
        out[tag] = ScenarioConfig(
            tag, 20, mass=m, packets=_pair(20, 4, 15, 2), method="taylor2", dt=2e-3,
            t_max=20.0, sample_dt=0.5, description=f"free scattering density, N=20, m={m}",
        )
    geometry14 = _pair(14, 2, 11, 1)
    out["fig5"] = ScenarioConfig(
        "fig5", 14, mass=0.8, packets=geometry14, method="dense", t_max=30.0, sample_dt=1.0,
        observables=("density", "entropy"), description="free density and entropies, N=14",
    )
    out["fig6"] = ScenarioConfig(
        "fig6", 20, mass=1.0, couplings=(-0.8, -0.2, 0.2, 0.8), packets=_pair(20, 4, 15, 2),
        method="taylor2", dt=1e-3, t_max=20.0, sample_dt=0.5,
        description="interacting scattering density, N=20",
    )
    out["fig7"] = ScenarioConfig(
        "fig7", 14, mass=0.8, couplings=(-0.8, -0.2, 0.2, 0.8), packets=geometry14,
        method="dense", t_max=30.0, sample_dt=1.0, observables=("density", "entropy"),
        description="interacting density and entropies, N=14",
    )
    out["fig8"] = ScenarioConfig(
        "fig8", 12, mass=1.0, packets=_pair(12, 2, 9, 1), method="givens-circuit",
        t_max=24.0, sample_dt=1.0, description="compiled free circuit, N=12, slices every 6",
    )
    out["fig9-oracle"] = ScenarioConfig(
        "fig9-oracle", 200, mass=1.0, packets=_pair(200, 30, 169, 20), method="oracle",
        t_max=300.0, sample_dt=1.0, description="momentum-space oracle density, N=200",
    )
    out["fig13-zne"] = ScenarioConfig(
        "fig13-zne", 4, mass=1.0, packets=_pair(4, 0, 3, 0), method="givens-circuit",
        times=(2.0,), t_max=2.0, observables=("zne",), noise=NoiseConfig(readout_p01=0.02, readout_p10=0.06),
        seed=3, description="twirled Pauli-Lindblad noise and zero-noise extrapolation, N=4",
    )
    return out


BUILTIN_SCENARIOS = _builtin()
SLICE_TIMES = (0.0, 6.0, 12.0, 18.0, 24.0)


def get_scenario(name: str) -> ScenarioConfig:
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown scenario {name!r}; choose from {sorted(BUILTIN_SCENARIOS)}"
        ) from None


def resolve(target: str) -> ScenarioConfig:
    """A builtin name or a path to a YAML config."""
    if target in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[target]
    path = Path(target)
    if path.exists():
        return load_config(path)
    raise ConfigurationError(f"{target!r} is neither a builtin scenario nor a config file")


def with_overrides(config: ScenarioConfig, **kw) -> ScenarioConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(config, **kw) if kw else config


__all__ = [
    "PacketConfig",
    "NoiseConfig",
    "ScenarioConfig",
    "BUILTIN_SCENARIOS",
    "get_scenario",
    "resolve",
    "validate",
    "load_config",
    "dump_config",
    "with_overrides",
]
