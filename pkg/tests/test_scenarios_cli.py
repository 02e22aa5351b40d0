from __future__ import annotations

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from thirring.cli import main
from thirring.errors import ConfigurationError, ValidationError
from thirring.observables import ObservableSeries
from thirring.plotting import emit_plots, plot_csv, series_from_csv
from thirring.runner import OUTPUT_ENV, compare_runs, load_manifest_config, run_scenario
from thirring.scenarios import (
    BUILTIN_SCENARIOS,
    NoiseConfig,
    PacketConfig,
    ScenarioConfig,
    dump_config,
    get_scenario,
    load_config,
    resolve,
    validate,
    with_overrides,
)

PAIR8 = (PacketConfig("fermion", 1, 1.0), PacketConfig("antifermion", 6, -1.0))
PAIR10 = (PacketConfig("fermion", 2, 1.0), PacketConfig("antifermion", 7, -1.0))


def small(**kw) -> ScenarioConfig:
    base = dict(
        name="small", n_sites=8, mass=1.0, couplings=(0.0,), packets=PAIR8, method="dense",
        t_max=4.0, sample_dt=1.0, dt=1e-3, plots=False,
    )
    base.update(kw)
    return ScenarioConfig(**base)


# -- builtins ---------------------------------------------------------------------


def test_fig4c_parameters():
    cfg = BUILTIN_SCENARIOS["fig4c"]
    assert (cfg.n_sites, cfg.mass, cfg.couplings, cfg.method, cfg.dt) == (20, 1.0, (0.0,), "taylor2", 2e-3)
    c, d = cfg.packets
    assert (c.species, c.mu_n, c.mu_k_modes, c.sigma_k_modes) == ("fermion", 4, 2, 1.0)
    assert (d.species, d.mu_n, d.mu_k_modes) == ("antifermion", 15, -2)
    spec = c.to_spec(20)
    assert spec.mu_k == pytest.approx(2 * 2 * math.pi / 20) and spec.sigma_k == pytest.approx(2 * math.pi / 20)


def test_fig6_parameters():
    cfg = BUILTIN_SCENARIOS["fig6"]
    assert cfg.couplings == (-0.8, -0.2, 0.2, 0.8)
    assert cfg.dt == 1e-3 and cfg.n_sites == 20
    assert cfg.packets == BUILTIN_SCENARIOS["fig4c"].packets


def test_fig9_parameters():
    cfg = BUILTIN_SCENARIOS["fig9-oracle"]
    assert cfg.n_sites == 200 and cfg.method == "oracle" and cfg.mass == 1.0
    assert cfg.packets[0].mu_n == 30 and cfg.packets[0].mu_k_modes == 20


def test_every_builtin_validates():
    for cfg in BUILTIN_SCENARIOS.values():
        validate(cfg)


def test_unknown_scenario():
    with pytest.raises(ConfigurationError):
        get_scenario("fig99")
    with pytest.raises(ConfigurationError):
        resolve("no/such/file.yaml")


# -- guardrails ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "changes",
    [
        dict(n_sites=16, observables=("entropy",), packets=()),
        dict(n_sites=16),
        dict(method="oracle", couplings=(0.5,)),
        dict(method="givens-circuit", couplings=(-0.2,)),
        dict(n_sites=7),
        dict(couplings=(1.5,)),
        dict(method="euler"),
        dict(observables=("magnetization",)),
        dict(times=(0.0, 9.0)),
        dict(method="taylor2", times=(0.0, 0.0015)),
        dict(observables=("zne",), method="givens-circuit"),
        dict(observables=("entropy",), packets=PAIR8[:1]),
        dict(packets=PAIR8 + PAIR8[:1]),
        dict(shots=0),
    ],
)
def test_guardrails(changes):
    with pytest.raises(ConfigurationError):
        validate(small(**changes))


def test_guardrail_runs_before_compute(tmp_path):
    with pytest.raises(ConfigurationError):
        run_scenario(small(n_sites=16, observables=("entropy",)), tmp_path)
    assert not any(tmp_path.iterdir())


# -- config round trips -----------------------------------------------------------------


def test_yaml_round_trip(tmp_path):
    cfg = replace(BUILTIN_SCENARIOS["fig13-zne"], seed=9)
    path = tmp_path / "cfg.yaml"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg
    assert resolve(str(path)) == cfg


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_dict({"name": "x", "n_sites": 4, "colour": "red"})
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_dict({"n_sites": 4})
    cfg = ScenarioConfig.from_dict({"name": "x", "n_sites": 4, "couplings": 0.2, "noise": {"gains": [1, 2, 3]}})
    assert cfg.couplings == (0.2,) and cfg.noise == NoiseConfig(gains=(1.0, 2.0, 3.0))


def test_overrides():
    cfg = small()
    assert with_overrides(cfg, seed=None) is cfg
    assert with_overrides(cfg, seed=4).seed == 4


def test_sample_times():
    np.testing.assert_allclose(small().sample_times(), [0, 1, 2, 3, 4])
    np.testing.assert_allclose(small(times=(0.5, 2.0)).sample_times(), [0.5, 2.0])


# -- runs --------------------------------------------------------------------------------


def test_identical_runs_are_byte_identical(tmp_path):
    cfg = small(observables=("density", "entropy"))
    a = run_scenario(cfg, tmp_path / "a")
    b = run_scenario(cfg, tmp_path / "b")
    names = sorted(p.name for p in a.files)
    assert names == ["density_m1_g0.csv", "entropy_m1_g0.csv"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = compare_runs(tmp_path / "a", tmp_path / "b", 0.0)
    assert report.passed and all(d.max_abs == 0 for d in report.diffs)


def test_manifest_reconstructs_config(tmp_path):
    cfg = small(seed=17, couplings=(0.0, 0.2))
    run_scenario(cfg, tmp_path)
    assert load_manifest_config(tmp_path) == cfg
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert {"numpy", "scipy", "python", "thirring"} <= set(manifest["versions"])
    assert "total" in manifest["timings"]


def test_taylor_versus_dense_n8(tmp_path):
    cfg = small(couplings=(0.8,), t_max=6.0)
    run_scenario(cfg, tmp_path / "dense")
    run_scenario(replace(cfg, method="taylor2"), tmp_path / "taylor")
    report = compare_runs(tmp_path / "dense", tmp_path / "taylor", 1e-6)
    assert report.passed, report.to_text()


def test_circuit_versus_oracle_n10(tmp_path):
    cfg = small(n_sites=10, packets=PAIR10, method="oracle", t_max=8.0)
    run_scenario(cfg, tmp_path / "oracle")
    run_scenario(replace(cfg, method="givens-circuit"), tmp_path / "circuit", threads=2)
    report = compare_runs(tmp_path / "oracle", tmp_path / "circuit", 1e-8)
    assert report.passed, report.to_text()


def test_compare_detects_grid_mismatch(tmp_path):
    run_scenario(small(), tmp_path / "a")
    run_scenario(small(t_max=3.0), tmp_path / "b")
    with pytest.raises(ValidationError):
        compare_runs(tmp_path / "a", tmp_path / "b")
    (tmp_path / "empty").mkdir()
    with pytest.raises(ValidationError):
        compare_runs(tmp_path / "a", tmp_path / "empty")


def test_compare_flags_tolerance(tmp_path):
    run_scenario(small(), tmp_path / "a")
    run_scenario(small(mass=1.01), tmp_path / "b")
    (tmp_path / "b" / "density_m1.01_g0.csv").rename(tmp_path / "b" / "density_m1_g0.csv")
    assert not compare_runs(tmp_path / "a", tmp_path / "b", 1e-8).passed


def test_hadamard_scenario_matches_density(tmp_path):
    cfg = small(n_sites=6, packets=(PacketConfig("fermion", 1, 1.0), PacketConfig("antifermion", 4, -1.0)),
                couplings=(0.8,), observables=("density", "hadamard"), t_max=2.0)
    res = run_scenario(cfg, tmp_path)
    a = res.series["density_m1_g0.8"].values
    b = res.series["hadamard_m1_g0.8"].values
    assert np.abs(a - b).max() < 1e-8


def test_static_amplitudes(tmp_path):
    res = run_scenario(BUILTIN_SCENARIOS["fig1"], tmp_path)
    names = {p.name for p in res.files}
    assert "amplitudes_fermion_m100_position.csv" in names
    assert len(names) == 8


def test_zne_scenario_small(tmp_path):
    cfg = with_overrides(BUILTIN_SCENARIOS["fig13-zne"], noise=NoiseConfig(instances=6, shots=64))
    res = run_scenario(replace(cfg, plots=False), tmp_path)
    text = (tmp_path / "zne_density.csv").read_text()
    assert text.splitlines()[0] == "t,site,delta_density,stderr,noiseless,model"
    assert len(text.splitlines()) == 1 + 4
    assert any(p.name == "zne_t2.csv" for p in res.files)


def test_output_env(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    res = run_scenario(small(t_max=1.0))
    assert res.directory == tmp_path / "small"


# -- plotting ------------------------------------------------------------------------------


def test_empty_series_warns(tmp_path):
    empty = ObservableSeries(np.zeros(0), np.zeros((0, 4)), "delta_density")
    with pytest.warns(UserWarning):
        assert emit_plots(empty, tmp_path / "e.svg") == []
    assert not (tmp_path / "e.svg").exists()


def test_heatmap_and_slices(tmp_path):
    times = np.arange(0.0, 25.0)
    series = ObservableSeries(times, np.random.default_rng(0).normal(size=(25, 20)), "delta_density")
    files = emit_plots(series, tmp_path / "d.svg", slices=(0, 6, 12, 18, 24))
    assert [f.name for f in files] == ["d.svg", "d_slices.svg"]
    assert files[0].read_text().lstrip().startswith("<?xml")


def test_plot_csv_round_trip(tmp_path):
    run_scenario(small(observables=("density", "entropy")), tmp_path)
    dens = series_from_csv((tmp_path / "density_m1_g0.csv").read_text())[0]
    assert dens.values.shape == (5, 8)
    ent = plot_csv(tmp_path / "entropy_m1_g0.csv")
    assert [p.name for p in ent] == ["entropy_m1_g0_S1.svg", "entropy_m1_g0_S2.svg"]


# -- command line ---------------------------------------------------------------------------


def test_cli_list(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "fig6" in out and "fig9-oracle" in out


def test_cli_run_compare_plot(tmp_path, capsys):
    path = tmp_path / "cfg.yaml"
    path.write_text(dump_config(small(t_max=2.0)))
    assert main(["run", str(path), "--out", str(tmp_path / "a"), "--no-plots"]) == 0
    assert main(["run", str(path), "--out", str(tmp_path / "b"), "--seed", "3", "--method", "taylor2"]) == 0
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b"), "--tol", "1e-6"]) == 0
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b"), "--tol", "0"]) == 1
    assert main(["plot", str(tmp_path / "a" / "density_m1_g0.csv"), "--slices"]) == 0
    assert (tmp_path / "a" / "density_m1_g0_slices.svg").exists()
    assert "PASS" in capsys.readouterr().out


def test_cli_configuration_error(capsys):
    assert main(["run", "fig6", "--method", "oracle"]) == 2
    assert main(["run", "fig5", "--method", "oracle"]) == 2
    assert "error" in capsys.readouterr().err
