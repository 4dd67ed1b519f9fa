import numpy as np
import pytest

from reconfigkf import cli, harness
from reconfigkf.errors import ConfigurationError


def small_config(tmp_path, **overrides):
    kwargs = dict(seed=5, p_grid=[0.5, 2.0],
                  policies=("scalar-minsum", "no-observation"),
                  steady_tol=1e-6, out_csv=str(tmp_path / "sweep.csv"),
                  out_svg=str(tmp_path / "sweep.svg"))
    kwargs.update(overrides)
    return harness.ExperimentConfig(**kwargs)


def test_default_p_grid():
    grid = harness.default_p_grid()
    assert grid[0] == pytest.approx(0.5)
    assert grid[-1] == pytest.approx(32.0)
    assert len(grid) == 13
    ratios = [b / a for a, b in zip(grid, grid[1:])]
    assert np.allclose(ratios, np.sqrt(2.0))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        harness.ExperimentConfig(p_grid=[2.0, 1.0])
    with pytest.raises(ConfigurationError):
        harness.ExperimentConfig(p_grid=[-1.0, 1.0])
    with pytest.raises(ConfigurationError):
        harness.ExperimentConfig(policies=("maximum-entropy",))
    with pytest.raises(ConfigurationError):
        harness.ExperimentConfig(spectral_radius_target=1.5)
    with pytest.raises(ConfigurationError):
        harness.ExperimentConfig(num_seeds=0)


def test_generate_system_seeded():
    cfg = harness.ExperimentConfig(seed=3)
    a = harness.generate_system(cfg, "vector")
    b = harness.generate_system(cfg, "vector")
    assert np.array_equal(a.f, b.f)
    assert np.array_equal(a.g, b.g)
    # same dynamics across modes, different G streams
    c = harness.generate_system(cfg, "scalar")
    assert np.array_equal(a.f, c.f)
    assert a.g.shape == (16, 3)
    assert c.g.shape == (4, 3)
    d = harness.generate_system(cfg, "vector", seed=4)
    assert not np.array_equal(a.f, d.f)
    # spectral radius honors the configured target
    rho = np.max(np.abs(np.linalg.eigvals(a.f)))
    assert rho == pytest.approx(0.9, rel=1e-10)
    with pytest.raises(ConfigurationError):
        harness.generate_system(cfg, "tensor")


def test_run_sweep_and_csv_round_trip(tmp_path):
    cfg = small_config(tmp_path)
    rows = harness.run_sweep(cfg)
    assert len(rows) == len(cfg.p_grid) * len(cfg.policies)
    for r in rows:
        assert r.sum_mse >= r.lower_sum - 1e-6
        assert r.max_mse >= r.lower_max - 1e-6
    harness.emit_csv(rows, cfg.out_csv)
    back = harness.read_csv(cfg.out_csv)
    assert len(back) == len(rows)
    for r, b in zip(rows, back):
        assert b.sum_mse == r.sum_mse  # repr round-trips exactly
        assert b.policy == r.policy


def test_csv_determinism(tmp_path):
    cfg = small_config(tmp_path)
    rows1 = harness.run_sweep(cfg)
    rows2 = harness.run_sweep(cfg)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    harness.emit_csv(rows1, str(p1))
    harness.emit_csv(rows2, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_emit_svg(tmp_path):
    cfg = small_config(tmp_path)
    rows = harness.run_sweep(cfg)
    harness.emit_svg(rows, cfg.out_svg)
    text = (tmp_path / "sweep.svg").read_text()
    assert text.startswith("<svg")
    for pol in cfg.policies:
        assert f'data-policy="{pol}"' in text


def test_emit_empty_rows_rejected(tmp_path):
    with pytest.raises(ConfigurationError):
        harness.emit_csv([], str(tmp_path / "x.csv"))
    with pytest.raises(ConfigurationError):
        harness.emit_svg([], str(tmp_path / "x.svg"))


def test_run_oracles_pass():
    cfg = harness.ExperimentConfig(seed=0)
    checks = harness.run_oracles(cfg)
    assert len(checks) >= 4
    for c in checks:
        assert c.passed, f"{c.name}: {c.deviation} > {c.tolerance}"


def test_load_config(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# comment\n"
        "seed = 9\n"
        f"rng = {harness.RNG_ALGORITHM}\n"
        "p_grid = 0.5, 1.0, 2.0\n"
        "policies = scalar-minsum\n"
        "sigma_v_sq = 0.25  # inline comment\n"
        "out_csv = out.csv\n"
    )
    cfg = harness.load_config(str(path))
    assert cfg.seed == 9
    assert cfg.p_grid == [0.5, 1.0, 2.0]
    assert cfg.policies == ("scalar-minsum",)
    assert cfg.sigma_v_sq == 0.25
    assert cfg.out_csv == "out.csv"


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("rng = mersenne-twister\n")
    with pytest.raises(ConfigurationError):
        harness.load_config(str(bad))
    bad.write_text("volume = 11\n")
    with pytest.raises(ConfigurationError):
        harness.load_config(str(bad))
    bad.write_text("just a line\n")
    with pytest.raises(ConfigurationError):
        harness.load_config(str(bad))


# ----------------------------------------------------------------------
# CLI
# ----------------------------------------------------------------------

def write_cli_config(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "seed = 5\n"
        "p_grid = 0.5, 2.0\n"
        "policies = scalar-minsum, no-observation\n"
        "steady_tol = 1e-6\n"
        f"out_csv = {tmp_path / 'sweep.csv'}\n"
        f"out_svg = {tmp_path / 'sweep.svg'}\n"
    )
    return str(path)


def test_cli_sweep(tmp_path, capsys):
    code = cli.main(["sweep", "--config", write_cli_config(tmp_path)])
    assert code == cli.EXIT_OK
    assert (tmp_path / "sweep.csv").exists()
    assert (tmp_path / "sweep.svg").exists()
    out = capsys.readouterr().out
    assert "wrote" in out


def test_cli_oracle(capsys):
    code = cli.main(["oracle"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "pass" in out


def test_cli_track(capsys):
    code = cli.main(["track", "--policy", "scalar-minsum", "--p", "1.0"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "sum MSE" in out


def test_cli_dump_sdp(capsys):
    code = cli.main(["dump-sdp", "--which", "minsum"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("sdp-dump v1")


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["sweep", "--config", "/nonexistent.cfg"]) == cli.EXIT_USAGE
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE
    bad = tmp_path / "bad.cfg"
    bad.write_text("volume = 11\n")
    assert cli.main(["sweep", "--config", str(bad)]) == cli.EXIT_USAGE
    capsys.readouterr()
