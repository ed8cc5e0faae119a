import numpy as np
import pytest

import tcusim


def test_multiply_matches_numpy_and_charges_tiles():
    rng = np.random.default_rng(0)
    a = rng.integers(-9, 10, size=(6, 10)).astype(float)
    b = rng.integers(-9, 10, size=(10, 3)).astype(float)
    cfg = tcusim.TcuConfig(16)
    out, ledger = tcusim.multiply(a, b, cfg)
    assert np.array_equal(out, a @ b)
    assert ledger.tile_mults == 2 * 3 * 1
    assert ledger.tile_mults == tcusim.tile_count(6, 10, 3, cfg)
    assert ledger.tcu_time == "96"


def test_config_rejects_non_square_m():
    with pytest.raises(ValueError):
        tcusim.TcuConfig(8)
    assert tcusim.TcuConfig(64, "m^1.5").tau == "512"


def test_schedule_shapes():
    s = tcusim.build_schedule(1024, 16, 2)
    assert s["ell"] == 6
    assert s["d_padded"] == 1024
    assert s["levels"][-1][0] == 16


def test_jl_transform_matches_dense_matrix():
    cfg = tcusim.TcuConfig(16)
    t = tcusim.sample_transform(256, eps=0.5, delta=0.1, seed=3)
    x = np.random.default_rng(1).standard_normal(256)
    y, ledger = tcusim.jl_apply(t, x, cfg)
    dense = t.dense()
    assert y.shape == (t.output_dim,)
    assert np.allclose(y, dense[:, :256] @ x)
    assert ledger.tile_mults > 0


def test_brute_force_join_finds_planted_pairs():
    p, q, truth = tcusim.generate_planted(64, 64, "hamming", planted=8, planted_distance=1, background=16, seed=5)
    pairs, ledger = tcusim.brute_force_join(p, q, "hamming", 1.0, tcusim.TcuConfig(64))
    assert np.array_equal(pairs, truth)
    assert ledger.tile_mults > 0


def test_lsh_join_is_sound():
    p, q, truth = tcusim.generate_planted(256, 128, "hamming", planted=64, planted_distance=4, background=32, seed=2)
    cfg = tcusim.TcuConfig(256)
    res = tcusim.lsh_join(p, q, "hamming", 4.0, 12.0, cfg, seed=9)
    found = {tuple(x) for x in res["pairs"]}
    assert found <= {tuple(x) for x in truth}
    assert len(found) >= 0.5 * len(truth)
    assert res["L_low"] + res["L_high"] >= 1


def test_exact_distance():
    assert tcusim.exact_distance(np.array([1.0, 0, 1]), np.array([0.0, 0, 1]), "hamming") == 1
    assert tcusim.exact_distance(np.array([3.0]), np.array([1.0]), "l2sq") == 4


def test_bench_reports_are_csv():
    text = tcusim.bench_join(m=64, n=128, d=128, mode="brute")
    lines = text.strip().splitlines()
    assert lines[0].startswith("scenario,")
    assert len(lines) == 2
