"""Network assembly: forward pass, init, SOPs, pruning, checkpoints."""

import numpy as np
import numpy.testing as npt
import pytest

from brfsim.dynamics import (
    ALIFParams,
    ALIFState,
    LIParams,
    RFParams,
    RFState,
    brf_step,
    li_step,
)
from brfsim.errors import ConfigError, DataError, NumericError
from brfsim.network import (
    Dist,
    InitSpec,
    NetworkConfig,
    count_sops,
    forward_sequence,
    init_parameters,
    load_checkpoint,
    prune_recurrent,
    save_checkpoint,
)

from conftest import brf_toy


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ConfigError):
            NetworkConfig(n_in=0, n_hidden=4, n_out=2)
        with pytest.raises(ConfigError):
            NetworkConfig(n_in=1, n_hidden=4, n_out=2, neuron="lstm")
        with pytest.raises(ConfigError):
            NetworkConfig(n_in=1, n_hidden=4, n_out=2, reset_mode="sometimes")
        with pytest.raises(ConfigError):
            NetworkConfig(n_in=1, n_hidden=4, n_out=2, gamma=1.5)


class TestDist:
    def test_parse_roundtrip(self):
        for text in ("uniform(15,50)", "normal(20,5)", "sigmoid_normal(0,0.1)", "constant(3)"):
            d = Dist.parse(text)
            assert Dist.parse(str(d)) == d

    def test_rejects_bad_bounds(self):
        with pytest.raises(ConfigError):
            Dist("uniform", 5, 5)
        with pytest.raises(ConfigError):
            Dist.parse("uniform(5)")
        with pytest.raises(ConfigError):
            Dist.parse("lognormal(1,2)")


class TestInitParameters:
    def test_preset_ranges(self):
        # S-MNIST-style preset: omega in [15,50), b' in [0.1,1).
        cfg = NetworkConfig(n_in=1, n_hidden=256, n_out=10, neuron="brf")
        init = InitSpec(
            omega=Dist("uniform", 15, 50), b_offset=Dist("uniform", 0.1, 1), tau_out=Dist("normal", 20, 5)
        )
        w = init_parameters(cfg, init, seed=0)
        assert np.all((w.omega >= 15) & (w.omega < 50))
        assert np.all((w.b_offset >= 0.1) & (w.b_offset < 1))
        assert w.w_in_rec.shape == (256, 257) and w.w_out.shape == (10, 256)
        k = 1 / np.sqrt(257)
        assert np.all(np.abs(w.w_in_rec) <= k)

    def test_shd_preset_ranges(self):
        cfg = NetworkConfig(n_in=700, n_hidden=128, n_out=20, neuron="brf")
        init = InitSpec(
            omega=Dist("uniform", 5, 10), b_offset=Dist("uniform", 2, 3), tau_out=Dist("normal", 20, 5)
        )
        w = init_parameters(cfg, init, seed=1)
        assert np.all((w.omega >= 5) & (w.omega < 10))
        assert np.all((w.b_offset >= 2) & (w.b_offset < 3))

    def test_deterministic_given_seed(self):
        cfg, _ = brf_toy()
        init = InitSpec(
            omega=Dist("uniform", 5, 15), b_offset=Dist("uniform", 0.5, 1.5), tau_out=Dist("normal", 20, 2)
        )
        a = init_parameters(cfg, init, seed=7)
        b = init_parameters(cfg, init, seed=7)
        for x, y in zip(a.trainable().values(), b.trainable().values()):
            npt.assert_array_equal(x, y)
        c = init_parameters(cfg, init, seed=8)
        assert np.any(c.w_in_rec != a.w_in_rec)

    def test_sigmoid_normal_readout(self):
        cfg = NetworkConfig(n_in=1, n_hidden=4, n_out=3, neuron="bhrf")
        init = InitSpec(
            omega=Dist("uniform", 5, 15), b_offset=Dist("uniform", 0.5, 1.5),
            tau_out=Dist("sigmoid_normal", 0, 0.1),
        )
        w = init_parameters(cfg, init, seed=0)
        alpha = np.exp(-cfg.li_delta / w.tau_out)
        assert np.all((alpha > 0.3) & (alpha < 0.7))  # sigmoid of N(0, 0.1)

    def test_rejects_missing_distributions(self):
        cfg, _ = brf_toy()
        with pytest.raises(ConfigError):
            init_parameters(cfg, InitSpec(), seed=0)

    def test_rejects_omega_above_ceiling(self):
        cfg, _ = brf_toy()
        init = InitSpec(
            omega=Dist("uniform", 150, 200), b_offset=Dist("uniform", 0.1, 1), tau_out=Dist("normal", 20, 2)
        )
        with pytest.raises(ConfigError):
            init_parameters(cfg, init, seed=0)


class TestForward:
    def test_zero_input_zero_output_all_kinds(self):
        # No biases anywhere: the zero state is a fixed point of every model.
        for neuron in ("brf", "rf", "bhrf", "alif"):
            kw = {} if neuron in ("brf", "bhrf", "alif") else dict(
                boundary=False, refractory=False, reset_mode="none"
            )
            cfg, w = brf_toy(neuron=neuron, **kw)
            readout, spikes, _ = forward_sequence(np.zeros((20, 3, 2)), w, cfg)
            assert np.all(readout == 0.0)
            assert np.all(spikes == 0.0)

    def test_single_step_composes_library_ops(self):
        cfg, w = brf_toy(n_in=1, n_hidden=1, n_out=1)
        x = np.array([[[170.0]]])
        readout, spikes, _ = forward_sequence(x, w, cfg)
        params = RFParams(omega=w.omega, b_offset=w.b_offset, delta=cfg.delta)
        state, z = brf_step(RFState.zeros(1), x[0, 0] @ w.w_in_rec[:, :1].T, params)
        li = LIParams(tau_out=w.tau_out, delta=cfg.li_delta)
        y = li_step(np.zeros(1), z @ w.w_out.T, li)
        npt.assert_array_equal(spikes[0, 0], z)
        npt.assert_array_equal(readout[0, 0], y)

    def test_matches_iterated_step_functions(self):
        # The network hot loop and the stateless ops share the exact update
        # expressions, so a B=1 run must agree bit for bit.
        cfg, w = brf_toy(n_hidden=6)
        rng = np.random.default_rng(0)
        T = 25
        x = rng.uniform(0, 150, size=(T, 1, 2))
        readout, spikes, cache = forward_sequence(x, w, cfg)
        params = RFParams(omega=w.omega, b_offset=w.b_offset, delta=cfg.delta)
        li = LIParams(tau_out=w.tau_out, delta=cfg.li_delta)
        state = RFState.zeros(6)
        z = np.zeros(6)
        y = np.zeros(2)
        for t in range(T):
            drive = np.concatenate([x[t, 0], z]) @ w.w_in_rec.T
            state, z = brf_step(state, drive, params)
            y = li_step(y, z @ w.w_out.T, li)
            npt.assert_array_equal(spikes[t, 0], z)
            npt.assert_array_equal(readout[t, 0], y)

    def test_alif_matches_iterated_step_functions(self):
        from brfsim.dynamics import alif_step

        cfg, w = brf_toy(neuron="alif", n_hidden=5, delta=1.0)
        rng = np.random.default_rng(1)
        T = 20
        x = rng.uniform(0, 3, size=(T, 1, 2))
        readout, spikes, _ = forward_sequence(x, w, cfg)
        params = ALIFParams(tau_m=w.tau_m, tau_a=w.tau_a, delta=1.0)
        li = LIParams(tau_out=w.tau_out, delta=cfg.li_delta)
        state = ALIFState.zeros(5)
        y = np.zeros(2)
        for t in range(T):
            drive = np.concatenate([x[t, 0], state.z]) @ w.w_in_rec.T
            state, z = alif_step(state, drive, params)
            y = li_step(y, z @ w.w_out.T, li)
            npt.assert_array_equal(spikes[t, 0], z)
            npt.assert_array_equal(readout[t, 0], y)

    def test_batch_rows_do_not_interact(self):
        cfg, w = brf_toy()
        rng = np.random.default_rng(2)
        a = rng.uniform(0, 120, size=(15, 1, 2))
        b = rng.uniform(0, 120, size=(15, 1, 2))
        both = np.concatenate([a, b], axis=1)
        r_both, s_both, _ = forward_sequence(both, w, cfg)
        r_a, s_a, _ = forward_sequence(a, w, cfg)
        r_b, s_b, _ = forward_sequence(b, w, cfg)
        npt.assert_array_equal(r_both[:, 0], r_a[:, 0])
        npt.assert_array_equal(r_both[:, 1], r_b[:, 0])
        npt.assert_array_equal(s_both[:, 0], s_a[:, 0])

    def test_identical_rows_identical_outputs(self):
        cfg, w = brf_toy()
        row = np.random.default_rng(3).uniform(0, 120, size=(10, 1, 2))
        x = np.concatenate([row, row], axis=1)
        readout, spikes, _ = forward_sequence(x, w, cfg)
        npt.assert_array_equal(readout[:, 0], readout[:, 1])
        npt.assert_array_equal(spikes[:, 0], spikes[:, 1])

    @pytest.mark.parametrize("neuron", ["brf", "bhrf", "alif"])
    def test_cache_restart_reproduces_tail(self, neuron):
        cfg, w = brf_toy(neuron=neuron)
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 120, size=(16, 2, 2))
        if neuron == "alif":
            x = x / 40.0
        readout, spikes, cache = forward_sequence(x, w, cfg)
        k = 7
        snap = cache.state_at(k)
        r2, s2, _ = forward_sequence(x[k:], w, cfg, init_state=snap)
        npt.assert_array_equal(r2, readout[k:])
        npt.assert_array_equal(s2, spikes[k:])

    def test_shape_validation(self):
        cfg, w = brf_toy()
        with pytest.raises(DataError):
            forward_sequence(np.zeros((5, 2, 3)), w, cfg)  # wrong n_in
        with pytest.raises(DataError):
            forward_sequence(np.zeros((5, 2)), w, cfg)

    def test_non_finite_reported_with_step_index(self):
        cfg, w = brf_toy()
        x = np.zeros((9, 1, 2))
        x[6, 0, 0] = np.nan
        with pytest.raises(NumericError) as err:
            forward_sequence(x, w, cfg)
        assert err.value.step == 6

    def test_spike_values_are_exact_binaries(self):
        cfg, w = brf_toy()
        x = np.random.default_rng(5).uniform(0, 150, size=(12, 3, 2))
        _, spikes, _ = forward_sequence(x, w, cfg)
        assert spikes.sum() > 0
        assert np.all((spikes == 0.0) | (spikes == 1.0))


class TestCountSops:
    def test_zero(self):
        assert count_sops(0.0, 5, 100) == (0.0, 0.0)

    def test_table_reference_ratio(self):
        sops, per_step = count_sops(70810.8 * 10000, 10000, 784)
        npt.assert_allclose(sops, 70810.8, rtol=1e-12)
        npt.assert_allclose(per_step, 90.32, atol=0.005)

    def test_direct_ratio(self):
        sops, per_step = count_sops(100.0, 10, 50)
        assert sops == 10.0 and per_step == 0.2

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            count_sops(1.0, 0, 10)


class TestPruneRecurrent:
    def test_zero_probability_is_identity(self):
        _, w = brf_toy()
        out = prune_recurrent(w, 0.0, seed=0)
        npt.assert_array_equal(out.w_in_rec, w.w_in_rec)

    def test_full_pruning_zeroes_recurrent_block_only(self):
        cfg, w = brf_toy(n_in=3, n_hidden=5)
        out = prune_recurrent(w, 1.0, seed=0)
        assert np.all(out.w_in_rec[:, 3:] == 0.0)
        npt.assert_array_equal(out.w_in_rec[:, :3], w.w_in_rec[:, :3])
        npt.assert_array_equal(out.w_out, w.w_out)

    def test_forward_ignores_pruned_block_values(self):
        cfg, w = brf_toy()
        x = np.random.default_rng(6).uniform(0, 120, size=(10, 2, 2))
        pruned = prune_recurrent(w, 1.0, seed=0)
        w2 = w.copy()
        w2.w_in_rec[:, 2:] = 123.456  # original recurrent values irrelevant
        pruned2 = prune_recurrent(w2, 1.0, seed=1)
        r1, s1, _ = forward_sequence(x, pruned, cfg)
        r2, s2, _ = forward_sequence(x, pruned2, cfg)
        npt.assert_array_equal(r1, r2)
        npt.assert_array_equal(s1, s2)

    def test_binomial_concentration(self):
        cfg, w = brf_toy(n_in=1, n_hidden=2000)
        out = prune_recurrent(w, 0.5, seed=3)
        frac = np.mean(out.w_in_rec[:, 1:] == 0.0)
        assert abs(frac - 0.5) < 0.02

    def test_rejects_bad_probability(self):
        _, w = brf_toy()
        with pytest.raises(ValueError):
            prune_recurrent(w, 1.5, seed=0)


class TestCheckpoint:
    @pytest.mark.parametrize("neuron", ["brf", "alif"])
    def test_roundtrip_bit_exact(self, tmp_path, neuron):
        cfg, w = brf_toy(neuron=neuron)
        path = tmp_path / "net.ckpt"
        save_checkpoint(path, w, cfg)
        w2, cfg2 = load_checkpoint(path)
        assert cfg2 == cfg
        for a, b in zip(w.trainable().values(), w2.trainable().values()):
            npt.assert_array_equal(a, b)

    def test_same_weights_same_bytes(self, tmp_path):
        cfg, w = brf_toy()
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(p1, w, cfg)
        save_checkpoint(p2, w, cfg)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_corrupt_files(self, tmp_path):
        cfg, w = brf_toy()
        path = tmp_path / "net.ckpt"
        save_checkpoint(path, w, cfg)
        raw = path.read_bytes()
        bad_magic = tmp_path / "bad1.ckpt"
        bad_magic.write_bytes(b"XXXXXXXX" + raw[8:])
        with pytest.raises(DataError):
            load_checkpoint(bad_magic)
        truncated = tmp_path / "bad2.ckpt"
        truncated.write_bytes(raw[:-16])
        with pytest.raises(DataError):
            load_checkpoint(truncated)
        trailing = tmp_path / "bad3.ckpt"
        trailing.write_bytes(raw + b"\x00" * 8)
        with pytest.raises(DataError):
            load_checkpoint(trailing)

    def test_loaded_weights_are_writable(self, tmp_path):
        cfg, w = brf_toy()
        path = tmp_path / "net.ckpt"
        save_checkpoint(path, w, cfg)
        w2, _ = load_checkpoint(path)
        w2.w_out += 1.0  # optimizers update in place
