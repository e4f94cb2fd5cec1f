import numpy as np
import pytest

from cyclevib.errors import ConfigError, ShapeError
from cyclevib.model import CycleVibModel, ModelConfig, load_checkpoint, save_checkpoint
from cyclevib.ndmath import Tensor, substream, tsum
from oracles import central_difference, rel_gradient_error, straightline_mlp


def small_config(**kw):
    defaults = dict(d_in=5, d_y=3, d_z0=2, d_z1=3, encoder_widths=(8,),
                    decx_widths=(8,), decy_widths=(8,), seed=13)
    defaults.update(kw)
    return ModelConfig(**defaults)


@pytest.fixture
def model():
    return CycleVibModel.create(small_config())


class TestEncode:
    def test_zero_noise_returns_means(self, model):
        X = substream(0, 3).normal(size=(7, 5))
        latent = model.encode(X, eps=np.zeros((7, 5)))
        np.testing.assert_array_equal(latent.z.data, latent.mu.data)

    def test_default_is_deterministic_means(self, model):
        X = substream(0, 3).normal(size=(4, 5))
        a = model.encode(X)
        np.testing.assert_array_equal(a.z.data, a.mu.data)
        np.testing.assert_array_equal(a.mu.data, model.encode_mean(X))

    def test_unit_noise_std_monte_carlo(self, model):
        x = substream(1, 3).normal(size=(1, 5))
        rng = substream(1, 1)
        draws = np.stack([model.encode(x, rng=rng).z.data[0] for _ in range(10000)])
        stds = draws.std(axis=0)
        assert np.all(stds > 0.95) and np.all(stds < 1.05)

    def test_partition_views_reassemble(self, model):
        X = substream(2, 3).normal(size=(6, 5))
        latent = model.encode(X, rng=substream(2, 1))
        np.testing.assert_array_equal(
            np.hstack([latent.z0.data, latent.z1.data]), latent.z.data)

    def test_reparameterization_mean_recovery(self, model):
        x = substream(3, 3).normal(size=(1, 5))
        mu = model.encode_mean(x)[0]
        rng = substream(3, 1)
        draws = np.stack([model.encode(x, rng=rng).z.data[0] for _ in range(4000)])
        se = draws.std(axis=0) / np.sqrt(len(draws))
        assert np.all(np.abs(draws.mean(axis=0) - mu) < 3 * se + 1e-12)

    def test_learned_noise_scales_draws(self):
        m = CycleVibModel.create(small_config(noise_mode="learned_per_dim"))
        m.log_noise.data = np.log(np.full(5, 0.1))
        x = substream(4, 3).normal(size=(1, 5))
        rng = substream(4, 1)
        draws = np.stack([m.encode(x, rng=rng).z.data[0] for _ in range(4000)])
        assert np.all(draws.std(axis=0) < 0.12)

    def test_fixed_unit_mode_has_no_noise_parameters(self, model):
        assert model.log_noise is None
        np.testing.assert_array_equal(model.noise_std(), np.ones(5))

    def test_wrong_width_rejected(self, model):
        with pytest.raises(ShapeError):
            model.encode(np.zeros((2, 4)))


class TestDecoders:
    def test_decode_y_deterministic(self, model):
        z0 = np.tile(np.array([[0.5, -0.25]]), (4, 1))
        out = model.predict_y(z0)
        assert np.all(out == out[0])

    def test_decode_y_zero_input_matches_straightline(self, model):
        weights = [l.weights.data for l in model.dec_y]
        biases = [l.bias.data for l in model.dec_y]
        acts = [l.activation for l in model.dec_y]
        expected = straightline_mlp(np.zeros((1, 2)), weights, biases, acts)
        np.testing.assert_allclose(model.predict_y(np.zeros((1, 2))), expected, atol=1e-15)

    def test_decode_y_jacobian_direction(self, model):
        z0 = np.array([[0.3, -0.4]])
        delta = np.full(2, 1e-6)
        moved = model.predict_y(z0 + delta)
        base = model.predict_y(z0)
        fd_jvp = (model.predict_y(z0 + delta) - model.predict_y(z0 - delta)) / 2.0
        t = Tensor(z0.copy(), requires_grad=True)
        out = model.decode_y(t)
        jvp = np.zeros(3)
        for j in range(3):
            tj = Tensor(z0.copy(), requires_grad=True)
            tsum(model.decode_y(tj)[:, j]).backward()
            jvp[j] = tj.grad[0] @ delta
        np.testing.assert_allclose(fd_jvp.ravel(), jvp, rtol=1e-3, atol=1e-12)
        assert np.linalg.norm(moved - base) < 1e-4

    def test_decode_x_row_permutation(self, model):
        rng = substream(5, 3)
        z1, y = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
        perm = rng.permutation(6)
        np.testing.assert_array_equal(model.decode_input(z1, y)[perm],
                                      model.decode_input(z1[perm], y[perm]))

    def test_decode_x_gradient_wrt_z1(self, model):
        rng = substream(6, 3)
        z10, y0 = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
        z1 = Tensor(z10.copy(), requires_grad=True)
        tsum(model.decode_x(z1, Tensor(y0)) * model.decode_x(z1, Tensor(y0))).backward()

        def f(v):
            out = model.decode_input(v, y0)
            return float(np.sum(out * out))

        fd = central_difference(f, z10.copy())
        assert rel_gradient_error(z1.grad, fd) < 1e-4

    def test_shape_contracts(self, model):
        with pytest.raises(ShapeError):
            model.decode_y(Tensor(np.zeros((1, 3))))
        with pytest.raises(ShapeError):
            model.decode_x(Tensor(np.zeros((1, 2))), Tensor(np.zeros((1, 3))))


class TestFullCycle:
    def test_shapes(self, model):
        X = substream(7, 3).normal(size=(9, 5))
        x_hat, y_hat, latent = model.full_cycle(X, rng=substream(7, 1))
        assert x_hat.data.shape == (9, 5)
        assert y_hat.data.shape == (9, 3)
        assert latent.z.data.shape == (9, 5)

    def test_zero_noise_repeatable(self, model):
        X = substream(8, 3).normal(size=(4, 5))
        a = model.full_cycle(X, eps=np.zeros((4, 5)))
        b = model.full_cycle(X, eps=np.zeros((4, 5)))
        np.testing.assert_array_equal(a[0].data, b[0].data)
        np.testing.assert_array_equal(a[1].data, b[1].data)


class TestPartitionExclusivity:
    def test_dec_y_ignores_z1(self, model):
        rng = substream(9, 3)
        z = Tensor(rng.normal(size=(3, 5)), requires_grad=True)
        z0 = z[:, :2]
        tsum(model.decode_y(z0)).backward()
        np.testing.assert_array_equal(z.grad[:, 2:], np.zeros((3, 3)))
        assert np.any(z.grad[:, :2] != 0)

    def test_dec_x_ignores_z0_when_y_detached(self, model):
        rng = substream(10, 3)
        z = Tensor(rng.normal(size=(3, 5)), requires_grad=True)
        z0, z1 = z[:, :2], z[:, 2:]
        y_hat = model.decode_y(z0).detach()
        tsum(model.decode_x(z1, y_hat)).backward()
        np.testing.assert_array_equal(z.grad[:, :2], np.zeros((3, 2)))
        assert np.any(z.grad[:, 2:] != 0)

    def test_grey_arrow_couples_z0_through_y(self, model):
        rng = substream(11, 3)
        z = Tensor(rng.normal(size=(3, 5)), requires_grad=True)
        z0, z1 = z[:, :2], z[:, 2:]
        tsum(model.decode_x(z1, model.decode_y(z0))).backward()
        assert np.any(z.grad[:, :2] != 0)


class TestConfig:
    def test_dec_x_input_width_is_z1_plus_y(self, model):
        assert model.dec_x[0].in_dim == model.config.d_z1 + model.config.d_y

    def test_invalid_configs(self):
        with pytest.raises(ConfigError):
            ModelConfig(d_z0=0)
        with pytest.raises(ConfigError):
            ModelConfig(noise_mode="other")
        with pytest.raises(ConfigError):
            ModelConfig(lam=-1.0)

    def test_create_is_deterministic(self):
        a = CycleVibModel.create(small_config())
        b = CycleVibModel.create(small_config())
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa.data, pb.data)


class TestCheckpoint:
    def test_round_trip(self, model, tmp_path):
        X = substream(12, 3).normal(size=(4, 5))
        save_checkpoint(model, tmp_path / "ckpt", step=17, metrics={"mae_x": 0.5})
        loaded, manifest = load_checkpoint(tmp_path / "ckpt")
        assert manifest["step"] == 17
        assert manifest["metrics"]["mae_x"] == 0.5
        np.testing.assert_array_equal(loaded.encode_mean(X), model.encode_mean(X))

    def test_corrupted_blob_detected(self, model, tmp_path):
        save_checkpoint(model, tmp_path / "ckpt")
        blob = (tmp_path / "ckpt.bin").read_bytes()
        (tmp_path / "ckpt.bin").write_bytes(bytes(8) + blob[8:])
        with pytest.raises(ConfigError, match="hash"):
            load_checkpoint(tmp_path / "ckpt")
