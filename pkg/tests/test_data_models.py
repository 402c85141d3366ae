import struct

import numpy as np
import pytest

from airfl_sim.data import (Dataset, load_idx, partition_noniid,
                            synth_classification)
from airfl_sim.models import (MLP, SOFTMAX, Model, clip_gradient, evaluate,
                              init_model, local_gradient, loss_and_gradient,
                              model_dim, sgd_step)
from airfl_sim.rngstream import derive_stream


def fit_linear(data, steps=300, eta=0.5):
    model = init_model(SOFTMAX, data.features.shape[1], data.num_classes)
    for _ in range(steps):
        _, g = loss_and_gradient(model, data.features, data.labels)
        model = sgd_step(model, g, eta)
    return model


class TestSynth:
    def test_deterministic(self):
        a = synth_classification(100, 5, 3, 2.0, derive_stream(1, ("d", 0)))
        b = synth_classification(100, 5, 3, 2.0, derive_stream(1, ("d", 0)))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_zero_separation_is_chance(self):
        data = synth_classification(3000, 8, 4, 0.0, derive_stream(2, ("d", 0)))
        held = synth_classification(3000, 8, 4, 0.0, derive_stream(2, ("d", 1)))
        model = fit_linear(data)
        _, acc = evaluate(model, held)
        assert abs(acc - 0.25) < 0.05

    def test_large_separation_is_separable(self):
        train = synth_classification(2000, 8, 4, 5.0, derive_stream(3, ("d", 0)))
        model = fit_linear(train)
        _, acc = evaluate(model, train)
        assert acc >= 0.95

    def test_rejects_single_class(self):
        with pytest.raises(ValueError):
            synth_classification(10, 4, 1, 1.0, derive_stream(1))


class TestPartition:
    def make(self, n=1200, C=4):
        return synth_classification(n, 6, C, 3.0, derive_stream(4, ("d", 0)))

    def test_exact_partition(self):
        data = self.make()
        shards = partition_noniid(data, 6, 2, derive_stream(4, ("p", 0)))
        key = data.features[:, 0]
        seen = np.concatenate([s.features[:, 0] for s in shards])
        assert seen.shape[0] == len(data)
        np.testing.assert_allclose(np.sort(seen), np.sort(key))

    def test_label_budget_respected(self):
        data = self.make()
        for lpc in (1, 2, 3):
            shards = partition_noniid(data, 8, lpc, derive_stream(4, ("p", lpc)))
            assert all(np.unique(s.labels).size <= lpc for s in shards)

    def test_unconstrained_case_covers_all_labels(self):
        data = self.make()
        shards = partition_noniid(data, 4, 4, derive_stream(4, ("p", 9)))
        assert all(np.unique(s.labels).size == 4 for s in shards)

    def test_single_label_per_client(self):
        data = self.make(n=400, C=4)
        shards = partition_noniid(data, 4, 1, derive_stream(4, ("p", 5)))
        labels = sorted(int(s.labels[0]) for s in shards)
        assert labels == [0, 1, 2, 3]
        assert all(np.unique(s.labels).size == 1 for s in shards)

    def test_equal_sizes_when_divisible(self):
        data = self.make(n=1600, C=4)  # 400 per label, 8 clients x 2 labels
        shards = partition_noniid(data, 8, 2, derive_stream(4, ("p", 7)))
        sizes = {len(s) for s in shards}
        assert sizes == {200}

    def test_infeasible_rejected(self):
        data = self.make()
        with pytest.raises(ValueError):
            partition_noniid(data, 2, 1, derive_stream(4, ("p", 8)))


def write_idx_pair(tmp_path, n=2, rows=28, cols=28):
    images = tmp_path / "tiny-images-idx3-ubyte"
    labels = tmp_path / "tiny-labels-idx1-ubyte"
    pix = np.arange(n * rows * cols, dtype=np.uint8)
    with open(images, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        fh.write(pix.tobytes())
    with open(labels, "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, n))
        fh.write(bytes([1, 0][:n]))
    return str(images), str(labels)


class TestIdx:
    def test_round_trip(self, tmp_path):
        images, labels = write_idx_pair(tmp_path)
        data = load_idx(images, labels)
        assert data.features.shape == (2, 784)
        assert data.features.max() <= 1.0
        assert list(data.labels) == [1, 0]

    def test_labels_path_inferred(self, tmp_path):
        images, _ = write_idx_pair(tmp_path)
        assert load_idx(images).features.shape == (2, 784)

    def test_corrupt_magic(self, tmp_path):
        path = tmp_path / "bad-images-idx3-ubyte"
        path.write_bytes(struct.pack(">IIII", 0xDEADBEEF, 1, 2, 2) + b"\x00" * 4)
        lab = tmp_path / "bad-labels-idx1-ubyte"
        lab.write_bytes(struct.pack(">II", 0x00000801, 1) + b"\x00")
        with pytest.raises(ValueError, match="magic"):
            load_idx(str(path))

    def test_truncated(self, tmp_path):
        path = tmp_path / "t-images-idx3-ubyte"
        path.write_bytes(struct.pack(">IIII", 0x00000803, 2, 2, 2) + b"\x00" * 3)
        lab = tmp_path / "t-labels-idx1-ubyte"
        lab.write_bytes(struct.pack(">II", 0x00000801, 2) + b"\x00\x00")
        with pytest.raises(ValueError, match="expected"):
            load_idx(str(path))

    def test_count_mismatch(self, tmp_path):
        images, _ = write_idx_pair(tmp_path, n=2)
        lab = tmp_path / "tiny-labels-idx1-ubyte"
        lab.write_bytes(struct.pack(">II", 0x00000801, 3) + b"\x00\x01\x00")
        with pytest.raises(ValueError, match="mismatch"):
            load_idx(images)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_idx(str(tmp_path / "absent-images-idx3-ubyte"))


def finite_difference_check(model, X, y, directions=10, eps=1e-5, seed=0):
    _, grad = loss_and_gradient(model, X, y)
    gen = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(directions):
        v = gen.standard_normal(model.dim)
        v /= np.linalg.norm(v)
        plus = loss_and_gradient(
            Model(model.kind, model.weights + eps * v, model.dims), X, y)[0]
        minus = loss_and_gradient(
            Model(model.kind, model.weights - eps * v, model.dims), X, y)[0]
        numeric = (plus - minus) / (2 * eps)
        analytic = float(grad @ v)
        worst = max(worst, abs(numeric - analytic)
                    / max(abs(analytic), abs(numeric), 1e-12))
    return worst


class TestModels:
    def setup_method(self):
        self.data = synth_classification(200, 6, 3, 2.0,
                                         derive_stream(5, ("d", 0)))

    def test_model_dims(self):
        assert model_dim(SOFTMAX, (6, 3)) == 21
        assert model_dim(MLP, (6, 4, 3)) == 28 + 15

    @pytest.mark.parametrize("kind", [SOFTMAX, MLP])
    def test_gradient_matches_finite_differences(self, kind):
        model = init_model(kind, 6, 3, hidden=5,
                           stream=derive_stream(5, ("init", 0)))
        if kind == SOFTMAX:  # move off the symmetric zero point
            model = sgd_step(model, np.full(model.dim, -0.05), 1.0)
        else:
            model = sgd_step(
                model, derive_stream(5, ("w", 0)).generator()
                .standard_normal(model.dim) * -0.1, 1.0)
        worst = finite_difference_check(model, self.data.features[:64],
                                        self.data.labels[:64])
        assert worst < 1e-5

    def test_zero_weight_softmax_bias_symmetry(self):
        # balanced labels at the zero model: every class is predicted 1/C,
        # so the bias gradient vanishes
        n = 150
        feats = derive_stream(6, ("f", 0)).generator().standard_normal((n, 4))
        labels = np.arange(n) % 3
        data = Dataset(feats, labels.astype(np.int64), "bal", 3)
        model = init_model(SOFTMAX, 4, 3)
        _, g = loss_and_gradient(model, data.features, data.labels)
        bias = g[-3:]
        np.testing.assert_allclose(bias, 0.0, atol=1e-12)

    def test_full_batch_equals_analytic(self):
        model = init_model(SOFTMAX, 6, 3)
        shard = self.data
        g = local_gradient(model, shard, len(shard), derive_stream(7, ("b", 0)))
        _, ref = loss_and_gradient(model, shard.features, shard.labels)
        np.testing.assert_allclose(g, ref, rtol=1e-12)

    def test_minibatch_unbiased(self):
        model = init_model(SOFTMAX, 6, 3)
        _, full = loss_and_gradient(model, self.data.features, self.data.labels)
        draws = np.stack([
            local_gradient(model, self.data, 20, derive_stream(8, ("b", i)))
            for i in range(3000)])
        se = draws.std(axis=0, ddof=1) / np.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - full) < 4 * se + 1e-12)

    def test_clip(self):
        g = np.array([3.0, 4.0])
        np.testing.assert_allclose(clip_gradient(g, 10.0), g)
        clipped = clip_gradient(g, 2.5)
        assert np.linalg.norm(clipped) == pytest.approx(2.5)
        np.testing.assert_allclose(clipped / np.linalg.norm(clipped), g / 5.0)
        np.testing.assert_allclose(clip_gradient(clipped, 2.5), clipped)

    def test_sgd_step(self):
        model = init_model(SOFTMAX, 6, 3)
        g = np.ones(model.dim)
        same = sgd_step(model, np.zeros(model.dim), 0.1)
        np.testing.assert_array_equal(same.weights, model.weights)
        two_half = sgd_step(sgd_step(model, g, 0.05), g, 0.05)
        one_full = sgd_step(model, g, 0.1)
        np.testing.assert_allclose(two_half.weights, one_full.weights)

    def test_empty_shard_rejected(self):
        model = init_model(SOFTMAX, 6, 3)
        with pytest.raises(ValueError):
            local_gradient(model, self.data, 10**4, derive_stream(1))
