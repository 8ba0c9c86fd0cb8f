"""Tests for loss, optimization, datasets and the training loop."""

import math
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pytest

from effgcn.arch import make_arch
from effgcn.blocks import build_network
from effgcn.core.errors import ArgumentError, DataError, FormatError, TrainingDivergedError
from effgcn.core.models import Metrics, ScalingConfig, TrainConfig
from effgcn.graph import chain_graph, ntu_graph
from effgcn.preprocess.features import RawSequence
from effgcn.telemetry.audit_logger import AuditLogger
from effgcn.tensor import Parameter, Tensor
from effgcn.train import (
    SGD,
    BatchLoader,
    SkeletonDataset,
    class_activation_map,
    confusion_matrix,
    cross_entropy,
    evaluate,
    lr_at_epoch,
    read_train_log,
    restore_network,
    softmax,
    sgd_nesterov_step,
    softmax_cross_entropy,
    synth_dataset,
    synth_splits,
    train,
    write_cam_csv,
)
from effgcn.train.synth import class_joints, rest_pose


FRAMES = 16
JOINTS = 7


def mini_network(num_classes=3, seed=0):
    plan = make_arch(ScalingConfig(phi=0), num_classes=num_classes).shrink(2)
    return build_network(plan, chain_graph(JOINTS), frames=FRAMES, seed=seed)


def small_dataset(seed=0, per_class=4):
    return synth_dataset(3, per_class, FRAMES, JOINTS, seed=seed)


class TestSoftmaxCrossEntropy:
    def test_uniform_logits(self):
        loss, grad = softmax_cross_entropy(np.zeros(4), 0)
        assert loss == pytest.approx(math.log(4))
        np.testing.assert_allclose(grad, [-0.75, 0.25, 0.25, 0.25])

    def test_confident_correct(self):
        loss, _ = softmax_cross_entropy(np.array([20.0, 0.0, 0.0, 0.0]), 0)
        assert loss < 1e-8

    def test_softmax_rows_and_shift_invariance(self):
        logits = np.random.default_rng(0).normal(scale=3.0, size=(6, 5))
        probs = softmax(logits)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, rtol=0, atol=1e-12)
        np.testing.assert_allclose(softmax(logits + 7.25), probs, rtol=1e-12, atol=1e-15)

    def test_large_logits_stay_finite(self):
        loss, grad = softmax_cross_entropy(np.array([1000.0, 0.0]), 1)
        assert loss == pytest.approx(1000.0)
        assert np.all(np.isfinite(grad))

    def test_batch_mean(self):
        logits = np.array([[0.0, 0.0], [0.0, 0.0]])
        loss, grad = softmax_cross_entropy(logits, np.array([0, 1]))
        assert loss == pytest.approx(math.log(2))
        np.testing.assert_allclose(grad, [[-0.25, 0.25], [0.25, -0.25]])

    @pytest.mark.parametrize("target", [-1, 4])
    def test_target_out_of_range(self, target):
        with pytest.raises(ArgumentError):
            softmax_cross_entropy(np.zeros(4), target)

    def test_float_targets_rejected(self):
        with pytest.raises(ArgumentError):
            softmax_cross_entropy(np.zeros((1, 4)), np.array([0.0]))

    def test_tape_op_gradient(self):
        logits = Tensor(np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]]), requires_grad=True)
        loss = cross_entropy(logits, np.array([2, 0]))
        loss.backward()
        _, expected = softmax_cross_entropy(logits.data, np.array([2, 0]))
        np.testing.assert_allclose(logits.grad, expected, rtol=1e-6)


class TestLearningRate(unittest.TestCase):
    """Linear warmup then cosine decay."""

    def setUp(self):
        self.config = TrainConfig()

    def test_schedule_points(self):
        self.assertEqual(lr_at_epoch(0, self.config), 0.0)
        self.assertAlmostEqual(lr_at_epoch(5, self.config), 0.05)
        self.assertAlmostEqual(lr_at_epoch(10, self.config), 0.1)
        self.assertAlmostEqual(lr_at_epoch(40, self.config), 0.05)
        self.assertAlmostEqual(lr_at_epoch(69, self.config),
                               0.1 * 0.5 * (1 + math.cos(59 * math.pi / 60)))

    def test_monotone_after_warmup(self):
        rates = [lr_at_epoch(e, self.config) for e in range(10, 70)]
        self.assertTrue(all(a > b for a, b in zip(rates, rates[1:])))

    def test_no_warmup(self):
        config = TrainConfig(epochs=4, warmup_epochs=0, base_lr=0.2)
        self.assertAlmostEqual(lr_at_epoch(0, config), 0.2)

    def test_epoch_out_of_range(self):
        with self.assertRaises(ArgumentError):
            lr_at_epoch(70, self.config)
        with self.assertRaises(ArgumentError):
            lr_at_epoch(-1, self.config)

    def test_invalid_config(self):
        with self.assertRaises(ArgumentError):
            TrainConfig(epochs=5, warmup_epochs=5).validate()
        with self.assertRaises(ArgumentError):
            TrainConfig(dropout=1.0).validate()


class TestNesterovStep:
    def test_plain_gradient_step(self):
        p, v = np.array([1.0]), np.zeros(1)
        sgd_nesterov_step([p], [np.array([0.5])], [v], lr=0.1, momentum=0.0, weight_decay=0.0)
        assert p[0] == pytest.approx(0.95)

    def test_momentum_trace(self):
        p, v = np.array([1.0]), np.zeros(1)
        g = np.array([1.0])
        sgd_nesterov_step([p], [g], [v], lr=0.1, momentum=0.9, weight_decay=0.0)
        assert v[0] == pytest.approx(1.0)
        assert p[0] == pytest.approx(0.81)
        sgd_nesterov_step([p], [g], [v], lr=0.1, momentum=0.9, weight_decay=0.0)
        assert v[0] == pytest.approx(1.9)
        assert p[0] == pytest.approx(0.539)

    def test_decay_mask(self):
        decayed, kept = np.array([2.0]), np.array([2.0])
        zero = np.zeros(1)
        sgd_nesterov_step([decayed, kept], [zero, zero], [np.zeros(1), np.zeros(1)],
                          lr=1.0, momentum=0.0, weight_decay=0.1, decay_mask=[True, False])
        assert decayed[0] == pytest.approx(1.8)
        assert kept[0] == 2.0

    def test_mismatched_lists(self):
        with pytest.raises(ArgumentError):
            sgd_nesterov_step([np.zeros(1)], [], [np.zeros(1)], 0.1, 0.9, 0.0)
        with pytest.raises(ArgumentError):
            sgd_nesterov_step([np.zeros(2)], [np.zeros(3)], [np.zeros(2)], 0.1, 0.9, 0.0)


class TestSGD:
    def test_skips_parameters_without_gradient(self):
        weight = Parameter(np.ones(2))
        bias = Parameter(np.ones(2), decay=False)
        optimizer = SGD({"weight": weight, "bias": bias}, momentum=0.0, weight_decay=0.5)
        weight.grad = np.zeros(2, dtype=weight.dtype)
        optimizer.step(1.0)
        np.testing.assert_allclose(weight.data, [0.5, 0.5])
        np.testing.assert_allclose(bias.data, [1.0, 1.0])

    def test_norm_terms_skip_decay(self):
        bias = Parameter(np.ones(1), decay=False)
        optimizer = SGD({"bias": bias}, momentum=0.0, weight_decay=0.5)
        bias.grad = np.zeros(1, dtype=bias.dtype)
        optimizer.step(1.0)
        assert bias.data[0] == 1.0
        assert not optimizer.decays("bias")
        assert SGD({"bias": bias}, exclude_norm_decay=False).decays("bias")

    def test_network_decay_tags(self):
        registry = mini_network().parameter_registry()
        optimizer = SGD(registry)
        for name in registry:
            if name.endswith("edge_importance") or ".bn" in name or name.endswith("bias"):
                assert not optimizer.decays(name), name
        assert optimizer.decays("fc.weight")

    def test_empty_registry(self):
        with pytest.raises(ArgumentError):
            SGD({})


class TestMetrics(unittest.TestCase):
    def test_confusion_matrix(self):
        matrix = confusion_matrix(np.array([0, 1, 1, 2]), np.array([0, 1, 2, 2]), 3)
        np.testing.assert_array_equal(matrix, [[1, 0, 0], [0, 1, 1], [0, 0, 1]])
        metrics = Metrics.from_confusion(matrix, loss=0.5)
        self.assertAlmostEqual(metrics.top1_accuracy, 0.75)
        self.assertEqual(metrics.num_samples, 4)

    def test_confusion_rejects_unknown_class(self):
        with self.assertRaises(DataError):
            confusion_matrix(np.array([0, 3]), np.array([0, 1]), 3)
        with self.assertRaises(ArgumentError):
            confusion_matrix(np.array([0]), np.array([0, 1]), 3)

    def test_empty_confusion(self):
        self.assertEqual(Metrics.from_confusion(np.zeros((2, 2))).top1_accuracy, 0.0)

    def test_dict_round_trip(self):
        metrics = Metrics.from_confusion(np.eye(3, dtype=int) * 2, loss=0.1)
        restored = Metrics.from_dict(metrics.to_dict())
        self.assertEqual(restored.top1_accuracy, 1.0)
        np.testing.assert_array_equal(restored.confusion, metrics.confusion)


class TestSynth:
    """Synthetic oscillating-joint actions."""

    def test_balanced_labels(self):
        dataset = synth_dataset(4, 5, 20, 25, seed=0)
        assert len(dataset) == 20
        assert np.bincount(dataset.labels).tolist() == [5, 5, 5, 5]
        assert dataset.num_classes == 4
        assert dataset[0].coords.shape == (3, 20, 25, 1)

    def test_deterministic(self):
        a = synth_dataset(3, 2, 20, 25, seed=7)
        b = synth_dataset(3, 2, 20, 25, seed=7)
        c = synth_dataset(3, 2, 20, 25, seed=8)
        for x, y in zip(a.sequences, b.sequences):
            np.testing.assert_array_equal(x.coords, y.coords)
        assert not np.array_equal(a[0].coords, c[0].coords)

    def test_moving_joints(self):
        seq = synth_dataset(2, 1, 60, 25, seed=0)[1]
        spread = seq.coords[..., 0].std(axis=1).max(axis=0)
        moving = class_joints(1, 25)
        still = np.setdiff1d(np.arange(25), moving)
        assert spread[moving].min() > 10 * spread[still].max()

    def test_classes_separate(self):
        """Class-mean trajectories lie far apart relative to within-class spread."""
        dataset = synth_dataset(4, 10, 20, 25, seed=3)
        coords = np.stack([seq.coords for seq in dataset.sequences])
        coords = coords.reshape(len(dataset), -1)
        labels = dataset.labels
        means = np.stack([coords[labels == k].mean(axis=0) for k in range(4)])
        spread = np.sqrt(np.mean([
            np.sum((coords[i] - means[labels[i]]) ** 2) for i in range(len(dataset))]))
        between = [np.linalg.norm(means[a] - means[b]) for a in range(4) for b in range(a + 1, 4)]
        assert np.mean(between) > 5 * spread
        assert min(between) > 5 * spread

    def test_rest_pose_shared(self):
        np.testing.assert_array_equal(rest_pose(25), rest_pose(25))

    def test_splits(self):
        splits = synth_splits(3, 8, 20, 25, seed=0)
        assert len(splits["train"]) == 24
        assert len(splits["eval"]) == 6
        assert not np.array_equal(splits["train"][0].coords, splits["eval"][0].coords)

    def test_invalid_sizes(self):
        with pytest.raises(ArgumentError):
            synth_dataset(1, 5, 20, 25)
        with pytest.raises(ArgumentError):
            synth_dataset(3, 0, 20, 25)


class TestSkeletonDataset(unittest.TestCase):
    def test_save_load(self):
        dataset = small_dataset()
        with tempfile.TemporaryDirectory() as tmp:
            directory = dataset.save(tmp, "train")
            self.assertTrue((directory / "c000_00000.sktn").exists())
            self.assertTrue((directory / "c000_00000.meta.json").exists())
            loaded = SkeletonDataset.load(tmp, "train")
        self.assertEqual(loaded.sample_ids, sorted(dataset.sample_ids))
        for sid in dataset.sample_ids:
            original = dataset[dataset.index_of(sid)]
            restored = loaded[loaded.index_of(sid)]
            np.testing.assert_array_equal(restored.coords, original.coords)
            self.assertEqual(restored.label, original.label)

    def test_missing_split(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(DataError):
                SkeletonDataset.load(tmp, "eval")
            (Path(tmp) / "eval").mkdir()
            with self.assertRaises(DataError):
                SkeletonDataset.load(tmp, "eval")

    def test_duplicate_ids(self):
        seq = small_dataset()[0]
        with self.assertRaises(ArgumentError):
            SkeletonDataset([seq, seq], sample_ids=["a", "a"])

    def test_unlabelled(self):
        dataset = SkeletonDataset([RawSequence(np.ones((3, 4, 5)))])
        with self.assertRaises(DataError):
            _ = dataset.labels

    def test_check_labels(self):
        with self.assertRaises(DataError):
            small_dataset().check_labels(2)

    def test_features_padded(self):
        dataset = synth_dataset(2, 1, 10, JOINTS)
        features, mask = dataset.features(0, chain_graph(JOINTS), FRAMES)
        self.assertEqual(features.shape, (1, 3, 6, FRAMES, JOINTS))
        self.assertTrue(np.all(features[:, :2, :, 10:] == 0))
        self.assertTrue(np.all(features[:, 2, :3, 10:] == 0))
        np.testing.assert_allclose(features[:, 2, 3:, 10:], np.pi / 2)
        self.assertEqual(mask.tolist(), [True])


class TestBatchLoader:
    """Mini-batch assembly on the prefetch thread."""

    def setup_method(self):
        self.dataset = small_dataset(per_class=3)
        self.graph = chain_graph(JOINTS)

    def test_batch_shapes(self):
        loader = BatchLoader(self.dataset, self.graph, 4, FRAMES)
        batches = list(loader)
        assert len(loader) == 3
        assert [len(b.labels) for b in batches] == [4, 4, 1]
        assert batches[0].inputs.shape == (4, 1, 3, 6, FRAMES, JOINTS)
        assert batches[0].inputs.dtype == np.float32
        assert batches[0].body_mask.shape == (4, 1)

    def test_sequential_order(self):
        ids = [sid for b in BatchLoader(self.dataset, self.graph, 4, FRAMES) for sid in b.sample_ids]
        assert ids == self.dataset.sample_ids

    def test_shuffle_covers_every_sample(self):
        def order(seed):
            loader = BatchLoader(self.dataset, self.graph, 4, FRAMES, shuffle=True,
                                 rng=np.random.default_rng(seed))
            return [sid for b in loader for sid in b.sample_ids]

        assert order(3) == order(3)
        assert sorted(order(3)) == sorted(self.dataset.sample_ids)
        assert order(3) != self.dataset.sample_ids

    def test_prefetch_matches_inline(self):
        threaded = list(BatchLoader(self.dataset, self.graph, 4, FRAMES))
        inline = list(BatchLoader(self.dataset, self.graph, 4, FRAMES, prefetch=False))
        for a, b in zip(threaded, inline):
            np.testing.assert_array_equal(a.inputs, b.inputs)
            assert a.sample_ids == b.sample_ids

    def test_worker_errors_surface(self):
        loader = BatchLoader(self.dataset, self.graph, 4, FRAMES - 4)
        with pytest.raises(ArgumentError):
            list(loader)

    def test_invalid_arguments(self):
        with pytest.raises(ArgumentError):
            BatchLoader(self.dataset, self.graph, 4, FRAMES, shuffle=True)
        with pytest.raises(ArgumentError):
            BatchLoader(self.dataset, self.graph, 0, FRAMES)
        with pytest.raises(ArgumentError):
            BatchLoader(SkeletonDataset([]), self.graph, 4, FRAMES)


class TestEvaluate:
    def test_metrics_shape(self):
        network = mini_network()
        network.train()
        metrics = evaluate(network, small_dataset(), batch_size=5)
        assert metrics.num_samples == 12
        assert metrics.confusion.shape == (3, 3)
        assert 0.0 <= metrics.top1_accuracy <= 1.0
        assert math.isfinite(metrics.loss)
        assert network.training

    def test_sequential_matches_batched(self):
        network = mini_network()
        dataset = small_dataset()
        one = evaluate(network, dataset, batch_size=1)
        many = evaluate(network, dataset, batch_size=12)
        np.testing.assert_array_equal(one.confusion, many.confusion)
        assert one.loss == pytest.approx(many.loss, rel=1e-4)

    def test_unknown_class(self):
        with pytest.raises(DataError):
            evaluate(mini_network(num_classes=2), small_dataset())

    def test_perfect_predictor(self):
        network = mini_network()
        dataset = small_dataset()
        upcoming = iter(dataset.labels.tolist())

        def oracle(inputs, body_mask=None):
            targets = [next(upcoming) for _ in range(inputs.shape[0])]
            return Tensor(10.0 * np.eye(3)[targets])

        network.forward_bodies = oracle
        metrics = evaluate(network, dataset, batch_size=5)
        np.testing.assert_array_equal(metrics.confusion, np.diag(np.bincount(dataset.labels)))
        assert metrics.top1_accuracy == 1.0

    def test_constant_predictor(self):
        network = mini_network()
        network.fc.weight.data[...] = 0.0
        network.fc.bias.data[...] = [0.0, 5.0, 0.0]
        metrics = evaluate(network, small_dataset())
        assert np.count_nonzero(metrics.confusion.sum(axis=0)) == 1
        assert metrics.confusion[:, 1].sum() == 12
        assert metrics.top1_accuracy == pytest.approx(1 / 3)


class TestTrain:
    """Short runs of the training loop on the mini network."""

    def config(self, **kwargs):
        defaults = dict(epochs=2, warmup_epochs=1, batch_size=4, seed=0)
        defaults.update(kwargs)
        return TrainConfig(**defaults)

    def test_outputs_written(self, tmp_path):
        network = mini_network()
        logger = AuditLogger(tmp_path / "audit.log")
        result = train(network, small_dataset(), self.config(), out_dir=tmp_path / "run",
                       eval_dataset=small_dataset(seed=1, per_class=2), audit_logger=logger)
        assert len(result.history) == 2
        assert result.history[0].lr == 0.0
        assert result.checkpoint_path.exists()
        assert (tmp_path / "run" / "plan.json").exists()
        log = read_train_log(result.log_path)
        assert [r.to_dict() for r in log] == [r.to_dict() for r in result.history]
        assert all(r.eval_acc is not None for r in log)
        epochs = logger.get_entries_for_run(result.run_id)
        assert [e.metadata["epoch"] for e in epochs] == [0, 1]
        assert all(e.action == "train:epoch" for e in epochs)

    def test_logged_lr_follows_schedule(self, tmp_path):
        config = self.config(epochs=5, warmup_epochs=2)
        result = train(mini_network(), small_dataset(), config, out_dir=tmp_path)
        log = read_train_log(result.log_path)
        assert [r.epoch for r in log] == list(range(5))
        assert [r.lr for r in log] == [lr_at_epoch(e, config) for e in range(5)]

    def test_bitwise_reproducible(self):
        runs = []
        for _ in range(2):
            network = mini_network(seed=5)
            result = train(network, small_dataset(), self.config(seed=5))
            runs.append((result.history, network.state_dict()))
        (history_a, state_a), (history_b, state_b) = runs
        assert [r.to_dict() for r in history_a] == [r.to_dict() for r in history_b]
        for name in state_a:
            np.testing.assert_array_equal(state_a[name], state_b[name])

    def test_parameters_move(self):
        network = mini_network()
        before = {k: v.copy() for k, v in network.state_dict().items()}
        train(network, small_dataset(), self.config())
        after = network.state_dict()
        assert not np.array_equal(before["fc.weight"], after["fc.weight"])

    def test_restore_matches_trained(self, tmp_path):
        network = mini_network()
        result = train(network, small_dataset(), self.config(), out_dir=tmp_path)
        restored = restore_network(result.checkpoint_path)
        x = small_dataset().features(0, network.graph, FRAMES)[0][None].astype(np.float32)
        network.eval()
        np.testing.assert_array_equal(network.forward_bodies(x).data,
                                      restored.forward_bodies(x).data)

    def test_restore_errors(self, tmp_path):
        result = train(mini_network(), small_dataset(), self.config(epochs=1, warmup_epochs=0),
                       out_dir=tmp_path)
        plan_file = tmp_path / "plan.json"
        plan_file.write_text("{not json")
        with pytest.raises(FormatError):
            restore_network(result.checkpoint_path)
        plan_file.unlink()
        with pytest.raises(DataError):
            restore_network(result.checkpoint_path)

    def test_label_mismatch(self):
        with pytest.raises(DataError):
            train(mini_network(num_classes=2), small_dataset(), self.config())

    def test_divergence_reported(self):
        dataset = small_dataset()
        dataset[0].coords[:, 0, 0, 0] = np.nan
        with pytest.raises(TrainingDivergedError) as info:
            train(mini_network(), dataset, self.config())
        assert info.value.epoch == 0


class TestClassActivationMap:
    def setup_method(self):
        self.network = mini_network()
        self.sequence = small_dataset()[0]

    def test_map_shape_and_range(self):
        saliency = class_activation_map(self.network, self.sequence, 0)
        assert saliency.shape == (FRAMES // 4, JOINTS)
        assert saliency.min() >= 0.0
        assert saliency.max() == pytest.approx(1.0) or saliency.max() == 0.0

    def test_zero_classifier_weights(self):
        self.network.fc.weight.data[...] = 0.0
        saliency = class_activation_map(self.network, self.sequence, 2)
        assert saliency.shape == (FRAMES // 4, JOINTS)
        assert not saliency.any()

    def test_class_out_of_range(self):
        with pytest.raises(ArgumentError):
            class_activation_map(self.network, self.sequence, 3)

    def test_csv(self, tmp_path):
        saliency = class_activation_map(self.network, self.sequence, 1)
        lines = write_cam_csv(tmp_path / "cam.csv", saliency).read_text().splitlines()
        assert lines[0] == "frame,joint,saliency"
        assert len(lines) == 1 + saliency.size


@pytest.fixture(scope="module")
def desk_scale_run(tmp_path_factory):
    """The mini plan trained for 30 epochs on four synthetic classes."""
    splits = synth_splits(4, 100, 60, 25, seed=0)
    plan = make_arch(ScalingConfig(phi=0), num_classes=4).shrink(2)
    network = build_network(plan, ntu_graph(), frames=60, seed=0)
    result = train(network, splits["train"], TrainConfig(epochs=30, seed=0),
                   audit_logger=AuditLogger(tmp_path_factory.mktemp("desk") / "audit.log"))
    return network, splits, result


@pytest.mark.slow
def test_desk_scale_run_learns_synthetic_actions(desk_scale_run):
    network, splits, result = desk_scale_run
    assert result.final.train_acc >= 0.95
    assert evaluate(network, splits["eval"]).top1_accuracy >= 0.90


@pytest.mark.slow
def test_desk_scale_smoothed_loss_never_rises(desk_scale_run):
    """The 5-epoch moving average of training loss is non-increasing."""
    _, _, result = desk_scale_run
    losses = np.array([r.train_loss for r in result.history])
    smoothed = np.convolve(losses, np.ones(5) / 5, mode="valid")
    assert np.all(np.diff(smoothed) <= 0.0), smoothed
