"""Tests for the input branches and the sequence file format."""

import json
import math
import struct
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pytest

from effgcn.core.container import decode_tensor, encode_tensor, read_tensor, write_tensor
from effgcn.core.errors import ArgumentError, FormatError
from effgcn.graph import chain_graph, ntu_graph
from effgcn.preprocess import (
    BranchInput,
    RawSequence,
    assemble_branches,
    bone_features,
    infer_valid_frames,
    load_sequence,
    motion_velocities,
    pad_frames,
    relative_positions,
    save_sequence,
    sidecar_path,
    stack_branches,
)


def random_sequence(rng: np.random.Generator, frames: int = 12, joints: int = 25,
                    bodies: int = 1) -> np.ndarray:
    return rng.normal(size=(3, frames, joints, bodies))


class TestRawSequence(unittest.TestCase):
    """Shape and padding invariants."""

    def test_three_dims_gets_body_axis(self):
        seq = RawSequence(np.ones((3, 4, 5)))
        self.assertEqual(seq.coords.shape, (3, 4, 5, 1))
        self.assertEqual(seq.valid_frames, 4)

    def test_wrong_channel_count(self):
        with self.assertRaises(ArgumentError):
            RawSequence(np.ones((2, 4, 5, 1)))

    def test_nonzero_padding_rejected(self):
        with self.assertRaises(ArgumentError):
            RawSequence(np.ones((3, 4, 5, 1)), valid_frames=2)

    def test_valid_frames_inferred(self):
        coords = np.zeros((3, 6, 2, 1))
        coords[0, 3, 1, 0] = 1.0
        self.assertEqual(infer_valid_frames(coords), 4)
        self.assertEqual(RawSequence(coords).valid_frames, 4)

    def test_active_bodies(self):
        coords = np.zeros((3, 4, 2, 2))
        coords[:, :, :, 1] = 1.0
        self.assertEqual(RawSequence(coords).active_bodies(), [1])
        self.assertEqual(RawSequence(np.zeros((3, 4, 2, 2))).active_bodies(), [0])

    def test_pad_frames(self):
        seq = pad_frames(RawSequence(np.ones((3, 4, 5, 1)), label=2), 6)
        self.assertEqual(seq.num_frames, 6)
        self.assertEqual(seq.valid_frames, 4)
        self.assertEqual(seq.label, 2)
        self.assertFalse(np.any(seq.coords[:, 4:]))

    def test_pad_frames_too_long(self):
        with self.assertRaises(ArgumentError):
            pad_frames(RawSequence(np.ones((3, 8, 5, 1))), 6)


class TestRelativePositions:
    """Positions relative to the center joint."""

    def test_center_is_zero(self):
        coords = random_sequence(np.random.default_rng(0))
        out = relative_positions(coords, 1)
        np.testing.assert_array_equal(out[:, :, 1], 0.0)

    def test_direct_subtraction(self):
        coords = np.zeros((3, 1, 2))
        coords[:, 0, 0] = [0.5, 0.5, 0.5]
        coords[:, 0, 1] = [1.0, 2.0, 3.0]
        out = relative_positions(coords, 0)
        np.testing.assert_allclose(out[:, 0, 1], [0.5, 1.5, 2.5])

    def test_center_out_of_range(self):
        with pytest.raises(ArgumentError):
            relative_positions(np.zeros((3, 2, 4)), 4)

    def test_bodies_are_independent(self):
        coords = np.zeros((3, 1, 2, 2))
        coords[:, 0, 0, 1] = 5.0
        out = relative_positions(coords, 0)
        np.testing.assert_array_equal(out[..., 0], 0.0)
        np.testing.assert_allclose(out[:, 0, 1, 1], [-5.0, -5.0, -5.0])


class TestMotionVelocities:
    """Fast and slow frame differences."""

    def test_constant_sequence(self):
        out = motion_velocities(np.ones((3, 5, 4)))
        assert out.shape == (6, 5, 4)
        assert not np.any(out)

    def test_linear_motion(self):
        coords = np.zeros((3, 6, 1))
        coords[0, :, 0] = np.arange(6)
        out = motion_velocities(coords)
        np.testing.assert_allclose(out[0, :4, 0], 2.0)
        np.testing.assert_allclose(out[3, :5, 0], 1.0)
        np.testing.assert_array_equal(out[:3, 4:], 0.0)
        np.testing.assert_array_equal(out[3:, 5:], 0.0)

    def test_too_few_frames(self):
        with pytest.raises(ArgumentError):
            motion_velocities(np.ones((3, 2, 4)))

    def test_telescoping_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            coords = random_sequence(rng, frames=int(rng.integers(3, 20)), joints=5)
            out = motion_velocities(coords)
            fast, slow = out[:3], out[3:]
            np.testing.assert_allclose(fast[:, :-2], slow[:, :-2] + slow[:, 1:-1], atol=1e-12)


class TestBoneFeatures:
    """Bone vectors and their direction angles."""

    def test_axis_aligned_bone(self):
        graph = chain_graph(2, center=0)
        coords = np.zeros((3, 1, 2))
        coords[0, 0, 1] = 1.0
        out = bone_features(coords, graph)
        np.testing.assert_allclose(out[:3, 0, 1], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(out[3:, 0, 1], [0.0, math.pi / 2, math.pi / 2])

    def test_degenerate_bone_angles(self):
        out = bone_features(np.zeros((3, 2, 3)), chain_graph(3))
        np.testing.assert_allclose(out[3:], math.pi / 2)

    def test_center_self_bone(self):
        graph = ntu_graph()
        coords = random_sequence(np.random.default_rng(2))
        out = bone_features(coords, graph)
        np.testing.assert_array_equal(out[:3, :, graph.center], 0.0)
        np.testing.assert_allclose(out[3:, :, graph.center], math.pi / 2)

    def test_joint_count_mismatch(self):
        with pytest.raises(ArgumentError):
            bone_features(np.zeros((3, 2, 4)), chain_graph(3))

    def test_direction_cosine_identity(self):
        graph = ntu_graph()
        coords = random_sequence(np.random.default_rng(4), frames=6)
        out = bone_features(coords, graph)
        cosines = np.cos(out[3:])
        mask = np.arange(graph.num_joints) != graph.center
        total = np.sum(cosines ** 2, axis=0)[:, mask]
        np.testing.assert_allclose(total, 1.0, atol=1e-10)

    def test_angles_match_scalar_recomputation(self):
        graph = ntu_graph()
        coords = random_sequence(np.random.default_rng(5), frames=3)[..., 0]
        out = bone_features(coords, graph)
        for joint in range(graph.num_joints):
            if joint == graph.center:
                continue
            for t in range(3):
                bone = coords[:, t, joint] - coords[:, t, graph.parents[joint]]
                norm = math.sqrt(float(np.dot(bone, bone)))
                for w in range(3):
                    expected = math.acos(bone[w] / norm)
                    assert out[3 + w, t, joint] == pytest.approx(expected, abs=1e-10)


class TestAssembleBranches:
    """The three 6-channel branches."""

    def test_shapes_per_body(self):
        seq = RawSequence(random_sequence(np.random.default_rng(6), frames=8, bodies=2))
        branches = assemble_branches(seq, ntu_graph())
        assert len(branches) == 2
        for b in branches:
            assert b.joint.shape == (6, 8, 25)
            assert b.velocity.shape == (6, 8, 25)
            assert b.bone.shape == (6, 8, 25)

    def test_all_zero_sequence(self):
        seq = RawSequence(np.zeros((3, 5, 25, 1)))
        (b,) = assemble_branches(seq, ntu_graph())
        assert not np.any(b.joint)
        assert not np.any(b.velocity)
        assert not np.any(b.bone[:3])
        np.testing.assert_allclose(b.bone[3:], math.pi / 2)

    def test_absolute_channels_recover_coords(self):
        coords = random_sequence(np.random.default_rng(7), frames=5)
        (b,) = assemble_branches(RawSequence(coords), ntu_graph())
        np.testing.assert_array_equal(b.joint[:3], coords[..., 0])

    def test_stack_branches_selection(self):
        seq = RawSequence(random_sequence(np.random.default_rng(8), frames=5, bodies=2))
        stacked = stack_branches(seq, ntu_graph(), ("joint", "bone"))
        assert stacked.shape == (2, 2, 6, 5, 25)

    def test_unknown_branch(self):
        b = BranchInput(np.zeros((6, 3, 2)), np.zeros((6, 3, 2)), np.zeros((6, 3, 2)))
        with pytest.raises(ArgumentError):
            b.select(("joint", "acceleration"))

    def test_properties_over_random_sequences(self):
        """Invariants over 100 random sequences, translated and untranslated."""
        graph = ntu_graph()
        rng = np.random.default_rng(9)
        for _ in range(100):
            frames = int(rng.integers(3, 10))
            valid = int(rng.integers(3, frames + 1))
            coords = np.zeros((3, frames, 25, 1))
            coords[:, :valid] = rng.normal(size=(3, valid, 25, 1))
            seq = RawSequence(coords)
            shift = rng.normal(size=(3, 1, 1, 1))
            moved_coords = coords.copy()
            moved_coords[:, :valid] += shift
            moved = RawSequence(moved_coords)
            (b,) = assemble_branches(seq, graph)
            (m,) = assemble_branches(moved, graph)

            np.testing.assert_array_equal(b.joint[3:, :, graph.center], 0.0)
            assert b.bone[3:].min() >= 0.0
            assert b.bone[3:].max() <= math.pi
            np.testing.assert_array_equal(b.velocity[:, valid:], 0.0)

            valid_part = slice(0, valid)
            np.testing.assert_allclose(m.joint[3:, valid_part], b.joint[3:, valid_part], atol=1e-9)
            np.testing.assert_allclose(m.bone[:3, valid_part], b.bone[:3, valid_part], atol=1e-9)
            inner = slice(0, max(valid - 2, 0))
            np.testing.assert_allclose(m.velocity[:, inner], b.velocity[:, inner], atol=1e-9)
            assert not np.allclose(m.joint[:3, valid_part], b.joint[:3, valid_part])


class TestTensorContainer(unittest.TestCase):
    """The SKTN container."""

    def test_header_layout(self):
        data = encode_tensor(np.zeros((2, 3), dtype=np.float32))
        self.assertEqual(data[:4], b"SKTN")
        self.assertEqual(struct.unpack_from("<I", data, 4)[0], 1)
        self.assertEqual(data[8], 0)
        self.assertEqual(data[9], 2)
        self.assertEqual(struct.unpack_from("<2I", data, 10), (2, 3))
        self.assertEqual(len(data), 18 + 6 * 4)

    def test_decode_returns_next_offset(self):
        a = encode_tensor(np.arange(3, dtype=np.float64))
        b = encode_tensor(np.ones((2, 2), dtype=np.float32))
        first, pos = decode_tensor(a + b)
        second, end = decode_tensor(a + b, pos)
        np.testing.assert_array_equal(first, [0, 1, 2])
        self.assertEqual(second.dtype, np.float32)
        self.assertEqual(end, len(a) + len(b))

    def test_bad_magic(self):
        data = b"XXXX" + encode_tensor(np.zeros(2))[4:]
        with self.assertRaises(FormatError) as ctx:
            decode_tensor(data)
        self.assertEqual(ctx.exception.offset, 0)

    def test_bad_version(self):
        data = bytearray(encode_tensor(np.zeros(2)))
        data[4] = 7
        with self.assertRaises(FormatError) as ctx:
            decode_tensor(bytes(data))
        self.assertEqual(ctx.exception.offset, 4)

    def test_trailing_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "t.sktn"
            path.write_bytes(encode_tensor(np.zeros(2)) + b"\x00")
            with self.assertRaises(FormatError):
                read_tensor(path)


class TestSequenceFiles(unittest.TestCase):
    """Sequence files and their sidecars."""

    def test_round_trip_with_label(self):
        coords = random_sequence(np.random.default_rng(10), frames=7, joints=5, bodies=2)
        with tempfile.TemporaryDirectory() as tmp:
            path = save_sequence(Path(tmp) / "clip.sktn", RawSequence(coords, label=3))
            self.assertTrue(sidecar_path(path).exists())
            self.assertEqual(sidecar_path(path).name, "clip.meta.json")
            loaded = load_sequence(path)
        np.testing.assert_array_equal(loaded.coords, coords)
        self.assertEqual(loaded.label, 3)
        self.assertEqual(loaded.valid_frames, 7)

    def test_missing_sidecar_gives_no_label(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "clip.sktn"
            write_tensor(path, np.ones((3, 4, 5, 1)))
            self.assertIsNone(load_sequence(path).label)

    def test_wrong_coordinate_count(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "clip.sktn"
            write_tensor(path, np.ones((4, 4, 5, 1)))
            with self.assertRaises(FormatError):
                load_sequence(path)

    def test_truncated_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "clip.sktn"
            save_sequence(path, RawSequence(np.ones((3, 4, 5, 1))))
            path.write_bytes(path.read_bytes()[:-10])
            with self.assertRaises(FormatError):
                load_sequence(path)

    def test_bad_sidecar_label(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_sequence(Path(tmp) / "clip.sktn", RawSequence(np.ones((3, 4, 5, 1))))
            sidecar_path(path).write_text(json.dumps({"label": "run"}))
            with self.assertRaises(FormatError):
                load_sequence(path)

    def test_boolean_sidecar_label(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_sequence(Path(tmp) / "clip.sktn", RawSequence(np.ones((3, 4, 5, 1))))
            for value in (True, False):
                sidecar_path(path).write_text(json.dumps({"label": value}))
                with self.assertRaises(FormatError):
                    load_sequence(path)
