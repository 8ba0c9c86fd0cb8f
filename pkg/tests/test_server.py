"""Tests for effgcn MCP server tool functions.

The ``@mcp.tool`` decorator wraps each function in a ``FunctionTool``
object. The underlying callable is available via the ``.fn`` attribute.
"""

import unittest

from effgcn.server import (
    check_scaling as _check_scaling_tool,
    get_defaults as _get_defaults_tool,
    plan_architecture as _plan_architecture_tool,
    profile_architecture as _profile_architecture_tool,
    receptive_field_sweep as _receptive_field_sweep_tool,
    set_defaults as _set_defaults_tool,
)
from effgcn.telemetry.audit_logger import get_audit_logger

# Unwrap FunctionTool -> original callable
check_scaling = _check_scaling_tool.fn
get_defaults = _get_defaults_tool.fn
plan_architecture = _plan_architecture_tool.fn
profile_architecture = _profile_architecture_tool.fn
receptive_field_sweep = _receptive_field_sweep_tool.fn
set_defaults = _set_defaults_tool.fn


class TestPlanArchitecture(unittest.TestCase):
    """Tests for the plan_architecture MCP tool."""

    def test_b0_defaults(self):
        result = plan_architecture()
        self.assertEqual(result["plan"]["stage_channels"], [48, 16, 64, 128])
        self.assertEqual(result["plan"]["layer_kind"], "sg")
        self.assertEqual(len(result["blocks"]), 5)

    def test_b2(self):
        result = plan_architecture(phi=2)
        self.assertEqual(result["plan"]["stage_channels"], [64, 32, 96, 192])
        self.assertEqual(result["plan"]["stage_depths"], [1, 1, 2, 2])

    def test_per_branch_blocks(self):
        blocks = plan_architecture(fusion_stage=3)["blocks"]
        self.assertEqual([b["per_branch"] for b in blocks], [True, True, True, True, False])

    def test_unknown_layer_returns_error(self):
        result = plan_architecture(layer="wide")
        self.assertIn("error", result)
        self.assertIn("wide", result["error"])

    def test_constraint_violation(self):
        self.assertIn("error", plan_architecture(phi=1, alpha=1.4, beta=1.4))
        result = plan_architecture(phi=1, alpha=1.4, beta=1.4, allow_unconstrained=True)
        self.assertNotIn("error", result)

    def test_branch_subset(self):
        result = plan_architecture(branches=["bone", "joint"])
        self.assertEqual(result["plan"]["branches"], ["joint", "bone"])


class TestProfileArchitecture(unittest.TestCase):
    """Tests for the profile_architecture MCP tool."""

    def test_b0_totals(self):
        result = profile_architecture()
        self.assertEqual(result["total_params"], 280_593)
        self.assertEqual(result["total_flops"], 2 * 1_494_298_880)
        self.assertIn("1 MAC = 1 FLOP", result["convention"])
        self.assertEqual(result["per_block"][-1]["block"], "fc")

    def test_bodies_and_classes(self):
        result = profile_architecture(bodies=1, num_classes=10)
        self.assertEqual(result["total_flops"], 1_494_298_880 - 50 * 128)
        self.assertEqual(result["total_params"], 280_593 - 50 * 129)

    def test_layer_variants(self):
        self.assertEqual(profile_architecture(layer="basic")["total_params"], 337_745)
        self.assertEqual(profile_architecture(branches=["joint"])["total_params"], 175_559)

    def test_invalid_frames(self):
        self.assertIn("error", profile_architecture(frames=0))


class TestCheckScaling(unittest.TestCase):
    def test_default_pair_passes(self):
        result = check_scaling()
        self.assertTrue(result["passed"])
        self.assertAlmostEqual(result["product"], 1.944)

    def test_failing_pair(self):
        result = check_scaling(alpha=1.4, beta=1.4)
        self.assertFalse(result["passed"])
        self.assertAlmostEqual(result["residual"], 0.744)

    def test_invalid_pair(self):
        self.assertIn("error", check_scaling(alpha=0.5, beta=1.0))


class TestReceptiveFieldSweep(unittest.TestCase):
    def test_grid_order(self):
        cells = receptive_field_sweep(distances=[1, 2], kernels=[3, 5, 7])["cells"]
        self.assertEqual([(c["D"], c["L"]) for c in cells],
                         [(1, 3), (1, 5), (1, 7), (2, 3), (2, 5), (2, 7)])
        self.assertLess(cells[0]["params"], cells[1]["params"])

    def test_default_grid(self):
        self.assertEqual(len(receptive_field_sweep()["cells"]), 25)

    def test_even_kernel(self):
        self.assertIn("error", receptive_field_sweep(kernels=[4]))


class TestDefaults:
    def test_get_defaults(self):
        result = get_defaults()
        assert result["config"]["layer"] == "sg"
        assert "config_warnings" not in result

    def test_set_defaults_persists(self, isolated_environment):
        result = set_defaults({"layer": "sep", "kernel": 7})
        assert result["config"]["layer"] == "sep"
        assert (isolated_environment / "config.json").exists()
        plan = plan_architecture()["plan"]
        assert plan["layer_kind"] == "sep"
        assert plan["L"] == 7

    def test_set_defaults_rejects_bad_input(self):
        assert "error" in set_defaults({"width": 3})
        assert "error" in set_defaults({"kernel": "7"})
        assert get_defaults()["config"]["kernel"] == 5

    def test_malformed_user_config_reported(self, isolated_environment):
        (isolated_environment / "config.json").write_text("[1, 2]")
        assert get_defaults()["config_warnings"]


def test_tool_calls_are_audited():
    check_scaling()
    plan_architecture(layer="wide")
    entries = get_audit_logger().get_recent_entries()
    assert [e.action for e in entries] == ["tool:check_scaling", "tool:plan_architecture"]
    assert [e.status for e in entries] == ["ok", "error"]
