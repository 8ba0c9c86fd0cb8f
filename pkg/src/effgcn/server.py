"""effgcn MCP Server.

Exposes architecture planning and complexity accounting as tools:
- Compound-scaled architecture plans
- Per-block parameter and FLOPs profiles
- The alpha^2 * beta scaling check
- Receptive-field sweeps over graph distance and temporal window
- Reading and updating the persisted defaults
"""

import time
from typing import Any, Optional

from fastmcp import FastMCP

from effgcn.arch.profiler import count_flops, receptive_sweep
from effgcn.arch.scaling import check_scaling_constraint, make_arch
from effgcn.blocks.network import plan_blocks
from effgcn.config.loader import load_config_with_warnings, update_config
from effgcn.core.errors import EffGCNError
from effgcn.core.models import BRANCH_NAMES, ArchPlan, ScalingConfig
from effgcn.telemetry.audit_logger import get_audit_logger


mcp = FastMCP(
    name="effgcn",
    instructions="""
    effgcn plans and costs graph convolutional networks for skeleton-based
    action recognition.

    Usage:
    1. check_scaling to validate an (alpha, beta) pair
    2. plan_architecture for the stage widths and depths at a given phi
    3. profile_architecture for parameters and FLOPs per block
    4. receptive_field_sweep to compare graph distances and temporal windows
    Defaults come from the user config; set_defaults changes them.
    """,
)


def _finish(tool: str, started: float, result: dict[str, Any]) -> dict[str, Any]:
    try:
        get_audit_logger().log_tool_call(
            tool, result, duration_ms=int((time.perf_counter() - started) * 1000))
    except OSError:
        pass
    return result


def _plan(
    phi: int,
    alpha: Optional[float],
    beta: Optional[float],
    layer: Optional[str],
    ratio: Optional[float],
    max_distance: Optional[int],
    kernel: Optional[int],
    num_classes: int,
    attention: Optional[str],
    fusion_stage: int,
    branches: Optional[list[str]],
    allow_unconstrained: bool,
) -> ArchPlan:
    config, _ = load_config_with_warnings()

    def pick(value, key):
        return config[key] if value is None else value

    return make_arch(
        ScalingConfig(alpha=pick(alpha, "alpha"), beta=pick(beta, "beta"), phi=phi),
        layer_kind=pick(layer, "layer"),
        max_distance=pick(max_distance, "max_distance"),
        kernel=pick(kernel, "kernel"),
        ratio=pick(ratio, "ratio"),
        num_classes=num_classes,
        attention=pick(attention, "attention"),
        fusion_stage=fusion_stage,
        branches=tuple(branches) if branches else BRANCH_NAMES,
        allow_unconstrained=allow_unconstrained,
    )


@mcp.tool
def plan_architecture(
    phi: int = 0,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    layer: Optional[str] = None,
    ratio: Optional[float] = None,
    max_distance: Optional[int] = None,
    kernel: Optional[int] = None,
    num_classes: int = 60,
    attention: Optional[str] = None,
    fusion_stage: int = 2,
    branches: Optional[list[str]] = None,
    allow_unconstrained: bool = False,
) -> dict[str, Any]:
    """Stage widths and depths of a compound-scaled model.

    Args:
        phi: Compound coefficient (0 gives B0, 4 gives B4).
        alpha: Width base; configured default when omitted.
        beta: Depth base; configured default when omitted.
        layer: TC layer kind: basic, bottle, sep, epsep or sg.
        ratio: TC layer reduction/expansion ratio.
        max_distance: Largest graph distance D with its own partition.
        kernel: Temporal window L.
        num_classes: Classifier width.
        attention: st_joint, channel, frame, joint or none.
        fusion_stage: Stages run per input branch before concatenation.
        branches: Subset of joint, velocity, bone.
        allow_unconstrained: Accept alpha/beta violating alpha^2*beta ~ 2.

    Returns:
        Dictionary with the plan and its block table.
    """
    started = time.perf_counter()
    try:
        plan = _plan(phi, alpha, beta, layer, ratio, max_distance, kernel, num_classes,
                     attention, fusion_stage, branches, allow_unconstrained)
        blocks = [{
            "name": l.name,
            "channels": l.spec.channels_out,
            "depth": l.spec.depth,
            "stride": l.spec.stride,
            "per_branch": l.per_branch,
        } for l in plan_blocks(plan, 300)]
        result = {"plan": plan.to_dict(), "blocks": blocks}
    except EffGCNError as e:
        result = {"error": str(e)}
    except Exception as e:
        result = {"error": f"Failed to plan architecture: {e}"}
    return _finish("plan_architecture", started, result)


@mcp.tool
def profile_architecture(
    phi: int = 0,
    layer: Optional[str] = None,
    ratio: Optional[float] = None,
    max_distance: Optional[int] = None,
    kernel: Optional[int] = None,
    num_classes: int = 60,
    attention: Optional[str] = None,
    fusion_stage: int = 2,
    branches: Optional[list[str]] = None,
    frames: int = 300,
    joints: int = 25,
    bodies: Optional[int] = None,
) -> dict[str, Any]:
    """Analytic parameters and FLOPs of a model, per block and in total.

    FLOPs count one multiply-accumulate as one operation and cover
    ``bodies`` bodies of ``frames`` x ``joints`` input.

    Returns:
        Dictionary with totals, the counting convention and per-block rows.
    """
    started = time.perf_counter()
    try:
        config, _ = load_config_with_warnings()
        plan = _plan(phi, None, None, layer, ratio, max_distance, kernel, num_classes,
                     attention, fusion_stage, branches, False)
        report = count_flops(plan, frames=frames, joints=joints,
                             bodies=config["bodies"] if bodies is None else bodies)
        result = {"plan": plan.to_dict(), **report.to_dict()}
    except EffGCNError as e:
        result = {"error": str(e)}
    except Exception as e:
        result = {"error": f"Failed to profile architecture: {e}"}
    return _finish("profile_architecture", started, result)


@mcp.tool
def check_scaling(alpha: float = 1.2, beta: float = 1.35, tolerance: float = 0.1) -> dict[str, Any]:
    """Check the compound-scaling constraint alpha^2 * beta ~ 2.

    Returns:
        Dictionary with the product, its distance from 2 and a pass flag.
    """
    started = time.perf_counter()
    try:
        result = check_scaling_constraint(alpha, beta, tolerance).to_dict()
    except EffGCNError as e:
        result = {"error": str(e)}
    return _finish("check_scaling", started, result)


@mcp.tool
def receptive_field_sweep(
    distances: Optional[list[int]] = None,
    kernels: Optional[list[int]] = None,
    phi: int = 0,
    layer: Optional[str] = None,
    frames: int = 300,
    joints: int = 25,
    bodies: int = 2,
) -> dict[str, Any]:
    """Parameters and FLOPs for every (D, L) pair.

    Args:
        distances: Max graph distances D (default 1..5).
        kernels: Temporal windows L (default 3, 5, 7, 9, 11).
        phi: Compound coefficient of the swept model.
        layer: TC layer kind.
        frames: Input frames T.
        joints: Joints V.
        bodies: Bodies per sample.

    Returns:
        Dictionary with one cell per pair, D-major.
    """
    started = time.perf_counter()
    try:
        template = _plan(phi, None, None, layer, None, None, None, 60, None, 2, None, False)
        cells = receptive_sweep(distances or [1, 2, 3, 4, 5], kernels or [3, 5, 7, 9, 11],
                                template, frames=frames, joints=joints, bodies=bodies)
        result = {"cells": [c.to_dict() for c in cells]}
    except EffGCNError as e:
        result = {"error": str(e)}
    except Exception as e:
        result = {"error": f"Failed to sweep: {e}"}
    return _finish("receptive_field_sweep", started, result)


@mcp.tool
def get_defaults() -> dict[str, Any]:
    """Current configuration after layering defaults, user and project files."""
    started = time.perf_counter()
    config, warnings = load_config_with_warnings()
    result: dict[str, Any] = {"config": config}
    if warnings:
        result["config_warnings"] = warnings
    return _finish("get_defaults", started, result)


@mcp.tool
def set_defaults(config: dict[str, Any]) -> dict[str, Any]:
    """Persist new defaults to the user config file.

    Args:
        config: Keys to change, e.g. {"layer": "sep", "kernel": 7}.

    Returns:
        Dictionary with the updated configuration.
    """
    started = time.perf_counter()
    try:
        result = {"config": update_config(config), "message": "Defaults updated."}
    except (KeyError, TypeError) as e:
        result = {"error": f"Invalid config: {e}"}
    except Exception as e:
        result = {"error": f"Failed to update config: {e}"}
    return _finish("set_defaults", started, result)


def main():
    """Entry point for running the MCP server."""
    mcp.run()


if __name__ == "__main__":
    main()
