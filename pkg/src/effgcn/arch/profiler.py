"""Analytic parameter and FLOPs accounting for architecture plans.

Counts follow the network construction exactly: every conv and FC carries a
bias, every BN contributes gamma and beta, each SGC layer owns one V x V
edge-importance mask per partition. Running statistics and the fixed
adjacency are not parameters.

FLOPs count one multiply-accumulate as one FLOP for pointwise, temporal,
adjacency and fully connected products. Biases, BN, activations, pooling and
elementwise attention products are excluded. Every network part runs once
per body.
"""

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..core.errors import ArgumentError
from ..core.models import (
    ArchPlan,
    AttentionKind,
    BlockCost,
    ComplexityReport,
    LayerKind,
    parse_attention_kind,
)
from ..blocks.gcn_block import BlockSpec
from ..blocks.network import plan_blocks
from ..blocks.temporal import LayerSpec, expanded_channels, reduced_channels


DEFAULT_FRAMES = 300
DEFAULT_JOINTS = 25
DEFAULT_BODIES = 2


@dataclass
class Cost:
    params: int = 0
    flops: int = 0

    def __add__(self, other: "Cost") -> "Cost":
        return Cost(self.params + other.params, self.flops + other.flops)


def _strided(frames: int, stride: int) -> int:
    return (frames - 1) // stride + 1


def _bn(channels: int) -> Cost:
    return Cost(2 * channels, 0)


def _pointwise(c_in: int, c_out: int, positions: int) -> Cost:
    return Cost(c_in * c_out + c_out, c_in * c_out * positions)


def _temporal(c_in: int, c_out: int, kernel: int, groups: int, positions_out: int) -> Cost:
    per_output = (c_in // groups) * kernel
    return Cost(per_output * c_out + c_out, per_output * c_out * positions_out)


def tc_layer_cost(spec: LayerSpec, frames: int, joints: int) -> Cost:
    """Cost of one TC layer applied to ``frames`` input frames."""
    spec.validate()
    c_in, c_out, kernel, s = spec.channels_in, spec.channels_out, spec.kernel, spec.stride
    pos_in = frames * joints
    pos_out = _strided(frames, s) * joints
    if spec.kind == LayerKind.BASIC:
        cost = _temporal(c_in, c_out, kernel, 1, pos_out) + _bn(c_out)
    elif spec.kind == LayerKind.BOTTLE:
        inner = reduced_channels(c_in, spec.ratio)
        cost = (_pointwise(c_in, inner, pos_in) + _bn(inner)
                + _temporal(inner, inner, kernel, 1, pos_out) + _bn(inner)
                + _pointwise(inner, c_out, pos_out) + _bn(c_out))
    elif spec.kind == LayerKind.SEP:
        cost = (_temporal(c_in, c_in, kernel, c_in, pos_out) + _bn(c_in)
                + _pointwise(c_in, c_out, pos_out) + _bn(c_out))
    elif spec.kind == LayerKind.EPSEP:
        inner = expanded_channels(c_in, spec.ratio)
        cost = (_pointwise(c_in, inner, pos_in) + _bn(inner)
                + _temporal(inner, inner, kernel, inner, pos_out) + _bn(inner)
                + _pointwise(inner, c_out, pos_out) + _bn(c_out))
    elif spec.kind == LayerKind.SG:
        inner = reduced_channels(c_in, spec.ratio)
        cost = (_temporal(c_in, c_in, kernel, c_in, pos_in) + _bn(c_in)
                + _pointwise(c_in, inner, pos_in) + _bn(inner)
                + _pointwise(inner, c_out, pos_in) + _bn(c_out)
                + _temporal(c_out, c_out, kernel, c_out, pos_out) + _bn(c_out))
    else:
        raise ArgumentError(f"Unknown layer kind: {spec.kind}")
    if spec.needs_projection:
        cost = cost + _pointwise(c_in, c_out, pos_out) + _bn(c_out)
    return cost


def sgc_cost(c_in: int, c_out: int, partitions: int, frames: int, joints: int) -> Cost:
    """Cost of one SGC layer: stacked pointwise conv, aggregation, residual."""
    positions = frames * joints
    cost = _pointwise(c_in, partitions * c_out, positions)
    cost = cost + Cost(partitions * joints * joints, partitions * c_out * frames * joints * joints)
    cost = cost + _bn(c_out)
    if c_in != c_out:
        cost = cost + _pointwise(c_in, c_out, positions) + _bn(c_out)
    return cost


def attention_cost(
    kind: "AttentionKind | str",
    channels: int,
    frames: int,
    joints: int,
    ratio: float,
) -> Cost:
    """Cost of an attention module including its residual BN wrapper."""
    kind = parse_attention_kind(kind)
    if kind == AttentionKind.NONE:
        return Cost()
    if kind == AttentionKind.ST_JOINT:
        inner = reduced_channels(channels, ratio)
        cost = (_pointwise(channels, inner, frames + joints) + _bn(inner)
                + _pointwise(inner, channels, frames) + _pointwise(inner, channels, joints))
    else:
        size = {AttentionKind.CHANNEL: channels,
                AttentionKind.FRAME: frames,
                AttentionKind.JOINT: joints}[kind]
        inner = reduced_channels(size, ratio)
        cost = _pointwise(size, inner, 1) + _pointwise(inner, size, 1)
    return cost + _bn(channels)


def block_cost(spec: BlockSpec, frames: int, joints: int, partitions: int) -> Cost:
    """Cost of a GCN block receiving ``frames`` input frames."""
    spec.validate()
    cost = sgc_cost(spec.channels_in, spec.channels_out, partitions, frames, joints)
    t = frames
    for layer in spec.layer_specs():
        cost = cost + tc_layer_cost(layer, t, joints)
        t = _strided(t, layer.stride)
    return cost + attention_cost(spec.attention, spec.channels_out, t, joints, spec.attention_ratio)


def _override(plan: ArchPlan, num_classes: Optional[int], attention) -> ArchPlan:
    changes = {}
    if num_classes is not None:
        changes["num_classes"] = num_classes
    if attention is not None:
        changes["attention"] = parse_attention_kind(attention)
    return replace(plan, **changes).validate() if changes else plan.validate()


def profile_plan(
    plan: ArchPlan,
    frames: int = DEFAULT_FRAMES,
    joints: int = DEFAULT_JOINTS,
    bodies: int = DEFAULT_BODIES,
) -> ComplexityReport:
    """Per-part parameters and FLOPs, named like the built network's modules."""
    if frames < 1 or joints < 1:
        raise ArgumentError(f"frames and joints must be positive, got T={frames}, V={joints}")
    if bodies < 1:
        raise ArgumentError(f"bodies must be positive, got {bodies}")
    report = ComplexityReport(frames=frames, joints=joints, bodies=bodies)
    if plan.num_stages == 0:
        return report
    partitions = plan.max_distance + 1
    layouts = plan_blocks(plan, frames)

    for branch in plan.branches:
        report.entries.append(BlockCost(
            f"branches.{branch}.input_bn", _bn(plan.input_channels).params, 0))
        for layout in layouts:
            if layout.per_branch:
                cost = block_cost(layout.spec, layout.frames_in, joints, partitions)
                report.entries.append(BlockCost(
                    f"branches.{branch}.{layout.name}", cost.params, cost.flops * bodies))
    for layout in layouts:
        if not layout.per_branch:
            cost = block_cost(layout.spec, layout.frames_in, joints, partitions)
            report.entries.append(BlockCost(
                f"main.{layout.name}", cost.params, cost.flops * bodies))

    last = layouts[-1]
    out_channels = last.spec.channels_out
    if last.per_branch:
        out_channels *= plan.num_branches
    fc = _pointwise(out_channels, plan.num_classes, 1)
    report.entries.append(BlockCost("fc", fc.params, fc.flops * bodies))
    return report


def count_params(
    plan: ArchPlan,
    num_classes: Optional[int] = None,
    attention: "AttentionKind | str | None" = None,
    frames: int = DEFAULT_FRAMES,
    joints: int = DEFAULT_JOINTS,
) -> ComplexityReport:
    """Analytic parameter count; ``total_params`` equals the network registry size.

    ``frames`` only matters for frame attention, whose FC width is T.
    """
    return profile_plan(_override(plan, num_classes, attention), frames, joints, bodies=1)


def count_flops(
    plan: ArchPlan,
    frames: int = DEFAULT_FRAMES,
    joints: int = DEFAULT_JOINTS,
    num_classes: Optional[int] = None,
    attention: "AttentionKind | str | None" = None,
    bodies: int = DEFAULT_BODIES,
) -> ComplexityReport:
    """Analytic FLOPs of one forward pass over ``bodies`` bodies at (T, V)."""
    return profile_plan(_override(plan, num_classes, attention), frames, joints, bodies)


@dataclass
class SweepCell:
    max_distance: int
    kernel: int
    report: ComplexityReport

    def to_dict(self) -> dict:
        return {
            "D": self.max_distance,
            "L": self.kernel,
            "params": self.report.total_params,
            "flops": self.report.total_flops,
        }


def receptive_sweep(
    distances: Sequence[int],
    kernels: Sequence[int],
    template: ArchPlan,
    frames: int = DEFAULT_FRAMES,
    joints: int = DEFAULT_JOINTS,
    bodies: int = DEFAULT_BODIES,
) -> list[SweepCell]:
    """One complexity report per (D, L) pair, D-major."""
    if not distances or not kernels:
        raise ArgumentError("Sweep ranges must be non-empty")
    cells = []
    for d in distances:
        for k in kernels:
            plan = replace(template, max_distance=int(d), kernel=int(k)).validate()
            cells.append(SweepCell(int(d), int(k), profile_plan(plan, frames, joints, bodies)))
    return cells


def write_report_csv(path: Path | str, report: ComplexityReport) -> Path:
    """CSV with a ``#`` convention line, then ``block,params,flops`` rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# {report.header()}\n")
        writer = csv.writer(f)
        writer.writerow(["block", "params", "flops"])
        for entry in report.entries:
            writer.writerow([entry.name, entry.params, entry.flops])
    return path


def write_sweep_csv(path: Path | str, cells: Iterable[SweepCell]) -> Path:
    cells = list(cells)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        if cells:
            f.write(f"# {cells[0].report.header()}\n")
        writer = csv.writer(f)
        writer.writerow(["D", "L", "params", "flops"])
        for cell in cells:
            writer.writerow([cell.max_distance, cell.kernel,
                             cell.report.total_params, cell.report.total_flops])
    return path


def read_report_csv(path: Path | str) -> ComplexityReport:
    """Parse a file written by :func:`write_report_csv` (header metadata is not restored)."""
    with open(path, newline="") as f:
        rows = [line for line in f if not line.startswith("#")]
    reader = csv.DictReader(rows)
    return ComplexityReport(entries=[
        BlockCost(row["block"], int(row["params"]), int(row["flops"])) for row in reader
    ])
