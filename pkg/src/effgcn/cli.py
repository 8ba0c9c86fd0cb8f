"""effgcn CLI - architecture planning, profiling and desk-scale training.

Usage:
    effgcn plan --phi 4                     # Stage widths and depths of B4
    effgcn profile --phi 0 --frames 300     # Per-block parameters and FLOPs
    effgcn sweep --distances 1,2,3          # Receptive-field grid over D and L
    effgcn gradcheck --layer sep            # Finite-difference gradient check
    effgcn synth --out data                 # Synthetic train/eval dataset
    effgcn preprocess --data data --out fx  # Branch features of a split
    effgcn train --data data --out run      # Train and checkpoint
    effgcn eval --checkpoint run/checkpoint.skck --data data
    effgcn cam --checkpoint run/checkpoint.skck --data data --sample c000_00000
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from effgcn.arch.profiler import (
    count_flops,
    receptive_sweep,
    write_report_csv,
    write_sweep_csv,
)
from effgcn.arch.scaling import check_scaling_constraint, make_arch
from effgcn.blocks.gcn_block import BlockSpec, GCNBlock
from effgcn.blocks.network import build_network, plan_blocks
from effgcn.config.loader import load_config_with_warnings
from effgcn.core.container import write_tensor
from effgcn.core.errors import (
    ArgumentError,
    DataError,
    EffGCNError,
    ScalingConstraintError,
)
from effgcn.core.models import (
    BRANCH_NAMES,
    DEFAULT_LAYER_RATIO,
    ArchPlan,
    AttentionKind,
    LayerKind,
    ScalingConfig,
    TrainConfig,
    parse_layer_kind,
)
from effgcn.graph.partitions import build_partitions
from effgcn.graph.skeleton import SkeletonGraph, chain_graph, load_graph
from effgcn.preprocess.features import pad_frames, stack_branches
from effgcn.telemetry.audit_logger import (
    AUDIT_LOG_ENV,
    configure_audit_logger,
    get_audit_logger,
)
from effgcn.telemetry.otel_emitter import get_emitter
from effgcn.tensor.engine import Tensor, default_dtype
from effgcn.tensor.gradcheck import grad_check
from effgcn.train.cam import class_activation_map, write_cam_csv
from effgcn.train.dataset import SkeletonDataset
from effgcn.train.loop import (
    CHECKPOINT_NAME,
    LOG_NAME,
    PLAN_NAME,
    evaluate,
    restore_network,
    train,
)
from effgcn.train.synth import synth_splits


# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

GRADCHECK_TOLERANCE = 1e-5


class CLIParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the validation code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def get_version() -> str:
    try:
        from importlib.metadata import version
        return version("effgcn")
    except Exception:
        from effgcn import __version__
        return __version__


# Argument helpers

def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _branch_list(text: str) -> tuple[str, ...]:
    names = tuple(v.strip() for v in text.split(",") if v.strip())
    unknown = [n for n in names if n not in BRANCH_NAMES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"branches must be a comma list of {', '.join(BRANCH_NAMES)}")
    return names


def _pick(value: Any, config: dict[str, Any], key: str) -> Any:
    return config[key] if value is None else value


def _emit(args: argparse.Namespace, payload: dict[str, Any], table: Callable[[], None]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        table()


def _out_dir(args: argparse.Namespace, required: bool = False) -> Optional[Path]:
    if args.out is None:
        if required:
            raise ArgumentError(f"{args.command} needs --out DIR")
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _graph(args: argparse.Namespace) -> SkeletonGraph:
    return load_graph(args.graph) if args.graph else load_graph()


def _plan_from_args(args: argparse.Namespace) -> ArchPlan:
    config = args.config_values
    return make_arch(
        ScalingConfig(
            alpha=_pick(args.alpha, config, "alpha"),
            beta=_pick(args.beta, config, "beta"),
            phi=args.phi,
        ),
        layer_kind=_pick(args.layer, config, "layer"),
        max_distance=_pick(args.max_distance, config, "max_distance"),
        kernel=_pick(args.kernel, config, "kernel"),
        ratio=_pick(args.ratio, config, "ratio"),
        num_classes=args.classes if args.classes is not None else 60,
        attention=_pick(args.attention, config, "attention"),
        attention_ratio=args.att_ratio,
        fusion_stage=args.fusion_stage,
        branches=args.branches or BRANCH_NAMES,
        allow_unconstrained=args.allow_unconstrained,
    )


def _plan_title(plan: ArchPlan) -> str:
    return (f"EfficientGCN-B{plan.phi} (alpha={plan.alpha}, beta={plan.beta}, "
            f"layer={plan.layer_kind.value}, ratio={plan.ratio:g}, D={plan.max_distance}, "
            f"L={plan.kernel}, attention={plan.attention.value})")


def _millions(n: int) -> str:
    return f"{n / 1e6:.2f}M"


# Verbs

def cmd_plan(args: argparse.Namespace) -> int:
    """Print the stage table of a scaled architecture and write plan.json."""
    plan = _plan_from_args(args)
    check = check_scaling_constraint(plan.alpha, plan.beta)
    layouts = plan_blocks(plan, args.frames or 300)
    blocks = [{
        "name": l.name,
        "channels": l.spec.channels_out,
        "depth": l.spec.depth,
        "stride": l.spec.stride,
        "per_branch": l.per_branch,
    } for l in layouts]
    payload = {"plan": plan.to_dict(), "scaling": check.to_dict(), "blocks": blocks}

    out = _out_dir(args)
    if out:
        (out / PLAN_NAME).write_text(json.dumps(plan.to_dict(), indent=2))

    def table():
        print(_plan_title(plan))
        print(f"alpha^2 * beta = {check.product:.3f}")
        print(f"{'block':<12}{'channels':>10}{'depth':>7}{'stride':>8}  branch")
        for b in blocks:
            where = "per-branch" if b["per_branch"] else "main"
            print(f"{b['name']:<12}{b['channels']:>10}{b['depth']:>7}{b['stride']:>8}  {where}")

    _emit(args, payload, table)
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    """Print per-block parameters and FLOPs; write profile.csv."""
    plan = _plan_from_args(args)
    joints = args.joints or (_graph(args).num_joints if args.graph else 25)
    bodies = _pick(args.bodies, args.config_values, "bodies")
    report = count_flops(plan, frames=args.frames or 300, joints=joints, bodies=bodies)

    out = _out_dir(args)
    if out:
        write_report_csv(out / "profile.csv", report)

    def table():
        print(f"# {report.header()}")
        print(_plan_title(plan))
        print(f"{'block':<28}{'params':>12}{'flops':>18}")
        for entry in report.entries:
            print(f"{entry.name:<28}{entry.params:>12,}{entry.flops:>18,}")
        print(f"{'total':<28}{report.total_params:>12,}{report.total_flops:>18,}")
        print(f"Params: {_millions(report.total_params)}  FLOPs: {report.total_flops / 1e9:.3f}G")

    _emit(args, {"plan": plan.to_dict(), **report.to_dict()}, table)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Parameter/FLOPs grid over max graph distance D and temporal window L."""
    template = _plan_from_args(args)
    joints = args.joints or (_graph(args).num_joints if args.graph else 25)
    bodies = _pick(args.bodies, args.config_values, "bodies")
    cells = receptive_sweep(args.distances, args.kernels, template,
                            frames=args.frames or 300, joints=joints, bodies=bodies)
    out = _out_dir(args)
    if out:
        write_sweep_csv(out / "sweep.csv", cells)

    def table():
        print(f"# {cells[0].report.header()}")
        print(f"{'D':>3}{'L':>4}{'params':>12}{'flops':>18}")
        for cell in cells:
            print(f"{cell.max_distance:>3}{cell.kernel:>4}"
                  f"{cell.report.total_params:>12,}{cell.report.total_flops:>18,}")

    _emit(args, {"cells": [c.to_dict() for c in cells]}, table)
    return EXIT_OK


def _gradcheck_target(args: argparse.Namespace, rng: np.random.Generator):
    """(module, inputs, forward) for the requested gradient check."""
    joints = args.joints or 7
    frames = args.frames or 20
    graph = chain_graph(joints)
    config = args.config_values
    layer = parse_layer_kind(_pick(args.layer, config, "layer"))
    kernel = _pick(args.kernel, config, "kernel")
    distance = _pick(args.max_distance, config, "max_distance")
    attention = _pick(args.attention, config, "attention")

    if args.target == "network":
        plan = make_arch(
            ScalingConfig(phi=args.phi),
            layer_kind=layer,
            max_distance=distance,
            kernel=kernel,
            ratio=_pick(args.ratio, config, "ratio"),
            num_classes=args.classes or 4,
            attention=attention,
            attention_ratio=args.att_ratio,
        ).shrink(2)
        network = build_network(plan, graph, frames=frames, seed=args.seed)
        inputs = rng.standard_normal((2, plan.num_branches, plan.input_channels, frames, joints))
        return network, inputs, None

    ratio = _pick(args.ratio, config, "ratio")
    spec = BlockSpec(
        channels_in=8,
        channels_out=16,
        depth=2,
        stride=2,
        attention=attention,
        layer_kind=layer,
        kernel=kernel,
        ratio=float(DEFAULT_LAYER_RATIO[layer] if ratio is None else ratio),
        attention_ratio=args.att_ratio or 4.0,
    )
    block = GCNBlock(spec, build_partitions(graph, distance), frames, rng)
    inputs = Tensor(rng.standard_normal((2, 8, frames, joints)))
    return block, inputs, None


def cmd_gradcheck(args: argparse.Namespace) -> int:
    """Finite-difference check of every parameter gradient; PASS/FAIL per parameter."""
    if args.dtype != "f64":
        raise ArgumentError("gradcheck needs --dtype f64; f32 is too coarse for a 1e-5 tolerance")
    rng = np.random.default_rng(args.seed)
    with default_dtype("f64"):
        module, inputs, forward = _gradcheck_target(args, rng)
        report = grad_check(module, inputs, tolerance=GRADCHECK_TOLERANCE,
                            samples=args.samples, seed=args.seed, forward=forward)

    out = _out_dir(args)
    if out:
        (out / "gradcheck.json").write_text(json.dumps(report.to_dict(), indent=2))

    def table():
        for e in report.entries:
            verdict = "PASS" if e.passed else "FAIL"
            print(f"{verdict} {e.name} rel_err={e.max_rel_error:.2e} ({e.checked} coords)")
        print(f"{'PASS' if report.passed else 'FAIL'}: max relative error "
              f"{report.max_rel_error:.2e} at tolerance {report.tolerance:g}")

    _emit(args, report.to_dict(), table)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic dataset with train and eval splits."""
    out = _out_dir(args, required=True)
    joints = args.joints or (_graph(args).num_joints if args.graph else 25)
    splits = synth_splits(
        num_classes=args.classes or 4,
        samples_per_class=args.samples_per_class,
        frames=args.frames or 60,
        joints=joints,
        seed=args.seed,
    )
    counts = {}
    for split, dataset in splits.items():
        dataset.save(out, split)
        counts[split] = len(dataset)

    def table():
        for split, n in counts.items():
            print(f"{split}: {n} sequences -> {out / split}")

    _emit(args, {"root": str(out), "splits": counts}, table)
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    """Compute the (M, B, 6, T, V) branch tensors of every sequence in a split."""
    if not args.data:
        raise ArgumentError("preprocess needs --data DIR")
    out = _out_dir(args, required=True)
    graph = _graph(args)
    dataset = SkeletonDataset.load(args.data, args.split)
    target = out / args.split
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for sample_id, seq in zip(dataset.sample_ids, dataset.sequences):
        if args.frames:
            seq = pad_frames(seq, args.frames)
        branches = stack_branches(seq, graph)
        path = target / f"{sample_id}.branches.sktn"
        write_tensor(path, branches)
        written.append(str(path))

    def table():
        print(f"Wrote {len(written)} branch tensors to {target}")

    _emit(args, {"split": args.split, "files": written}, table)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    """Train on <data>/train (evaluating on <data>/eval when present)."""
    if not args.data:
        raise ArgumentError("train needs --data DIR")
    out = _out_dir(args, required=True)
    config = args.config_values
    graph = _graph(args)
    train_set = SkeletonDataset.load(args.data, "train")
    eval_set = None
    if (Path(args.data) / "eval").is_dir():
        eval_set = SkeletonDataset.load(args.data, "eval")
    if args.classes is None:
        args.classes = train_set.num_classes
    plan = _plan_from_args(args)
    if args.mini:
        plan = plan.shrink(2)

    frames = args.frames or max(train_set.max_frames, eval_set.max_frames if eval_set else 0)
    epochs = _pick(args.epochs, config, "epochs")
    train_config = TrainConfig(
        epochs=epochs,
        base_lr=config["base_lr"],
        warmup_epochs=min(config["warmup_epochs"], epochs - 1),
        momentum=config["momentum"],
        weight_decay=config["weight_decay"],
        dropout=config["dropout"],
        batch_size=_pick(args.batch, config, "batch_size"),
        seed=args.seed,
    ).validate()

    with default_dtype(args.dtype):
        network = build_network(plan, graph, frames=frames, seed=args.seed,
                                dropout=train_config.dropout)
        result = train(network, train_set, train_config, out_dir=out, eval_dataset=eval_set)
        final_train = evaluate(network, train_set, train_config.batch_size)

    payload = {
        "checkpoint": str(out / CHECKPOINT_NAME),
        "log": str(out / LOG_NAME),
        "plan": plan.to_dict(),
        "params": network.num_parameters(),
        "history": [r.to_dict() for r in result.history],
        "final_train_accuracy": final_train.top1_accuracy,
        "final_eval_accuracy": result.final.eval_acc,
    }

    def table():
        print(_plan_title(plan))
        print(f"{'epoch':>5}{'lr':>11}{'loss':>10}{'train':>8}{'eval':>8}")
        for r in result.history:
            eval_acc = "-" if r.eval_acc is None else f"{r.eval_acc:.3f}"
            print(f"{r.epoch:>5}{r.lr:>11.6f}{r.train_loss:>10.4f}{r.train_acc:>8.3f}{eval_acc:>8}")
        print(f"Final train accuracy (eval mode): {final_train.top1_accuracy:.3f}")
        print(f"Checkpoint: {out / CHECKPOINT_NAME}")

    _emit(args, payload, table)
    return EXIT_OK


def _checkpoint(args: argparse.Namespace) -> Path:
    if not args.checkpoint:
        raise ArgumentError(f"{args.command} needs --checkpoint PATH")
    path = Path(args.checkpoint)
    if not path.exists():
        raise ArgumentError(f"Checkpoint not found: {path}")
    return path


def cmd_eval(args: argparse.Namespace) -> int:
    """Accuracy and confusion matrix of a checkpoint on one split."""
    checkpoint = _checkpoint(args)
    if not args.data:
        raise ArgumentError("eval needs --data DIR")
    network = restore_network(checkpoint)
    dataset = SkeletonDataset.load(args.data, args.split)
    metrics = evaluate(network, dataset, _pick(args.batch, args.config_values, "batch_size"))

    out = Path(args.out) if args.out else checkpoint.parent
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=2))
    np.savetxt(out / "confusion.csv", metrics.confusion, fmt="%d", delimiter=",")

    def table():
        print(f"{args.split}: {metrics.num_samples} samples, loss {metrics.loss:.4f}, "
              f"top-1 accuracy {metrics.top1_accuracy:.4f}")
        for row in metrics.confusion:
            print(" ".join(f"{v:>4}" for v in row))

    _emit(args, metrics.to_dict(), table)
    return EXIT_OK


def cmd_cam(args: argparse.Namespace) -> int:
    """Class activation map of one sample, written as cam.csv."""
    checkpoint = _checkpoint(args)
    if not args.data:
        raise ArgumentError("cam needs --data DIR")
    network = restore_network(checkpoint)
    dataset = SkeletonDataset.load(args.data, args.split)
    index = dataset.index_of(args.sample) if args.sample else 0
    sequence = dataset[index]
    class_index = args.class_index
    if class_index is None:
        if sequence.label is None:
            raise ArgumentError("Sample is unlabelled; pass --class-index")
        class_index = sequence.label
    saliency = class_activation_map(network, sequence, class_index)

    out = Path(args.out) if args.out else checkpoint.parent
    path = write_cam_csv(out / "cam.csv", saliency)
    peak_t, peak_v = np.unravel_index(int(np.argmax(saliency)), saliency.shape)
    payload = {
        "sample": dataset.sample_ids[index],
        "class_index": class_index,
        "shape": list(saliency.shape),
        "peak": {"frame": int(peak_t), "joint": int(peak_v)},
        "joint_saliency": saliency.mean(axis=0).tolist(),
        "file": str(path),
    }

    def table():
        print(f"CAM of {payload['sample']} for class {class_index}: shape {saliency.shape}")
        print(f"Peak at frame {peak_t}, joint {peak_v}")
        for v, s in enumerate(payload["joint_saliency"]):
            print(f"joint {v:>3}: {s:.3f}")

    _emit(args, payload, table)
    return EXIT_OK


HANDLERS: dict[str, Callable[[argparse.Namespace], int]] = {
    "plan": cmd_plan,
    "profile": cmd_profile,
    "gradcheck": cmd_gradcheck,
    "preprocess": cmd_preprocess,
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "cam": cmd_cam,
    "sweep": cmd_sweep,
}


# Parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="Directory for output files")
    p.add_argument("--seed", type=int, default=None, help="Seed for every random stream (default 0)")
    p.add_argument("--json", action="store_true", help="Machine-readable JSON instead of tables")
    p.add_argument("--config", help="User config file (default ~/.effgcn/config.json)")
    p.add_argument("--graph", help="Skeleton graph JSON (default: NTU RGB+D 25 joints)")
    p.add_argument("--frames", type=int, help="Frames T")
    p.add_argument("--joints", type=int, help="Joints V")
    p.add_argument("--classes", type=int, help="Number of classes Q")


def _add_arch(p: argparse.ArgumentParser) -> None:
    p.add_argument("--phi", type=int, default=0, help="Compound coefficient (default 0)")
    p.add_argument("--alpha", type=float, help="Width base (default 1.2)")
    p.add_argument("--beta", type=float, help="Depth base (default 1.35)")
    p.add_argument("--layer", choices=[k.value for k in LayerKind], help="TC layer kind (default sg)")
    p.add_argument("--ratio", type=float, help="Reduction/expansion ratio of the TC layer")
    p.add_argument("--max-distance", type=int, help="Max graph distance D (default 2)")
    p.add_argument("--kernel", type=int, help="Temporal window L (default 5)")
    p.add_argument("--attention", choices=[k.value for k in AttentionKind],
                   help="Attention module (default st_joint)")
    p.add_argument("--att-ratio", type=float, help="ST-JointAtt reduction ratio")
    p.add_argument("--fusion-stage", type=int, default=2,
                   help="Stages run per input branch before fusion (default 2)")
    p.add_argument("--branches", type=_branch_list, help="Comma list of input branches")
    p.add_argument("--allow-unconstrained", action="store_true",
                   help="Accept alpha/beta violating alpha^2*beta ~ 2")


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser."""
    parser = CLIParser(
        prog="effgcn",
        description="effgcn - efficient graph convolution for skeleton action recognition",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  effgcn plan --phi 4
  effgcn profile --phi 0 --frames 300 --joints 25 --classes 60
  effgcn gradcheck --layer sep --dtype f64
  effgcn synth --out data --classes 4 --samples-per-class 100 --frames 60
  effgcn train --data data --out run --mini --epochs 30
        """,
    )
    parser.add_argument("--version", "-v", action="version", version=f"effgcn {get_version()}")
    subparsers = parser.add_subparsers(dest="command", help="Available commands",
                                       parser_class=CLIParser)

    plan_parser = subparsers.add_parser("plan", help="Stage table of a scaled model")
    _add_common(plan_parser)
    _add_arch(plan_parser)

    profile_parser = subparsers.add_parser("profile", help="Parameters and FLOPs per block")
    _add_common(profile_parser)
    _add_arch(profile_parser)
    profile_parser.add_argument("--bodies", type=int, help="Bodies per sample (default 2)")

    sweep_parser = subparsers.add_parser("sweep", help="Complexity grid over D and L")
    _add_common(sweep_parser)
    _add_arch(sweep_parser)
    sweep_parser.add_argument("--bodies", type=int, help="Bodies per sample (default 2)")
    sweep_parser.add_argument("--distances", type=_int_list, default=[1, 2, 3, 4, 5],
                              help="Comma list of D values (default 1..5)")
    sweep_parser.add_argument("--kernels", type=_int_list, default=[3, 5, 7, 9, 11],
                              help="Comma list of L values (default 3,5,7,9,11)")

    grad_parser = subparsers.add_parser("gradcheck", help="Finite-difference gradient check")
    _add_common(grad_parser)
    _add_arch(grad_parser)
    grad_parser.add_argument("--dtype", choices=["f32", "f64"], default="f64")
    grad_parser.add_argument("--target", choices=["block", "network"], default="block",
                             help="One GCN block (default) or the mini network")
    grad_parser.add_argument("--samples", type=int, default=32,
                             help="Coordinates checked per parameter (default 32)")

    synth_parser = subparsers.add_parser("synth", help="Write a synthetic dataset")
    _add_common(synth_parser)
    synth_parser.add_argument("--samples-per-class", type=int, default=100)

    pre_parser = subparsers.add_parser("preprocess", help="Branch tensors of a dataset split")
    _add_common(pre_parser)
    pre_parser.add_argument("--data", help="Dataset root")
    pre_parser.add_argument("--split", default="train")

    train_parser = subparsers.add_parser("train", help="Train a model on a dataset")
    _add_common(train_parser)
    _add_arch(train_parser)
    train_parser.add_argument("--data", help="Dataset root with train/ (and eval/)")
    train_parser.add_argument("--epochs", type=int)
    train_parser.add_argument("--batch", type=int)
    train_parser.add_argument("--dtype", choices=["f32", "f64"], default="f32")
    train_parser.add_argument("--mini", action="store_true", help="Halve every width")

    eval_parser = subparsers.add_parser("eval", help="Evaluate a checkpoint")
    _add_common(eval_parser)
    eval_parser.add_argument("--checkpoint", help="checkpoint.skck with plan.json beside it")
    eval_parser.add_argument("--data", help="Dataset root")
    eval_parser.add_argument("--split", default="eval")
    eval_parser.add_argument("--batch", type=int)

    cam_parser = subparsers.add_parser("cam", help="Class activation map of one sample")
    _add_common(cam_parser)
    cam_parser.add_argument("--checkpoint", help="checkpoint.skck with plan.json beside it")
    cam_parser.add_argument("--data", help="Dataset root")
    cam_parser.add_argument("--split", default="eval")
    cam_parser.add_argument("--sample", help="Sample id (default: first in split)")
    cam_parser.add_argument("--class-index", type=int, help="Class (default: sample label)")

    return parser


def _prepare(args: argparse.Namespace) -> None:
    """Fill in config-backed defaults and point the audit log where configured."""
    config, warnings = load_config_with_warnings(args.config)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    args.config_values = config
    if args.seed is None:
        args.seed = config["seed"]
    if config.get("audit_log_path") and AUDIT_LOG_ENV not in os.environ:
        configure_audit_logger(config["audit_log_path"])


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point for CLI."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    started = time.perf_counter()
    code = EXIT_RUNTIME
    try:
        _prepare(args)
        with get_emitter().trace_operation(f"cli.{args.command}"):
            code = HANDLERS[args.command](args)
    except (ArgumentError, ScalingConstraintError, DataError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_VALIDATION
    except EffGCNError as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_RUNTIME
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        code = EXIT_RUNTIME
    finally:
        try:
            get_audit_logger().log_cli_call(
                args.command,
                exit_code=code,
                duration_ms=int((time.perf_counter() - started) * 1000),
                argv=list(argv if argv is not None else sys.argv[1:]),
            )
        except OSError:
            pass
    return code


if __name__ == "__main__":
    sys.exit(main())
