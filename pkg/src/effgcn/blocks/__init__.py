"""Layers and blocks of the network, and the network itself."""

from .attention import (
    AttentionLayer,
    SEAttention,
    STJointAttention,
    make_attention,
    se_attention,
    st_joint_att,
)
from .gcn_block import BlockSpec, GCNBlock, gcn_block
from .graph_conv import SpatialGraphLayer, graph_conv, sgc_forward
from .network import (
    BlockLayout,
    BranchStream,
    EfficientGCN,
    build_network,
    fused_width,
    plan_blocks,
)
from .temporal import (
    LayerSpec,
    TemporalLayer,
    expanded_channels,
    make_tc_layer,
    reduced_channels,
)

__all__ = [
    "AttentionLayer",
    "BlockLayout",
    "BlockSpec",
    "BranchStream",
    "EfficientGCN",
    "GCNBlock",
    "LayerSpec",
    "SEAttention",
    "STJointAttention",
    "SpatialGraphLayer",
    "TemporalLayer",
    "build_network",
    "expanded_channels",
    "fused_width",
    "gcn_block",
    "graph_conv",
    "make_attention",
    "make_tc_layer",
    "plan_blocks",
    "reduced_channels",
    "se_attention",
    "sgc_forward",
    "st_joint_att",
]
