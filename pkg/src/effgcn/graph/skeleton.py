"""Skeleton graph definition, loading, and hop distances."""

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..core.errors import ArgumentError, FormatError, GraphStructureError


NTU_GRAPH_RESOURCE = "ntu_rgbd_25.json"


@dataclass(frozen=True)
class SkeletonGraph:
    """Undirected joint graph with a designated center and a parent map.

    Attributes:
        num_joints: Number of joints V.
        edges: Unordered joint-index pairs, 0-based.
        center: Index of the center joint.
        parents: parents[i] is the neighbour of i one hop closer to the center;
            parents[center] == center.
        name: Free-form identifier carried from the data file.
    """

    num_joints: int
    edges: tuple[tuple[int, int], ...]
    center: int
    parents: tuple[int, ...]
    name: str = "custom"
    joint_names: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_joints < 1:
            raise ArgumentError(f"num_joints must be positive, got {self.num_joints}")
        for i, j in self.edges:
            if not (0 <= i < self.num_joints and 0 <= j < self.num_joints):
                raise ArgumentError(
                    f"Edge ({i}, {j}) has an endpoint outside [0, {self.num_joints})")
        if not 0 <= self.center < self.num_joints:
            raise ArgumentError(f"Center joint {self.center} out of range")
        if len(self.parents) != self.num_joints:
            raise ArgumentError(
                f"Parent map has {len(self.parents)} entries for {self.num_joints} joints")

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists, sorted for deterministic traversal."""
        adjacency: list[set[int]] = [set() for _ in range(self.num_joints)]
        for i, j in self.edges:
            if i != j:
                adjacency[i].add(j)
                adjacency[j].add(i)
        return [sorted(nbrs) for nbrs in adjacency]

    def validate(self) -> "SkeletonGraph":
        """Check connectivity and the parent-map invariants.

        Returns:
            self, so loaders can chain the call.

        Raises:
            GraphStructureError: If the graph is disconnected or a parent
                chain does not reach the center through existing edges.
        """
        hop_distances(self)

        edge_set = {frozenset(e) for e in self.edges}
        if self.parents[self.center] != self.center:
            raise GraphStructureError(
                f"Center joint {self.center} must be its own parent, "
                f"got {self.parents[self.center]}")
        for i, parent in enumerate(self.parents):
            if i == self.center:
                continue
            if not 0 <= parent < self.num_joints:
                raise GraphStructureError(f"Parent of joint {i} out of range: {parent}")
            if frozenset((i, parent)) not in edge_set:
                raise GraphStructureError(
                    f"Joint {i} and its parent {parent} are not connected by an edge")

        for start in range(self.num_joints):
            joint, steps = start, 0
            while joint != self.center:
                joint = self.parents[joint]
                steps += 1
                if steps > self.num_joints:
                    raise GraphStructureError(
                        f"Parent chain from joint {start} never reaches center {self.center}")
        return self

    def to_dict(self) -> dict[str, Any]:
        """Convert to the JSON data-file layout (0-based)."""
        return {
            "name": self.name,
            "version": 1,
            "index_base": 0,
            "num_joints": self.num_joints,
            "center": self.center,
            "edges": [list(e) for e in self.edges],
            "parents": list(self.parents),
            "joint_names": list(self.joint_names),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SkeletonGraph":
        """Create a validated graph from the JSON data-file layout.

        Files may declare ``index_base: 1``; indices are shifted to 0-based here.
        """
        try:
            base = int(data.get("index_base", 0))
            graph = cls(
                num_joints=int(data["num_joints"]),
                edges=tuple((int(i) - base, int(j) - base) for i, j in data["edges"]),
                center=int(data["center"]) - base,
                parents=tuple(int(p) - base for p in data["parents"]),
                name=str(data.get("name", "custom")),
                joint_names=tuple(data.get("joint_names", ())),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ArgumentError):
                raise
            raise FormatError(f"Malformed graph description: {e}") from e
        return graph.validate()


def hop_distances(graph: SkeletonGraph) -> np.ndarray:
    """Shortest edge-path length between every pair of joints.

    Args:
        graph: Skeleton graph.

    Returns:
        Symmetric V x V integer matrix with a zero diagonal.

    Raises:
        GraphStructureError: If some pair of joints is not connected.
    """
    nbrs = graph.neighbors()
    num = graph.num_joints
    dist = np.full((num, num), -1, dtype=np.int64)
    for source in range(num):
        dist[source, source] = 0
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for nxt in nbrs[node]:
                if dist[source, nxt] < 0:
                    dist[source, nxt] = dist[source, node] + 1
                    queue.append(nxt)
        unreachable = np.flatnonzero(dist[source] < 0)
        if unreachable.size:
            raise GraphStructureError(
                f"Graph is disconnected: joint {int(unreachable[0])} "
                f"is unreachable from joint {source}")
    return dist


def load_graph(path: Optional[Path | str] = None) -> SkeletonGraph:
    """Load a skeleton graph from a JSON data file.

    Args:
        path: Path to the JSON file; the shipped NTU RGB+D graph when omitted.

    Returns:
        Validated SkeletonGraph.
    """
    if path is None:
        text = resources.files("effgcn.graph.data").joinpath(NTU_GRAPH_RESOURCE).read_text()
        source = NTU_GRAPH_RESOURCE
    else:
        source = str(path)
        text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"Graph file {source} is not valid JSON: {e}", offset=e.pos) from e
    return SkeletonGraph.from_dict(data)


def ntu_graph() -> SkeletonGraph:
    """The 25-joint NTU RGB+D skeleton centered on the middle of the spine."""
    return load_graph()


def chain_graph(num_joints: int, center: Optional[int] = None) -> SkeletonGraph:
    """Path graph 0-1-...-(n-1), centered in the middle by default."""
    if num_joints < 1:
        raise ArgumentError(f"num_joints must be positive, got {num_joints}")
    center = num_joints // 2 if center is None else center
    if not 0 <= center < num_joints:
        raise ArgumentError(f"Center joint {center} out of range")
    parents = tuple(
        i if i == center else (i + 1 if i < center else i - 1)
        for i in range(num_joints)
    )
    graph = SkeletonGraph(
        num_joints=num_joints,
        edges=tuple((i, i + 1) for i in range(num_joints - 1)),
        center=center,
        parents=parents,
        name=f"chain_{num_joints}",
    )
    return graph.validate()
