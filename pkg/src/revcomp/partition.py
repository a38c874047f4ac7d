"""Indistinguishability graphs and minimum-partition solvers.

The smallest partition whose blocks pairwise clear the fidelity threshold
is a minimum clique cover of the indistinguishability graph, equivalently
a minimum coloring of its complement.  Indistinguishability is reflexive
and symmetric but not transitive, so this is a genuine covering problem
rather than a union-find pass.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Alphabet, ClassicalChannel, reverse_fidelity_matrix
from .errors import (
    DimensionMismatchError,
    ExactSolverCapError,
    ReportMismatchError,
    ValidationError,
)

DEFAULT_EXACT_CAP = 20
EXACT_CAP_ENV = "REVCOMP_EXACT_CAP"


def default_exact_cap() -> int:
    """Vertex cap for the exact solver, overridable via REVCOMP_EXACT_CAP."""
    raw = os.environ.get(EXACT_CAP_ENV)
    if raw is None:
        return DEFAULT_EXACT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValidationError(f"{EXACT_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValidationError(f"{EXACT_CAP_ENV} must be >= 1, got {cap}")
    return cap


@dataclass(frozen=True)
class IndistinguishabilityGraph:
    """Undirected reflexive graph on input indices.

    An edge between two inputs means their output distributions are within
    the fidelity threshold ``1 - epsilon`` of each other.
    """

    adjacency: np.ndarray
    epsilon: float | None = None

    def __post_init__(self) -> None:
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValidationError(f"adjacency must be square, got shape {adj.shape}")
        if adj.shape[0] == 0:
            raise ValidationError("graph must have at least one vertex")
        if not np.array_equal(adj, adj.T):
            raise ValidationError("adjacency must be symmetric")
        if not np.all(np.diag(adj)):
            raise ValidationError("adjacency must be reflexive (unit diagonal)")
        adj = adj.copy()
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)

    @property
    def size(self) -> int:
        return self.adjacency.shape[0]

    def are_adjacent(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def _masks(self) -> list[int]:
        """Adjacency as bitmasks, self-loops removed."""
        n = self.size
        masks = []
        for i in range(n):
            m = 0
            row = self.adjacency[i]
            for j in range(n):
                if j != i and row[j]:
                    m |= 1 << j
            masks.append(m)
        return masks


def graph_from_fidelity_matrix(fidelities: np.ndarray, epsilon: float) -> IndistinguishabilityGraph:
    """Threshold a pairwise fidelity matrix at ``1 - epsilon``.

    The comparison is ``>=`` on the raw float values; no rounding is
    applied before thresholding.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    fid = np.asarray(fidelities, dtype=float)
    return IndistinguishabilityGraph(fid >= 1.0 - epsilon, epsilon)


def build_graph(channel: ClassicalChannel, epsilon: float) -> IndistinguishabilityGraph:
    """Indistinguishability graph of a channel at tolerance ``epsilon``."""
    return graph_from_fidelity_matrix(reverse_fidelity_matrix(channel), epsilon)


@dataclass(frozen=True)
class Partition:
    """Partition of ``range(n)`` into disjoint nonempty blocks.

    Stored canonically: members ascending within each block, blocks ordered
    by their smallest member.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        canon = []
        seen: set[int] = set()
        for block in self.blocks:
            members = tuple(sorted(int(i) for i in block))
            if len(members) == 0:
                raise ValidationError("partition blocks must be nonempty")
            if members[0] < 0:
                raise ValidationError(f"partition members must be >= 0, got {members[0]}")
            overlap = seen.intersection(members)
            if overlap:
                raise ValidationError(f"partition blocks overlap on element {min(overlap)}")
            seen.update(members)
            canon.append(members)
        canon.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(canon))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def single_block(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    def covers(self, n: int) -> bool:
        """True when the blocks tile ``range(n)`` exactly."""
        elements = [i for b in self.blocks for i in b]
        return len(elements) == n and set(elements) == set(range(n))

    def representatives(self) -> tuple[int, ...]:
        """Smallest member of each block, in block order."""
        return tuple(b[0] for b in self.blocks)

    def block_index(self) -> dict[int, int]:
        return {i: b for b, members in enumerate(self.blocks) for i in members}


def partition_is_clique_cover(partition: Partition, graph: IndistinguishabilityGraph) -> bool:
    """Independent validity check: exact cover and all in-block pairs adjacent.

    Reads the adjacency directly rather than trusting solver bookkeeping.
    """
    if not partition.covers(graph.size):
        return False
    adj = graph.adjacency
    for block in partition.blocks:
        for a in range(len(block)):
            for b in range(a + 1, len(block)):
                if not adj[block[a], block[b]]:
                    return False
    return True


def _max_clique_size(masks: list[int], n: int) -> int:
    """Exact maximum clique via bitmask branch and bound."""
    best = 0

    def expand(count: int, cand: int) -> None:
        nonlocal best
        if count + cand.bit_count() <= best:
            return
        if cand == 0:
            if count > best:
                best = count
            return
        while cand:
            if count + cand.bit_count() <= best:
                return
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            expand(count + 1, cand & masks[v])

    expand(0, (1 << n) - 1)
    return best


def _greedy_coloring(masks: list[int], order: Sequence[int]) -> list[int]:
    """First-fit coloring along a fixed vertex order."""
    assign = [-1] * len(masks)
    color_members: list[int] = []
    for v in order:
        for c, members in enumerate(color_members):
            if not (members & masks[v]):
                assign[v] = c
                color_members[c] |= 1 << v
                break
        else:
            assign[v] = len(color_members)
            color_members.append(1 << v)
    return assign


def solve_exact(graph: IndistinguishabilityGraph, cap: int | None = None) -> Partition:
    """Minimum clique cover, solved as exact coloring of the complement.

    Branch and bound over colorings with a fixed vertex order (descending
    complement degree, ties by index), an exact max-clique lower bound and
    a first-fit upper bound.  Deterministic: identical graphs yield the
    identical partition.  Raises :class:`ExactSolverCapError` above the
    vertex cap since the worst case is exponential.
    """
    if cap is None:
        cap = default_exact_cap()
    n = graph.size
    if n > cap:
        raise ExactSolverCapError(
            f"exact solver got {n} vertices, above the cap {cap}; "
            f"use the greedy solver or raise {EXACT_CAP_ENV}"
        )
    full = (1 << n) - 1
    adj_masks = graph._masks()
    comp_masks = [full & ~(adj_masks[v] | (1 << v)) for v in range(n)]
    order = sorted(range(n), key=lambda v: (-comp_masks[v].bit_count(), v))

    best_assign = _greedy_coloring(comp_masks, order)
    best_count = max(best_assign) + 1
    lower = _max_clique_size(comp_masks, n)

    if best_count > lower:
        assign = [-1] * n
        color_members: list[int] = []

        def bnb(idx: int, used: int) -> None:
            nonlocal best_count, best_assign
            if best_count <= lower or used >= best_count:
                return
            if idx == n:
                best_count = used
                best_assign = assign.copy()
                return
            v = order[idx]
            mask_v = comp_masks[v]
            for c in range(used):
                if not (color_members[c] & mask_v):
                    assign[v] = c
                    color_members[c] |= 1 << v
                    bnb(idx + 1, used)
                    color_members[c] &= ~(1 << v)
            if used + 1 < best_count:
                assign[v] = used
                color_members.append(1 << v)
                bnb(idx + 1, used + 1)
                color_members.pop()
            assign[v] = -1

        bnb(0, 0)

    groups: dict[int, list[int]] = {}
    for v, c in enumerate(best_assign):
        groups.setdefault(c, []).append(v)
    return Partition(tuple(tuple(g) for g in groups.values()))


def solve_greedy(graph: IndistinguishabilityGraph) -> Partition:
    """First-fit clique cover: linear-time upper bound, not optimal.

    Vertices are scanned in label order; each joins the first block it is
    adjacent to in full, otherwise it opens a new block.
    """
    adj_masks = graph._masks()
    blocks: list[list[int]] = []
    members: list[int] = []
    for v in range(graph.size):
        for b in range(len(blocks)):
            if members[b] & ~adj_masks[v] == 0:
                blocks[b].append(v)
                members[b] |= 1 << v
                break
        else:
            blocks.append([v])
            members.append(1 << v)
    return Partition(tuple(tuple(b) for b in blocks))


def compressibility(num_inputs: int, num_blocks: int) -> float:
    """Fraction of removable inputs, ``(n - blocks) / (n - 1)``.

    0 means no two inputs merged, 1 means everything merged.  A one-symbol
    alphabet compresses trivially, so it is defined as 1.
    """
    if num_inputs < 1:
        raise ValidationError(f"need >= 1 inputs, got {num_inputs}")
    if not 1 <= num_blocks <= num_inputs:
        raise ValidationError(f"block count {num_blocks} not in [1, {num_inputs}]")
    if num_inputs == 1:
        return 1.0
    return (num_inputs - num_blocks) / (num_inputs - 1)


@dataclass(frozen=True)
class CompressionReport:
    """Result of a single-shot compression.

    ``certificates`` holds, per block, the minimum pairwise reverse
    fidelity inside that block (1.0 for singletons); each entry is a proof
    that the block clears the threshold.  ``optimal`` records whether the
    exact solver produced the partition.
    """

    epsilon: float
    solver: str
    optimal: bool
    partition: Partition
    representatives: tuple[int, ...]
    compressibility: float
    certificates: tuple[float, ...]
    labels: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "solver": self.solver,
            "optimal": self.optimal,
            "blocks": [[self.labels[i] for i in block] for block in self.partition.blocks],
            "representatives": [self.labels[i] for i in self.representatives],
            "compressibility": self.compressibility,
            "certificates": list(self.certificates),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, indent=2)


def _block_certificates(partition: Partition, fidelities: np.ndarray) -> tuple[float, ...]:
    certs = []
    for block in partition.blocks:
        worst = 1.0
        for a in range(len(block)):
            for b in range(a + 1, len(block)):
                worst = min(worst, float(fidelities[block[a], block[b]]))
        certs.append(worst)
    return tuple(certs)


def compress(channel: ClassicalChannel, epsilon: float, solver: str = "auto",
             exact_cap: int | None = None) -> CompressionReport:
    """Smallest (or greedy) indistinguishability partition of a channel.

    ``solver`` is one of ``"exact"``, ``"greedy"``, ``"auto"``; auto uses
    the exact solver up to the cap and falls back to greedy above it.
    Deterministic: identical inputs give byte-identical reports.
    """
    if solver not in ("exact", "greedy", "auto"):
        raise ValidationError(f"unknown solver {solver!r}, expected exact, greedy or auto")
    if exact_cap is None:
        exact_cap = default_exact_cap()
    fid = reverse_fidelity_matrix(channel)
    graph = graph_from_fidelity_matrix(fid, epsilon)
    if solver == "exact" or (solver == "auto" and graph.size <= exact_cap):
        partition = solve_exact(graph, cap=exact_cap)
        used, optimal = "exact", True
    else:
        partition = solve_greedy(graph)
        used, optimal = "greedy", False
    return CompressionReport(
        epsilon=float(epsilon),
        solver=used,
        optimal=optimal,
        partition=partition,
        representatives=partition.representatives(),
        compressibility=compressibility(graph.size, partition.num_blocks),
        certificates=_block_certificates(partition, fid),
        labels=channel.input.labels,
    )


def decompression_channel(report: CompressionReport, channel: ClassicalChannel) -> ClassicalChannel:
    """Deterministic map sending each block label back to its representative.

    Composing the result with ``channel`` gives the effective channel seen
    when transmitting compressed symbols.
    """
    if report.labels != channel.input.labels:
        raise ReportMismatchError(
            "report input labels do not match the channel's input alphabet"
        )
    if not report.partition.covers(channel.num_inputs):
        raise ReportMismatchError(
            f"report partition covers {report.partition.size} elements, "
            f"channel has {channel.num_inputs} inputs"
        )
    if report.representatives != report.partition.representatives():
        raise ReportMismatchError("report representatives do not match its partition")
    m = report.partition.num_blocks
    matrix = np.zeros((m, channel.num_inputs))
    for z, rep in enumerate(report.representatives):
        matrix[z, rep] = 1.0
    z_labels = Alphabet(tuple(f"z{b + 1}" for b in range(m)))
    return ClassicalChannel(z_labels, channel.input, matrix)
