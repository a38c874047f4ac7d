"""Multi-use compressibility: product graphs, structured partitions, bounds.

Everything here reports finite-k evidence.  The infinite-use limit is
never extrapolated; beyond exact feasibility the functions return valid
partitions whose compressibility is a lower bound on the true value, and
they say so in their method tags.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channels import ClassicalChannel, reverse_fidelity_matrix
from .errors import ExactSolverCapError, ValidationError
from .partition import (
    Partition,
    compressibility,
    default_exact_cap,
    graph_from_fidelity_matrix,
    solve_exact,
    solve_greedy,
)

# Above this many sequences the pairwise product-fidelity matrix is not built.
DEFAULT_GRAPH_CAP = 2048


def product_fidelity_matrix(channel: ClassicalChannel, k: int,
                            max_sequences: int = DEFAULT_GRAPH_CAP) -> np.ndarray:
    """Pairwise reverse fidelities of all length-``k`` input sequences.

    Accumulates one per-letter factor at a time in letter order, so each
    entry matches the letterwise product computed sequence by sequence.
    """
    if k < 1:
        raise ValidationError(f"sequence length must be >= 1, got {k}")
    n = channel.num_inputs
    total = n ** k
    if total > max_sequences:
        raise ValidationError(
            f"{total} sequences exceed the pairwise-matrix cap {max_sequences}"
        )
    base = reverse_fidelity_matrix(channel)
    seqs = np.array(list(itertools.product(range(n), repeat=k)), dtype=int).reshape(total, k)
    fid = np.ones((total, total))
    for j in range(k):
        col = seqs[:, j]
        fid *= base[col[:, None], col[None, :]]
    return fid


@dataclass(frozen=True)
class GammaKResult:
    """Compressibility of ``k`` channel uses plus how it was obtained.

    ``method`` is ``"exact"`` for solved instances, ``"greedy_lower_bound"``
    for a first-fit cover of the materialized sequence graph, and
    ``"closed_form"`` for the per-letter-threshold product construction.
    Non-exact values are lower bounds on the true compressibility.
    """

    k: int
    block_count: int
    gamma: float
    method: str

    def to_json_dict(self) -> dict:
        return {"k": self.k, "gamma": self.gamma, "method": self.method,
                "blocks": self.block_count}


def _closed_form_result(channel: ClassicalChannel, epsilon: float, k: int,
                        exact_cap: int) -> GammaKResult:
    # Per the factorization, letters merged at per-letter fidelity
    # >= (1 - eps)^(1/k) keep length-k sequences within 1 - eps, so the
    # k-fold product of a single-shot partition at the tightened threshold
    # is a valid partition of the sequence space.
    tightened = 1.0 - (1.0 - epsilon) ** (1.0 / k)
    fid = reverse_fidelity_matrix(channel)
    graph = graph_from_fidelity_matrix(fid, tightened)
    if graph.size <= exact_cap:
        single = solve_exact(graph, cap=exact_cap)
    else:
        single = solve_greedy(graph)
    blocks = single.num_blocks ** k
    total = channel.num_inputs ** k
    gamma = 1.0 if total == 1 else float(Fraction(total - blocks, total - 1))
    return GammaKResult(k=k, block_count=blocks, gamma=gamma, method="closed_form")


def gamma_k(channel: ClassicalChannel, epsilon: float, k: int, solver: str = "auto",
            exact_cap: int | None = None, graph_cap: int = DEFAULT_GRAPH_CAP) -> GammaKResult:
    """Compressibility of ``k`` independent uses of a channel.

    ``solver="auto"`` picks the exact solver while the sequence count fits
    the exact cap, first-fit on the materialized graph up to ``graph_cap``,
    and the closed-form product construction beyond that.  Requesting
    ``"exact"`` above the cap raises :class:`ExactSolverCapError`.
    """
    if solver not in ("auto", "exact", "greedy", "closed_form"):
        raise ValidationError(f"unknown solver {solver!r}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if exact_cap is None:
        exact_cap = default_exact_cap()
    total = channel.num_inputs ** k

    if solver == "closed_form" or (solver == "auto" and total > graph_cap):
        return _closed_form_result(channel, epsilon, k, exact_cap)
    if solver == "exact" and total > exact_cap:
        raise ExactSolverCapError(
            f"{total} sequences exceed the exact cap {exact_cap} for k={k}"
        )
    if solver in ("exact", "auto") and total <= exact_cap:
        fid = product_fidelity_matrix(channel, k, max_sequences=max(total, 1))
        graph = graph_from_fidelity_matrix(fid, epsilon)
        part = solve_exact(graph, cap=exact_cap)
        return GammaKResult(k=k, block_count=part.num_blocks,
                            gamma=compressibility(total, part.num_blocks), method="exact")
    if total > graph_cap:
        raise ValidationError(
            f"{total} sequences exceed the graph cap {graph_cap} for the greedy solver"
        )
    fid = product_fidelity_matrix(channel, k, max_sequences=graph_cap)
    graph = graph_from_fidelity_matrix(fid, epsilon)
    part = solve_greedy(graph)
    return GammaKResult(k=k, block_count=part.num_blocks,
                        gamma=compressibility(total, part.num_blocks),
                        method="greedy_lower_bound")


@dataclass(frozen=True)
class AsymptoticSweep:
    """Per-k compressibility values with method tags and an observed trend.

    ``trend`` describes the computed values only; exact entries and lower
    bounds are mixed, so it is evidence about the limit, not the limit.
    """

    epsilon: float
    results: tuple[GammaKResult, ...]
    trend: str

    def to_json_data(self) -> list[dict]:
        return [r.to_json_dict() for r in self.results]


def _observed_trend(gammas: Sequence[float]) -> str:
    if all(b == a for a, b in zip(gammas, gammas[1:])):
        return "constant"
    if all(b <= a for a, b in zip(gammas, gammas[1:])):
        return "nonincreasing"
    if all(b >= a for a, b in zip(gammas, gammas[1:])):
        return "nondecreasing"
    return "mixed"


def delta_estimate(channel: ClassicalChannel, epsilon: float, k_max: int,
                   solver: str = "auto", exact_cap: int | None = None,
                   graph_cap: int = DEFAULT_GRAPH_CAP) -> AsymptoticSweep:
    """Finite-k sweep of compressibility values for 1 <= k <= k_max.

    Evidence about the many-use limit; no extrapolation is performed.
    """
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    results = tuple(
        gamma_k(channel, epsilon, k, solver=solver, exact_cap=exact_cap, graph_cap=graph_cap)
        for k in range(1, k_max + 1)
    )
    return AsymptoticSweep(epsilon=float(epsilon), results=results,
                           trend=_observed_trend([r.gamma for r in results]))


# ---------------------------------------------------------------------------
# structured partitions of erasure-channel sequence spaces
# ---------------------------------------------------------------------------

def s_bound_partition(alphabet_size: int, k: int, s: int) -> Partition:
    """Group length-``k`` sequences by their first ``k - s`` letters.

    Yields ``alphabet_size ** (k - s)`` blocks whose members differ in at
    most ``s`` positions, so for an erasure channel every in-block pair has
    reverse fidelity at least ``eta ** (2 * s)``.
    """
    if alphabet_size < 1:
        raise ValidationError(f"alphabet size must be >= 1, got {alphabet_size}")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not 0 <= s <= k:
        raise ValidationError(f"s must lie in [0, {k}], got {s}")
    block_size = alphabet_size ** s
    num_blocks = alphabet_size ** (k - s)
    return Partition(tuple(
        tuple(range(p * block_size, (p + 1) * block_size)) for p in range(num_blocks)
    ))


def min_s_bounded_partition_size(alphabet_size: int, k: int, s: int,
                                 max_sequences: int = 10) -> int:
    """Minimum block count over all partitions with Hamming diameter <= s.

    Exhaustive branch-and-bound over set partitions in restricted-growth
    order, pruning blocks that would exceed the diameter and branches that
    cannot beat the best count found.  Starts from the prefix-grouping
    construction, which is always achievable.
    """
    construction = s_bound_partition(alphabet_size, k, s)
    total = alphabet_size ** k
    if total > max_sequences:
        raise ValidationError(
            f"{total} sequences exceed the exhaustive-search cap {max_sequences}"
        )
    seqs = list(itertools.product(range(alphabet_size), repeat=k))
    dist = [[sum(1 for a, b in zip(x, y) if a != b) for y in seqs] for x in seqs]

    best = construction.num_blocks
    blocks: list[list[int]] = []

    def place(i: int) -> None:
        nonlocal best
        if len(blocks) >= best:
            return
        if i == total:
            best = len(blocks)
            return
        row = dist[i]
        for block in blocks:
            if all(row[j] <= s for j in block):
                block.append(i)
                place(i + 1)
                block.pop()
        if len(blocks) + 1 < best:
            blocks.append([i])
            place(i + 1)
            blocks.pop()

    place(0)
    return best


@dataclass(frozen=True)
class ConjectureRow:
    """One exhaustive check of minimum vs prefix-grouping block count."""

    s: int
    minimum: int
    bound: int

    @property
    def equal(self) -> bool:
        return self.minimum == self.bound

    def to_json_dict(self) -> dict:
        return {"s": self.s, "minimum": self.minimum, "bound": self.bound,
                "equal": self.equal}


def conjecture_report(alphabet_size: int, k: int, s_values: Sequence[int] | None = None,
                      max_sequences: int = 10) -> list[ConjectureRow]:
    """Compare exhaustive minima against ``alphabet_size ** (k - s)``.

    The equality is conjectured, not proven; a row with ``equal=False``
    would be a counterexample and is reported as data, never raised.
    """
    if s_values is None:
        s_values = range(k + 1)
    return [
        ConjectureRow(
            s=s,
            minimum=min_s_bounded_partition_size(alphabet_size, k, s, max_sequences),
            bound=alphabet_size ** (k - s),
        )
        for s in s_values
    ]


# ---------------------------------------------------------------------------
# generalized-erasure closed form
# ---------------------------------------------------------------------------

def generalized_erasure_gamma_bound(block_sizes: Sequence[int], k: int) -> float:
    """Closed-form compressibility of the block-diagonal merge partition.

    Evaluates ``(sum(a_i**k) - d) / ((sum(a_i))**k - 1)`` in exact integer
    arithmetic before the final float conversion.  This is the value of
    the partition built by :func:`generalized_erasure_bound_partition`;
    see that function for when the partition is actually feasible.
    """
    sizes = [int(a) for a in block_sizes]
    if len(sizes) == 0 or any(a < 1 for a in sizes):
        raise ValidationError(f"block sizes must be positive integers, got {block_sizes!r}")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    n = sum(sizes)
    if n == 1:
        return 1.0
    num = sum(a ** k for a in sizes) - len(sizes)
    den = n ** k - 1
    return float(Fraction(num, den))


def generalized_erasure_bound_partition(block_sizes: Sequence[int], k: int,
                                        max_sequences: int = 10 ** 5) -> Partition:
    """Partition behind the closed form: one block per all-same-group cube,
    singletons for every mixed sequence.

    For a generalized erasure channel the mixed sequences can never merge
    across groups (zero fidelity), and a cube ``A_i^k`` is mergeable only
    when ``eta_i ** (2k)`` still clears the threshold; the closed form
    assumes the most favorable case.
    """
    sizes = [int(a) for a in block_sizes]
    if len(sizes) == 0 or any(a < 1 for a in sizes):
        raise ValidationError(f"block sizes must be positive integers, got {block_sizes!r}")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    n = sum(sizes)
    total = n ** k
    if total > max_sequences:
        raise ValidationError(f"{total} sequences exceed the cap {max_sequences}")
    offsets = np.cumsum([0] + sizes[:-1])
    weights = [n ** (k - 1 - j) for j in range(k)]
    cube_members: set[int] = set()
    blocks: list[tuple[int, ...]] = []
    for i, a in enumerate(sizes):
        letters = range(int(offsets[i]), int(offsets[i]) + a)
        members = tuple(
            sum(w * x for w, x in zip(weights, seq))
            for seq in itertools.product(letters, repeat=k)
        )
        cube_members.update(members)
        blocks.append(members)
    blocks.extend((i,) for i in range(total) if i not in cube_members)
    return Partition(tuple(blocks))
