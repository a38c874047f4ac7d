"""Finite classical channels and fidelity between their output distributions.

A channel is a row-stochastic matrix over explicit input and output
alphabets.  The reverse fidelity of two inputs is the fidelity of the
output distributions they induce; it is the quantity every partition
construction in this library thresholds on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatchError, UnknownLabelError, ValidationError

# Stochasticity is validated to this tolerance, then rows are renormalized.
STOCHASTIC_TOL = 1e-9
# Entrywise threshold at which two distributions are declared equal, which
# pins fidelity to exactly 1.0 instead of 1 minus a few ulps.
EQUALITY_TOL = 1e-12

ERASURE_SYMBOL = "α"


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of distinct symbol labels."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(l) for l in self.labels)
        if len(labels) == 0:
            raise ValidationError("alphabet must contain at least one symbol")
        if len(set(labels)) != len(labels):
            raise ValidationError("alphabet labels must be distinct")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(labels)})

    @classmethod
    def numbered(cls, n: int, start: int = 1) -> "Alphabet":
        """Alphabet with labels ``str(start) .. str(start + n - 1)``."""
        if n < 1:
            raise ValidationError(f"alphabet size must be >= 1, got {n}")
        return cls(tuple(str(i) for i in range(start, start + n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownLabelError(f"symbol {label!r} not in alphabet {self.labels}") from None

    def __contains__(self, label: str) -> bool:
        return label in self._index  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.labels)


def _validated_masses(masses: np.ndarray, what: str) -> np.ndarray:
    masses = np.asarray(masses, dtype=float)
    if masses.ndim != 1:
        raise ValidationError(f"{what} must be a vector, got shape {masses.shape}")
    if masses.size == 0:
        raise ValidationError(f"{what} must have at least one entry")
    if np.min(masses) < -STOCHASTIC_TOL or np.max(masses) > 1.0 + STOCHASTIC_TOL:
        raise ValidationError(f"{what} has entries outside [0, 1]: min {np.min(masses)!r}, max {np.max(masses)!r}")
    total = float(np.sum(masses))
    if abs(total - 1.0) > STOCHASTIC_TOL:
        raise ValidationError(f"{what} sums to {total!r}, outside {STOCHASTIC_TOL} of 1")
    clipped = np.clip(masses, 0.0, None)
    out = clipped / float(np.sum(clipped))
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Distribution:
    """Probability distribution over an alphabet.

    Masses are validated (nonnegative, total within ``STOCHASTIC_TOL`` of 1)
    and then renormalized, so downstream code can assume an exact simplex
    point up to float rounding.
    """

    alphabet: Alphabet
    masses: np.ndarray

    def __post_init__(self) -> None:
        masses = _validated_masses(self.masses, "distribution")
        if masses.size != self.alphabet.size:
            raise DimensionMismatchError(
                f"distribution has {masses.size} masses for alphabet of size {self.alphabet.size}"
            )
        object.__setattr__(self, "masses", masses)

    def mass(self, label: str) -> float:
        return float(self.masses[self.alphabet.index(label)])


def _fidelity_masses(p: np.ndarray, q: np.ndarray) -> float:
    """Fidelity of two mass vectors on the same alphabet.

    Squared Bhattacharyya overlap.  Entrywise-equal vectors (within
    ``EQUALITY_TOL``) return exactly 1.0; everything else is clamped into
    [0, 1].  The element order is fixed, so the value is bitwise symmetric
    in its arguments.
    """
    if np.max(np.abs(p - q)) <= EQUALITY_TOL:
        return 1.0
    overlap = float(np.sum(np.sqrt(p * q)))
    return min(1.0, overlap * overlap)


def fidelity(p: Distribution, q: Distribution) -> float:
    """Fidelity between two distributions on the same alphabet.

    Equals 1 iff the distributions coincide (entrywise within
    ``EQUALITY_TOL``) and 0 iff their supports are disjoint.
    """
    if p.alphabet.labels != q.alphabet.labels:
        raise DimensionMismatchError("fidelity requires distributions on the same alphabet")
    return _fidelity_masses(p.masses, q.masses)


@dataclass(frozen=True)
class ClassicalChannel:
    """Row-stochastic matrix with labeled input and output alphabets.

    Row ``i`` is the output distribution conditioned on input symbol ``i``.
    Rows are validated within ``STOCHASTIC_TOL`` and renormalized.
    """

    input: Alphabet
    output: Alphabet
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValidationError(f"channel matrix must be 2-dimensional, got shape {m.shape}")
        if m.shape != (self.input.size, self.output.size):
            raise DimensionMismatchError(
                f"channel matrix shape {m.shape} does not match alphabets "
                f"({self.input.size} inputs, {self.output.size} outputs)"
            )
        if np.min(m) < -STOCHASTIC_TOL or np.max(m) > 1.0 + STOCHASTIC_TOL:
            i, j = np.unravel_index(int(np.argmin(m)) if np.min(m) < -STOCHASTIC_TOL else int(np.argmax(m)), m.shape)
            raise ValidationError(
                f"channel entry at row {i} ({self.input.labels[i]!r}), column {j} "
                f"({self.output.labels[j]!r}) is {m[i, j]!r}, outside [0, 1]"
            )
        sums = np.sum(m, axis=1)
        bad = np.where(np.abs(sums - 1.0) > STOCHASTIC_TOL)[0]
        if bad.size:
            i = int(bad[0])
            raise ValidationError(
                f"channel row {i} ({self.input.labels[i]!r}) sums to {float(sums[i])!r}, "
                f"outside {STOCHASTIC_TOL} of 1"
            )
        m = np.clip(m, 0.0, None)
        m = m / np.sum(m, axis=1, keepdims=True)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def num_inputs(self) -> int:
        return self.input.size

    @property
    def num_outputs(self) -> int:
        return self.output.size

    def row(self, label: str) -> np.ndarray:
        """Output mass vector conditioned on the given input symbol."""
        return self.matrix[self.input.index(label)]

    def row_distribution(self, label: str) -> Distribution:
        return Distribution(self.output, self.row(label))


def reverse_fidelity(channel: ClassicalChannel, x: str, xhat: str) -> float:
    """Fidelity of the output distributions of inputs ``x`` and ``xhat``."""
    return _fidelity_masses(channel.row(x), channel.row(xhat))


def reverse_fidelity_matrix(channel: ClassicalChannel) -> np.ndarray:
    """All pairwise reverse fidelities of a channel.

    Each off-diagonal pair is evaluated once with the same kernel as
    :func:`reverse_fidelity` and mirrored, so the matrix is exactly
    symmetric with unit diagonal.
    """
    n = channel.num_inputs
    out = np.ones((n, n))
    rows = channel.matrix
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = _fidelity_masses(rows[i], rows[j])
    out.flags.writeable = False
    return out


def compose(first: ClassicalChannel, then: ClassicalChannel) -> ClassicalChannel:
    """Channel applying ``first`` and feeding its output into ``then``."""
    if first.output.labels != then.input.labels:
        raise DimensionMismatchError(
            "composition requires the first channel's output alphabet to equal "
            "the second channel's input alphabet"
        )
    return ClassicalChannel(first.input, then.output, first.matrix @ then.matrix)


# ---------------------------------------------------------------------------
# named channel constructors
# ---------------------------------------------------------------------------

def make_identity(n: int, labels: Sequence[str] | None = None) -> ClassicalChannel:
    """Noiseless channel: each input maps to its own output symbol."""
    alphabet = Alphabet(tuple(labels)) if labels is not None else Alphabet.numbered(n)
    if alphabet.size != n:
        raise DimensionMismatchError(f"{len(alphabet.labels)} labels given for identity of size {n}")
    return ClassicalChannel(alphabet, alphabet, np.eye(n))


def make_constant(n: int, masses: Sequence[float] | None = None,
                  output_labels: Sequence[str] | None = None) -> ClassicalChannel:
    """Channel whose output distribution does not depend on the input.

    With no ``masses`` the output alphabet is a single symbol hit with
    probability one.
    """
    if n < 1:
        raise ValidationError(f"constant channel needs >= 1 inputs, got {n}")
    if masses is None:
        masses = [1.0]
    masses = np.asarray(masses, dtype=float)
    if output_labels is None:
        output_labels = [f"y{j + 1}" for j in range(masses.size)]
    row = _validated_masses(masses, "constant channel output distribution")
    matrix = np.tile(row, (n, 1))
    return ClassicalChannel(Alphabet.numbered(n), Alphabet(tuple(output_labels)), matrix)


def make_erasure(r: int, eta: float) -> ClassicalChannel:
    """Erasure channel on ``r`` symbols.

    Each input passes through unchanged with probability ``1 - eta`` and is
    replaced by the erasure symbol with probability ``eta``.
    """
    if r < 1:
        raise ValidationError(f"erasure channel needs >= 1 symbols, got {r}")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"erasure probability must lie in [0, 1], got {eta!r}")
    inp = Alphabet.numbered(r)
    out = Alphabet(inp.labels + (ERASURE_SYMBOL,))
    matrix = np.zeros((r, r + 1))
    for i in range(r):
        matrix[i, i] = 1.0 - eta
        matrix[i, r] = eta
    return ClassicalChannel(inp, out, matrix)


def make_generalized_erasure(blocks: Sequence[Sequence[str]],
                             etas: Sequence[float]) -> ClassicalChannel:
    """Erasure channel with one erasure symbol per input block.

    Inputs in block ``i`` keep their (primed) identity with probability
    ``1 - etas[i]`` and collapse to that block's own erasure symbol with
    probability ``etas[i]``.  Distinct blocks share no output symbols, so
    their reverse fidelity is exactly zero.
    """
    if len(blocks) == 0:
        raise ValidationError("generalized erasure needs at least one block")
    if len(etas) != len(blocks):
        raise DimensionMismatchError(f"{len(blocks)} blocks but {len(etas)} erasure probabilities")
    for eta in etas:
        if not 0.0 <= eta <= 1.0:
            raise ValidationError(f"erasure probability must lie in [0, 1], got {eta!r}")
    flat: list[str] = []
    for block in blocks:
        if len(block) == 0:
            raise ValidationError("generalized erasure blocks must be nonempty")
        flat.extend(str(l) for l in block)
    inp = Alphabet(tuple(flat))
    d = len(blocks)
    out_labels = tuple(l + "'" for l in flat) + tuple(f"{ERASURE_SYMBOL}_{i + 1}" for i in range(d))
    out = Alphabet(out_labels)
    n = inp.size
    matrix = np.zeros((n, n + d))
    pos = 0
    for i, block in enumerate(blocks):
        for _ in block:
            matrix[pos, pos] = 1.0 - etas[i]
            matrix[pos, n + i] = etas[i]
            pos += 1
    return ClassicalChannel(inp, out, matrix)


# ---------------------------------------------------------------------------
# product (multi-use) channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductChannel:
    """``uses`` independent copies of a base channel, kept in factored form.

    Inputs and outputs are length-``uses`` sequences over the base
    alphabets, ordered lexicographically.  The joint matrix is only
    materialized on request and under a size cap; every fidelity query
    goes through the letterwise factorization instead.
    """

    base: ClassicalChannel
    uses: int

    def __post_init__(self) -> None:
        if self.uses < 1:
            raise ValidationError(f"product channel needs >= 1 uses, got {self.uses}")

    @property
    def input_size(self) -> int:
        return self.base.num_inputs ** self.uses

    @property
    def output_size(self) -> int:
        return self.base.num_outputs ** self.uses

    def index_tuples(self) -> Iterator[tuple[int, ...]]:
        """All input sequences as base-index tuples, lexicographic order."""
        return itertools.product(range(self.base.num_inputs), repeat=self.uses)

    def label_separator(self) -> str:
        labels = self.base.input.labels + self.base.output.labels
        return "" if all(len(l) == 1 for l in labels) else ","

    def sequence_label(self, labels: Sequence[str]) -> str:
        return self.label_separator().join(labels)

    def input_sequences(self) -> Iterator[tuple[str, ...]]:
        return itertools.product(self.base.input.labels, repeat=self.uses)

    def joint_conditional(self, xs: Sequence[str], max_size: int = 10 ** 6) -> np.ndarray:
        """Dense output distribution of one input sequence.

        Exponential in ``uses``; intended for small brute-force checks only.
        """
        if len(xs) != self.uses:
            raise DimensionMismatchError(f"expected {self.uses} input symbols, got {len(xs)}")
        if self.output_size > max_size:
            raise ValidationError(
                f"joint conditional has {self.output_size} entries, above the cap {max_size}"
            )
        row = np.ones(1)
        for x in xs:
            row = np.kron(row, self.base.row(x))
        return row

    def materialize(self, max_entries: int = 10 ** 6) -> ClassicalChannel:
        """Dense channel on sequence alphabets.  Exponential; capped."""
        entries = self.input_size * self.output_size
        if entries > max_entries:
            raise ValidationError(
                f"materialized product channel has {entries} entries, above the cap {max_entries}"
            )
        matrix = np.ones((1, 1))
        for _ in range(self.uses):
            matrix = np.kron(matrix, self.base.matrix)
        sep = self.label_separator()
        inp = Alphabet(tuple(sep.join(t) for t in itertools.product(self.base.input.labels, repeat=self.uses)))
        out = Alphabet(tuple(sep.join(t) for t in itertools.product(self.base.output.labels, repeat=self.uses)))
        return ClassicalChannel(inp, out, matrix)


def product_reverse_fidelity(product: ProductChannel, xs: Sequence[str],
                             xhats: Sequence[str]) -> float:
    """Reverse fidelity of two input sequences of a product channel.

    Computed letterwise: the fidelity of independent products factorizes
    into the product of per-letter fidelities, so the joint distributions
    are never built.
    """
    if len(xs) != product.uses or len(xhats) != product.uses:
        raise DimensionMismatchError(
            f"expected two sequences of {product.uses} symbols, got {len(xs)} and {len(xhats)}"
        )
    rows = product.base.matrix
    index = product.base.input.index
    result = 1.0
    for x, xhat in zip(xs, xhats):
        result *= _fidelity_masses(rows[index(x)], rows[index(xhat)])
    return result


def hamming_distance(xs: Sequence, ys: Sequence) -> int:
    """Number of positions at which two equal-length sequences differ."""
    if len(xs) != len(ys):
        raise DimensionMismatchError(f"sequences have different lengths {len(xs)} and {len(ys)}")
    return sum(1 for a, b in zip(xs, ys) if a != b)


def erasure_sequence_fidelity(eta: float, differences: int) -> float:
    """Closed-form reverse fidelity for erasure-channel sequences.

    Two sequences differing in ``differences`` positions have reverse
    fidelity ``eta ** (2 * differences)``: each differing position
    contributes one factor of ``eta**2`` (overlap on the erasure symbol
    only) and agreeing positions contribute 1.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"erasure probability must lie in [0, 1], got {eta!r}")
    if differences < 0:
        raise ValidationError(f"difference count must be >= 0, got {differences}")
    return float(eta) ** (2 * differences)


def erasure_epsilon_threshold(eta: float, differences: int = 1) -> float:
    """Smallest epsilon at which erasure sequences this far apart may merge.

    Merging needs ``eta**(2*differences) >= 1 - epsilon``, i.e.
    ``epsilon >= 1 - eta**(2*differences)``.  For ``eta = 0.5`` and one
    differing position this is 0.75; a figure of 0.85 sometimes quoted for
    that example does not satisfy the closed form and is reported by this
    library only as a flagged discrepancy.
    """
    return 1.0 - erasure_sequence_fidelity(eta, differences)


def erasure_max_mergeable_differences(eta: float, epsilon: float, limit: int) -> int:
    """Largest number of differing positions (up to ``limit``) still mergeable.

    Scans integers instead of inverting the power so boundary cases are
    decided by the same ``>=`` comparison the graph builder uses.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if limit < 0:
        raise ValidationError(f"limit must be >= 0, got {limit}")
    best = 0
    for s in range(limit + 1):
        if erasure_sequence_fidelity(eta, s) >= 1.0 - epsilon:
            best = s
        else:
            break
    return best


def iter_sequences(size: int, k: int) -> Iterable[tuple[int, ...]]:
    """Lexicographic index tuples of length ``k`` over ``range(size)``."""
    return itertools.product(range(size), repeat=k)
