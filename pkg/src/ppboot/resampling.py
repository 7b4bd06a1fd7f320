"""Deterministic, parallel-safe resampling primitives.

All randomness in the package flows through :class:`RngStream`, a counter-based
substream keyed by ``(master_seed, path)``.  Because every draw is a pure
function of its stream, results are bit-identical regardless of execution
order or thread count.  Path components are allocated by convention: the first
components identify the task (e.g. trial index), followed by a phase tag and
the iteration number within the phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Phase tags appended to stream paths.  Tuning and the main bootstrap must
# never share draws; data splits and synthetic generation get their own tags.
PHASE_SPLIT = 0
PHASE_TUNING = 1
PHASE_MAIN = 2
PHASE_SYNTHETIC = 3

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RngStream:
    """A position in the substream tree.

    Identical ``(master_seed, path)`` pairs produce identical draw sequences;
    distinct paths produce statistically independent streams.  A path is never
    reused for two purposes: derive a fresh child instead.
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= int(self.master_seed) <= _MAX_SEED):
            raise ValueError(f"master_seed must be in [0, 2^64): got {self.master_seed}")
        path = tuple(int(c) for c in self.path)
        if any(c < 0 for c in path):
            raise ValueError(f"path components must be non-negative: got {path}")
        object.__setattr__(self, "path", path)

    def child(self, *components: int) -> "RngStream":
        """Return the stream at ``path + components``."""
        return RngStream(self.master_seed, self.path + tuple(components))

    def generator(self) -> np.random.Generator:
        """Instantiate the counter-based generator for this stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class ResampleIndices:
    """With-replacement resample indices for a labeled/unlabeled dataset pair."""

    labeled_idx: np.ndarray
    unlabeled_idx: np.ndarray


def draw_labeled_indices(n: int, stream: RngStream) -> np.ndarray:
    """Draw ``n`` i.i.d. uniform indices from ``[0, n)``.

    These are exactly the labeled-side draws of :func:`draw_resample` on the
    same stream, so labeled-only bootstraps (the classical method) consume
    identical indices to the combined procedure.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return stream.generator().integers(0, n, size=n)


# Sub-tag for the unlabeled half of a resample draw.  Keeping the two halves
# on sibling streams means the labeled draws coincide with labeled-only
# consumers (classical bootstrap) and the unlabeled draws are identical across
# methods whose labeled sizes differ (cross-fitting vs data splitting).
UNLABELED_TAG = 1


def draw_resample(n: int, N: int, stream: RngStream) -> ResampleIndices:
    """Draw one with-replacement resample of both datasets.

    Labeled indices come from ``stream`` itself and unlabeled indices from
    ``stream.child(UNLABELED_TAG)``; both couplings are load-bearing and must
    not change (see :func:`draw_labeled_indices` and the module docstring).
    """
    if n < 1 or N < 1:
        raise ValueError(f"need n >= 1 and N >= 1, got n={n}, N={N}")
    labeled = stream.generator().integers(0, n, size=n)
    unlabeled = stream.child(UNLABELED_TAG).generator().integers(0, N, size=N)
    return ResampleIndices(labeled, unlabeled)


def nearest_rank_index(q: float, m: int) -> int:
    """0-based position of the nearest-rank upper q-quantile in a sorted sample.

    Computes ``ceil(q * m)`` (1-based, clamped to [1, m]) with a small fuzz so
    products that are mathematically integral do not round upward.
    """
    k = math.ceil(q * m - 1e-9)
    return min(max(k, 1), m) - 1


def empirical_quantile(values, q: float) -> float:
    """Nearest-rank upper quantile: the sorted sample's ceil(q*len)-th element."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("values must be a non-empty 1-D sequence")
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie strictly inside (0, 1): got {q}")
    k = nearest_rank_index(q, arr.size)
    return float(np.partition(arr, k)[k])
