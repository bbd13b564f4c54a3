"""Inference-only numerics for query-sparsity scoring and sparse attention.

Implements the query-sparsity measures (a KL-to-uniform score, its
constant-shifted form, and the cheap max-minus-mean surrogate) plus the
sparse attention rule itself: only the top-s queries by surrogate score
attend over all keys, the rest fall back to the value mean. A dense
softmax oracle ships alongside for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rampkit.errors import InvalidSError


@dataclass(frozen=True)
class AttentionInput:
    """Query/key/value matrices with a shared key dimension ``d``."""

    Q: np.ndarray
    K: np.ndarray
    V: np.ndarray
    d: int

    def __post_init__(self) -> None:
        Q = np.asarray(self.Q, dtype=float)
        K = np.asarray(self.K, dtype=float)
        V = np.asarray(self.V, dtype=float)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "V", V)
        if Q.ndim != 2 or K.ndim != 2 or V.ndim != 2:
            raise ValueError("Q, K, V must be 2-D")
        if Q.shape[1] != K.shape[1] or K.shape[0] != V.shape[0]:
            raise ValueError("inconsistent Q/K/V shapes")
        if self.d < 1:
            raise ValueError("key dimension d must be >= 1")
        if not (np.isfinite(Q).all() and np.isfinite(K).all() and np.isfinite(V).all()):
            raise ValueError("attention inputs must be finite")

    @property
    def L_Q(self) -> int:
        return self.Q.shape[0]

    @property
    def L_K(self) -> int:
        return self.K.shape[0]


def _scaled_scores(q: np.ndarray, K: np.ndarray, d: int) -> np.ndarray:
    return K @ np.asarray(q, dtype=float) / math.sqrt(d)


def kl_uniform_score(q, K, d: int) -> float:
    """Divergence of one query's attention distribution from uniform.

    log-sum-exp of the scaled scores, minus their mean, minus log of the
    key count, evaluated with max-shift stabilization.
    """
    s = _scaled_scores(q, np.asarray(K, dtype=float), d)
    peak = float(s.max())
    lse = peak + math.log(np.exp(s - peak).sum())
    return float(lse - s.mean() - math.log(s.size))


def m_score(q, K, d: int) -> float:
    """Dominant-query criterion: log-sum-exp minus arithmetic mean."""
    s = _scaled_scores(q, np.asarray(K, dtype=float), d)
    peak = float(s.max())
    lse = peak + math.log(np.exp(s - peak).sum())
    return float(lse - s.mean())


def m_bar_score(q, K_sample, d: int) -> float:
    """Cheap surrogate: max minus mean of the sampled scaled scores."""
    s = _scaled_scores(q, np.asarray(K_sample, dtype=float), d)
    return float(s.max() - s.mean())


def dense_attention(inputs: AttentionInput) -> np.ndarray:
    """Full softmax attention, the verification oracle."""
    scores = inputs.Q @ inputs.K.T / math.sqrt(inputs.d)
    shifted = scores - scores.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    weights /= weights.sum(axis=1, keepdims=True)
    return weights @ inputs.V


def sample_count(L_K: int, L_Q: int, sample_factor: float) -> int:
    """Keys sampled per query: factor * L_K ln L_K dot products total."""
    total = math.ceil(sample_factor * L_K * max(1.0, math.log(L_K)))
    return max(1, min(L_K, math.ceil(total / L_Q)))


@dataclass
class SparseAttentionStats:
    """Instrumentation for the scoring phase."""

    scoring_dot_products: int = 0
    sampled_per_query: int = 0
    selected: tuple[int, ...] = field(default_factory=tuple)


def prob_sparse_attention(
    inputs: AttentionInput,
    s: int,
    sample_factor: float = 1.0,
    seed: int = 0,
    stats: SparseAttentionStats | None = None,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Sparse attention output and the selected query set.

    Each query scores a seeded random key sample with the max-minus-mean
    surrogate; the top-``s`` queries (ties to the lower index) attend over
    all keys through the dense softmax, everyone else receives the column
    mean of the values. With ``s == L_Q`` the result equals the dense
    oracle exactly.
    """
    L_Q, L_K = inputs.L_Q, inputs.L_K
    if not 1 <= s <= L_Q:
        raise InvalidSError(f"s must lie in [1, {L_Q}], got {s}")
    if sample_factor <= 0:
        raise ValueError("sample_factor must be positive")

    rng = np.random.default_rng(seed)
    n_sample = sample_count(L_K, L_Q, sample_factor)

    scores = np.empty(L_Q)
    dot_products = 0
    for i in range(L_Q):
        picks = rng.choice(L_K, size=n_sample, replace=False)
        scores[i] = m_bar_score(inputs.Q[i], inputs.K[picks], inputs.d)
        dot_products += n_sample

    order = np.lexsort((np.arange(L_Q), -scores))
    selected = tuple(sorted(int(i) for i in order[:s]))

    output = np.tile(inputs.V.mean(axis=0), (L_Q, 1))
    sel = list(selected)
    sub = AttentionInput(Q=inputs.Q[sel], K=inputs.K, V=inputs.V, d=inputs.d)
    output[sel] = dense_attention(sub)

    if stats is not None:
        stats.scoring_dot_products = dot_products
        stats.sampled_per_query = n_sample
        stats.selected = selected
    return output, selected


def top_queries_by_score(inputs: AttentionInput, s: int, scorer) -> tuple[int, ...]:
    """Top-s query indices under a full-key-set scorer (ties to lower index)."""
    scores = np.array([scorer(inputs.Q[i], inputs.K, inputs.d) for i in range(inputs.L_Q)])
    order = np.lexsort((np.arange(inputs.L_Q), -scores))
    return tuple(sorted(int(i) for i in order[:s]))
