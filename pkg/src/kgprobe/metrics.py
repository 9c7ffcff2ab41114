"""Ranking metrics and knowledge-contribution ratios.

All list metrics average a per-user quantity over the evaluated users. For a
user ``u`` with relevant set ``R(u)`` and ranked recommendations ``r_1, r_2,
...``:

* ``MRR``: ``1 / rank_u`` where ``rank_u`` is the position of the first
  relevant item.
* ``Hit@K``: 1 if any of ``r_1..r_K`` is relevant, else 0.
* ``NDCG@K``: ``DCG@K / IDCG@K`` with gain ``1/log2(i + 1)`` at position
  ``i``; the ideal DCG places ``min(|R(u)|, K)`` relevant items first.
* ``Precision@K``: ``|top-K ∩ R(u)| / K``.
* ``Recall@K``: ``|top-K ∩ R(u)| / |R(u)|``.

The knowledge-contribution ratio compares a model's score with the graph
intact against the same setup with a ``delta`` share of knowledge removed:
``(m_orig - m_pert) / (delta * m_orig)``. Its unscaled companion leaves out
``delta``. Positive values mean the removed knowledge was helping; negative
values mean the model did better without it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class RankingResult:
    """One user's ranked candidate list and relevant set."""

    user: int
    ranked_items: np.ndarray
    positives: frozenset[int]

    _hits: np.ndarray | None = field(default=None, repr=False, compare=False)

    def hit_mask(self) -> np.ndarray:
        if self._hits is None:
            pos = np.fromiter(self.positives, dtype=np.int64, count=len(self.positives))
            self._hits = np.isin(self.ranked_items, pos)
        return self._hits

    def first_rank(self) -> int:
        """1-based rank of the best-placed relevant item."""
        hits = np.flatnonzero(self.hit_mask())
        if len(hits) == 0:
            raise ValueError(f"user {self.user}: no relevant item in the ranking")
        return int(hits[0]) + 1


def _check(results: list[RankingResult], k: int | None = None) -> None:
    if not results:
        raise ValueError("no users to evaluate")
    if k is not None and k < 1:
        raise ValueError(f"cutoff must be at least 1, got {k}")


def mrr(results: list[RankingResult]) -> float:
    _check(results)
    return float(np.mean([1.0 / r.first_rank() for r in results]))


def hit_at_k(results: list[RankingResult], k: int) -> float:
    _check(results, k)
    return float(np.mean([1.0 if r.hit_mask()[:k].any() else 0.0 for r in results]))


def ndcg_at_k(results: list[RankingResult], k: int) -> float:
    _check(results, k)
    discounts = 1.0 / np.log2(np.arange(2, k + 2))
    vals = []
    for r in results:
        hits = r.hit_mask()[:k]
        dcg = float(discounts[: len(hits)][hits].sum())
        ideal_len = min(len(r.positives), k)
        idcg = float(discounts[:ideal_len].sum())
        vals.append(dcg / idcg if idcg > 0 else 0.0)
    return float(np.mean(vals))


def precision_at_k(results: list[RankingResult], k: int) -> float:
    _check(results, k)
    return float(np.mean([r.hit_mask()[:k].sum() / k for r in results]))


def recall_at_k(results: list[RankingResult], k: int) -> float:
    _check(results, k)
    return float(
        np.mean([r.hit_mask()[:k].sum() / len(r.positives) for r in results])
    )


def kgus(m_orig: float, m_pert: float) -> float:
    """Unscaled knowledge contribution: relative metric drop after removal."""
    if not math.isfinite(m_orig) or m_orig <= 0:
        raise ValueError(f"original metric must be positive, got {m_orig}")
    return (m_orig - m_pert) / m_orig


def kger(m_orig: float, m_pert: float, delta: float) -> float:
    """Knowledge contribution per unit of removed knowledge.

    ``delta`` is the removed share, in ``(0, 1]``: a full swap of the graph
    (the replacement regimes) uses ``delta = 1``; a ratio sweep point uses
    its ratio. Scaling by ``delta`` makes points of one sweep comparable.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if not math.isfinite(m_orig) or m_orig <= 0:
        raise ValueError(f"original metric must be positive, got {m_orig}")
    return (m_orig - m_pert) / (delta * m_orig)
