"""
credit.py — Fractional contribution of each byline author.

ALPHABETICAL fields split credit equally. POSITION_WEIGHTED fields (life sciences)
give most of the credit to first and last authors, with a second tier for the
second and second-to-last authors when first and last come from different
universities. Weight tables come from AnalysisConfig.credit_weights.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from errors import BylineLookupError
from model import BylineConvention, PositionWeights, Publication

logger = logging.getLogger(__name__)

DEFAULT_WEIGHTS = PositionWeights()


@dataclass(frozen=True)
class CreditVector:
    weights: Mapping[int, float]  # byline position → share of credit

    def __getitem__(self, position: int) -> float:
        return self.weights[position]

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(self.weights[p] for p in sorted(self.weights))


def _same_university(pub: Publication) -> bool:
    first = pub.byline[0].affiliation_university_id
    last = pub.byline[-1].affiliation_university_id
    return first is not None and first == last


def _position_weighted(pub: Publication, w: PositionWeights) -> list[float]:
    n = pub.n_authors
    if n == 1:
        return [1.0]
    raw = [0.0] * n
    if _same_university(pub):
        raw[0], raw[-1] = w.same_first, w.same_last
        if n > 2:
            for i in range(1, n - 1):
                raw[i] = w.same_others / (n - 2)
        return raw

    if n >= 4:
        aff = [a.affiliation_university_id for a in pub.byline]
        if (aff[0] is not None and aff[0] == aff[1]) or (aff[-1] is not None and aff[-1] == aff[-2]):
            logger.debug("Mixed affiliation pattern on %s; using different-universities weights",
                         pub.pub_id)
    raw[0], raw[-1] = w.diff_first, w.diff_last
    if n >= 3:
        raw[1] = w.diff_second
    if n >= 4:
        raw[-2] = w.diff_second_to_last
    if n > 4:
        for i in range(2, n - 2):
            raw[i] = w.diff_others / (n - 4)
    return raw


def credit_vector(pub: Publication, convention: BylineConvention,
                  weights: PositionWeights = DEFAULT_WEIGHTS) -> CreditVector:
    """Credit share of every byline position; shares sum to 1."""
    n = pub.n_authors
    if convention is BylineConvention.ALPHABETICAL:
        raw = [1.0 / n] * n
    else:
        raw = _position_weighted(pub, weights)
        total = math.fsum(raw)
        if abs(total - 1.0) > 1e-12:
            # empty positional slots for short bylines: rescale to keep the stated ratios
            raw = [x / total for x in raw]
    return CreditVector(MappingProxyType({i + 1: share for i, share in enumerate(raw)}))


def contribution_of(pub: Publication, researcher_id: str, convention: BylineConvention,
                    weights: PositionWeights = DEFAULT_WEIGHTS) -> float:
    """Total credit of one researcher on a publication (sum over their byline positions)."""
    positions = [a.position for a in pub.byline if a.researcher_id == researcher_id]
    if not positions:
        raise BylineLookupError(f"Researcher {researcher_id} is not on the byline of {pub.pub_id}")
    vector = credit_vector(pub, convention, weights)
    return math.fsum(vector[p] for p in positions)
