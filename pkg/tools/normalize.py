"""
normalize.py — Citation baselines per (year, subject category) and field-normalized citations.

A publication's scaled citation is c / c̄, where c̄ is the mean citation count of
the publications sharing its year and category (only cited ones by default).
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from errors import AnalysisError
from model import BaselineScope, MultiCategoryRule, Publication

logger = logging.getLogger(__name__)

Cell = tuple[int, str]


@dataclass(frozen=True)
class BaselineTable:
    means: Mapping[Cell, float]
    counts: Mapping[Cell, int]
    scope: BaselineScope = BaselineScope.CITED_ONLY
    rule: MultiCategoryRule = MultiCategoryRule.MEAN_OF_RATIOS

    def mean(self, year: int, category: str) -> float | None:
        return self.means.get((year, category))


def build_baselines(ds) -> BaselineTable:
    """Mean citations per (year, category) over the dataset's publications."""
    scope = ds.config.baseline_scope
    cells: dict[Cell, list[float]] = defaultdict(list)
    for pub in ds.publications:
        if scope is BaselineScope.CITED_ONLY and pub.citation_count <= 0:
            continue
        for category in pub.categories:
            cells[(pub.year, category)].append(pub.citation_count)

    means, counts = {}, {}
    for cell in sorted(cells):
        values = cells[cell]
        total = math.fsum(values)
        if total <= 0:
            continue  # ALL scope with only uncited papers: no usable mean
        means[cell] = total / len(values)
        counts[cell] = len(values)
    logger.info("Built %d citation baseline cells (%s)", len(means), scope.value)
    return BaselineTable(MappingProxyType(means), MappingProxyType(counts),
                         scope, ds.config.multi_category_rule)


def scaled_citation(pub: Publication, baselines: BaselineTable) -> float:
    """Field-normalized citation score of one publication."""
    if pub.citation_count == 0:
        return 0.0
    categories = pub.categories
    if baselines.rule is MultiCategoryRule.PRIMARY_CATEGORY:
        categories = categories[:1]
    ratios = []
    for category in categories:
        mean = baselines.mean(pub.year, category)
        if mean is not None:
            ratios.append(pub.citation_count / mean)
    if not ratios:
        raise AnalysisError(
            f"Publication {pub.pub_id} ({pub.year}, {', '.join(categories)}) is cited "
            "but has no citation baseline"
        )
    if len(ratios) == 1:
        return ratios[0]
    return math.fsum(ratios) / len(ratios)


def scaled_citations(ds, baselines: BaselineTable) -> dict[str, float]:
    """scaled_citation for every publication of the dataset, keyed by pub_id."""
    return {pub.pub_id: scaled_citation(pub, baselines) for pub in ds.publications}
