"""
oracle.py — Brute-force recomputation of every pipeline quantity.

Each formula is evaluated by direct enumeration over the raw Dataset: no
baseline tables, no credit vectors, no cached indexes, and nothing imported
from the pipeline modules. Meant for small synthetic
datasets in equivalence tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class OracleResult:
    kept_sds: list[str] = field(default_factory=list)
    sds_scores: dict[tuple[str, str], float] = field(default_factory=dict)
    uda_scores: dict[tuple[str, str], float] = field(default_factory=dict)
    university_scores: dict[str, float] = field(default_factory=dict)
    # (level, scope) → {university_id: (rank, percentile, class letter)}
    rankings: dict[tuple[str, str], dict[str, tuple[int, float, str]]] = field(default_factory=dict)
    deltas: dict[str, float | None] = field(default_factory=dict)
    r_values: dict[str, float | None] = field(default_factory=dict)


def _kept_sds(ds) -> list[str]:
    kept = []
    for entry in ds.taxonomy.sds_entries:
        members = [r for r in ds.researchers if r.sds_code == entry.sds_code]
        if not members:
            continue
        publishing = 0
        for r in members:
            found = False
            for pub in ds.publications:
                for a in pub.byline:
                    if a.researcher_id == r.researcher_id:
                        found = True
            if found:
                publishing += 1
        if publishing / len(members) >= ds.config.min_publishing_share:
            kept.append(entry.sds_code)
    return sorted(kept)


def _baseline_mean(ds, year, category):
    total, count = 0.0, 0
    for pub in ds.publications:
        if pub.year != year or category not in pub.categories:
            continue
        if ds.config.baseline_scope.value == "cited_only" and pub.citation_count <= 0:
            continue
        total += pub.citation_count
        count += 1
    if count == 0 or total <= 0:
        return None
    return total / count


def _scaled(ds, pub):
    if pub.citation_count == 0:
        return 0.0
    categories = list(pub.categories)
    if ds.config.multi_category_rule.value == "primary_category":
        categories = categories[:1]
    ratios = []
    for category in categories:
        mean = _baseline_mean(ds, pub.year, category)
        if mean is not None:
            ratios.append(pub.citation_count / mean)
    return sum(ratios) / len(ratios)


def _raw_weight(pub, k, position_weighted, w):
    n = len(pub.byline)
    if not position_weighted:
        return 1.0 / n
    if n == 1:
        return 1.0
    first = pub.byline[0].affiliation_university_id
    last = pub.byline[n - 1].affiliation_university_id
    if first is not None and first == last:
        if k == 1:
            return w.same_first
        if k == n:
            return w.same_last
        return w.same_others / (n - 2)
    if k == 1:
        return w.diff_first
    if k == n:
        return w.diff_last
    if k == 2:
        return w.diff_second
    if k == n - 1:
        return w.diff_second_to_last
    return w.diff_others / (n - 4)


def _credit(ds, pub, researcher_id, sds_code):
    position_weighted = ds.taxonomy.convention_of(sds_code).value == "position_weighted"
    w = ds.config.credit_weights
    n = len(pub.byline)
    total = 0.0
    for k in range(1, n + 1):
        total += _raw_weight(pub, k, position_weighted, w)
    own = 0.0
    for a in pub.byline:
        if a.researcher_id == researcher_id:
            own += _raw_weight(pub, a.position, position_weighted, w) / total
    return own


def _salary(ds, researcher):
    return ds.salary_table.entries[researcher.academic_rank] * (
        ds.config.period.end_year - ds.config.period.start_year + 1
    )


def _class_letter(percentile):
    if percentile <= 20:
        return "E"
    if percentile <= 40:
        return "D"
    if percentile <= 60:
        return "C"
    if percentile <= 80:
        return "B"
    return "A"


def _rank(values: dict[str, float]) -> dict[str, tuple[int, float, str]]:
    def key(u):
        return float(f"{values[u]:.12g}"), u

    n = len(values)
    ranked = {}
    for u in values:
        rank = 1
        for v in values:
            if key(v) < key(u):
                rank += 1
        percentile = 100 * (rank - 1) / (n - 1)
        ranked[u] = (rank, percentile, _class_letter(percentile))
    return ranked


def _rollup(sds_scores, masses, means, university_id, sds_codes):
    num, den = 0.0, 0.0
    for sds in sds_codes:
        if (university_id, sds) in sds_scores and sds in means:
            num += sds_scores[(university_id, sds)] / means[sds] * masses[(university_id, sds)]
            den += masses[(university_id, sds)]
    if den == 0:
        return None
    return num / den


def oracle_recompute(ds) -> OracleResult:
    result = OracleResult()
    kept = _kept_sds(ds)
    result.kept_sds = kept
    roster = [r for r in ds.researchers if r.sds_code in kept]

    scaled = {pub.pub_id: _scaled(ds, pub) for pub in ds.publications}
    cells = sorted({(r.university_id, r.sds_code) for r in roster})
    masses = {}
    for univ, sds in cells:
        members = [r for r in roster if r.university_id == univ and r.sds_code == sds]
        output = 0.0
        for pub in ds.publications:
            c = scaled[pub.pub_id]
            for r in members:
                on_byline = any(a.researcher_id == r.researcher_id for a in pub.byline)
                if on_byline:
                    output += c * _credit(ds, pub, r.researcher_id, sds)
        mass = sum(_salary(ds, r) for r in members)
        result.sds_scores[(univ, sds)] = output / mass
        masses[(univ, sds)] = mass

    means = {}
    for sds in kept:
        num, den = 0.0, 0.0
        for (univ, s), fss in result.sds_scores.items():
            if s == sds and fss > 0:
                num += fss * masses[(univ, s)]
                den += masses[(univ, s)]
        if den > 0:
            means[sds] = num / den

    universities = sorted({r.university_id for r in roster})
    udas = sorted({ds.taxonomy.uda_of(sds) for sds in kept})
    for uda in udas:
        members = [sds for sds in kept if ds.taxonomy.uda_of(sds) == uda]
        for univ in universities:
            value = _rollup(result.sds_scores, masses, means, univ, members)
            if value is not None:
                result.uda_scores[(univ, uda)] = value
    for univ in universities:
        value = _rollup(result.sds_scores, masses, means, univ, kept)
        if value is not None:
            result.university_scores[univ] = value

    # eligibility and rankings
    for sds in kept:
        values = {u: f for (u, s), f in result.sds_scores.items() if s == sds}
        if len(values) >= 2:
            result.rankings[("sds", sds)] = _rank(values)
    for uda in udas:
        values = {}
        for (u, a), f in result.uda_scores.items():
            staff = [r for r in roster if r.university_id == u and ds.taxonomy.uda_of(r.sds_code) == a]
            if a == uda and len(staff) >= ds.config.min_staff_uda:
                values[u] = f
        if len(values) >= 2:
            result.rankings[("uda", uda)] = _rank(values)
    values = {}
    for u, f in result.university_scores.items():
        if len([r for r in roster if r.university_id == u]) >= ds.config.min_staff_university:
            values[u] = f
    if len(values) >= 2:
        result.rankings[("university", "OVERALL")] = _rank(values)

    # dispersion of UDA classes inside each ranked university
    overall = result.rankings.get(("university", "OVERALL"), {})
    codes = {}
    for univ in sorted(overall):
        mine = []
        for (level, scope), ranked in sorted(result.rankings.items()):
            if level == "uda" and univ in ranked:
                mine.append("ABCDE".index(ranked[univ][2]) + 1)
        if mine:
            codes[univ] = mine
    for univ, xs in codes.items():
        n = len(xs)
        if n < 2:
            result.deltas[univ] = None
            continue
        total = 0
        for i in range(n):
            for j in range(n):
                if i != j:
                    total += abs(xs[i] - xs[j])
        result.deltas[univ] = total / (n * (n - 1))
    defined = [d for d in result.deltas.values() if d is not None]
    top = max(defined) if defined else None
    for univ, d in result.deltas.items():
        if d is None:
            result.r_values[univ] = None
        elif top == 0:
            result.r_values[univ] = 0.0
        else:
            result.r_values[univ] = d / top
    return result
