"""proxlink.features
~~~~~~~~~~~~~~~~~~~~

Joins the geographic, network, cognitive, and institutional feature
sources into one observation row per candidate author pair, stacked
across every window of a scenario. Rows that cannot be fully resolved
(failed geocode, missing knowledge vector, region outside the adjacency
namespace) are excluded and counted by reason; silent row loss is the
main reproducibility hazard here.

Distance and network proximity enter as ln(1 + x): both are frequently
zero (co-located pairs, no bridging path), so a plain log is undefined.
This shifts coefficient scale relative to a bare-log specification and is
applied identically in the inferential and ML models.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import Affiliation, Corpus
from .geo import (
    AdjacencyTable,
    GeocodeCache,
    GeocoderClient,
    RegionTags,
    UnresolvedAddressError,
    contiguity_binary,
    different_continent,
    haversine_km,
    institutional_binaries,
    resolve_affiliation,
)
from .network import (
    CoPubGraph,
    SamplingPolicy,
    WindowPair,
    candidate_pairs,
    eligible_authors,
    outcome_label,
    tenb,
)
from .topics import cognitive_distance, has_zero_variance, knowledge_vector

CONTIGUITY_LEVEL = {1: "province", 2: "province", 3: "country", 4: "country"}


def scenario_feature_names(scenario: int, keep_continent: bool = False) -> list[str]:
    """Model features per scenario schema (ordered as declared)."""
    base = ["ln_geo", "ln_tenb", "interaction", "cog_distance"]
    if scenario == 1:
        extra = ["different_province"]
    elif scenario == 2:
        extra = ["different_province", "different_country"]
    else:
        extra = ["different_country"]
    names = base + extra + ["not_contiguous"]
    if scenario in (3, 4) and keep_continent:
        names.append("different_continent")
    return names


@dataclass
class PairObservation:
    i: str
    j: str
    window_id: str
    co_publication: int
    geo_distance_km: float
    ln_geo: float
    tenb: float
    ln_tenb: float
    interaction: float
    cog_distance: float
    not_contiguous: int
    different_province: Optional[int] = None
    different_country: Optional[int] = None
    different_continent: Optional[int] = None

    def value(self, name: str):
        v = getattr(self, name)
        if v is None:
            raise KeyError(f"feature {name!r} not populated on this row")
        return v


CSV_COLUMNS = ("i", "j", "window_id", "co_publication", "geo_distance_km",
               "ln_geo", "tenb", "ln_tenb", "interaction", "cog_distance",
               "different_province", "different_country", "not_contiguous",
               "different_continent")

_FLOAT_COLUMNS = {"geo_distance_km", "ln_geo", "tenb", "ln_tenb",
                  "interaction", "cog_distance"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@dataclass
class Dataset:
    """One scenario's stacked observation rows plus its build manifest."""

    scenario: int
    rows: list[PairObservation]
    manifest: dict = field(default_factory=dict)
    keep_continent: bool = False

    @property
    def feature_names(self) -> list[str]:
        return scenario_feature_names(self.scenario, self.keep_continent)

    def __len__(self) -> int:
        return len(self.rows)

    def to_matrix(self, names: Optional[Sequence[str]] = None
                  ) -> tuple[np.ndarray, np.ndarray]:
        names = list(names) if names else self.feature_names
        X = np.array([[float(r.value(n)) for n in names] for r in self.rows])
        y = np.array([r.co_publication for r in self.rows], dtype=int)
        return X, y

    def column(self, name: str) -> np.ndarray:
        return np.array([float(r.value(name)) for r in self.rows])

    def has_column(self, name: str) -> bool:
        return all(getattr(r, name, None) is not None for r in self.rows)

    def write_csv(self, path, manifest_path=None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
        if manifest_path is not None:
            with open(manifest_path, "w", encoding="utf-8") as fh:
                json.dump(self.manifest, fh, sort_keys=True, indent=1)
                fh.write("\n")


def canonical_affiliation_in_window(corpus: Corpus, author: str,
                                    span: tuple[int, int]) -> Optional[Affiliation]:
    """The author's first affiliation on their earliest in-window publication."""
    candidates = []
    for pub_id in corpus.authors.get(author, frozenset()):
        rec = corpus.record(pub_id)
        if span[0] <= rec.year <= span[1]:
            candidates.append((rec.year, rec.pub_id, rec))
    if not candidates:
        return None
    _, _, rec = min(candidates)
    for mention in rec.authors:
        if mention.author_key == author:
            return mention.canonical_affiliation
    return None


@dataclass
class GeoContext:
    """Everything needed to turn an affiliation into features."""

    client: Optional[GeocoderClient] = None
    cache: Optional[GeocodeCache] = None
    province_adjacency: Optional[AdjacencyTable] = None
    country_adjacency: Optional[AdjacencyTable] = None

    def adjacency_for(self, level: str) -> AdjacencyTable:
        table = self.province_adjacency if level == "province" else self.country_adjacency
        if table is None:
            table = AdjacencyTable.bundled(level)
            if level == "province":
                self.province_adjacency = table
            else:
                self.country_adjacency = table
        return table


def _author_geo(corpus: Corpus, author: str, span: tuple[int, int],
                geo: GeoContext):
    """(GeoPoint, RegionTags) for an author's canonical window affiliation."""
    aff = canonical_affiliation_in_window(corpus, author, span)
    if aff is None:
        raise UnresolvedAddressError(f"no in-window affiliation for {author}")
    point = resolve_affiliation(aff, geo.client, geo.cache)
    return point, RegionTags.from_affiliation(aff)


def assemble(corpus: Corpus, scenario: int, windows: Sequence[WindowPair],
             geo: GeoContext, graphs: dict[str, CoPubGraph],
             topic_vectors: dict[str, np.ndarray],
             sampling: Optional[SamplingPolicy] = None, seed: int = 0,
             keep_continent: bool = False) -> Dataset:
    """Build the per-pair dataset for one scenario.

    ``graphs`` maps window_id to the feature-span co-publication graph;
    ``topic_vectors`` maps pub_id to its topic proportions.
    """
    sampling = sampling or SamplingPolicy()
    level = CONTIGUITY_LEVEL[scenario]
    adjacency = geo.adjacency_for(level)

    rows: list[PairObservation] = []
    exclusions: dict[str, int] = {}
    degenerate_cognitive = 0
    window_meta = []

    def exclude(reason: str) -> None:
        exclusions[reason] = exclusions.get(reason, 0) + 1

    for window in windows:
        if window.window_id not in graphs:
            raise ValueError(f"missing co-publication graph for window {window.window_id}")
        graph = graphs[window.window_id]
        pairs = candidate_pairs(corpus, window, sampling, seed)
        window_meta.append({
            "window_id": window.window_id,
            "candidate_pairs": len(pairs),
            "eligible_authors": len(eligible_authors(corpus, window)),
            "sampling_kind": sampling.resolved_kind(
                len(eligible_authors(corpus, window))),
        })

        span = window.feature_span
        geo_cache: dict[str, Optional[tuple]] = {}
        kv_cache: dict[str, Optional[np.ndarray]] = {}

        def author_geo(author: str):
            if author not in geo_cache:
                try:
                    geo_cache[author] = _author_geo(corpus, author, span, geo)
                except (UnresolvedAddressError, ValueError):
                    geo_cache[author] = None
            return geo_cache[author]

        def author_kv(author: str):
            if author not in kv_cache:
                pubs = [p for p in corpus.authors.get(author, frozenset())
                        if span[0] <= corpus.record(p).year <= span[1]]
                try:
                    kv_cache[author] = knowledge_vector(author, sorted(pubs), topic_vectors)
                except ValueError:
                    kv_cache[author] = None
            return kv_cache[author]

        for pair in pairs:
            gi = author_geo(pair.i)
            gj = author_geo(pair.j)
            if gi is None or gj is None:
                exclude("unresolved-geocode")
                continue
            (point_i, tags_i), (point_j, tags_j) = gi, gj

            si = author_kv(pair.i)
            sj = author_kv(pair.j)
            if si is None or sj is None:
                exclude("missing-knowledge-vector")
                continue

            try:
                inst = institutional_binaries(tags_i, tags_j, scenario)
            except ValueError:
                exclude("missing-province")
                continue
            try:
                not_contig = contiguity_binary(tags_i, tags_j, adjacency, level)
            except (KeyError, ValueError):
                exclude("region-not-in-adjacency")
                continue

            if has_zero_variance(si) or has_zero_variance(sj):
                degenerate_cognitive += 1
            distance = haversine_km(point_i, point_j)
            ln_geo = math.log1p(distance)
            t = tenb(graph, pair.i, pair.j)
            ln_tenb = math.log1p(t)
            rows.append(PairObservation(
                i=pair.i,
                j=pair.j,
                window_id=window.window_id,
                co_publication=outcome_label(corpus, pair),
                geo_distance_km=distance,
                ln_geo=ln_geo,
                tenb=t,
                ln_tenb=ln_tenb,
                interaction=ln_geo * ln_tenb,
                cog_distance=cognitive_distance(si, sj),
                not_contiguous=not_contig,
                different_province=inst.get("different_province"),
                different_country=inst.get("different_country"),
                different_continent=(different_continent(tags_i, tags_j)
                                     if scenario in (3, 4) else None),
            ))

    manifest = {
        "scenario": scenario,
        "seed": seed,
        "sampling": {"kind": sampling.kind, "ratio": sampling.ratio,
                     "auto_threshold": sampling.auto_threshold},
        "windows": window_meta,
        "exclusions": dict(sorted(exclusions.items())),
        "degenerate_cognitive_pairs": degenerate_cognitive,
        "rows": len(rows),
        "contiguity_level": level,
        "feature_names": scenario_feature_names(scenario, keep_continent),
    }
    return Dataset(scenario=scenario, rows=rows, manifest=manifest,
                   keep_continent=keep_continent)


# ---------------------------------------------------------------------------
# Descriptive statistics and the correlation screen
# ---------------------------------------------------------------------------

_DESCRIBE_VARS = ("geo_distance_km", "tenb", "cog_distance", "ln_geo", "ln_tenb")


@dataclass
class DescribeResult:
    rows: list[dict]
    minority_share: float
    cross_country_collab_share: Optional[float]

    def to_csv(self, path) -> None:
        cols = ("variable", "subset", "n", "mean", "std", "min", "q25",
                "median", "q75", "max")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")
            fh.write(f"minority_share,all,,{_fmt(self.minority_share)},,,,,,\n")
            if self.cross_country_collab_share is not None:
                fh.write("cross_country_share,collaborations,,"
                         f"{_fmt(self.cross_country_collab_share)},,,,,,\n")


def describe(ds: Dataset) -> DescribeResult:
    """Per-variable summary overall and on the collaboration subset."""
    if not ds.rows:
        raise ValueError("dataset is empty")
    y = ds.column("co_publication")
    out_rows = []
    variables = [v for v in _DESCRIBE_VARS] + [
        n for n in ds.feature_names
        if n not in _DESCRIBE_VARS and n != "interaction"
    ]
    for name in variables:
        values = ds.column(name)
        for subset, mask in (("all", np.ones(len(y), bool)), ("collaborations", y == 1)):
            sel = values[mask]
            if len(sel) == 0:
                continue
            out_rows.append({
                "variable": name, "subset": subset, "n": int(len(sel)),
                "mean": float(sel.mean()), "std": float(sel.std()),
                "min": float(sel.min()),
                "q25": float(np.quantile(sel, 0.25)),
                "median": float(np.quantile(sel, 0.5)),
                "q75": float(np.quantile(sel, 0.75)),
                "max": float(sel.max()),
            })
    positives = y == 1
    cross = None
    if ds.has_column("different_country") and positives.any():
        cross = float(ds.column("different_country")[positives].mean())
    return DescribeResult(rows=out_rows, minority_share=float(positives.mean()),
                          cross_country_collab_share=cross)


@dataclass
class CorrelationScreen:
    names: list[str]
    matrix: np.ndarray
    excluded: list[str]
    zero_variance: list[str]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("," + ",".join(self.names) + "\n")
            for i, name in enumerate(self.names):
                fh.write(name + "," + ",".join(_fmt(float(v)) for v in self.matrix[i]) + "\n")
            fh.write("excluded," + ";".join(self.excluded) + "\n")


def correlation_screen(ds: Dataset, threshold: float = 0.8) -> CorrelationScreen:
    """Pearson matrix over outcome + base features; flags collinear features.

    A feature pair with |r| above the threshold marks the later-declared
    feature for exclusion. Zero-variance columns get r = 0 by convention
    and are reported. The distance-by-network interaction is not screened:
    it is definitionally collinear with its components and enters at model
    time only.
    """
    if len(ds.rows) < 2:
        raise ValueError("need at least 2 rows for correlations")
    names = ["co_publication"] + [n for n in ds.feature_names if n != "interaction"]
    if ds.scenario in (3, 4) and "different_continent" not in names \
            and ds.has_column("different_continent"):
        names.append("different_continent")
    cols = np.column_stack([ds.column(n) for n in names])

    sd = cols.std(axis=0)
    zero_var = [names[i] for i in range(len(names)) if sd[i] == 0]
    matrix = np.eye(len(names))
    centered = cols - cols.mean(axis=0)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            if sd[i] == 0 or sd[j] == 0:
                r = 0.0
            else:
                r = float((centered[:, i] @ centered[:, j])
                          / (len(cols) * sd[i] * sd[j]))
            matrix[i, j] = matrix[j, i] = r

    excluded: list[str] = []
    feature_idx = range(1, len(names))  # outcome never excluded
    for i in feature_idx:
        for j in feature_idx:
            if j <= i or names[j] in excluded or names[i] in excluded:
                continue
            if abs(matrix[i, j]) > threshold:
                excluded.append(names[j])
    return CorrelationScreen(names=names, matrix=matrix, excluded=excluded,
                             zero_variance=zero_var)
