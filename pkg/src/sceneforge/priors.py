"""The spatial knowledge base.

Estimates occurrence, support, surface, and relative-position priors from
an ObservationSet, answers queries with taxonomy back-off, samples and
evaluates the position densities, and round-trips the whole thing through
a versioned JSON file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .catalog import Taxonomy
from .corpus import ObservationSet, RelationKind, RelposKey
from .errors import KnowledgeBaseError, NoDataError
from .geometry import signed_angle_diff, wrap_angle

# Fewer support observations than this and the lookup climbs the taxonomy.
BACKOFF_K = 5

# Scott's rule for a 3-dimensional KDE, with a floor so duplicate samples
# cannot collapse a kernel to zero width.
_SCOTT_EXPONENT = -1.0 / 7.0
BANDWIDTH_FLOOR = 1e-3

KB_FORMAT_VERSION = 1

# Scene-type wildcard used by the relpos back-off.
ANY_SCENE = "*"


@dataclass
class RelposDensity:
    """KDE over (x, y, theta) samples: Gaussian in-plane, wrapped in angle."""

    samples: np.ndarray  # (n, 3)
    bandwidth: np.ndarray  # (h_x, h_y, h_theta)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float).reshape(-1, 3)
        self.bandwidth = np.asarray(self.bandwidth, dtype=float).reshape(3)
        if len(self.samples) == 0:
            raise KnowledgeBaseError("a position density needs at least one sample")
        if not np.all(self.bandwidth > 0):
            raise KnowledgeBaseError("bandwidths must be strictly positive")

    def __len__(self) -> int:
        return len(self.samples)

    def density(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        squeeze = pts.ndim == 1
        out = kernels.kde_density(self.samples, self.bandwidth, pts.reshape(-1, 3))
        return out[0] if squeeze else out

    def sample(self, rng: np.random.Generator) -> tuple[float, float, float]:
        base = self.samples[int(rng.integers(len(self.samples)))]
        noise = rng.normal(size=3) * self.bandwidth
        return (
            float(base[0] + noise[0]),
            float(base[1] + noise[1]),
            wrap_angle(base[2] + noise[2]),
        )


def fit_bandwidths(samples: np.ndarray) -> np.ndarray:
    """Per-dimension Scott's-rule bandwidths, angle treated circularly.

    The angular spread is the standard deviation of the signed deviations
    from the circular mean, so a tight cluster straddling 0/2*pi is still
    seen as tight.
    """
    arr = np.asarray(samples, dtype=float).reshape(-1, 3)
    factor = len(arr) ** _SCOTT_EXPONENT
    sx = float(np.std(arr[:, 0]))
    sy = float(np.std(arr[:, 1]))
    mean_angle = float(np.arctan2(np.mean(np.sin(arr[:, 2])), np.mean(np.cos(arr[:, 2]))))
    deviations = [signed_angle_diff(t, mean_angle) for t in arr[:, 2]]
    st = float(np.std(deviations))
    return np.maximum(factor * np.array([sx, sy, st]), BANDWIDTH_FLOOR)


@dataclass
class KnowledgeBase:
    """Immutable once estimated; lookups may be called concurrently."""

    occ: dict[tuple[str, str], float] = field(default_factory=dict)
    support: dict[str, dict[str, float]] = field(default_factory=dict)
    surf_sup: dict[str, dict[str, float]] = field(default_factory=dict)
    surf_att: dict[str, dict[str, float]] = field(default_factory=dict)
    relpos: dict[RelposKey, RelposDensity] = field(default_factory=dict)
    support_obs: dict[str, int] = field(default_factory=dict)
    scene_counts: dict[str, int] = field(default_factory=dict)
    taxonomy: Taxonomy = field(default_factory=lambda: Taxonomy({}))
    backoff_k: int = BACKOFF_K

    def __post_init__(self):
        self._relpos_cache: dict[tuple, RelposDensity | None] = {}

    # -- estimation -------------------------------------------------------

    def scene_types(self) -> list[str]:
        return sorted(self.scene_counts)

    def categories_for(self, scene_type: str) -> list[str]:
        return sorted(c for c, s in self.occ if s == scene_type)


def estimate_occurrence(obs: ObservationSet) -> dict[tuple[str, str], float]:
    """P(category present | scene type) as a plain count ratio."""
    out = {}
    for (cat, stype), n in obs.occ_counts.items():
        total = obs.scene_counts[stype]
        if total <= 0:
            raise KnowledgeBaseError(f"no scenes of type {stype!r} behind occurrence counts")
        out[cat, stype] = n / total
    return out


def _ratio_rows(counts, denominators) -> dict[str, dict[str, float]]:
    rows: dict[str, dict[str, float]] = {}
    for (child, key), n in counts.items():
        rows.setdefault(child, {})[_plain(key)] = n / denominators[child]
    return rows


def _plain(key) -> str:
    # BoxSide values serialize as their strings.
    return key.value if hasattr(key, "value") else key


def estimate_support(obs: ObservationSet) -> dict[str, dict[str, float]]:
    """P(parent category | child category) over observed support edges."""
    return _ratio_rows(obs.support_counts, obs.child_counts)


def estimate_surface_priors(
    obs: ObservationSet,
) -> tuple[dict[str, dict[str, float]], dict[str, dict[str, float]]]:
    """(support-surface class prior, attachment-side prior) per category."""
    return (
        _ratio_rows(obs.surf_sup_counts, obs.child_counts),
        _ratio_rows(obs.surf_att_counts, obs.child_counts),
    )


def fit_relpos(obs: ObservationSet) -> dict[RelposKey, RelposDensity]:
    out = {}
    for key in sorted(obs.relpos_samples, key=lambda k: (k[0], k[1], k[2], k[3].value)):
        samples = np.asarray(obs.relpos_samples[key], dtype=float)
        out[key] = RelposDensity(samples=samples, bandwidth=fit_bandwidths(samples))
    return out


def build_kb(obs: ObservationSet, taxonomy: Taxonomy) -> KnowledgeBase:
    surf_sup, surf_att = estimate_surface_priors(obs)
    return KnowledgeBase(
        occ=estimate_occurrence(obs),
        support=estimate_support(obs),
        surf_sup=surf_sup,
        surf_att=surf_att,
        relpos=fit_relpos(obs),
        support_obs=dict(obs.child_counts),
        scene_counts=dict(obs.scene_counts),
        taxonomy=taxonomy,
    )


# -- lookups with taxonomy back-off ----------------------------------------


def _backed_off_row(
    kb: KnowledgeBase, table: dict[str, dict[str, float]], category: str
) -> dict[str, float]:
    """Row for the first category up the chain with enough observations.

    A category observed ``backoff_k`` or more times answers for itself;
    anything rarer defers to an ancestor.  With no qualifying ancestor the
    fallback is uniform over every value the table has seen anywhere.
    """
    for cat in kb.taxonomy.chain(category):
        if kb.support_obs.get(cat, 0) >= kb.backoff_k and cat in table:
            return dict(table[cat])
    values = sorted({v for row in table.values() for v in row})
    if not values:
        return {}
    p = 1.0 / len(values)
    return {v: p for v in values}


def lookup_support(category: str, kb: KnowledgeBase) -> dict[str, float]:
    """Distribution over parent categories for a child category."""
    return _backed_off_row(kb, kb.support, category)


def lookup_surface_support(category: str, kb: KnowledgeBase) -> dict[str, float]:
    """Distribution over support-surface feature classes for a category."""
    return _backed_off_row(kb, kb.surf_sup, category)


def lookup_attachment(category: str, kb: KnowledgeBase) -> dict[str, float]:
    """Distribution over attachment box sides for a category."""
    return _backed_off_row(kb, kb.surf_att, category)


def occurrence(kb: KnowledgeBase, category: str, scene_type: str) -> float:
    return kb.occ.get((category, scene_type), 0.0)


def _subtree_match(taxonomy: Taxonomy, cat: str, ancestor: str) -> bool:
    return cat == ancestor or taxonomy.is_descendant(cat, ancestor)


def resolve_relpos(
    kb: KnowledgeBase,
    obj_category: str,
    ref_category: str,
    scene_type: str,
    kind: RelationKind,
) -> RelposDensity:
    """Position density for an object/reference pair, backing off as needed.

    Generalizes the object category first, then the reference category,
    then the scene type; each candidate level pools the samples of every
    observed key inside the candidate categories' subtrees, refitting
    bandwidths on the pooled set.
    """
    for stype in (scene_type, ANY_SCENE):
        for ref_cand in kb.taxonomy.chain(ref_category):
            for obj_cand in kb.taxonomy.chain(obj_category):
                density = _pooled_density(kb, obj_cand, ref_cand, stype, kind)
                if density is not None:
                    return density
    raise NoDataError(
        f"no position observations for {obj_category!r} against {ref_category!r}"
    )


def _pooled_density(
    kb: KnowledgeBase, obj_cand: str, ref_cand: str, stype: str, kind: RelationKind
) -> RelposDensity | None:
    cache_key = (obj_cand, ref_cand, stype, kind)
    if cache_key in kb._relpos_cache:
        return kb._relpos_cache[cache_key]
    pooled = []
    for (obj_c, ref_c, scene_c, kind_c), density in sorted(
        kb.relpos.items(), key=lambda item: (item[0][0], item[0][1], item[0][2], item[0][3].value)
    ):
        if kind_c is not kind:
            continue
        if stype != ANY_SCENE and scene_c != stype:
            continue
        if not _subtree_match(kb.taxonomy, obj_c, obj_cand):
            continue
        if not _subtree_match(kb.taxonomy, ref_c, ref_cand):
            continue
        pooled.append(density.samples)
    if pooled:
        samples = np.concatenate(pooled)
        result = RelposDensity(samples=samples, bandwidth=fit_bandwidths(samples))
    else:
        result = None
    kb._relpos_cache[cache_key] = result
    return result


def sample_relpos(
    kb: KnowledgeBase,
    obj_category: str,
    ref_category: str,
    scene_type: str,
    kind: RelationKind,
    rng: np.random.Generator,
) -> tuple[float, float, float]:
    return resolve_relpos(kb, obj_category, ref_category, scene_type, kind).sample(rng)


def relpos_density(
    kb: KnowledgeBase,
    obj_category: str,
    ref_category: str,
    scene_type: str,
    kind: RelationKind,
    points: np.ndarray,
) -> np.ndarray:
    return resolve_relpos(kb, obj_category, ref_category, scene_type, kind).density(points)


# -- serialization ----------------------------------------------------------


def _join(*parts: str) -> str:
    return "|".join(parts)


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    payload = {
        "version": KB_FORMAT_VERSION,
        "occ": {_join(cat, stype): p for (cat, stype), p in sorted(kb.occ.items())},
        "support": {c: dict(sorted(row.items())) for c, row in sorted(kb.support.items())},
        "surfSup": {c: dict(sorted(row.items())) for c, row in sorted(kb.surf_sup.items())},
        "surfAtt": {c: dict(sorted(row.items())) for c, row in sorted(kb.surf_att.items())},
        "relpos": {
            _join(o, r, s, kind.value): {
                "samples": [list(point) for point in density.samples],
                "bandwidth": list(density.bandwidth),
            }
            for (o, r, s, kind), density in sorted(
                kb.relpos.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], kv[0][3].value)
            )
        },
        "counts": {
            "support": dict(sorted(kb.support_obs.items())),
            "scenes": dict(sorted(kb.scene_counts.items())),
        },
        "taxonomy": dict(sorted(kb.taxonomy.parent_of.items())),
        "taxonomyRoot": kb.taxonomy.root,
        "backoffK": kb.backoff_k,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_kb(path: str | Path) -> KnowledgeBase:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise KnowledgeBaseError(f"{path}: no such knowledge base file") from None
    except json.JSONDecodeError as exc:
        raise KnowledgeBaseError(f"{path}: corrupt knowledge base ({exc.msg} at line {exc.lineno})") from exc
    version = raw.get("version")
    if version != KB_FORMAT_VERSION:
        raise KnowledgeBaseError(
            f"{path}: format version {version!r}, expected {KB_FORMAT_VERSION}"
        )
    try:
        occ = {}
        for key, p in raw["occ"].items():
            cat, stype = key.split("|")
            occ[cat, stype] = p
        relpos = {}
        for key, entry in raw["relpos"].items():
            obj_c, ref_c, stype, kind = key.split("|")
            relpos[obj_c, ref_c, stype, RelationKind(kind)] = RelposDensity(
                samples=np.asarray(entry["samples"], dtype=float),
                bandwidth=np.asarray(entry["bandwidth"], dtype=float),
            )
        return KnowledgeBase(
            occ=occ,
            support=raw["support"],
            surf_sup=raw["surfSup"],
            surf_att=raw["surfAtt"],
            relpos=relpos,
            support_obs=raw["counts"]["support"],
            scene_counts=raw["counts"]["scenes"],
            taxonomy=Taxonomy(raw["taxonomy"], root=raw.get("taxonomyRoot", "thing")),
            backoff_k=raw.get("backoffK", BACKOFF_K),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise KnowledgeBaseError(f"{path}: corrupt knowledge base ({exc})") from exc
