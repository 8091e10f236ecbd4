"""Model database: categories, tags, attributes, box geometry, surface
metadata, and a category taxonomy with keyword query."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import CatalogError, TaxonomyError

# Match-score weights for query_models.
_W_CATEGORY = 3
_W_HYPONYM = 2
_W_ATTRIBUTE = 1
_W_KEYWORD = 1

# Extent-ratio thresholds for the thin/flat/blocky classifier.
_THIN_RATIO = 0.2
_FLAT_RATIO = 0.2


class BoxSide(str, Enum):
    """One of the six faces of a model's local bounding box."""

    TOP = "top"
    BOTTOM = "bottom"
    FRONT = "front"
    BACK = "back"
    LEFT = "left"
    RIGHT = "right"


# Local-frame outward unit normal of each box side (+Z up, +Y front).
SIDE_NORMALS: dict[BoxSide, np.ndarray] = {
    BoxSide.TOP: np.array([0.0, 0.0, 1.0]),
    BoxSide.BOTTOM: np.array([0.0, 0.0, -1.0]),
    BoxSide.FRONT: np.array([0.0, 1.0, 0.0]),
    BoxSide.BACK: np.array([0.0, -1.0, 0.0]),
    BoxSide.LEFT: np.array([-1.0, 0.0, 0.0]),
    BoxSide.RIGHT: np.array([1.0, 0.0, 0.0]),
}


def side_face_center(side: BoxSide, half_extents: np.ndarray) -> np.ndarray:
    """Center of the given box face in the model's local frame."""
    return SIDE_NORMALS[side] * half_extents


@dataclass(frozen=True)
class SurfaceFeature:
    """A planar rectangle on a model where children may rest or attach.

    ``center`` and the two orthogonal ``axes`` (half-axis vectors, length =
    half-extent of the rect) are in model-local coordinates.  The surface
    normal is ``cross(axes[0], axes[1])`` normalized; fixture surfaces are
    authored so that it points the way children extend (up for a floor,
    into the room for a wall).
    """

    normal_class: str  # "up" | "down" | "horizontal"
    facing: str  # "interior" | "exterior"
    center: tuple[float, float, float]
    axes: tuple[tuple[float, float, float], tuple[float, float, float]]

    def __post_init__(self):
        u, v = np.asarray(self.axes[0]), np.asarray(self.axes[1])
        if np.linalg.norm(u) == 0 or np.linalg.norm(v) == 0:
            raise CatalogError("surface rect half-axes must be nonzero")
        if abs(float(u @ v)) > 1e-9 * np.linalg.norm(u) * np.linalg.norm(v):
            raise CatalogError("surface rect half-axes must be orthogonal")

    @property
    def half_lengths(self) -> tuple[float, float]:
        return (
            float(np.linalg.norm(self.axes[0])),
            float(np.linalg.norm(self.axes[1])),
        )

    @property
    def unit_axes(self) -> tuple[np.ndarray, np.ndarray]:
        u = np.asarray(self.axes[0], dtype=float)
        v = np.asarray(self.axes[1], dtype=float)
        return u / np.linalg.norm(u), v / np.linalg.norm(v)

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.axes[0], self.axes[1])
        return n / np.linalg.norm(n)

    @property
    def feature_class(self) -> str:
        """Featurization used by the surface priors, e.g. ``"up:interior"``."""
        return f"{self.normal_class}:{self.facing}"

    def local_point(self, u: float, v: float) -> np.ndarray:
        """Point at metric in-plane offset (u, v) from the rect center."""
        uhat, vhat = self.unit_axes
        return np.asarray(self.center, dtype=float) + u * uhat + v * vhat


@dataclass(frozen=True)
class Model:
    """One entry of the model database."""

    id: str
    category: str
    tags: tuple[str, ...] = ()
    attributes: frozenset[tuple[str, str]] = frozenset()
    half_extents: tuple[float, float, float] = (0.5, 0.5, 0.5)
    support_surfaces: tuple[SurfaceFeature, ...] = ()
    attachment_side: BoxSide | None = None

    def __post_init__(self):
        if not self.category:
            raise CatalogError(f"model {self.id!r}: category must be nonempty")
        if any(e <= 0 for e in self.half_extents):
            raise CatalogError(f"model {self.id!r}: halfExtents must be strictly positive")

    @property
    def he(self) -> np.ndarray:
        return np.asarray(self.half_extents, dtype=float)

    @property
    def volume(self) -> float:
        hx, hy, hz = self.half_extents
        return 8.0 * hx * hy * hz


@dataclass(frozen=True)
class ObjectQuery:
    category: str
    attributes: frozenset[tuple[str, str]] = frozenset()
    keywords: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.category:
            raise CatalogError("query category must be nonempty")


class Taxonomy:
    """Category hierarchy: every category has one parent chain ending at root."""

    def __init__(self, parent_of: dict[str, str], root: str = "thing"):
        self.parent_of = dict(parent_of)
        self.root = root
        self._validate()

    def _validate(self):
        limit = len(self.parent_of) + 1
        for cat in self.parent_of:
            seen = set()
            cur = cat
            for _ in range(limit):
                if cur == self.root:
                    break
                if cur in seen:
                    raise TaxonomyError(f"taxonomy cycle involving {cur!r}")
                seen.add(cur)
                if cur not in self.parent_of:
                    raise TaxonomyError(f"category {cur!r} never reaches root {self.root!r}")
                cur = self.parent_of[cur]
            else:
                raise TaxonomyError(f"category {cat!r} never reaches root {self.root!r}")

    def parent(self, category: str) -> str | None:
        if category == self.root:
            return None
        return self.parent_of.get(category, self.root)

    def ancestors(self, category: str) -> list[str]:
        """Strict ancestors of ``category``, nearest first, ending at root."""
        out = []
        cur = self.parent(category)
        while cur is not None:
            out.append(cur)
            cur = self.parent(cur)
        return out

    def chain(self, category: str) -> list[str]:
        """``category`` followed by its ancestors up to the root."""
        return [category] + self.ancestors(category)

    def is_descendant(self, category: str, ancestor: str) -> bool:
        """True iff ``category`` is a strict descendant of ``ancestor``."""
        return category != ancestor and ancestor in self.ancestors(category)


class Catalog:
    """Immutable model database plus its taxonomy."""

    def __init__(self, models: list[Model], taxonomy: Taxonomy):
        self.models = list(models)
        self.taxonomy = taxonomy
        self.by_id: dict[str, Model] = {}
        for m in self.models:
            if m.id in self.by_id:
                raise CatalogError(f"duplicate model id {m.id!r}")
            self.by_id[m.id] = m
        self._by_category: dict[str, list[Model]] = {}
        for m in self.models:
            self._by_category.setdefault(m.category, []).append(m)

    def __len__(self) -> int:
        return len(self.models)

    def models_of(self, category: str) -> list[Model]:
        return list(self._by_category.get(category, []))

    def categories(self) -> list[str]:
        return sorted(self._by_category)

    def mean_volume(self, category: str) -> float:
        """Mean bounding-box volume over the category's models (0 if unknown)."""
        ms = self._by_category.get(category)
        if not ms:
            return 0.0
        return float(np.mean([m.volume for m in ms]))


def _parse_surface(raw: dict, where: str) -> SurfaceFeature:
    try:
        rect = raw["rect"]
        return SurfaceFeature(
            normal_class=raw["normalClass"],
            facing=raw["facing"],
            center=tuple(float(x) for x in rect["center"]),
            axes=(
                tuple(float(x) for x in rect["axes"][0]),
                tuple(float(x) for x in rect["axes"][1]),
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"{where}: bad supportSurface entry ({exc})") from exc


def _parse_model(raw: dict, index: int) -> Model:
    where = f"models[{index}]"
    try:
        mid = raw["id"]
        surfaces = tuple(
            _parse_surface(s, f"{where}.supportSurfaces") for s in raw.get("supportSurfaces", [])
        )
        side = raw.get("attachmentSide")
        return Model(
            id=mid,
            category=raw["category"],
            tags=tuple(raw.get("tags", [])),
            attributes=frozenset((a["kind"], a["value"]) for a in raw.get("attributes", [])),
            half_extents=tuple(float(x) for x in raw["halfExtents"]),
            support_surfaces=surfaces,
            attachment_side=BoxSide(side) if side is not None else None,
        )
    except CatalogError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"{where}: missing or malformed field ({exc})") from exc


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog JSON file.

    Raises CatalogError naming the offending line (for JSON syntax errors)
    or model index/field, and TaxonomyError for hierarchy defects.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{path}: JSON parse error at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict) or "models" not in raw:
        raise CatalogError(f"{path}: top level must be an object with a 'models' array")
    taxonomy = Taxonomy(raw.get("taxonomy", {}), root=raw.get("taxonomyRoot", "thing"))
    models = [_parse_model(m, i) for i, m in enumerate(raw["models"])]
    return Catalog(models, taxonomy)


def query_models(q: ObjectQuery, c: Catalog, t: Taxonomy) -> list[Model]:
    """Rank catalog models against a query.

    Score = 3 for an exact category match, 2 for a taxonomy hyponym match
    (the model's category is a strict descendant of the queried one), plus
    1 per matching attribute and 1 per keyword found in the tags.  Models
    scoring 0 are dropped; ties break by id.
    """
    scored: list[tuple[int, str, Model]] = []
    for m in c.models:
        score = 0
        if m.category == q.category:
            score += _W_CATEGORY
        elif t.is_descendant(m.category, q.category):
            score += _W_HYPONYM
        score += _W_ATTRIBUTE * len(q.attributes & m.attributes)
        score += _W_KEYWORD * sum(1 for kw in q.keywords if kw in m.tags)
        if score > 0:
            scored.append((score, m.id, m))
    scored.sort(key=lambda s: (-s[0], s[1]))
    return [m for _, _, m in scored]


def fallback_support_surfaces(m: Model) -> list[SurfaceFeature]:
    """Geometric default when a model has no annotated support surfaces:
    one upward exterior rect spanning the full top face."""
    if m.support_surfaces:
        return list(m.support_surfaces)
    hx, hy, hz = m.half_extents
    return [
        SurfaceFeature(
            normal_class="up",
            facing="exterior",
            center=(0.0, 0.0, hz),
            axes=((hx, 0.0, 0.0), (0.0, hy, 0.0)),
        )
    ]


def classify_extents(half_extents: tuple[float, float, float]) -> str:
    """Partition positive extent triples into thin / flat / blocky."""
    d1, d2, d3 = sorted(half_extents)
    if d1 < _THIN_RATIO * d3 and d2 < _THIN_RATIO * d3:
        return "thin"
    if d1 < _FLAT_RATIO * d2:
        return "flat"
    return "blocky"


def fallback_attachment_side(m: Model) -> BoxSide:
    """Geometric default attachment side when the model has none annotated.

    Blocky objects attach on the bottom; flat ones on the back when upright
    (z is the largest extent) and on the bottom when lying; thin ones on a
    side.
    """
    if m.attachment_side is not None:
        return m.attachment_side
    shape = classify_extents(m.half_extents)
    if shape == "thin":
        return BoxSide.LEFT
    if shape == "flat":
        d3 = max(m.half_extents)
        return BoxSide.BACK if m.half_extents[2] == d3 else BoxSide.BOTTOM
    return BoxSide.BOTTOM
