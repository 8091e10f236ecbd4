from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sceneforge.catalog import (
    BoxSide,
    Catalog,
    Model,
    ObjectQuery,
    Taxonomy,
    classify_extents,
    fallback_attachment_side,
    fallback_support_surfaces,
    load_catalog,
    query_models,
)
from sceneforge.errors import CatalogError, TaxonomyError


def write_catalog(tmp_path, doc):
    p = tmp_path / "catalog.json"
    p.write_text(json.dumps(doc))
    return p


MINIMAL = {
    "taxonomy": {"lamp": "thing"},
    "models": [
        {"id": "lamp_x", "category": "lamp", "tags": [], "attributes": [], "halfExtents": [0.1, 0.1, 0.2]}
    ],
}


class TestLoadCatalog:
    def test_minimal_single_model(self, tmp_path):
        c = load_catalog(write_catalog(tmp_path, MINIMAL))
        assert len(c) == 1
        assert c.by_id["lamp_x"].category == "lamp"

    def test_shipped_catalog_loads(self, catalog):
        assert len(catalog) == 71
        assert len(catalog.models_of("chair")) == 12

    def test_duplicate_id_rejected(self, tmp_path):
        doc = {
            "taxonomy": {"table": "thing"},
            "models": [
                {"id": "table_1", "category": "table", "halfExtents": [1, 1, 1]},
                {"id": "table_1", "category": "table", "halfExtents": [2, 1, 1]},
            ],
        }
        with pytest.raises(CatalogError, match="duplicate"):
            load_catalog(write_catalog(tmp_path, doc))

    def test_taxonomy_cycle_rejected(self, tmp_path):
        doc = dict(MINIMAL, taxonomy={"a": "b", "b": "a", "lamp": "thing"})
        with pytest.raises(TaxonomyError, match="cycle"):
            load_catalog(write_catalog(tmp_path, doc))

    def test_json_error_reports_line(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"models": [\n  {"id": }\n]}')
        with pytest.raises(CatalogError, match="line 2"):
            load_catalog(p)

    def test_nonpositive_extent_rejected(self, tmp_path):
        doc = {
            "taxonomy": {},
            "models": [{"id": "m", "category": "x", "halfExtents": [0.0, 1, 1]}],
        }
        with pytest.raises(CatalogError, match="positive"):
            load_catalog(write_catalog(tmp_path, doc))


def mini_catalog():
    tax = Taxonomy({"lamp": "thing", "desk": "furniture", "furniture": "thing", "chair": "furniture"})
    models = [
        Model(id="desk_a", category="desk", half_extents=(0.7, 0.4, 0.37)),
        Model(id="lamp_blue", category="lamp", attributes=frozenset({("color", "blue")}),
              half_extents=(0.1, 0.1, 0.2)),
        Model(id="lamp_red", category="lamp", attributes=frozenset({("color", "red")}),
              half_extents=(0.1, 0.1, 0.2)),
        Model(id="chair_a", category="chair", tags=("comfy",), half_extents=(0.25, 0.25, 0.45)),
    ]
    return Catalog(models, tax), tax


class TestQueryModels:
    def test_category_match_dominates(self):
        c, t = mini_catalog()
        res = query_models(ObjectQuery(category="lamp"), c, t)
        assert [m.id for m in res] == ["lamp_blue", "lamp_red"]

    def test_attribute_breaks_tie(self):
        c, t = mini_catalog()
        res = query_models(
            ObjectQuery(category="lamp", attributes=frozenset({("color", "red")})), c, t
        )
        # hand-scored: red = 3 (category) + 1 (attribute) = 4; blue = 3
        assert [m.id for m in res] == ["lamp_red", "lamp_blue"]

    def test_hyponym_match(self):
        c, t = mini_catalog()
        res = query_models(ObjectQuery(category="furniture"), c, t)
        assert {m.id for m in res} == {"desk_a", "chair_a"}

    def test_keyword_tag_match(self):
        c, t = mini_catalog()
        res = query_models(ObjectQuery(category="chair", keywords=("comfy",)), c, t)
        assert res[0].id == "chair_a"

    def test_zero_score_excluded(self):
        c, t = mini_catalog()
        assert query_models(ObjectQuery(category="zorgblat"), c, t) == []

    def test_deterministic(self, catalog):
        q = ObjectQuery(category="chair", attributes=frozenset({("color", "red")}))
        a = [m.id for m in query_models(q, catalog, catalog.taxonomy)]
        b = [m.id for m in query_models(q, catalog, catalog.taxonomy)]
        assert a == b

    def test_scores_positive_by_recomputation(self, catalog):
        q = ObjectQuery(category="table", attributes=frozenset({("material", "wood")}), keywords=("wooden",))
        for m in query_models(q, catalog, catalog.taxonomy):
            score = (
                3 * (m.category == q.category)
                + 2 * catalog.taxonomy.is_descendant(m.category, q.category)
                + len(q.attributes & m.attributes)
                + sum(1 for kw in q.keywords if kw in m.tags)
            )
            assert score > 0


class TestFallbackSurfaces:
    def test_unit_cube(self):
        m = Model(id="cube", category="box", half_extents=(0.5, 0.5, 0.5))
        (s,) = fallback_support_surfaces(m)
        assert s.normal_class == "up" and s.facing == "exterior"
        assert s.half_lengths == (0.5, 0.5)
        assert s.center == (0.0, 0.0, 0.5)

    def test_table_top_face(self):
        m = Model(id="t", category="table", half_extents=(0.8, 0.4, 0.35))
        (s,) = fallback_support_surfaces(m)
        assert s.half_lengths == (0.8, 0.4)
        assert s.center[2] == 0.35

    def test_annotation_wins(self, catalog):
        m = catalog.by_id["bookcase_01"]
        assert len(fallback_support_surfaces(m)) == 3


class TestAttachmentSide:
    def test_cube_bottom(self):
        m = Model(id="c", category="box", half_extents=(1, 1, 1))
        assert fallback_attachment_side(m) == BoxSide.BOTTOM

    def test_poster_back(self):
        m = Model(id="p", category="poster", half_extents=(0.6, 0.02, 0.9))
        assert fallback_attachment_side(m) == BoxSide.BACK

    def test_rug_bottom(self):
        m = Model(id="r", category="rug", half_extents=(2.0, 1.5, 0.02))
        assert fallback_attachment_side(m) == BoxSide.BOTTOM

    def test_annotation_wins(self, catalog):
        assert fallback_attachment_side(catalog.by_id["poster_01"]) == BoxSide.BACK

    @given(st.tuples(*[st.floats(0.001, 10.0) for _ in range(3)]))
    def test_classifier_partitions(self, he):
        assert classify_extents(he) in {"thin", "flat", "blocky"}
        # exactly one class by definition of the ratio tests
        d1, d2, d3 = sorted(he)
        thin = d1 < 0.2 * d3 and d2 < 0.2 * d3
        flat = not thin and d1 < 0.2 * d2
        expected = "thin" if thin else ("flat" if flat else "blocky")
        assert classify_extents(he) == expected


class TestTaxonomy:
    def test_ancestor_chain_bounded(self, taxonomy):
        n = len(taxonomy.parent_of)
        for cat in taxonomy.parent_of:
            assert len(taxonomy.chain(cat)) <= n + 1
            assert taxonomy.chain(cat)[-1] == "thing"

    def test_unknown_category_maps_to_root(self, taxonomy):
        assert taxonomy.parent("zorgblat") == "thing"

    def test_is_descendant(self, taxonomy):
        assert taxonomy.is_descendant("desk_lamp", "lamp")
        assert taxonomy.is_descendant("chair", "furniture")
        assert not taxonomy.is_descendant("chair", "chair")
        assert not taxonomy.is_descendant("lamp", "chair")
