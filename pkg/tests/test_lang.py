"""Parser, renderer, and wire-format tests for the language surface."""

import pytest
from hypothesis import given, settings, strategies as st

from sceneforge.errors import ParseError, UnknownVerbError
from sceneforge.lang import (
    ObjectSpec,
    OpKind,
    ParseWarning,
    Predicate,
    RelationConstraint,
    SceneOperation,
    SceneTemplate,
    normalize_category,
    operation_to_wire,
    parse_command,
    parse_description,
    render_template,
    template_from_wire,
    template_to_wire,
)


def cons(t):
    return [(c.predicate.value, c.args) for c in t.constraints]


def cats(t):
    return [o.category for o in t.objects]


class TestNormalizeCategory:
    @pytest.mark.parametrize(
        "noun,expected",
        [
            ("Chairs", "chair"),
            ("TVs", "television"),
            ("tv", "television"),
            ("zorgblat", "zorgblat"),
            ("glasses", "glass"),
            ("glass", "glass"),
            ("couches", "couch"),
            ("bookcases", "bookcase"),
            ("Coffee Table", "coffee_table"),
            ("coffee tables", "coffee_table"),
            ("libraries", "library"),
            ("boxes", "box"),
            ("sofa", "couch"),
            ("living room", "living_room"),
        ],
    )
    def test_forms(self, taxonomy, noun, expected):
        assert normalize_category(noun, taxonomy) == expected

    def test_without_taxonomy(self):
        assert normalize_category("lamps") == "lamp"


class TestDescriptions:
    def test_sandwich_on_plate(self, taxonomy):
        t = parse_description("There is a sandwich on a plate.", taxonomy)
        assert cats(t) == ["sandwich", "plate"]
        assert cons(t) == [("on", (0, 1))]
        assert t.scene_type == "room"
        assert all(not o.inferred and o.count == 1 for o in t.objects)

    def test_room_with_desk_and_red_chair(self, taxonomy):
        t = parse_description(
            "There is a room with a desk and a red chair. "
            "The chair is to the left of the desk.",
            taxonomy,
        )
        assert cats(t) == ["room", "desk", "chair"]
        assert t.objects[2].attributes == frozenset({("color", "red")})
        assert cons(t) == [("in", (1, 0)), ("in", (2, 0)), ("left_of", (2, 1))]

    def test_scene_type_from_room_noun(self, taxonomy):
        t = parse_description("There is a bedroom with a bed.", taxonomy)
        assert t.scene_type == "bedroom"
        assert cats(t) == ["room", "bed"]

    def test_first_specific_scene_type_wins(self, taxonomy):
        t = parse_description(
            "There is a kitchen. There is a plate in the kitchen.", taxonomy
        )
        assert t.scene_type == "kitchen"
        # Only one room object despite two mentions.
        assert cats(t) == ["room", "plate"]
        assert cons(t) == [("in", (1, 0))]

    def test_with_on_non_room_reads_as_near(self, taxonomy):
        t = parse_description("There is a desk with a lamp.", taxonomy)
        assert cats(t) == ["desk", "lamp"]
        assert cons(t) == [("near", (1, 0))]

    def test_count_words_and_digits(self, taxonomy):
        t = parse_description("There are two chairs and 3 plates.", taxonomy)
        assert [(o.category, o.count) for o in t.objects] == [("chair", 2), ("plate", 3)]

    def test_pp_distributes_over_heads(self, taxonomy):
        t = parse_description("There is a plate and a cup on the table.", taxonomy)
        assert cats(t) == ["plate", "cup", "table"]
        assert cons(t) == [("on", (0, 2)), ("on", (1, 2))]

    def test_definite_resolves_most_recent(self, taxonomy):
        t = parse_description(
            "There is a table. There is a vase. The vase is on the table.", taxonomy
        )
        assert cats(t) == ["table", "vase"]
        assert cons(t) == [("on", (1, 0))]

    def test_definite_hypernym_reference(self, taxonomy):
        t = parse_description(
            "There is a round table. There is a vase on the table.", taxonomy
        )
        assert cats(t) == ["round_table", "vase"]
        assert cons(t) == [("on", (1, 0))]

    def test_unknown_noun_passes_through(self, taxonomy):
        t = parse_description("There is a zorgblat on a desk.", taxonomy)
        assert cats(t) == ["zorgblat", "desk"]

    def test_unknown_adjective_warns(self, taxonomy):
        with pytest.warns(ParseWarning, match="unknown adjective 'ergonomic'"):
            t = parse_description("There is an ergonomic chair.", taxonomy)
        assert cats(t) == ["chair"]
        assert t.objects[0].attributes == frozenset()

    def test_multiple_predicates(self, taxonomy):
        t = parse_description(
            "There is a lamp. There is a monitor. "
            "The lamp is on a desk and near the monitor.",
            taxonomy,
        )
        assert cons(t) == [("on", (0, 2)), ("near", (0, 1))]

    def test_empty_input(self, taxonomy):
        with pytest.raises(ParseError, match="empty"):
            parse_description("", taxonomy)
        with pytest.raises(ParseError, match="empty"):
            parse_description("  ...  ", taxonomy)

    def test_no_visualizable_object(self, taxonomy):
        with pytest.raises(ParseError):
            parse_description("Hello world.", taxonomy)

    def test_self_relation_rejected(self, taxonomy):
        with pytest.raises(ParseError, match="distinct"):
            parse_description("There is a chair. The chair is near the chair.", taxonomy)

    def test_bare_to_rejected(self, taxonomy):
        with pytest.raises(ParseError, match="'to'"):
            parse_description("There is a chair to a desk.", taxonomy)

    def test_parse_is_deterministic(self, taxonomy):
        text = "There is an office with a desk. There is a computer on the desk."
        assert parse_description(text, taxonomy) == parse_description(text, taxonomy)


class TestCommands:
    @pytest.mark.parametrize(
        "text,kind",
        [
            ("select the chair", OpKind.SELECT),
            ("look at the lamp", OpKind.LOOK_AT),
            ("look towards the lamp", OpKind.LOOK_AT),
            ("add a lamp", OpKind.INSERT),
            ("insert a lamp", OpKind.INSERT),
            ("place a lamp", OpKind.INSERT),
            ("put a lamp", OpKind.INSERT),
            ("place the lamp on the desk", OpKind.MOVE),
            ("put the lamp on the desk", OpKind.MOVE),
            ("delete the lamp", OpKind.REMOVE),
            ("remove the lamp", OpKind.REMOVE),
            ("replace the lamp with a vase", OpKind.REPLACE),
            ("move the lamp to the left", OpKind.MOVE),
            ("enlarge the lamp", OpKind.SCALE),
            ("shrink the lamp", OpKind.SCALE),
        ],
    )
    def test_verb_table(self, taxonomy, text, kind):
        (op,) = parse_command(text, taxonomy)
        assert op.kind is kind

    def test_select_with_qualifier(self, taxonomy):
        (op,) = parse_command("select the chair on the right of the table", taxonomy)
        assert op.kind is OpKind.SELECT
        assert op.target.category == "chair" and op.target.definite
        pred, referent = op.target.spatial
        assert pred is Predicate.RIGHT_OF
        assert referent.category == "table" and referent.definite
        assert op.constraints == ()

    def test_add_lamp_to_table(self, taxonomy):
        (op,) = parse_command("add a lamp to the table", taxonomy)
        assert op.kind is OpKind.INSERT
        assert op.target.category == "lamp" and not op.target.definite
        assert [(c.predicate, c.referent.category) for c in op.constraints] == [
            (Predicate.ON, "table")
        ]
        assert op.secondary.category == "table"

    def test_replace_lamp_with_vase(self, taxonomy):
        (op,) = parse_command("replace the lamp with a vase", taxonomy)
        assert op.target.category == "lamp" and op.target.definite
        assert op.secondary.category == "vase" and not op.secondary.definite

    def test_replace_with_qualified_target(self, taxonomy):
        (op,) = parse_command("replace the lamp on the desk with a vase", taxonomy)
        assert op.target.category == "lamp"
        assert op.target.spatial[0] is Predicate.ON
        assert op.target.spatial[1].category == "desk"
        assert op.secondary.category == "vase"

    def test_move_directions(self, taxonomy):
        for text, pred in [
            ("move the chair to the left", Predicate.LEFT_OF),
            ("move the chair to the right", Predicate.RIGHT_OF),
            ("move the chair back", Predicate.BEHIND),
            ("move the chair forward", Predicate.IN_FRONT_OF),
            ("move the chair in front", Predicate.IN_FRONT_OF),
        ]:
            (op,) = parse_command(text, taxonomy)
            assert op.kind is OpKind.MOVE
            assert [(c.predicate, c.referent) for c in op.constraints] == [(pred, None)]

    def test_move_to_object_means_on(self, taxonomy):
        (op,) = parse_command("move the plate to the counter", taxonomy)
        assert [(c.predicate, c.referent.category) for c in op.constraints] == [
            (Predicate.ON, "counter")
        ]

    def test_scale_factors(self, taxonomy):
        (op,) = parse_command("enlarge the bowl", taxonomy)
        assert op.scalar == 1.5
        (op,) = parse_command("shrink the bowl", taxonomy)
        assert op.scalar == pytest.approx(1 / 1.5)

    def test_bare_put_warns_and_inserts(self, taxonomy):
        with pytest.warns(ParseWarning, match="article"):
            (op,) = parse_command("put lamp on the desk", taxonomy)
        assert op.kind is OpKind.INSERT

    def test_clause_splitting(self, taxonomy):
        ops = parse_command("remove the lamp and add a vase to the table", taxonomy)
        assert [op.kind for op in ops] == [OpKind.REMOVE, OpKind.INSERT]
        ops = parse_command("select the chair; enlarge the chair", taxonomy)
        assert [op.kind for op in ops] == [OpKind.SELECT, OpKind.SCALE]
        ops = parse_command("Remove the lamp. Look at the desk.", taxonomy)
        assert [op.kind for op in ops] == [OpKind.REMOVE, OpKind.LOOK_AT]

    def test_and_inside_goal_does_not_split(self, taxonomy):
        (op,) = parse_command("move the lamp near the bed and behind the couch", taxonomy)
        assert [c.predicate for c in op.constraints] == [Predicate.NEAR, Predicate.BEHIND]

    def test_nested_qualifier(self, taxonomy):
        (op,) = parse_command("select the lamp on the table in the office", taxonomy)
        pred, table = op.target.spatial
        assert pred is Predicate.ON and table.category == "table"
        pred2, room = table.spatial
        assert pred2 is Predicate.IN and room.category == "room"

    def test_unknown_verb_error_with_span(self, taxonomy):
        with pytest.raises(UnknownVerbError) as exc:
            parse_command("frobnicate the lamp", taxonomy)
        assert exc.value.span == (0, len("frobnicate"))

    def test_missing_reference(self, taxonomy):
        with pytest.raises(ParseError, match="reference"):
            parse_command("remove", taxonomy)

    def test_replace_without_with(self, taxonomy):
        with pytest.raises(ParseError, match="with"):
            parse_command("replace the lamp", taxonomy)

    def test_trailing_junk_rejected(self, taxonomy):
        with pytest.raises(ParseError, match="unexpected"):
            parse_command("remove the lamp the vase", taxonomy)

    def test_operation_constructor_guards(self):
        ref = parse_command("select the chair")[0].target
        with pytest.raises(ParseError):
            SceneOperation(OpKind.REPLACE, ref)
        with pytest.raises(ParseError):
            SceneOperation(OpKind.SCALE, ref)
        with pytest.raises(ParseError):
            SceneOperation(OpKind.SCALE, ref, scalar=0.0)


class TestTemplateValidation:
    def test_indices_must_match_positions(self):
        with pytest.raises(ParseError):
            SceneTemplate((ObjectSpec(1, "chair"),))

    def test_constraint_range_checked(self):
        with pytest.raises(ParseError):
            SceneTemplate(
                (ObjectSpec(0, "chair"),),
                (RelationConstraint(Predicate.ON, (0, 3)),),
            )

    def test_self_constraint_rejected(self):
        with pytest.raises(ParseError):
            RelationConstraint(Predicate.ON, (2, 2))


_CATEGORIES = [
    "desk", "chair", "lamp", "vase", "bed", "nightstand", "couch",
    "television", "bookcase", "plate", "bowl", "sandwich", "cup", "monitor",
    "keyboard", "rug", "poster", "painting", "plant", "office_chair",
    "coffee_table", "dining_table", "glass", "teapot", "stool", "mirror",
    "clock", "bench", "cake", "apple",
]
_ATTRS = [
    ("color", "red"), ("color", "blue"), ("color", "green"), ("color", "white"),
    ("material", "wood"), ("material", "metal"), ("material", "glass"),
    ("shape", "round"), ("shape", "square"),
]


@st.composite
def templates(draw):
    """Explicit templates with unambiguous references, as the parser emits."""
    names = draw(st.lists(st.sampled_from(_CATEGORIES), unique=True, min_size=1, max_size=5))
    scene_type = "room"
    if draw(st.booleans()):
        scene_type = draw(st.sampled_from(["room", "bedroom", "kitchen", "office", "living_room"]))
        names.insert(draw(st.integers(0, len(names))), "room")
    objects = []
    for i, name in enumerate(names):
        attrs = frozenset(draw(st.lists(st.sampled_from(_ATTRS), unique=True, max_size=2)))
        count = 1 if name == "room" else draw(st.integers(1, 12))
        objects.append(ObjectSpec(i, name, attrs, count))
    constraints = []
    if len(objects) > 1:
        n_cons = draw(st.integers(0, 4))
        for _ in range(n_cons):
            a = draw(st.integers(0, len(objects) - 1))
            b = draw(st.integers(0, len(objects) - 1))
            if a == b:
                continue
            pred = draw(st.sampled_from(list(Predicate)))
            constraints.append(RelationConstraint(pred, (a, b)))
    return SceneTemplate(tuple(objects), tuple(constraints), scene_type)


class TestRenderer:
    @settings(max_examples=150, deadline=None)
    @given(templates())
    def test_round_trip(self, taxonomy, t):
        text = render_template(t)
        assert parse_description(text, taxonomy) == t

    def test_round_trip_examples(self, taxonomy):
        for text in [
            "There is a sandwich on a plate.",
            "There is a room with a desk and a red chair. The chair is to the left of the desk.",
            "There is a kitchen. There are four chairs near a dining table.",
        ]:
            t = parse_description(text, taxonomy)
            assert parse_description(render_template(t), taxonomy) == t

    def test_empty_template_rejected(self):
        with pytest.raises(ParseError):
            render_template(SceneTemplate(()))


class TestWire:
    @settings(max_examples=80, deadline=None)
    @given(templates())
    def test_template_wire_round_trip(self, t):
        assert template_from_wire(template_to_wire(t)) == t

    def test_wire_shape(self, taxonomy):
        t = parse_description("There is a red chair on a rug.", taxonomy)
        w = template_to_wire(t)
        assert w["sceneType"] == "room"
        assert w["objects"][0]["attributes"] == ["color:red"]
        assert w["constraints"] == [{"predicate": "on", "args": [0, 1], "inferred": False}]

    def test_malformed_payload(self):
        with pytest.raises(ParseError, match="malformed"):
            template_from_wire({"objects": [{"category": "chair"}]})

    def test_operation_wire(self, taxonomy):
        (op,) = parse_command("add a lamp to the table", taxonomy)
        w = operation_to_wire(op)
        assert w["kind"] == "Insert"
        assert w["target"] == {"category": "lamp", "attributes": [], "definite": False}
        assert w["constraints"][0]["predicate"] == "on"
        assert w["constraints"][0]["referent"]["category"] == "table"

    def test_direction_wire_has_null_referent(self, taxonomy):
        (op,) = parse_command("move the chair to the left", taxonomy)
        w = operation_to_wire(op)
        assert w["constraints"] == [{"predicate": "left_of", "referent": None}]
