"""Rule-based text understanding: descriptions to scene templates, commands
to operation lists.

The language surface is a small controlled grammar (documented in
``docs/grammar.md``) driven entirely by lexicon data files shipped under
``sceneforge/data/lexicon/``.  Parsing is deterministic: the same string
always yields the same template or operation list, which the rest of the
pipeline relies on for reproducible scene generation and replay.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources

from .catalog import Taxonomy
from .errors import ParseError, UnknownVerbError


class ParseWarning(UserWarning):
    """Raised for recoverable oddities (unknown adjectives, guessed articles)."""


class Predicate(str, Enum):
    ON = "on"
    IN = "in"
    UNDER = "under"
    ABOVE = "above"
    LEFT_OF = "left_of"
    RIGHT_OF = "right_of"
    IN_FRONT_OF = "in_front_of"
    BEHIND = "behind"
    NEAR = "near"
    NEXT_TO = "next_to"
    SUPPORTED_BY = "supported_by"


class OpKind(str, Enum):
    SELECT = "Select"
    LOOK_AT = "LookAt"
    INSERT = "Insert"
    REMOVE = "Remove"
    REPLACE = "Replace"
    MOVE = "Move"
    SCALE = "Scale"


Attribute = tuple[str, str]


@dataclass(frozen=True)
class ObjectSpec:
    """One object mention in a template: category, attributes, multiplicity."""

    index: int
    category: str
    attributes: frozenset[Attribute] = frozenset()
    count: int = 1
    inferred: bool = False

    def __post_init__(self):
        if not self.category:
            raise ParseError("object category must be nonempty")
        if self.count < 1:
            raise ParseError(f"object count must be >= 1, got {self.count}")
        object.__setattr__(self, "attributes", frozenset(self.attributes))


@dataclass(frozen=True)
class RelationConstraint:
    """Binary relation between two template objects, by index."""

    predicate: Predicate
    args: tuple[int, int]
    inferred: bool = False

    def __post_init__(self):
        object.__setattr__(self, "predicate", Predicate(self.predicate))
        object.__setattr__(self, "args", (int(self.args[0]), int(self.args[1])))
        if self.args[0] == self.args[1]:
            raise ParseError("constraint cannot relate an object to itself")


@dataclass(frozen=True)
class SceneTemplate:
    """Symbolic scene: objects, relational constraints, and a scene type."""

    objects: tuple[ObjectSpec, ...]
    constraints: tuple[RelationConstraint, ...] = ()
    scene_type: str = "room"

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for i, spec in enumerate(self.objects):
            if spec.index != i:
                raise ParseError(f"object at position {i} carries index {spec.index}")
        n = len(self.objects)
        for c in self.constraints:
            if not (0 <= c.args[0] < n and 0 <= c.args[1] < n):
                raise ParseError(f"constraint {c.predicate.value}{c.args} references a missing object")

    def spec(self, index: int) -> ObjectSpec:
        return self.objects[index]


@dataclass(frozen=True)
class ObjectReference:
    """Noun phrase referring to scene objects, used by commands.

    ``spatial`` optionally narrows the reference with a view-centric or
    topological qualifier; its referent may itself be qualified.  A None
    referent means the direction is relative to the whole view ("the chair
    on the left").
    """

    category: str
    attributes: frozenset[Attribute] = frozenset()
    spatial: tuple[Predicate, "ObjectReference | None"] | None = None
    definite: bool = False

    def __post_init__(self):
        if not self.category:
            raise ParseError("reference category must be nonempty")
        object.__setattr__(self, "attributes", frozenset(self.attributes))


@dataclass(frozen=True)
class OpConstraint:
    """Goal relation attached to an operation's target.

    ``referent`` is None for bare directions ("move the chair to the left"),
    which the scene editor interprets in the camera frame.
    """

    predicate: Predicate
    referent: ObjectReference | None = None


@dataclass(frozen=True)
class SceneOperation:
    kind: OpKind
    target: ObjectReference
    secondary: ObjectReference | None = None
    constraints: tuple[OpConstraint, ...] = ()
    scalar: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.kind is OpKind.REPLACE and self.secondary is None:
            raise ParseError("Replace requires a replacement object")
        if self.kind is OpKind.SCALE:
            if self.scalar is None or not self.scalar > 0:
                raise ParseError("Scale requires a positive factor")


# --------------------------------------------------------------------------
# Lexicon


@dataclass(frozen=True)
class _Lexicon:
    verbs: dict[tuple[str, ...], dict]
    preps: dict[tuple[str, ...], str]
    directions: dict[str, str]
    attributes: dict[str, Attribute]
    aliases: dict[str, str]
    numbers: dict[str, int]
    compounds: dict[str, str]
    scene_types: dict[str, str]
    verb_firsts: frozenset[str] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "verb_firsts", frozenset(v[0] for v in self.verbs))


@lru_cache(maxsize=1)
def _lexicon() -> _Lexicon:
    base = resources.files("sceneforge") / "data" / "lexicon"

    def read(name: str) -> dict:
        return json.loads((base / name).read_text(encoding="utf-8"))

    preps_raw = read("prepositions.json")
    return _Lexicon(
        verbs={tuple(k.split()): v for k, v in read("verbs.json").items()},
        preps={tuple(k.split()): v for k, v in preps_raw["prepositions"].items()},
        directions=dict(preps_raw["directions"]),
        attributes={k: (v["kind"], v["value"]) for k, v in read("attributes.json").items()},
        aliases=read("aliases.json"),
        numbers={k: int(v) for k, v in read("numbers.json").items()},
        compounds=read("compounds.json"),
        scene_types=read("scene_types.json"),
    )


def _taxonomy_knows(taxonomy: Taxonomy | None, cat: str) -> bool:
    if taxonomy is None:
        return False
    return cat == taxonomy.root or cat in taxonomy.parent_of or cat in taxonomy.parent_of.values()


def _singularize(word: str) -> str:
    if word.endswith("ies") and len(word) > 3:
        return word[:-3] + "y"
    for suffix in ("sses", "xes", "zes", "ches", "shes"):
        if word.endswith(suffix):
            return word[:-2]
    if word.endswith("s") and not word.endswith("ss") and len(word) > 1:
        return word[:-1]
    return word


def normalize_category(noun: str, taxonomy: Taxonomy | None = None) -> str:
    """Map a surface noun to a canonical category name.

    Lowercases, collapses known compounds ("coffee table"), singularizes,
    and applies the alias table ("tv" -> "television").  Unknown nouns pass
    through literally so downstream lookups can decide what to do.
    """
    lex = _lexicon()
    s = re.sub(r"\s+", " ", noun.strip().lower())
    s = lex.compounds.get(s, s)
    if s in lex.aliases:
        return lex.aliases[s]
    if not _taxonomy_knows(taxonomy, s):
        s = _singularize(s)
        s = lex.compounds.get(s, s)
        s = lex.aliases.get(s, s)
    return s


# --------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z_']*|\d+|[.,;:!?]")
_SENT_END = frozenset({".", "!", "?"})
_ARTICLES = frozenset({"a", "an", "the", "some"})
_COPULAS = frozenset({"is", "are"})
_DIR_LEADERS = frozenset({"to", "towards", "on", "at", "in"})


@dataclass(frozen=True)
class _Tok:
    text: str
    start: int
    end: int


def _tokenize(text: str) -> list[_Tok]:
    return [_Tok(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


class _Stream:
    def __init__(self, tokens: list[_Tok]):
        self.tokens = tokens
        self.i = 0

    def peek(self, k: int = 0) -> _Tok | None:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> _Tok:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def span_here(self) -> tuple[int, int]:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            return (last.end, last.end) if last else (0, 0)
        return (tok.start, tok.end)


def _match_phrase(ts: _Stream, table: dict[tuple[str, ...], object]) -> tuple[tuple[str, ...], object] | None:
    """Longest-first multiword match at the stream head, without consuming."""
    best = None
    for phrase, value in table.items():
        if best is not None and len(phrase) <= len(best[0]):
            continue
        if all((t := ts.peek(k)) is not None and t.text == w for k, w in enumerate(phrase)):
            best = (phrase, value)
    return best


def _starts_prep(ts: _Stream, lex: _Lexicon) -> bool:
    return _match_phrase(ts, lex.preps) is not None


# --------------------------------------------------------------------------
# Noun phrases


@dataclass
class _NP:
    noun: str
    attributes: frozenset[Attribute]
    article: str | None
    count: int
    start: int
    end: int

    @property
    def definite(self) -> bool:
        return self.article == "the"


def _boundary(tok: _Tok | None) -> bool:
    return tok is None or tok.text in {",", ";", "and", "."}


def _parse_np(ts: _Stream, taxonomy: Taxonomy | None, lex: _Lexicon, *, command: bool = False) -> _NP:
    start = ts.span_here()[0]
    article = None
    tok = ts.peek()
    if tok is not None and tok.text in _ARTICLES:
        article = ts.next().text
    count = 1
    tok = ts.peek()
    if tok is not None:
        if tok.text in lex.numbers:
            count = lex.numbers[ts.next().text]
        elif tok.text.isdigit():
            count = int(ts.next().text)
            if count < 1:
                raise ParseError("object count must be >= 1", (tok.start, tok.end))

    words: list[_Tok] = []
    while True:
        tok = ts.peek()
        if tok is None or tok.text in {",", ";", ".", "and"} or tok.text in _COPULAS:
            break
        if tok.text in _ARTICLES and words:
            break
        if _starts_prep(ts, lex):
            break
        # In commands a trailing direction word ends the phrase ("move the
        # chair back"); in descriptions it may still be an adjective.
        if command and words and tok.text in lex.directions and _boundary(ts.peek(1)):
            break
        if not re.fullmatch(r"[a-z_][a-z_']*", tok.text):
            break
        words.append(ts.next())

    if not words:
        raise ParseError("expected an object noun", ts.span_here())

    noun_raw = words[-1].text
    adjectives = words[:-1]
    if command and noun_raw in lex.directions:
        raise ParseError(
            f"{noun_raw!r} is a direction, not an object",
            (words[-1].start, words[-1].end),
        )
    if len(words) >= 2:
        # Compounds may arrive pluralized ("dining tables").
        for tail in (words[-1].text, _singularize(words[-1].text)):
            pair = f"{words[-2].text} {tail}"
            if pair in lex.compounds:
                noun_raw = pair
                adjectives = words[:-2]
                break

    attrs = set()
    for adj in adjectives:
        if adj.text in lex.attributes:
            attrs.add(lex.attributes[adj.text])
        else:
            warnings.warn(f"ignoring unknown adjective {adj.text!r}", ParseWarning, stacklevel=4)

    return _NP(
        noun=normalize_category(noun_raw, taxonomy),
        attributes=frozenset(attrs),
        article=article,
        count=count,
        start=start,
        end=words[-1].end,
    )


def _parse_np_list(ts: _Stream, taxonomy: Taxonomy | None, lex: _Lexicon, *, command: bool = False) -> list[_NP]:
    nps = [_parse_np(ts, taxonomy, lex, command=command)]
    while True:
        k = 0
        tok = ts.peek(k)
        if tok is not None and tok.text == ",":
            k += 1
            tok = ts.peek(k)
        if tok is not None and tok.text == "and":
            k += 1
            tok = ts.peek(k)
        if k == 0:
            break
        # A separator only continues the list when a fresh noun phrase
        # follows; otherwise it belongs to the enclosing clause.
        if tok is None or tok.text in _COPULAS or tok.text in {",", ";", ".", "and"}:
            break
        probe = _Stream(ts.tokens)
        probe.i = ts.i + k
        if _starts_prep(probe, lex) or (command and tok.text in lex.verb_firsts):
            break
        for _ in range(k):
            ts.next()
        nps.append(_parse_np(ts, taxonomy, lex, command=command))
    return nps


# --------------------------------------------------------------------------
# Descriptions


class _TemplateBuilder:
    def __init__(self, lex: _Lexicon, taxonomy: Taxonomy | None):
        self.lex = lex
        self.taxonomy = taxonomy
        self.objects: list[ObjectSpec] = []
        self.constraints: list[RelationConstraint] = []
        self.scene_type = "room"
        self._typed = False

    def _set_scene_type(self, stype: str):
        # First specific room noun wins; plain "room" never overrides it.
        if stype != "room" and not self._typed:
            self.scene_type = stype
            self._typed = True

    def resolve(self, np: _NP) -> int:
        if np.noun in self.lex.scene_types:
            self._set_scene_type(self.lex.scene_types[np.noun])
            for spec in self.objects:
                if spec.category == "room":
                    return spec.index
            return self._create(np, "room")
        if np.definite:
            # Exact category first so canonical re-parsing is stable; a
            # hypernym pass then lets "the table" find a round_table.
            for spec in reversed(self.objects):
                if spec.category == np.noun and np.attributes <= spec.attributes:
                    return spec.index
            if self.taxonomy is not None:
                for spec in reversed(self.objects):
                    if (
                        self.taxonomy.is_descendant(spec.category, np.noun)
                        and np.attributes <= spec.attributes
                    ):
                        return spec.index
        return self._create(np, np.noun)

    def _create(self, np: _NP, category: str) -> int:
        spec = ObjectSpec(
            index=len(self.objects),
            category=category,
            attributes=np.attributes,
            count=np.count,
        )
        self.objects.append(spec)
        return spec.index

    def relate(self, predicate: Predicate, a: int, b: int, span: tuple[int, int]):
        if a == b:
            raise ParseError("a relation needs two distinct objects", span)
        self.constraints.append(RelationConstraint(predicate, (a, b)))


def _parse_pp(ts: _Stream, taxonomy: Taxonomy | None, lex: _Lexicon) -> tuple[str, list[_NP], tuple[int, int]]:
    span = ts.span_here()
    hit = _match_phrase(ts, lex.preps)
    if hit is None:
        raise ParseError("expected a preposition", span)
    phrase, raw = hit
    for _ in range(len(phrase)):
        ts.next()
    nps = _parse_np_list(ts, taxonomy, lex)
    return str(raw), nps, (span[0], nps[-1].end)


def _apply_pp(b: _TemplateBuilder, heads: list[int], raw: str, nps: list[_NP], span: tuple[int, int]):
    if raw == "to":
        raise ParseError("bare 'to' is not a relation; use e.g. 'to the left of'", span)
    for head in heads:
        for np in nps:
            other = b.resolve(np)
            if raw == "with":
                # "X with Y" reads as containment for rooms, proximity
                # otherwise, with the argument order flipped.
                pred = Predicate.IN if b.objects[head].category == "room" else Predicate.NEAR
                b.relate(pred, other, head, span)
            else:
                b.relate(Predicate(raw), head, other, span)


def parse_description(text: str, taxonomy: Taxonomy | None = None) -> SceneTemplate:
    """Parse a scene description into a template.

    Sentences are either existential ("There is a sandwich on a plate.") or
    predicative ("The chair is to the left of the desk.").  Objects are
    created left to right; definite noun phrases refer back to the most
    recent matching object.  Room nouns (bedroom, kitchen, ...) set the
    scene type and create a single room object.
    """
    lex = _lexicon()
    tokens = _tokenize(text)
    if not any(re.match(r"[a-z\d]", t.text) for t in tokens):
        raise ParseError("empty input", (0, 0))

    b = _TemplateBuilder(lex, taxonomy)
    sentence: list[_Tok] = []
    for tok in tokens + [_Tok(".", len(text), len(text))]:
        if tok.text in _SENT_END:
            if sentence:
                _parse_sentence(_Stream(sentence), b, taxonomy, lex)
                sentence = []
        else:
            sentence.append(tok)

    if not b.objects:
        raise ParseError("no visualizable object in input", (0, len(text)))
    return SceneTemplate(tuple(b.objects), tuple(b.constraints), b.scene_type)


def _parse_sentence(ts: _Stream, b: _TemplateBuilder, taxonomy: Taxonomy | None, lex: _Lexicon):
    t0, t1 = ts.peek(0), ts.peek(1)
    if t0 is not None and t0.text == "there" and t1 is not None and t1.text in _COPULAS:
        ts.next()
        ts.next()
        heads = [b.resolve(np) for np in _parse_np_list(ts, taxonomy, lex)]
    else:
        head_np = _parse_np(ts, taxonomy, lex)
        tok = ts.peek()
        if tok is None or tok.text not in _COPULAS:
            raise ParseError("expected 'is' or 'are' after the subject", ts.span_here())
        ts.next()
        heads = [b.resolve(head_np)]
        if ts.at_end():
            raise ParseError("expected a relation after 'is'", ts.span_here())

    while not ts.at_end():
        tok = ts.peek()
        if tok is not None and tok.text in {",", "and"}:
            ts.next()
            continue
        raw, nps, span = _parse_pp(ts, taxonomy, lex)
        _apply_pp(b, heads, raw, nps, span)


# --------------------------------------------------------------------------
# Commands


def _try_direction(ts: _Stream, lex: _Lexicon, consume: bool = True) -> Predicate | None:
    """Match a bare view-centric direction ("to the left", "back");
    reject when an 'of' follows (that form is a preposition).  With
    ``consume=False`` only detect, leaving the stream untouched."""
    k = 0
    tok = ts.peek(k)
    if tok is not None and tok.text in _DIR_LEADERS:
        k += 1
        if (t := ts.peek(k)) is not None and t.text == "the":
            k += 1
    tok = ts.peek(k)
    if tok is None or tok.text not in lex.directions:
        return None
    after = ts.peek(k + 1)
    if after is not None and after.text == "of":
        return None
    pred = Predicate(lex.directions[tok.text])
    if consume:
        for _ in range(k + 1):
            ts.next()
    return pred


def _parse_ref(
    ts: _Stream,
    taxonomy: Taxonomy | None,
    lex: _Lexicon,
    *,
    qualify: bool,
    stop_with: bool = False,
    take_direction: bool = True,
) -> tuple[ObjectReference, str | None]:
    """Parse an object reference; returns it with the article that led it.

    ``stop_with`` leaves a literal "with" unconsumed so Replace can read
    its replacement object.  ``take_direction`` is off for goal referents:
    a trailing bare direction then belongs to the operation, not to the
    last object mentioned.
    """
    np = _parse_np(ts, taxonomy, lex, command=True)
    category = "room" if np.noun in lex.scene_types else np.noun
    spatial = None
    if qualify and not ts.at_end():
        direction = _try_direction(ts, lex, consume=take_direction)
        if direction is not None:
            if take_direction:
                spatial = (direction, None)
            # otherwise the direction belongs to the caller's goal list
        elif _starts_prep(ts, lex):
            span = ts.span_here()
            phrase, raw = _match_phrase(ts, lex.preps)
            if not (stop_with and phrase == ("with",)):
                for _ in range(len(phrase)):
                    ts.next()
                if raw == "with":
                    raw = "near"
                if raw == "to":
                    raise ParseError("bare 'to' is not a relation; use e.g. 'to the left of'", span)
                referent, _ = _parse_ref(
                    ts, taxonomy, lex,
                    qualify=True, stop_with=stop_with, take_direction=take_direction,
                )
                spatial = (Predicate(str(raw)), referent)
    ref = ObjectReference(
        category=category,
        attributes=np.attributes,
        spatial=spatial,
        definite=np.definite,
    )
    return ref, np.article


def _parse_goal(ts: _Stream, taxonomy: Taxonomy | None, lex: _Lexicon) -> OpConstraint:
    direction = _try_direction(ts, lex)
    if direction is not None:
        return OpConstraint(direction, None)
    span = ts.span_here()
    hit = _match_phrase(ts, lex.preps)
    if hit is None:
        raise ParseError("expected a placement relation", span)
    phrase, raw = hit
    for _ in range(len(phrase)):
        ts.next()
    if raw == "to":
        raw = "on"
    if raw == "with":
        raw = "near"
    referent, _ = _parse_ref(ts, taxonomy, lex, qualify=True, take_direction=False)
    return OpConstraint(Predicate(str(raw)), referent)


def _split_clauses(tokens: list[_Tok], lex: _Lexicon) -> list[list[_Tok]]:
    clauses: list[list[_Tok]] = [[]]
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.text in {";", ".", "!", "?"}:
            clauses.append([])
            i += 1
            continue
        if tok.text in {"and", ",", "then"} and clauses[-1]:
            j = i + 1
            while j < len(tokens) and tokens[j].text in {"and", ",", "then"}:
                j += 1
            if j < len(tokens) and tokens[j].text in lex.verb_firsts:
                clauses.append([])
                i = j
                continue
        clauses[-1].append(tok)
        i += 1
    return [c for c in clauses if c]


def looks_declarative(text: str) -> bool:
    """Utterance triage for the one-text-box interface.

    Descriptions rebuild the scene; commands edit it.  A sentence counts
    as a description when it opens with "there is/are" or contains no
    word from the command verb table.
    """
    words = re.findall(r"[a-z]+", text.lower())
    if words[:2] in (["there", "is"], ["there", "are"]):
        return True
    lex = _lexicon()
    return not any(w in lex.verb_firsts for w in words)


def parse_command(text: str, taxonomy: Taxonomy | None = None) -> list[SceneOperation]:
    """Parse an interaction command into an ordered operation list.

    Each clause starts with a verb from the operation table.  The ambiguous
    verbs "place" and "put" become Insert when their object is introduced
    with an indefinite article and Move when it is definite.
    """
    lex = _lexicon()
    tokens = _tokenize(text)
    if not any(re.match(r"[a-z\d]", t.text) for t in tokens):
        raise ParseError("empty input", (0, 0))

    ops = []
    for clause in _split_clauses(tokens, lex):
        ops.append(_parse_clause(_Stream(clause), taxonomy, lex))
    if not ops:
        raise ParseError("no command found", (0, len(text)))
    return ops


def _parse_clause(ts: _Stream, taxonomy: Taxonomy | None, lex: _Lexicon) -> SceneOperation:
    hit = _match_phrase(ts, lex.verbs)
    if hit is None:
        tok = ts.peek()
        raise UnknownVerbError(f"unknown verb {tok.text!r}", (tok.start, tok.end))
    phrase, entry = hit
    for _ in range(len(phrase)):
        ts.next()
    kind_name = entry["kind"]

    if ts.at_end():
        raise ParseError(f"{' '.join(phrase)!r} needs an object reference", ts.span_here())

    op: SceneOperation
    if kind_name in ("Select", "LookAt", "Remove"):
        tok = ts.peek()
        if kind_name == "LookAt" and tok is not None and tok.text in {"at", "toward", "towards"}:
            ts.next()
        target, _ = _parse_ref(ts, taxonomy, lex, qualify=True)
        op = SceneOperation(OpKind(kind_name), target)
    elif kind_name == "Replace":
        target, _ = _parse_ref(ts, taxonomy, lex, qualify=True, stop_with=True)
        tok = ts.peek()
        if tok is None or tok.text != "with":
            raise ParseError("replace needs a replacement introduced by 'with'", ts.span_here())
        ts.next()
        secondary, _ = _parse_ref(ts, taxonomy, lex, qualify=False)
        op = SceneOperation(OpKind.REPLACE, target, secondary=secondary)
    elif kind_name == "Scale":
        target, _ = _parse_ref(ts, taxonomy, lex, qualify=True)
        op = SceneOperation(OpKind.SCALE, target, scalar=float(entry["factor"]))
    else:
        target, article = _parse_ref(ts, taxonomy, lex, qualify=False)
        if kind_name == "ByArticle":
            if target.definite:
                kind = OpKind.MOVE
            else:
                if article is None:
                    warnings.warn(
                        "no article on the object of 'place'/'put'; assuming an insertion",
                        ParseWarning,
                        stacklevel=3,
                    )
                kind = OpKind.INSERT
        else:
            kind = OpKind(kind_name)
        constraints = []
        while not ts.at_end():
            tok = ts.peek()
            if tok is not None and tok.text in {",", "and"}:
                ts.next()
                continue
            constraints.append(_parse_goal(ts, taxonomy, lex))
        secondary = None
        if kind is OpKind.INSERT:
            for c in constraints:
                if c.referent is not None:
                    secondary = c.referent
                    break
        op = SceneOperation(kind, target, secondary=secondary, constraints=tuple(constraints))

    if not ts.at_end():
        tok = ts.peek()
        raise ParseError(f"unexpected {tok.text!r} after command", (tok.start, tok.end))
    return op


# --------------------------------------------------------------------------
# Canonical rendering (inverse of parse_description for explicit templates)

_PRED_SURFACE = {
    Predicate.ON: "on",
    Predicate.IN: "in",
    Predicate.UNDER: "under",
    Predicate.ABOVE: "above",
    Predicate.LEFT_OF: "to the left of",
    Predicate.RIGHT_OF: "to the right of",
    Predicate.IN_FRONT_OF: "in front of",
    Predicate.BEHIND: "behind",
    Predicate.NEAR: "near",
    Predicate.NEXT_TO: "next to",
    Predicate.SUPPORTED_BY: "supported by",
}


def _pluralize(word: str) -> str:
    if word.endswith("y") and len(word) > 1 and word[-2] not in "aeiou":
        return word[:-1] + "ies"
    if word.endswith(("s", "x", "z", "ch", "sh")):
        return word + "es"
    return word + "s"


def _surface_noun(spec: ObjectSpec, scene_type: str) -> str:
    if spec.category == "room":
        return scene_type.replace("_", " ")
    return spec.category.replace("_", " ")


def _np_text(spec: ObjectSpec, scene_type: str, *, definite: bool) -> str:
    lex = _lexicon()
    words = [v for _, v in sorted(spec.attributes)]
    noun = _surface_noun(spec, scene_type)
    plural = spec.count > 1
    words.append(_pluralize(noun) if plural else noun)
    phrase = " ".join(words)
    if definite:
        return f"the {phrase}"
    if plural:
        num = {v: k for k, v in lex.numbers.items()}.get(spec.count, str(spec.count))
        return f"{num} {phrase}"
    article = "an" if phrase[0] in "aeiou" else "a"
    return f"{article} {phrase}"


def render_template(t: SceneTemplate) -> str:
    """Render a template to canonical text that reparses to an equal template.

    Only guaranteed for explicit templates (no inferred objects or
    constraints) whose (category, attributes) pairs are unambiguous, i.e.
    what :func:`parse_description` itself produces.
    """
    if not t.objects:
        raise ParseError("cannot render an empty template")
    sentences = []
    nps = [_np_text(o, t.scene_type, definite=False) for o in t.objects]
    verb = "is" if t.objects[0].count == 1 else "are"
    if len(nps) == 1:
        listing = nps[0]
    elif len(nps) == 2:
        listing = f"{nps[0]} and {nps[1]}"
    else:
        listing = ", ".join(nps[:-1]) + f", and {nps[-1]}"
    sentences.append(f"There {verb} {listing}.")
    for c in t.constraints:
        a, bspec = t.objects[c.args[0]], t.objects[c.args[1]]
        cop = "is" if a.count == 1 else "are"
        sentences.append(
            f"{_np_text(a, t.scene_type, definite=True).capitalize()} {cop} "
            f"{_PRED_SURFACE[c.predicate]} {_np_text(bspec, t.scene_type, definite=True)}."
        )
    return " ".join(sentences)


# --------------------------------------------------------------------------
# Wire format


def _attrs_to_wire(attrs: frozenset[Attribute]) -> list[str]:
    return [f"{k}:{v}" for k, v in sorted(attrs)]


def _attrs_from_wire(items: list[str]) -> frozenset[Attribute]:
    out = []
    for s in items:
        kind, _, value = s.partition(":")
        if not value:
            raise ParseError(f"malformed attribute {s!r}")
        out.append((kind, value))
    return frozenset(out)


def template_to_wire(t: SceneTemplate) -> dict:
    return {
        "objects": [
            {
                "index": o.index,
                "category": o.category,
                "attributes": _attrs_to_wire(o.attributes),
                "count": o.count,
                "inferred": o.inferred,
            }
            for o in t.objects
        ],
        "constraints": [
            {"predicate": c.predicate.value, "args": list(c.args), "inferred": c.inferred}
            for c in t.constraints
        ],
        "sceneType": t.scene_type,
    }


def template_from_wire(d: dict) -> SceneTemplate:
    try:
        objects = tuple(
            ObjectSpec(
                index=int(o["index"]),
                category=str(o["category"]),
                attributes=_attrs_from_wire(o.get("attributes", [])),
                count=int(o.get("count", 1)),
                inferred=bool(o.get("inferred", False)),
            )
            for o in d["objects"]
        )
        constraints = tuple(
            RelationConstraint(
                predicate=Predicate(c["predicate"]),
                args=(int(c["args"][0]), int(c["args"][1])),
                inferred=bool(c.get("inferred", False)),
            )
            for c in d.get("constraints", [])
        )
        return SceneTemplate(objects, constraints, str(d.get("sceneType", "room")))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed template payload ({exc})") from exc


def reference_to_wire(r: ObjectReference) -> dict:
    out: dict = {
        "category": r.category,
        "attributes": _attrs_to_wire(r.attributes),
        "definite": r.definite,
    }
    if r.spatial is not None:
        pred, referent = r.spatial
        out["spatial"] = {
            "predicate": pred.value,
            "referent": reference_to_wire(referent) if referent is not None else None,
        }
    return out


def operation_to_wire(op: SceneOperation) -> dict:
    out: dict = {"kind": op.kind.value, "target": reference_to_wire(op.target)}
    if op.secondary is not None:
        out["secondary"] = reference_to_wire(op.secondary)
    if op.constraints:
        out["constraints"] = [
            {
                "predicate": c.predicate.value,
                "referent": reference_to_wire(c.referent) if c.referent is not None else None,
            }
            for c in op.constraints
        ]
    if op.scalar is not None:
        out["scalar"] = op.scalar
    return out
