import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitchentamp.pddl import (
    ArityMismatch,
    DomainSyntaxError,
    DomainTypeError,
    KindMismatch,
    Literal,
    LiteralError,
    PreconditionUnmet,
    SymbolicState,
    SymbolTable,
    UnknownObject,
    UnknownPredicate,
    apply,
    edit_distance,
    exclusivity_violations,
    kitchen_domain,
    normalize_name,
    parse_action,
    parse_domain,
    parse_literal,
    unparse,
)


@pytest.fixture
def table():
    return SymbolTable.from_pairs(
        [("chicken leg", "movable"), ("pot", "surface"), ("fridge door", "joint"), ("left", "robot-part"),
         ("drawer interior", "space")]
    )


def test_kitchen_domain_loads():
    d = kitchen_domain()
    assert set(d.spatial_predicates()) == {"On", "In", "Picked", "Opened", "Closed", "TurnedOn", "Sprinkled"}
    assert {s.name for s in d.schemas} >= {"pick", "place", "sprinkle", "open", "close", "turn-on", "move-base"}
    assert len(d.schemas_named("pick")) == 2


def test_parse_literal_normalizes_names(table):
    lit = parse_literal("On( Chicken Leg , pot )", table)
    assert lit == Literal("On", ("chicken_leg", "pot"))
    assert unparse(parse_literal("!Opened(fridge-door)", table)) == "!Opened(fridge_door)"


def test_aliases(table):
    assert parse_literal("PlaceOn(chicken leg, pot)", table).predicate == "On"
    assert parse_action("pull(fridge door)", table).name == "open"


def test_literal_errors(table):
    with pytest.raises(UnknownObject) as e:
        parse_literal("On(chiken leg, pot)", table)
    assert e.value.suggestion == "chicken_leg"
    with pytest.raises(ArityMismatch):
        parse_literal("On(chicken leg)", table)
    with pytest.raises(KindMismatch):
        parse_literal("On(pot, chicken leg)", table)
    with pytest.raises(UnknownPredicate):
        parse_literal("Cooked(chicken leg)", table)
    with pytest.raises(LiteralError):
        parse_literal("On chicken leg pot", table)
    with pytest.raises(LiteralError):
        parse_action("!pick(chicken leg)", table)


def test_overloaded_action_resolved_by_kind(table):
    a = parse_action("place(chicken leg, drawer interior)", table)
    assert a.args == ("chicken_leg", "drawer_interior")


def test_apply_and_unmet(table):
    d = kitchen_domain()
    from kitchentamp.pddl import GroundedAction

    pick = GroundedAction(d.schemas_named("pick")[0], ("chicken_leg",), ("left", "pot"))
    s = SymbolicState.of([Literal("On", ("chicken_leg", "pot")), Literal("HandEmpty", ("left",))])
    t = apply(s, pick)
    assert Literal("Holding", ("left", "chicken_leg")) in t
    assert Literal("On", ("chicken_leg", "pot")) not in t
    assert exclusivity_violations(t, table) == []
    with pytest.raises(PreconditionUnmet):
        apply(t, pick)


def test_exclusivity_detects_double_placement(table):
    s = SymbolicState.of([Literal("On", ("chicken_leg", "pot")), Literal("In", ("chicken_leg", "drawer_interior")),
                          Literal("HandEmpty", ("left",)), Literal("Opened", ("fridge_door",)),
                          Literal("Closed", ("fridge_door",))])
    problems = exclusivity_violations(s, table)
    assert any("placed 2 times" in p for p in problems)
    assert any("both opened and closed" in p for p in problems)


BAD_DOMAINS = {
    "unbalanced": ("(define (domain x) (:predicates (P ?a - movable))", DomainSyntaxError),
    "bad kind": ("(define (domain x) (:predicates (P ?a - gadget)))", DomainSyntaxError),
    "undeclared var": (
        "(define (domain x) (:predicates (P ?a - movable)) (:action a :parameters (?o - movable) :effect (P ?z)))",
        DomainTypeError,
    ),
    "kind clash": (
        "(define (domain x) (:predicates (P ?a - movable) (Q ?s - surface))"
        " (:action a :parameters (?o - movable) :effect (Q ?o)))",
        DomainTypeError,
    ),
    "contradiction": (
        "(define (domain x) (:predicates (P ?a - movable))"
        " (:action a :parameters (?o - movable) :effect (and (P ?o) (not (P ?o)))))",
        DomainTypeError,
    ),
    "unknown section": ("(define (domain x) (:types a b))", DomainSyntaxError),
}


@pytest.mark.parametrize("name", sorted(BAD_DOMAINS))
def test_malformed_domains_rejected(name):
    text, err = BAD_DOMAINS[name]
    with pytest.raises(err):
        parse_domain(text)


def test_syntax_error_reports_position():
    with pytest.raises(DomainSyntaxError) as e:
        parse_domain("(define (domain x)\n  (:predicates (P ?a - movable))\n  (:bogus))")
    assert e.value.line == 3


names = st.text(alphabet="abc xyz-_", min_size=1, max_size=12).filter(lambda s: s.strip(" -_"))


@given(names)
def test_normalize_is_idempotent(n):
    assert normalize_name(normalize_name(n)) == normalize_name(n)


@given(st.text(max_size=8), st.text(max_size=8), st.text(max_size=8))
def test_edit_distance_is_a_metric(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert (edit_distance(a, b) == 0) == (a == b)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


def test_symbol_table_rejects_noncanonical():
    with pytest.raises(ValueError):
        SymbolTable({"Chicken Leg": "movable"})
    with pytest.raises(ValueError):
        SymbolTable({"x": "gadget"})
