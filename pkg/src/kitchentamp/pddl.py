"""Symbolic planning vocabulary: objects, predicates, literals, action schemas.

The domain dialect is a small typed STRIPS language written as s-expressions.
Actions split their parameters three ways: ``:parameters`` are the arguments a
language model names (``pick(chicken_leg)``), ``:implicit`` are discrete
arguments the planner binds itself (which arm, which support surface), and
``:continuous`` are geometric values left to the refiner.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

MOVABLE = "movable"
SURFACE = "surface"
SPACE = "space"
JOINT = "joint"
ROBOT_PART = "robot-part"
KINDS = (MOVABLE, SURFACE, SPACE, JOINT, ROBOT_PART)

SYMBOLIC = "symbolic"
SPATIAL = "spatial"


class PddlError(Exception):
    """Base class for domain and literal errors."""


class DomainSyntaxError(PddlError):
    def __init__(self, line: int, col: int, expected: str):
        self.line, self.col, self.expected = line, col, expected
        super().__init__(f"line {line}, col {col}: expected {expected}")


class DomainTypeError(PddlError):
    def __init__(self, schema: str, variable: str, detail: str = "undeclared variable"):
        self.schema, self.variable = schema, variable
        super().__init__(f"action {schema}: {detail} {variable}")


class LiteralError(PddlError):
    """A tuple string that does not denote a valid literal or action."""


class UnknownPredicate(LiteralError):
    def __init__(self, name: str, known: Sequence[str] = ()):
        self.name = name
        hint = f"; valid names are {', '.join(known)}" if known else ""
        super().__init__(f"'{name}' is not a known predicate or action{hint}")


class UnknownObject(LiteralError):
    def __init__(self, name: str, suggestion: str | None = None):
        self.name, self.suggestion = name, suggestion
        msg = f"object '{name}' does not exist in the scene"
        if suggestion:
            msg += f"; did you mean '{suggestion}'?"
        super().__init__(msg)


class ArityMismatch(LiteralError):
    def __init__(self, name: str, expected: int, got: int):
        self.name, self.expected, self.got = name, expected, got
        super().__init__(f"{name} takes {expected} argument(s) but {got} were given")


class KindMismatch(LiteralError):
    def __init__(self, name: str, position: int, obj: str, expected: str, got: str):
        self.name, self.position, self.obj = name, position, obj
        self.expected, self.got = expected, got
        super().__init__(
            f"argument {position + 1} of {name} must be a {expected}, but {obj} is a {got}"
        )


class PreconditionUnmet(PddlError):
    def __init__(self, action: "GroundedAction", literal: "Literal"):
        self.action, self.literal = action, literal
        super().__init__(f"{action}: precondition {unparse(literal)} does not hold")


def normalize_name(name: str) -> str:
    """Canonical object id: lowercase, whitespace and hyphens folded to underscores."""
    return re.sub(r"[\s\-]+", "_", name.strip().lower())


def edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class SymbolTable:
    """Objects of one problem, keyed by canonical name."""

    objects: Mapping[str, str]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for name, kind in self.objects.items():
            canon = normalize_name(name)
            if canon != name:
                raise ValueError(f"object id {name!r} is not in canonical form")
            if kind not in KINDS:
                raise ValueError(f"unknown kind {kind!r} for {name}")
            if canon in seen:
                raise ValueError(f"duplicate object {name}")
            seen[canon] = kind

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "SymbolTable":
        return cls(dict((normalize_name(n), k) for n, k in pairs))

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self.objects

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.objects))

    def __len__(self) -> int:
        return len(self.objects)

    def kind(self, obj: str) -> str:
        return self.objects[obj]

    def of_kind(self, *kinds: str) -> tuple[str, ...]:
        return tuple(sorted(o for o, k in self.objects.items() if k in kinds))

    def nearest(self, name: str) -> str | None:
        if not self.objects:
            return None
        canon = normalize_name(name)
        return min(sorted(self.objects), key=lambda o: edit_distance(canon, o))

    def resolve(self, name: str) -> str:
        canon = normalize_name(name)
        if canon not in self.objects:
            raise UnknownObject(name.strip(), self.nearest(name))
        return canon

    def restrict(self, keep: Iterable[str]) -> "SymbolTable":
        keep = set(keep)
        return SymbolTable({o: k for o, k in self.objects.items() if o in keep})


@dataclass(frozen=True)
class PredicateSpec:
    name: str
    arg_kinds: tuple[str, ...]
    level: str = SYMBOLIC

    @property
    def arity(self) -> int:
        return len(self.arg_kinds)


class Literal(NamedTuple):
    predicate: str
    args: tuple[str, ...]
    positive: bool = True

    def __str__(self) -> str:
        return unparse(self)

    @property
    def atom(self) -> "Literal":
        return self if self.positive else Literal(self.predicate, self.args, True)

    def negate(self) -> "Literal":
        return Literal(self.predicate, self.args, not self.positive)


def unparse(lit: Literal) -> str:
    return ("" if lit.positive else "!") + f"{lit.predicate}({', '.join(lit.args)})"


@dataclass(frozen=True)
class Param:
    name: str
    kind: str


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[Param, ...]
    implicit: tuple[Param, ...] = ()
    continuous: tuple[Param, ...] = ()
    preconditions: tuple[Literal, ...] = ()
    effects: tuple[Literal, ...] = ()
    variant: int = 0

    @property
    def discrete(self) -> tuple[Param, ...]:
        return self.parameters + self.implicit

    @property
    def add_effects(self) -> tuple[Literal, ...]:
        return tuple(e for e in self.effects if e.positive)

    @property
    def del_effects(self) -> tuple[Literal, ...]:
        return tuple(e.atom for e in self.effects if not e.positive)

    def signature(self) -> str:
        return f"{self.name}({', '.join('<' + p.kind + '>' for p in self.parameters)})"


@dataclass(frozen=True)
class GroundedAction:
    """An action with discrete arguments bound.

    ``continuous`` is empty for plan-skeleton steps and filled by the refiner.
    """

    schema: ActionSchema
    args: tuple[str, ...]
    implicit: tuple[str, ...] = ()
    continuous: tuple[tuple[str, object], ...] = field(default=(), compare=False)

    @property
    def name(self) -> str:
        return self.schema.name

    @property
    def bindings(self) -> dict[str, str]:
        names = [p.name for p in self.schema.discrete]
        return dict(zip(names, self.args + self.implicit))

    def substitute(self, lit: Literal) -> Literal:
        b = self.bindings
        return Literal(lit.predicate, tuple(b.get(a, a) for a in lit.args), lit.positive)

    @property
    def preconditions(self) -> tuple[Literal, ...]:
        return tuple(self.substitute(p) for p in self.schema.preconditions)

    @property
    def effects(self) -> tuple[Literal, ...]:
        return tuple(self.substitute(e) for e in self.schema.effects)

    @property
    def arm(self) -> str | None:
        for p, v in zip(self.schema.discrete, self.args + self.implicit):
            if p.kind == ROBOT_PART:
                return v
        return None

    def sort_key(self) -> tuple:
        return (self.schema.name, self.args, self.implicit)

    def with_continuous(self, **values: object) -> "GroundedAction":
        return GroundedAction(self.schema, self.args, self.implicit, tuple(sorted(values.items())))

    def __str__(self) -> str:
        return f"{self.schema.name}({', '.join(self.args)})"

    def describe(self) -> str:
        arm = self.arm
        return f"{self} with the {arm} arm" if arm else str(self)


@dataclass(frozen=True)
class PartialAction:
    """An action named by the language model: visible arguments only."""

    name: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.args)})"


@dataclass(frozen=True, eq=False)
class Domain:
    name: str
    predicates: Mapping[str, PredicateSpec]
    schemas: tuple[ActionSchema, ...]
    predicate_aliases: Mapping[str, str] = field(default_factory=dict)
    action_aliases: Mapping[str, str] = field(default_factory=dict)

    def predicate(self, name: str) -> PredicateSpec:
        key = name.strip().lower()
        for alias, target in self.predicate_aliases.items():
            if alias.lower() == key:
                key = target.lower()
        for p in self.predicates.values():
            if p.name.lower() == key:
                return p
        raise UnknownPredicate(name.strip(), self.spatial_predicates())

    def spatial_predicates(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.predicates.values() if p.level == SPATIAL)

    def canonical_action(self, name: str) -> str:
        key = name.strip().lower().replace("_", "-")
        key = self.action_aliases.get(key, key)
        if key not in {s.name for s in self.schemas}:
            raise UnknownPredicate(name.strip(), self.action_names)
        return key

    def schemas_named(self, name: str) -> tuple[ActionSchema, ...]:
        canon = self.canonical_action(name)
        return tuple(s for s in self.schemas if s.name == canon)

    @property
    def action_names(self) -> tuple[str, ...]:
        names = {s.name for s in self.schemas} | set(self.action_aliases)
        return tuple(sorted(names))


@dataclass(frozen=True)
class SymbolicState:
    """Closed-world set of positive literals."""

    literals: frozenset[Literal] = frozenset()

    def __post_init__(self):
        if any(not l.positive for l in self.literals):
            raise ValueError("symbolic states hold positive literals only")

    def __contains__(self, lit: Literal) -> bool:
        return lit in self.literals

    def __iter__(self) -> Iterator[Literal]:
        return iter(sorted(self.literals))

    def __len__(self) -> int:
        return len(self.literals)

    @classmethod
    def of(cls, lits: Iterable[Literal]) -> "SymbolicState":
        return cls(frozenset(lits))

    def matching(self, predicate: str) -> list[Literal]:
        return sorted(l for l in self.literals if l.predicate == predicate)


def holds(state: SymbolicState, literal: Literal) -> bool:
    present = literal.atom in state.literals
    return present if literal.positive else not present


def unmet_preconditions(state: SymbolicState, action: GroundedAction) -> list[Literal]:
    return [p for p in action.preconditions if not holds(state, p)]


def apply(state: SymbolicState, action: GroundedAction) -> SymbolicState:
    unmet = unmet_preconditions(state, action)
    if unmet:
        raise PreconditionUnmet(action, unmet[0])
    effects = action.effects
    dels = {e.atom for e in effects if not e.positive}
    adds = {e for e in effects if e.positive}
    return SymbolicState((state.literals - dels) | adds)


# exclusivity families used as state invariants
def exclusivity_violations(state: SymbolicState, table: SymbolTable) -> list[str]:
    problems = []
    placements: dict[str, list[str]] = {}
    for lit in state.literals:
        if lit.predicate in ("On", "In"):
            placements.setdefault(lit.args[0], []).append(unparse(lit))
        elif lit.predicate == "Holding":
            placements.setdefault(lit.args[1], []).append(unparse(lit))
    for obj in table.of_kind(MOVABLE):
        where = placements.get(obj, [])
        if len(where) != 1:
            problems.append(f"{obj} placed {len(where)} times: {sorted(where)}")
    for arm in table.of_kind(ROBOT_PART):
        held = [l for l in state.literals if l.predicate == "Holding" and l.args[0] == arm]
        empty = Literal("HandEmpty", (arm,)) in state.literals
        if len(held) > 1 or empty == bool(held):
            problems.append(f"arm {arm} holding {len(held)} objects, HandEmpty={empty}")
    for lit in state.literals:
        if lit.predicate == "Opened" and Literal("Closed", lit.args) in state.literals:
            problems.append(f"{lit.args[0]} both opened and closed")
        if lit.predicate == "TurnedOn" and Literal("TurnedOff", lit.args) in state.literals:
            problems.append(f"{lit.args[0]} both on and off")
        if lit.predicate == "Picked":
            if not any(l.predicate == "Holding" and l.args[1] == lit.args[0] for l in state.literals):
                problems.append(f"{lit.args[0]} picked but not held")
    return problems


# --------------------------------------------------------------------------
# literal tuples

_TUPLE = re.compile(r"^\s*(!?)\s*([A-Za-z][\w\-]*)\s*\((.*)\)\s*$", re.S)


def split_tuple(text: str) -> tuple[bool, str, list[str]]:
    m = _TUPLE.match(text)
    if not m:
        raise LiteralError(f"'{text.strip()}' is not of the form Name(arg1, arg2, ...)")
    neg, name, body = m.groups()
    args = [a.strip() for a in body.split(",")] if body.strip() else []
    if any(not a for a in args):
        raise LiteralError(f"'{text.strip()}' has an empty argument")
    return not neg, name, args


def check_args(name: str, kinds: Sequence[str], args: Sequence[str], table: SymbolTable) -> tuple[str, ...]:
    if len(args) != len(kinds):
        raise ArityMismatch(name, len(kinds), len(args))
    resolved = []
    for i, (arg, kind) in enumerate(zip(args, kinds)):
        obj = table.resolve(arg)
        if table.kind(obj) != kind:
            raise KindMismatch(name, i, obj, kind, table.kind(obj))
        resolved.append(obj)
    return tuple(resolved)


def parse_literal(text: str, table: SymbolTable, domain: Domain | None = None) -> Literal:
    domain = domain or kitchen_domain()
    positive, name, args = split_tuple(text)
    spec = domain.predicate(name)
    return Literal(spec.name, check_args(spec.name, spec.arg_kinds, args, table), positive)


def parse_action(text: str, table: SymbolTable, domain: Domain | None = None) -> PartialAction:
    """Parse ``pick(chicken leg)`` into a partial action; overloads are resolved by kind."""
    domain = domain or kitchen_domain()
    positive, name, args = split_tuple(text)
    if not positive:
        raise LiteralError(f"actions cannot be negated: '{text.strip()}'")
    schemas = domain.schemas_named(name)
    canon = schemas[0].name
    errors: list[LiteralError] = []
    for schema in schemas:
        try:
            bound = check_args(canon, [p.kind for p in schema.parameters], args, table)
        except LiteralError as exc:
            errors.append(exc)
            continue
        return PartialAction(canon, bound)
    raise errors[0]


# --------------------------------------------------------------------------
# domain dialect


class _Tok(NamedTuple):
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split(";", 1)[0]
        for m in re.finditer(r"\(|\)|[^\s()]+", line):
            toks.append(_Tok(m.group(), lineno, m.start() + 1))
    return toks


def _read(toks: list[_Tok]) -> list:
    stack: list[list] = [[]]
    opens: list[_Tok] = []
    for t in toks:
        if t.text == "(":
            stack.append([])
            opens.append(t)
        elif t.text == ")":
            if len(stack) == 1:
                raise DomainSyntaxError(t.line, t.col, "no ')' here")
            done = stack.pop()
            stack[-1].append((opens.pop(), done))
        else:
            stack[-1].append(t)
    if opens:
        t = opens[-1]
        raise DomainSyntaxError(t.line, t.col, "matching ')'")
    return stack[0]


def _expect_list(node, what: str):
    if isinstance(node, _Tok):
        raise DomainSyntaxError(node.line, node.col, what)
    return node


def _atom(node, what: str) -> str:
    if not isinstance(node, _Tok):
        tok = node[0]
        raise DomainSyntaxError(tok.line, tok.col, what)
    return node.text


def _typed_list(items: list, what: str) -> list[Param]:
    out, pending = [], []
    i = 0
    while i < len(items):
        name = _atom(items[i], what)
        if name == "-":
            if i + 1 >= len(items):
                tok = items[i]
                raise DomainSyntaxError(tok.line, tok.col, "a kind after '-'")
            kind = _atom(items[i + 1], "a kind")
            out.extend(Param(p, kind) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(name)
        i += 1
    if pending:
        tok = items[-1]
        raise DomainSyntaxError(tok.line, tok.col, f"'- kind' after {pending[-1]}")
    return out


def _literal_list(node, preds: Mapping[str, PredicateSpec], what: str) -> list[Literal]:
    head, body = _expect_list(node, what)
    if not body:
        raise DomainSyntaxError(head.line, head.col, what)
    first = _atom(body[0], "a predicate name or 'and'")
    if first == "and":
        out: list[Literal] = []
        for sub in body[1:]:
            out.extend(_literal_list(sub, preds, what))
        return out
    if first == "not":
        if len(body) != 2:
            raise DomainSyntaxError(head.line, head.col, "exactly one literal inside 'not'")
        (lit,) = _literal_list(body[1], preds, what)
        return [lit.negate()]
    if first not in preds:
        tok = body[0]
        raise DomainSyntaxError(tok.line, tok.col, f"a declared predicate, got {first}")
    args = tuple(_atom(a, "an argument") for a in body[1:])
    if len(args) != preds[first].arity:
        raise DomainSyntaxError(head.line, head.col, f"{preds[first].arity} arguments for {first}")
    return [Literal(first, args)]


def parse_domain(text: str) -> Domain:
    forms = _read(_tokenize(text))
    if len(forms) != 1:
        raise DomainSyntaxError(1, 1, "a single (define ...) form")
    head, body = _expect_list(forms[0], "(define ...)")
    if not body or _atom(body[0], "define") != "define":
        raise DomainSyntaxError(head.line, head.col, "define")
    name_node = _expect_list(body[1], "(domain <name>)") if len(body) > 1 else None
    if name_node is None or len(name_node[1]) != 2 or _atom(name_node[1][0], "domain") != "domain":
        raise DomainSyntaxError(head.line, head.col, "(domain <name>)")
    dname = _atom(name_node[1][1], "domain name")

    kinds = set(KINDS)
    preds: dict[str, PredicateSpec] = {}
    spatial: list[str] = []
    p_alias: dict[str, str] = {}
    a_alias: dict[str, str] = {}
    raw_actions = []
    for section in body[2:]:
        shead, sbody = _expect_list(section, "a (:section ...)")
        if not sbody:
            raise DomainSyntaxError(shead.line, shead.col, "a section keyword")
        key = _atom(sbody[0], "a section keyword")
        if key == ":kinds":
            declared = {_atom(k, "kind name") for k in sbody[1:]}
            unknown = declared - set(KINDS)
            if unknown:
                tok = sbody[0]
                raise DomainSyntaxError(tok.line, tok.col, f"one of {KINDS}")
            kinds = declared
        elif key == ":predicates":
            for pnode in sbody[1:]:
                phead, pbody = _expect_list(pnode, "(Predicate ?x - kind ...)")
                if not pbody:
                    raise DomainSyntaxError(phead.line, phead.col, "a predicate name")
                pname = _atom(pbody[0], "a predicate name")
                params = _typed_list(pbody[1:], "typed variables")
                for p in params:
                    if p.kind not in kinds:
                        raise DomainSyntaxError(phead.line, phead.col, f"a declared kind, got {p.kind}")
                preds[pname] = PredicateSpec(pname, tuple(p.kind for p in params))
        elif key == ":spatial":
            spatial.extend(_atom(s, "predicate name") for s in sbody[1:])
        elif key == ":alias":
            if len(sbody) != 3:
                raise DomainSyntaxError(shead.line, shead.col, "(:alias <name> <target>)")
            alias, target = _atom(sbody[1], "alias"), _atom(sbody[2], "target")
            if target in preds:
                p_alias[alias] = target
            else:
                a_alias[alias] = target
        elif key == ":action":
            raw_actions.append((shead, sbody))
        else:
            tok = sbody[0]
            raise DomainSyntaxError(tok.line, tok.col, f"a known section, got {key}")

    for s in spatial:
        if s not in preds:
            raise DomainSyntaxError(1, 1, f"declared predicate for :spatial {s}")
        preds[s] = PredicateSpec(s, preds[s].arg_kinds, SPATIAL)

    schemas = []
    variants: dict[str, int] = {}
    for shead, sbody in raw_actions:
        schema = _parse_action(shead, sbody, preds, kinds, variants)
        schemas.append(schema)
    names = {s.name for s in schemas}
    for alias, target in a_alias.items():
        if target not in names:
            raise DomainSyntaxError(1, 1, f"alias target {target} to be a predicate or action")
    return Domain(dname, preds, tuple(schemas), p_alias, a_alias)


def _parse_action(shead, sbody, preds, kinds, variants) -> ActionSchema:
    if len(sbody) < 2:
        raise DomainSyntaxError(shead.line, shead.col, "an action name")
    name = _atom(sbody[1], "an action name")
    fields: dict[str, object] = {}
    i = 2
    while i < len(sbody):
        key = _atom(sbody[i], "an action keyword")
        if i + 1 >= len(sbody):
            tok = sbody[i]
            raise DomainSyntaxError(tok.line, tok.col, f"a value after {key}")
        fields[key] = sbody[i + 1]
        i += 2
    allowed = {":parameters", ":implicit", ":continuous", ":precondition", ":effect"}
    for key in fields:
        if key not in allowed:
            raise DomainSyntaxError(shead.line, shead.col, f"one of {sorted(allowed)}, got {key}")

    def params(key: str) -> tuple[Param, ...]:
        if key not in fields:
            return ()
        _, items = _expect_list(fields[key], f"a list after {key}")
        return tuple(_typed_list(items, "typed variables"))

    visible, implicit, continuous = params(":parameters"), params(":implicit"), params(":continuous")
    for p in visible + implicit:
        if p.kind not in kinds:
            raise DomainTypeError(name, p.name, f"unknown kind {p.kind} for")
    pre = tuple(_literal_list(fields[":precondition"], preds, "a precondition")) if ":precondition" in fields else ()
    eff = tuple(_literal_list(fields[":effect"], preds, "an effect")) if ":effect" in fields else ()

    declared = {p.name: p.kind for p in visible + implicit}
    for lit in pre + eff:
        spec = preds[lit.predicate]
        for arg, kind in zip(lit.args, spec.arg_kinds):
            if arg.startswith("?"):
                if arg not in declared:
                    raise DomainTypeError(name, arg)
                if declared[arg] != kind:
                    raise DomainTypeError(name, arg, f"kind {declared[arg]} used as {kind} for")

    adds = {e for e in eff if e.positive}
    dels = {e.atom for e in eff if not e.positive}
    if adds & dels:
        raise DomainTypeError(name, unparse(sorted(adds & dels)[0]), "contradictory effect on")
    need_absent = {p.atom for p in pre if not p.positive}
    if need_absent & {p for p in pre if p.positive}:
        raise DomainTypeError(name, unparse(sorted(need_absent)[0]), "contradictory precondition on")
    if adds & need_absent:
        raise DomainTypeError(name, unparse(sorted(adds & need_absent)[0]), "added literal required absent:")

    variant = variants.get(name, 0)
    variants[name] = variant + 1
    return ActionSchema(name, visible, implicit, continuous, pre, eff, variant)


@lru_cache(maxsize=None)
def kitchen_domain() -> Domain:
    text = resources.files("kitchentamp").joinpath("data/kitchen.domain").read_text(encoding="utf-8")
    return parse_domain(text)
