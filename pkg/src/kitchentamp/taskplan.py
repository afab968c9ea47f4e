"""Symbolic search: shortest plans, diverse skeletons, semantic checks.

Search runs over a compiled form of the problem: atoms become ints, states
become frozensets of ints, and every discrete action is grounded up front.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .pddl import (
    ActionSchema,
    Domain,
    GroundedAction,
    Literal,
    LiteralError,
    PartialAction,
    PddlError,
    SymbolicState,
    SymbolTable,
    apply,
    unmet_preconditions,
    unparse,
)

INF = float("inf")
SEMANTIC_DEPTH = 10
DEFAULT_SKELETONS = 12


class PlanningFailure(Exception):
    """No symbolic plan was returned."""


class Unsolvable(PlanningFailure):
    """Proven: no plan exists at any depth."""


class DepthExceeded(PlanningFailure):
    """No plan within the depth bound; a longer one was not ruled out."""


class UnboundDiscreteParameter(PddlError):
    def __init__(self, action: str, parameter: str):
        self.action, self.parameter = action, parameter
        super().__init__(f"{action}: cannot bind {parameter}")


@dataclass(frozen=True)
class PlanSkeleton:
    steps: tuple[GroundedAction, ...]

    @property
    def cost(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        return "[" + ", ".join(s.describe() for s in self.steps) + "]"


@dataclass(frozen=True)
class SemanticVerdict:
    success: bool
    message: str = ""
    failing_item_index: int | None = None
    plans: tuple[tuple[GroundedAction, ...], ...] = ()

    def __post_init__(self):
        if not self.success and not self.message:
            raise ValueError("a failed verdict needs a message")

    @property
    def result(self) -> str:
        return "Success" if self.success else "Failure"


# --------------------------------------------------------------------------
# grounding


def ground_schema(schema: ActionSchema, table: SymbolTable) -> list[GroundedAction]:
    pools = [table.of_kind(p.kind) for p in schema.discrete]
    n_vis = len(schema.parameters)
    out = []
    for combo in itertools.product(*pools):
        out.append(GroundedAction(schema, tuple(combo[:n_vis]), tuple(combo[n_vis:])))
    return out


class Compiled:
    """A grounded problem with int-coded atoms."""

    def __init__(self, domain: Domain, table: SymbolTable):
        self.domain, self.table = domain, table
        actions = []
        for schema in domain.schemas:
            if not schema.effects:
                continue  # base motion is symbolically a no-op
            actions.extend(ground_schema(schema, table))
        actions.sort(key=GroundedAction.sort_key)
        self.actions = actions
        self.atoms: dict[Literal, int] = {}
        self.pre_pos, self.pre_neg, self.adds, self.dels = [], [], [], []
        for a in actions:
            self.pre_pos.append(frozenset(self.atom(p) for p in a.preconditions if p.positive))
            self.pre_neg.append(frozenset(self.atom(p.atom) for p in a.preconditions if not p.positive))
            self.adds.append(frozenset(self.atom(e) for e in a.effects if e.positive))
            self.dels.append(frozenset(self.atom(e.atom) for e in a.effects if not e.positive))
        # actions indexed by positive precondition for relaxed reachability
        self.n_pre = [len(p) for p in self.pre_pos]
        self.by_pre: dict[int, list[int]] = {}
        for i, pre in enumerate(self.pre_pos):
            for atom in pre:
                self.by_pre.setdefault(atom, []).append(i)
        self.free = [i for i, p in enumerate(self.pre_pos) if not p]
        self.required = {p.predicate for sch in domain.schemas for p in sch.preconditions}

    def useful_mask(self, goal_predicates: Iterable[str]) -> list[bool]:
        """Actions adding at least one literal that some precondition or the goal can use."""
        keep = self.required | set(goal_predicates)
        return [any(a.predicate in keep for a in act.effects if a.positive) for act in self.actions]

    def atom(self, lit: Literal) -> int:
        if lit not in self.atoms:
            self.atoms[lit] = len(self.atoms)
        return self.atoms[lit]

    def encode(self, state: SymbolicState) -> frozenset[int]:
        return frozenset(self.atoms[l] for l in state.literals if l in self.atoms) | frozenset(
            self.atom(l) for l in state.literals if l not in self.atoms
        )

    def decode(self, s: frozenset[int]) -> SymbolicState:
        inv = {v: k for k, v in self.atoms.items()}
        return SymbolicState(frozenset(inv[i] for i in s))

    def applicable(self, s: frozenset[int]):
        for i in range(len(self.actions)):
            if self.pre_pos[i] <= s and not (self.pre_neg[i] & s):
                yield i

    def successor(self, s: frozenset[int], i: int) -> frozenset[int]:
        return (s - self.dels[i]) | self.adds[i]

    def h_max(self, s: frozenset[int], goal: frozenset[int]) -> float:
        """Max-cost delete relaxation; negative preconditions are dropped."""
        if not goal:
            return 0
        cost = {a: 0 for a in s}
        remaining = list(self.n_pre)
        frontier = list(s)
        layer = 0
        fired = [False] * len(self.actions)
        pending = set(goal) - s
        ready = list(self.free)
        while pending:
            # fire every action whose preconditions became reachable this layer
            for atom in frontier:
                for i in self.by_pre.get(atom, ()):
                    remaining[i] -= 1
                    if remaining[i] == 0:
                        ready.append(i)
            frontier = []
            layer += 1
            for i in ready:
                if fired[i]:
                    continue
                fired[i] = True
                for a in self.adds[i]:
                    if a not in cost:
                        cost[a] = layer
                        frontier.append(a)
                        pending.discard(a)
            ready = []
            if not frontier:
                return INF
        return max(cost[g] for g in goal)


@lru_cache(maxsize=64)
def _compiled(domain: Domain, key: tuple) -> Compiled:
    return Compiled(domain, SymbolTable(dict(key)))


def compile_problem(domain: Domain, table: SymbolTable) -> Compiled:
    return _compiled(domain, tuple(sorted(table.objects.items())))


def _split_goal(comp: Compiled, goal: Iterable[Literal]):
    pos, neg = set(), set()
    for g in goal:
        (pos if g.positive else neg).add(comp.atom(g.atom))
    return frozenset(pos), frozenset(neg)


# --------------------------------------------------------------------------
# search


def plan_symbolic(
    domain: Domain,
    table: SymbolTable,
    init: SymbolicState,
    goal: Iterable[Literal],
    max_depth: int = SEMANTIC_DEPTH,
) -> tuple[GroundedAction, ...]:
    """Shortest plan; ties go to the lexicographically smallest action sequence."""
    if max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    comp = compile_problem(domain, table)
    pos, neg = _split_goal(comp, goal)
    start = comp.encode(init)

    def satisfied(s):
        return pos <= s and not (neg & s)

    h_cache: dict[frozenset, float] = {}

    def h(s):
        if s not in h_cache:
            h_cache[s] = comp.h_max(s, pos)
        return h_cache[s]

    if h(start) == INF:
        raise Unsolvable("goal unreachable even ignoring delete effects")
    heap = [(h(start), (), start)]
    closed = set()
    cut = False
    while heap:
        f, key, s = heapq.heappop(heap)
        if s in closed:
            continue
        closed.add(s)
        if satisfied(s):
            return tuple(comp.actions[i] for i in key)
        g = len(key)
        for i in comp.applicable(s):
            t = comp.successor(s, i)
            if t in closed:
                continue
            ht = h(t)
            if ht == INF:
                continue
            if g + 1 + ht > max_depth:
                cut = True
                continue
            heapq.heappush(heap, (g + 1 + ht, key + (i,), t))
    if cut:
        raise DepthExceeded(f"no plan within {max_depth} steps")
    raise Unsolvable("search space exhausted")


def diverse_skeletons(
    domain: Domain,
    table: SymbolTable,
    init: SymbolicState,
    goal: Iterable[Literal],
    k: int = DEFAULT_SKELETONS,
    max_length: int | None = None,
    slack: int = 3,
    node_budget: int = 50_000,
) -> list[PlanSkeleton]:
    """Up to k distinct loop-free plans in order of (length, action sequence).

    Paths never revisit a state and stop at the first goal state they reach.
    Without an explicit ``max_length`` the bound is the optimal length + slack.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    goal = list(goal)
    comp = compile_problem(domain, table)
    pos, neg = _split_goal(comp, goal)
    start = comp.encode(init)
    if max_length is None:
        try:
            best = plan_symbolic(domain, table, init, goal, max_depth=SEMANTIC_DEPTH * 2)
        except PlanningFailure:
            return []
        max_length = len(best) + slack
    h_cache: dict[frozenset, float] = {}

    def h(s):
        if s not in h_cache:
            h_cache[s] = comp.h_max(s, pos)
        return h_cache[s]

    out: list[PlanSkeleton] = []
    if h(start) == INF:
        return out
    useful = comp.useful_mask(g.predicate for g in goal)
    heap = [(h(start), (), (start,))]
    expanded = 0
    while heap and len(out) < k and expanded < node_budget:
        f, key, path = heapq.heappop(heap)
        s = path[-1]
        if pos <= s and not (neg & s):
            out.append(PlanSkeleton(tuple(comp.actions[i] for i in key)))
            continue
        expanded += 1
        on_path = set(path)
        g = len(key)
        for i in comp.applicable(s):
            if not useful[i]:
                continue
            t = comp.successor(s, i)
            if t in on_path:
                continue
            ht = h(t)
            if g + 1 + ht > max_length:
                continue
            heapq.heappush(heap, (g + 1 + ht, key + (i,), path + (t,)))
    return out


def execute(init: SymbolicState, steps: Sequence[GroundedAction]) -> SymbolicState:
    state = init
    for a in steps:
        state = apply(state, a)
    return state


# --------------------------------------------------------------------------
# binding VLM actions


def _arm_rank(state: SymbolicState, arm: str) -> tuple:
    return (Literal("HandEmpty", (arm,)) not in state, arm)


def candidate_bindings(
    domain: Domain, table: SymbolTable, state: SymbolicState, action: PartialAction
) -> list[GroundedAction]:
    """All groundings of ``action`` over its implicit parameters, best first.

    Preference: fewest unmet preconditions, then an empty hand, then left
    before right, then name order.
    """
    out = []
    for schema in domain.schemas_named(action.name):
        if tuple(table.kind(a) for a in action.args) != tuple(p.kind for p in schema.parameters):
            continue
        pools = [table.of_kind(p.kind) for p in schema.implicit]
        for combo in itertools.product(*pools):
            out.append(GroundedAction(schema, action.args, tuple(combo)))

    def rank(g: GroundedAction):
        arm = g.arm
        return (
            len(unmet_preconditions(state, g)),
            _arm_rank(state, arm) if arm else (False, ""),
            g.sort_key(),
        )

    return sorted(out, key=rank)


def bind_action(
    domain: Domain, table: SymbolTable, state: SymbolicState, action: PartialAction
) -> GroundedAction:
    cands = candidate_bindings(domain, table, state, action)
    if not cands:
        raise UnboundDiscreteParameter(str(action), "implicit arguments")
    return cands[0]


def effects_of(
    domain: Domain, table: SymbolTable, state: SymbolicState, action: PartialAction | GroundedAction
) -> frozenset[Literal]:
    """Positive effects with implicit arguments bound against ``state``."""
    if isinstance(action, PartialAction):
        action = bind_action(domain, table, state, action)
    for p, v in zip(action.schema.discrete, action.args + action.implicit):
        if v is None or v.startswith("?"):
            raise UnboundDiscreteParameter(str(action), p.name)
    if len(action.args) + len(action.implicit) != len(action.schema.discrete):
        missing = action.schema.discrete[len(action.args) + len(action.implicit)]
        raise UnboundDiscreteParameter(str(action), missing.name)
    return frozenset(e for e in action.effects if e.positive)


def explain_unmet(lit: Literal) -> str:
    """Plain-English reason for a failed precondition."""
    p, args = lit.predicate, lit.args
    if lit.positive:
        return {
            "HandEmpty": lambda: "hand not empty",
            "Holding": lambda: f"the robot is not holding {args[1]}",
            "On": lambda: f"{args[0]} is not on {args[1]}",
            "In": lambda: f"{args[0]} is not in {args[1]}",
            "Closed": lambda: f"{args[0]} is already open",
            "Opened": lambda: f"{args[0]} is not open",
            "TurnedOff": lambda: f"{args[0]} cannot be turned on",
        }.get(p, lambda: f"{unparse(lit)} does not hold")()
    return f"{unparse(lit.atom)} already holds"


def _pick_source_reason(state: SymbolicState, g: GroundedAction, lit: Literal) -> str:
    # a pick whose only unmet support literal means the object is already held
    obj = g.args[0]
    if any(l.predicate == "Holding" and l.args[1] == obj for l in state.literals):
        return f"{obj} is already being held"
    return explain_unmet(lit)


# --------------------------------------------------------------------------
# semantic checks


def _objects_known(lit_args: Sequence[str], table: SymbolTable) -> str | None:
    for a in lit_args:
        if a not in table.objects:
            return a
    return None


def check_semantics(
    domain: Domain,
    table: SymbolTable,
    init: SymbolicState,
    sequence: Sequence[Literal | PartialAction],
    max_depth: int = SEMANTIC_DEPTH,
) -> SemanticVerdict:
    """Subgoal mode for Literal items, action mode for PartialAction items."""
    state = init
    plans = []
    for idx, item in enumerate(sequence):
        missing = _objects_known(item.args, table)
        if missing is not None:
            return SemanticVerdict(
                False, f"Item {idx + 1} {item}: object '{missing}' does not exist in the scene", idx
            )
        if isinstance(item, Literal):
            try:
                plan = plan_symbolic(domain, table, state, [item], max_depth)
            except DepthExceeded:
                return SemanticVerdict(
                    False,
                    f"Subgoal {idx + 1} {unparse(item)} needs more than {max_depth} actions "
                    "from the state reached by the previous subgoals",
                    idx,
                )
            except Unsolvable:
                return SemanticVerdict(
                    False,
                    f"Subgoal {idx + 1} {unparse(item)} cannot be achieved from the state "
                    "reached by the previous subgoals",
                    idx,
                )
            state = execute(state, plan)
            plans.append(plan)
        else:
            try:
                cands = candidate_bindings(domain, table, state, item)
            except LiteralError as exc:
                return SemanticVerdict(False, f"Action {idx + 1} {item}: {exc}", idx)
            if not cands:
                return SemanticVerdict(False, f"Action {idx + 1} {item} has no valid arguments", idx)
            best = cands[0]
            unmet = unmet_preconditions(state, best)
            if unmet:
                reason = explain_unmet(unmet[0])
                if best.name == "pick" and unmet[0].predicate in ("On", "In"):
                    reason = _pick_source_reason(state, best, unmet[0])
                return SemanticVerdict(False, f"Action {idx + 1} {item} is not possible: {reason}", idx)
            state = apply(state, best)
            plans.append((best,))
    return SemanticVerdict(True, "", None, tuple(plans))
