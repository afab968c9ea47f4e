"""A small fetch domain plus a hand-written BFS over the same rules."""
from collections import deque

from kitchentamp.pddl import Literal, SymbolicState, SymbolTable, parse_domain

TOY_DOMAIN = """
(define (domain fetch)
  (:kinds movable surface joint robot-part)
  (:predicates
    (On ?o - movable ?s - surface)
    (Holding ?a - robot-part ?o - movable)
    (HandEmpty ?a - robot-part)
    (Free ?s - surface)
    (Inside ?s - surface ?j - joint)
    (Opened ?j - joint)
    (Closed ?j - joint))
  (:spatial On Opened Closed)
  (:action pick
    :parameters (?o - movable)
    :implicit (?a - robot-part ?s - surface)
    :precondition (and (HandEmpty ?a) (On ?o ?s) (Free ?s))
    :effect (and (Holding ?a ?o) (not (HandEmpty ?a)) (not (On ?o ?s))))
  (:action pick
    :parameters (?o - movable)
    :implicit (?a - robot-part ?s - surface ?j - joint)
    :precondition (and (HandEmpty ?a) (On ?o ?s) (Inside ?s ?j) (Opened ?j))
    :effect (and (Holding ?a ?o) (not (HandEmpty ?a)) (not (On ?o ?s))))
  (:action place
    :parameters (?o - movable ?s - surface)
    :implicit (?a - robot-part)
    :precondition (and (Holding ?a ?o) (Free ?s))
    :effect (and (On ?o ?s) (HandEmpty ?a) (not (Holding ?a ?o))))
  (:action place
    :parameters (?o - movable ?s - surface)
    :implicit (?a - robot-part ?j - joint)
    :precondition (and (Holding ?a ?o) (Inside ?s ?j) (Opened ?j))
    :effect (and (On ?o ?s) (HandEmpty ?a) (not (Holding ?a ?o))))
  (:action open
    :parameters (?j - joint)
    :implicit (?a - robot-part)
    :precondition (and (HandEmpty ?a) (Closed ?j))
    :effect (and (Opened ?j) (not (Closed ?j))))
  (:action close
    :parameters (?j - joint)
    :implicit (?a - robot-part)
    :precondition (and (HandEmpty ?a) (Opened ?j))
    :effect (and (Closed ?j) (not (Opened ?j)))))
"""


def toy_domain():
    return parse_domain(TOY_DOMAIN)


class ToyProblem:
    def __init__(self, rng):
        self.arms = [f"arm{i}" for i in range(rng.integers(1, 3))]
        self.objs = [f"obj{i}" for i in range(rng.integers(1, 4))]
        self.joints = [f"door{i}" for i in range(rng.integers(0, 3))]
        self.surfs = [f"surf{i}" for i in range(rng.integers(2, 5))]
        self.inside = {}
        for s in self.surfs[1:]:
            if self.joints and rng.random() < 0.5:
                self.inside[s] = self.joints[rng.integers(len(self.joints))]
        place = {o: self.surfs[rng.integers(len(self.surfs))] for o in self.objs}
        opened = frozenset(j for j in self.joints if rng.random() < 0.3)
        self.start = (tuple(place[o] for o in self.objs), opened)
        goal = []
        for o in self.objs:
            if rng.random() < 0.6:
                goal.append(Literal("On", (o, self.surfs[rng.integers(len(self.surfs))])))
        for j in self.joints:
            r = rng.random()
            if r < 0.25:
                goal.append(Literal("Opened", (j,)))
            elif r < 0.5:
                goal.append(Literal("Closed", (j,)))
        if not goal:
            goal.append(Literal("On", (self.objs[0], self.surfs[0])))
        self.goal = goal

    def table(self):
        pairs = [(a, "robot-part") for a in self.arms] + [(o, "movable") for o in self.objs]
        pairs += [(s, "surface") for s in self.surfs] + [(j, "joint") for j in self.joints]
        return SymbolTable.from_pairs(pairs)

    def literals(self, state):
        where, opened = state
        lits = set()
        held = {}
        for o, w in zip(self.objs, where):
            if w in self.arms:
                lits.add(Literal("Holding", (w, o)))
                held[w] = o
            else:
                lits.add(Literal("On", (o, w)))
        for a in self.arms:
            if a not in held:
                lits.add(Literal("HandEmpty", (a,)))
        for s in self.surfs:
            if s in self.inside:
                lits.add(Literal("Inside", (s, self.inside[s])))
            else:
                lits.add(Literal("Free", (s,)))
        for j in self.joints:
            lits.add(Literal("Opened" if j in opened else "Closed", (j,)))
        return SymbolicState(frozenset(lits))

    def reachable(self, s, opened):
        return s not in self.inside or self.inside[s] in opened

    def successors(self, state):
        where, opened = state
        busy = {w for w in where if w in self.arms}
        for i, w in enumerate(where):
            if w in self.arms:
                for s in self.surfs:
                    if self.reachable(s, opened):
                        yield (where[:i] + (s,) + where[i + 1:], opened)
            elif self.reachable(w, opened):
                for a in self.arms:
                    if a not in busy:
                        yield (where[:i] + (a,) + where[i + 1:], opened)
        if len(busy) < len(self.arms):
            for j in self.joints:
                yield (where, opened ^ {j})

    def satisfied(self, state):
        lits = self.literals(state).literals
        return all(g in lits for g in self.goal)

    def bfs(self, limit=10_000):
        """Optimal plan length, or None when unreachable; also the visited-state count."""
        seen = {self.start: 0}
        q = deque([self.start])
        while q:
            s = q.popleft()
            if self.satisfied(s):
                return seen[s], len(seen)
            for t in self.successors(s):
                if t not in seen:
                    seen[t] = seen[s] + 1
                    q.append(t)
            assert len(seen) <= limit
        return None, len(seen)

    def step(self, state, action):
        """Hand-coded transition, used to replay a planner's answer."""
        where, opened = state
        name, args, imp = action.name, action.args, action.implicit
        arm = imp[0]
        if name == "pick":
            o = args[0]
            i = self.objs.index(o)
            assert where[i] in self.surfs and self.reachable(where[i], opened)
            assert arm not in where
            return (where[:i] + (arm,) + where[i + 1:], opened)
        if name == "place":
            o, s = args
            i = self.objs.index(o)
            assert where[i] == arm and self.reachable(s, opened)
            return (where[:i] + (s,) + where[i + 1:], opened)
        j = args[0]
        assert arm not in where
        assert (j in opened) == (name == "close")
        return (where, opened ^ {j})
