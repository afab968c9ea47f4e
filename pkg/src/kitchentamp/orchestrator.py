"""The planning loop: query, solve each subproblem, execute, reprompt on failure."""
from __future__ import annotations

import re
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .backends import TranscriptExhausted, TranscriptMismatch, TransportError
from .execution import ExecutionDrift, execute
from .gateway import (
    MODES,
    SUBGOALS,
    build_initial_prompt,
    build_reprompt,
    vlm_query,
)
from .pddl import Literal, kitchen_domain, unparse
from .refine import N_TAMP, RefinementFailure, SamplerBudgets, reduce_objects, refine_action, solve_subgoal
from .taskplan import check_semantics
from .world import EASY, SINGLE, Variant, WorldState, observe, relations

SUCCESS, FAILURE = "Success", "Failure"

# failure taxonomy
TRANSLATION = "TranslationError"  # no valid tuple sequence after internal retries
SEMANTIC = "SemanticError"  # popped item impossible from the current state
INFEASIBLE = "GeometricFailure"  # TAMP failed after all rounds
TIMEOUT = "Timeout"
DRIFT = "ExecutionDrift"
BACKEND = "BackendError"

TASK_GOALS = {
    "make chicken soup": (
        Literal("On", ("chicken_leg", "pot")),
        Literal("On", ("cabbage", "pot")),
        Literal("Sprinkled", ("salt_shaker", "pot")),
        Literal("TurnedOn", ("stove_knob",)),
    ),
}


@dataclass(frozen=True)
class EpisodeConfig:
    mode: str = SUBGOALS
    n_reprompt: int = 0
    n_tamp: int = N_TAMP
    budgets: SamplerBudgets = SamplerBudgets()
    scene_seed: int = 0
    refiner_seed: int = 0
    variant: Variant = Variant(EASY, SINGLE)
    goal_eng: str = "make chicken soup"
    timeout_s: float = 900.0
    attach_image: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_reprompt not in (0, 1, 2):
            raise ValueError("n_reprompt must be 0, 1 or 2")
        if self.n_tamp < 1:
            raise ValueError("n_tamp must be at least 1")


@dataclass
class SubproblemRecord:
    query: int
    position: int
    item: str
    result: str  # solved | failed | rejected
    rounds: int = 0
    colliders: list[str] = field(default_factory=list)
    plan_length: int = 0
    message: str = ""
    wall_time: float = 0.0


@dataclass
class QueryRecord:
    index: int
    proposed: list[str]
    solved: int = 0
    english: str = ""
    failure: str = ""
    retries: int = 0


@dataclass
class EpisodeReport:
    outcome: str
    subproblems: list[SubproblemRecord]
    executed_plan: list[str]
    queries: list[QueryRecord]
    reprompts_used: int = 0
    failure_reason: str = ""
    failure_message: str = ""
    vlm_calls: int = 0
    base_moves: int = 0
    events: list[dict] = field(default_factory=list)
    wall_time: float = 0.0
    frames: list[WorldState] = field(default_factory=list, repr=False)

    @property
    def completion_percentage(self) -> float:
        return completion_percentage(self)

    @property
    def solved(self) -> int:
        return sum(1 for s in self.subproblems if s.result == "solved")

    @property
    def proposed_length(self) -> float:
        seqs = [len(q.proposed) for q in self.queries if q.proposed]
        return sum(seqs) / len(seqs) if seqs else 0.0

    @property
    def inserted_per_subproblem(self) -> float:
        """Executed task actions minus solved proposals, per solved proposal."""
        return (len(self.executed_plan) - self.solved) / self.solved if self.solved else 0.0

    def to_dict(self, timing: bool = False) -> dict:
        subs = []
        for s in self.subproblems:
            d = asdict(s)
            if not timing:
                d.pop("wall_time")
            subs.append(d)
        out = {
            "outcome": self.outcome,
            "failure_reason": self.failure_reason,
            "failure_message": self.failure_message,
            "completion_percentage": self.completion_percentage,
            "reprompts_used": self.reprompts_used,
            "vlm_calls": self.vlm_calls,
            "executed_plan": list(self.executed_plan),
            "base_moves": self.base_moves,
            "queries": [asdict(q) for q in self.queries],
            "subproblems": subs,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


def completion_percentage(report: EpisodeReport | Sequence[tuple[int, int]]) -> float:
    """Solved over solved-in-all-queries plus the last query's unfinished items.

    Accepts a report or a list of (solved, proposed) pairs, one per query.
    Queries that produced no sequence are skipped when finding the last one.
    """
    if isinstance(report, EpisodeReport):
        if report.outcome == SUCCESS:
            return 1.0
        pairs = [(q.solved, len(q.proposed)) for q in report.queries]
    else:
        pairs = list(report)
    solved = sum(s for s, _ in pairs)
    live = [(s, n) for s, n in pairs if n > 0]
    unfinished = live[-1][1] - live[-1][0] if live else 0
    total = solved + unfinished
    return solved / total if total else 0.0


# --------------------------------------------------------------------------
# event grammar

_CODES = {
    ("query", True): "Q",
    ("query", False): "q",
    ("pop", None): "P",
    ("reduce", None): "R",
    ("semantics", True): "S",
    ("semantics", False): "s",
    ("tamp", True): "T",
    ("tamp", False): "t",
    ("execute", None): "E",
    ("observe", None): "O",
    ("reprompt", None): "X",
    ("end", True): "W",
    ("end", False): "L",
}
_OK = "PRSTEO"
_FAIL = "PR(?:s|St)"
_QUERY = f"(?:Q(?:{_OK})*(?:{_FAIL})|q)"
GRAMMAR = re.compile(f"^(?:{_QUERY}X)*(?:Q(?:{_OK})*W|{_QUERY}L|Q(?:{_OK})*(?:PRST)?L)$")


def event_codes(events: Sequence[dict]) -> str:
    out = []
    for e in events:
        key = (e["event"], e.get("ok"))
        if key not in _CODES:
            key = (e["event"], None)
        out.append(_CODES[key])
    return "".join(out)


def validate_trace(events: Sequence[dict], n_reprompt: int | None = None) -> list[str]:
    """Problems with an event trace; empty when it follows the loop grammar."""
    codes = event_codes(events)
    problems = []
    if not GRAMMAR.match(codes):
        problems.append(f"event sequence {codes} does not follow the loop grammar")
    if n_reprompt is not None:
        if codes.count("X") > n_reprompt:
            problems.append(f"{codes.count('X')} reprompts exceed the cap {n_reprompt}")
        if codes.count("Q") + codes.count("q") > 1 + n_reprompt:
            problems.append("too many queries")
    return problems


# --------------------------------------------------------------------------
# episode


def _subproblem_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


def run_episode(config: EpisodeConfig, state: WorldState, backend) -> EpisodeReport:
    """Run one episode; every failure ends up in the report."""
    t0 = time.monotonic()
    domain = kitchen_domain()
    scene = state.scene
    table = scene.symbols
    objects = scene.planning_objects
    executed = []  # grounded task actions, in order
    events: list[dict] = []
    subs: list[SubproblemRecord] = []
    queries: list[QueryRecord] = []
    frames = [state]
    report = EpisodeReport(FAILURE, subs, [], queries, events=events, frames=frames)
    counter = 0

    def emit(event: str, **kw):
        events.append({"event": event, **kw})

    def ask(failed_item=None, colliders=(), semantic_error=None):
        obs = observe(state)
        image = None
        if config.attach_image:
            from .render import svg_to_png

            image = svg_to_png(state)
        if not queries:
            bundle = build_initial_prompt(config.mode, config.goal_eng, table, obs, image)
        else:
            bundle = build_reprompt(
                config.mode, config.goal_eng, table, obs, executed, failed_item, colliders, semantic_error, image
            )
        res = vlm_query(backend, bundle, table, domain, obs.literals)
        report.vlm_calls += 1
        rec = QueryRecord(len(queries), [], english=res.english, retries=max(0, len(res.exchanges) - 2))
        if res.ok:
            rec.proposed = [unparse(i) if isinstance(i, Literal) else str(i) for i in res.sequence.items]
        else:
            rec.failure = res.failure.message
        queries.append(rec)
        emit("query", ok=res.ok, index=rec.index, items=rec.proposed)
        return res

    def finish(outcome: str, reason: str = "", message: str = "") -> EpisodeReport:
        report.outcome = outcome
        report.failure_reason = reason
        report.failure_message = message
        report.executed_plan = [a.describe() for a in executed]
        report.wall_time = time.monotonic() - t0
        emit("end", ok=outcome == SUCCESS, reason=reason)
        return report

    try:
        res = ask()
    except (TranscriptExhausted, TranscriptMismatch, TransportError) as exc:
        return finish(FAILURE, BACKEND, str(exc))

    while True:
        failure = None  # (reason, message, item, colliders, semantic)
        if not res.ok:
            failure = (TRANSLATION, res.failure.message, None, (), res.failure.message)
        else:
            queue = list(res.sequence.items)
            qrec = queries[-1]
            pos = 0
            while queue:
                if time.monotonic() - t0 > config.timeout_s:
                    return finish(FAILURE, TIMEOUT, "episode exceeded its wall-clock budget")
                item = queue.pop(0)
                label = unparse(item) if isinstance(item, Literal) else str(item)
                emit("pop", item=label)
                goal = [item] if isinstance(item, Literal) else []
                emit("reduce", objects=sorted(reduce_objects(objects, state, goal)) if goal else sorted(item.args))
                verdict = check_semantics(domain, table, relations(state), [item])
                emit("semantics", ok=verdict.success, message=verdict.message)
                if not verdict.success:
                    subs.append(SubproblemRecord(qrec.index, pos, label, "rejected", message=verdict.message))
                    failure = (SEMANTIC, verdict.message, item, (), verdict.message)
                    break
                budgets = replace(config.budgets, rng_seed=_subproblem_seed(config.refiner_seed, counter))
                counter += 1
                ts = time.monotonic()
                try:
                    if config.mode == SUBGOALS:
                        sol = solve_subgoal(state, item, objects, budgets, config.n_tamp, domain=domain)
                    else:
                        sol = refine_action(state, item, objects, budgets, config.n_tamp, domain=domain)
                except RefinementFailure as exc:
                    emit("tamp", ok=False, reason=exc.reason, colliders=sorted(exc.colliders))
                    subs.append(
                        SubproblemRecord(
                            qrec.index, pos, label, "failed", exc.rounds, sorted(exc.colliders), 0, str(exc),
                            time.monotonic() - ts,
                        )
                    )
                    failure = (INFEASIBLE, str(exc), item, sorted(exc.colliders), None)
                    break
                emit("tamp", ok=True, rounds=sol.rounds, actions=[str(a) for a in sol.task_actions])
                try:
                    result = execute(state, sol)
                except ExecutionDrift as exc:
                    subs.append(SubproblemRecord(qrec.index, pos, label, "failed", sol.rounds, message=str(exc)))
                    return finish(FAILURE, DRIFT, str(exc))
                for a in sol.plan:
                    if a.name == "move-base":
                        report.base_moves += 1
                    else:
                        executed.append(a)
                for step, st in zip(sol.trajectories, result.states[1:]):
                    if not hasattr(step, "path"):
                        frames.append(st)
                state = result.state
                emit("execute", actions=len(sol.task_actions))
                emit("observe", relations=len(relations(state).literals))
                subs.append(
                    SubproblemRecord(
                        qrec.index, pos, label, "solved", sol.rounds, sorted(sol.colliders_seen),
                        len(sol.task_actions), "", time.monotonic() - ts,
                    )
                )
                qrec.solved += 1
                pos += 1
            if failure is None:
                return finish(SUCCESS)
        reason, message, item, colliders, semantic = failure
        if report.reprompts_used >= config.n_reprompt:
            return finish(FAILURE, reason, message)
        report.reprompts_used += 1
        emit("reprompt", reason=reason)
        try:
            res = ask(item, colliders, semantic)
        except (TranscriptExhausted, TranscriptMismatch, TransportError) as exc:
            return finish(FAILURE, BACKEND, str(exc))


def stuck_states(report: EpisodeReport, goal: Sequence[Literal], max_depth: int = 24) -> list[int]:
    """Indices of committed frames from which the final goal is symbolically unreachable.

    A plan over the goal-relevant objects is also a plan in the full problem,
    so the full symbol table is only searched when the reduced one fails.
    """
    from .refine import planning_table, reduce_objects, restrict_state
    from .taskplan import PlanningFailure, plan_symbolic

    domain = kitchen_domain()
    bad = []
    for k, st in enumerate(report.frames):
        lits = relations(st)
        small = planning_table(st, reduce_objects(st.scene.planning_objects, st, list(goal)))
        for table, init in ((small, restrict_state(lits, small)), (st.scene.symbols, lits)):
            try:
                plan_symbolic(domain, table, init, list(goal), max_depth)
                break
            except PlanningFailure:
                continue
        else:
            bad.append(k)
    return bad
