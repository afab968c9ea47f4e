"""Two-phase language-model querying: prompts, extraction and validation.

Phase 1 asks for an English plan; phase 2, in the same conversation, asks
for its translation into goal or action tuples. Translations that fail to
parse or fail the symbolic check are sent back with the error, at most
MAX_RETRIES times, before the query as a whole is reported as failed.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .pddl import (
    JOINT,
    MOVABLE,
    SPACE,
    SURFACE,
    Domain,
    GroundedAction,
    Literal,
    LiteralError,
    PartialAction,
    SymbolicState,
    SymbolTable,
    parse_action,
    parse_literal,
    unparse,
)
from .taskplan import check_semantics
from .world import ObservationBundle, english

SUBGOALS, ACTIONS = "subgoals", "actions"
MODES = (SUBGOALS, ACTIONS)
MAX_RETRIES = 3

# Fixed fragments and the connective text between them are listed
# side by side in docs/prompts.md.
SYSTEM = "You are a helpful assistant that plans household tasks for a mobile manipulator."

INITIAL = (
    "Plan a short sequence of {output} that accomplishes the following {goal}. \n"
    "{respond_with} where <obj>, <surface>, <joint>, <button>, <handle> must be items from the following "
    "{planning_objects}.\n"
    "Currently, you can see {object_relations}. The accompanying image shows the scene from above, with a "
    "labeled box around every movable object, joint and surface. {img}\n"
    "{rules}\n"
    "{action_history} {failed_action} {collided_objects}"
)

OUTPUT = {SUBGOALS: "subgoals", ACTIONS: "actions"}
RESPOND_WITH = {
    SUBGOALS: "Respond with a numbered list of intermediate goals in English, one state of the world per line,",
    ACTIONS: "Respond with a numbered list of robot actions in English, one action per line,",
}
RULES = "You must have at least one empty hand before you can pick up an object or open or close a joint."

TRANSLATE = {
    SUBGOALS: (
        "Translate the above intermediate goals into a formal language defined by the following subgoals.\n"
        "subgoals = [{catalogue}]\n"
        "Please answer with objects in the respective types: {objects_by_types}\n"
        "Write one tuple per line, in the order of the English goals."
    ),
    ACTIONS: (
        "Translate the each of the listed actions in English into a formal language defined by the following "
        "primitive actions. Each action in English may correspond to multiple actions:\n"
        "actions =[{catalogue}]\n"
        "Please answer with objects in the respective types: {objects_by_types}\n"
        "Write one tuple per line, in the order of the English actions."
    ),
}

RETRY = "{error} Please translate the English plan again, fixing this problem."

SUBGOAL_CATALOGUE = (
    ("On(<movable>, <surface>)", "the result of picking up <movable> then placing it on <surface>"),
    ("In(<movable>, <space>)", "the result of picking up <movable> then placing it inside <space>"),
    ("Picked(<movable>)", "the robot is holding <movable> in one of its hands"),
    ("Opened(<joint>)", "the door or drawer <joint> has been opened"),
    ("Closed(<joint>)", "the door or drawer <joint> has been closed"),
    ("TurnedOn(<joint>)", "the knob or handle <joint> has been turned on"),
    ("Sprinkled(<movable>, <surface>)", "the contents of <movable> have been sprinkled onto <surface>"),
)

ACTION_CATALOGUE = (
    ("pick(<obj>)", "it contains one argument. The robot must have an empty hand to pick up an object."),
    (
        "place(<obj>, <region>)",
        "it contains two arguments. The robot must be holding <obj>; <region> is a surface or a space.",
    ),
    (
        "sprinkle(<obj>, <region>)",
        "it contains two arguments. The robot must be holding <obj> and <region> is a surface.",
    ),
    ("open(<joint>)", "it contains one argument. The robot must have an empty hand and the joint must be closed."),
    ("close(<joint>)", "it contains one argument. The robot must have an empty hand and the joint must be open."),
    (
        "turn-on(<joint>)",
        "it contains one argument. The robot must have an empty hand and the knob must be turned off.",
    ),
)


# --------------------------------------------------------------------------
# bundles


def normalize_text(text: str) -> str:
    lines = [" ".join(line.split()) for line in text.strip().splitlines()]
    return "\n".join(lines)


def digest_of(text: str) -> str:
    return hashlib.sha256(normalize_text(text).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class PromptBundle:
    mode: str
    phase: int
    messages: tuple[tuple[str, str], ...]  # (role, text), last one is the new user turn
    slots: tuple[tuple[str, str], ...] = ()
    image: bytes | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def user(self) -> str:
        return self.messages[-1][1]

    @property
    def text(self) -> str:
        return "\n\n".join(f"[{role}]\n{body}" for role, body in self.messages)

    @property
    def digest(self) -> str:
        return digest_of(self.text)

    def slot(self, name: str) -> str:
        return dict(self.slots)[name]

    def follow_up(self, reply: str, user: str, phase: int) -> "PromptBundle":
        msgs = self.messages + (("assistant", reply), ("user", user))
        return PromptBundle(self.mode, phase, msgs, (), self.image)


def _names(objs) -> str:
    return ", ".join(english(o) for o in objs)


def planning_objects_text(table: SymbolTable) -> str:
    groups = [("movable objects", (MOVABLE,)), ("surfaces", (SURFACE,)), ("spaces", (SPACE,)), ("joints", (JOINT,))]
    return "; ".join(f"{label}: {_names(table.of_kind(*kinds))}" for label, kinds in groups if table.of_kind(*kinds))


def objects_by_types_text(table: SymbolTable) -> str:
    groups = [("<movable>", (MOVABLE,)), ("<surface>", (SURFACE,)), ("<space>", (SPACE,)), ("<joint>", (JOINT,))]
    return "; ".join(f"{label}: [{_names(table.of_kind(*kinds))}]" for label, kinds in groups if table.of_kind(*kinds))


def action_history_text(executed: Sequence[GroundedAction]) -> str:
    acts = [a for a in executed if a.name != "move-base"]
    if not acts:
        return "The robot has not executed any action yet."
    steps = "; ".join(f"{i + 1}. {a.describe()}" for i, a in enumerate(acts))
    return f"The robot has already executed these actions: {steps}."


def _item_text(item) -> str:
    if isinstance(item, Literal):
        return unparse(item)
    return str(item)


def failed_action_text(mode: str, failed_item, semantic_error: str | None) -> str:
    if semantic_error:
        return f"The previous plan was rejected: {semantic_error}"
    if failed_item is None:
        return ""
    what = "subgoal" if mode == SUBGOALS else "action"
    return f"The robot could not find a feasible motion for the {what} {_item_text(failed_item)}."


def collided_objects_text(colliders: Sequence[str]) -> str:
    if not colliders:
        return "Objects that collided with the robot during planning: none detected."
    return f"Objects that collided with the robot during planning: {_names(sorted(colliders))}."


def _initial(mode, goal_eng, table, observation, history, failed, collided, image) -> PromptBundle:
    slots = {
        "output": OUTPUT[mode],
        "goal": goal_eng,
        "respond_with": RESPOND_WITH[mode],
        "planning_objects": planning_objects_text(table),
        "object_relations": observation.text if observation.relations_text else "nothing",
        "img": "[image attached]",
        "rules": RULES,
        "action_history": history,
        "failed_action": failed,
        "collided_objects": collided,
    }
    user = INITIAL.format(**slots)
    return PromptBundle(mode, 1, (("system", SYSTEM), ("user", normalize_text(user))), tuple(slots.items()), image)


def build_initial_prompt(
    mode: str, goal_eng: str, table: SymbolTable, observation: ObservationBundle, image: bytes | None = None
) -> PromptBundle:
    """Phase-1 prompt; history and failure slots are explicitly empty."""
    return _initial(mode, goal_eng, table, observation, "", "", "", image)


def build_reprompt(
    mode: str,
    goal_eng: str,
    table: SymbolTable,
    observation: ObservationBundle,
    executed: Sequence[GroundedAction],
    failed_item=None,
    colliders: Sequence[str] = (),
    semantic_error: str | None = None,
    image: bytes | None = None,
) -> PromptBundle:
    """Phase-1 prompt after a failure, with history and collision context."""
    return _initial(
        mode,
        goal_eng,
        table,
        observation,
        action_history_text(executed),
        failed_action_text(mode, failed_item, semantic_error),
        collided_objects_text(colliders),
        image,
    )


def catalogue_text(mode: str) -> str:
    cat = SUBGOAL_CATALOGUE if mode == SUBGOALS else ACTION_CATALOGUE
    return ", ".join(f"'{sig}': {gloss}" for sig, gloss in cat)


def build_translation_prompt(mode: str, english_steps: str, table: SymbolTable, previous: PromptBundle | None = None) -> PromptBundle:
    """Phase-2 prompt; continues the phase-1 conversation when ``previous`` is given."""
    if not english_steps.strip():
        raise ValueError("phase-1 response is empty")
    user = TRANSLATE[mode].format(catalogue=catalogue_text(mode), objects_by_types=objects_by_types_text(table))
    user = normalize_text(user)
    if previous is None:
        msgs = (("system", SYSTEM), ("assistant", english_steps), ("user", user))
        return PromptBundle(mode, 2, msgs)
    return previous.follow_up(english_steps, user, 2)


# --------------------------------------------------------------------------
# extraction and validation

TUPLE_RE = re.compile(r"!?\s*[A-Za-z][\w\-]*\s*\([^()]*\)")
SUBGOAL_PREDICATES = ("On", "In", "Picked", "Opened", "Closed", "TurnedOn", "Sprinkled")


@dataclass(frozen=True)
class ValidationFailure:
    index: int | None
    message: str

    def __post_init__(self):
        if not self.message:
            raise ValueError("a validation failure needs a message")


@dataclass(frozen=True)
class SubgoalSequence:
    items: tuple[Literal, ...]
    sources: tuple[str, ...] = ()


@dataclass(frozen=True)
class ActionSequence:
    items: tuple[PartialAction, ...]
    sources: tuple[str, ...] = ()


def extract_tuples(raw: str) -> list[str]:
    """Every ``name(args)`` on any line, ignoring numbering, prose and fences."""
    out = []
    for line in raw.splitlines():
        if line.strip().startswith("```"):
            continue
        out.extend(m.group(0).strip() for m in TUPLE_RE.finditer(line))
    return out


def parse_and_validate(
    mode: str, raw: str, table: SymbolTable, domain: Domain, init: SymbolicState
) -> SubgoalSequence | ActionSequence | ValidationFailure:
    tuples = extract_tuples(raw)
    if not tuples:
        return ValidationFailure(None, "No tuples of the form name(arguments) were found in the answer.")
    items = []
    for i, text in enumerate(tuples):
        try:
            if mode == SUBGOALS:
                lit = parse_literal(text, table, domain)
                if not lit.positive or lit.predicate not in SUBGOAL_PREDICATES:
                    return ValidationFailure(i, f"Item {i + 1} {text}: {unparse(lit)} is not one of the allowed subgoals.")
                items.append(lit)
            else:
                items.append(parse_action(text, table, domain))
        except LiteralError as exc:
            return ValidationFailure(i, f"Item {i + 1} {text}: {exc}.")
    verdict = check_semantics(domain, table, init, items)
    if not verdict.success:
        return ValidationFailure(verdict.failing_item_index, verdict.message)
    if mode == SUBGOALS:
        return SubgoalSequence(tuple(items), tuple(tuples))
    return ActionSequence(tuple(items), tuple(tuples))


# --------------------------------------------------------------------------
# query


class Backend(Protocol):
    kind: str

    def complete(self, bundle: PromptBundle) -> str: ...


def query(backend: Backend, bundle: PromptBundle) -> str:
    return backend.complete(bundle)


@dataclass(frozen=True)
class Exchange:
    digest: str
    prompt_text: str
    response_text: str
    phase: int


@dataclass
class QueryResult:
    sequence: SubgoalSequence | ActionSequence | None
    english: str
    exchanges: list[Exchange]
    failure: ValidationFailure | None = None

    @property
    def ok(self) -> bool:
        return self.sequence is not None


def vlm_query(
    backend: Backend,
    first: PromptBundle,
    table: SymbolTable,
    domain: Domain,
    init: SymbolicState,
    max_retries: int = MAX_RETRIES,
) -> QueryResult:
    """One full two-phase exchange, with retries for translation errors."""
    exchanges = []

    def ask(bundle: PromptBundle) -> str:
        raw = query(backend, bundle)
        exchanges.append(Exchange(bundle.digest, bundle.text, raw, bundle.phase))
        return raw

    english_steps = ask(first)
    if not english_steps.strip():
        return QueryResult(None, english_steps, exchanges, ValidationFailure(None, "The English plan was empty."))
    bundle = build_translation_prompt(first.mode, english_steps, table, first)
    failure = None
    for attempt in range(max_retries + 1):
        raw = ask(bundle)
        result = parse_and_validate(first.mode, raw, table, domain, init)
        if not isinstance(result, ValidationFailure):
            return QueryResult(result, english_steps, exchanges)
        failure = result
        if attempt < max_retries:
            bundle = bundle.follow_up(raw, RETRY.format(error=failure.message), 2)
    return QueryResult(None, english_steps, exchanges, failure)
