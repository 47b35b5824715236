"""A tiny STRIPS solver: parse domain/problem text, ground, breadth-first
search. It exists as the independent check on exported models and as the
brain of the planning baseline agent; it is not a shipped feature.

Supports exactly the fragment the exporter emits: :strips :typing, flat
types, conjunctive positive preconditions and goals, add/delete effects.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

Fact = tuple   # ("at", "t_D1_3_4")


def tokenize(text: str) -> list[str]:
    out: list[str] = []
    token = ""
    for ch in text:
        if ch in "()":
            if token:
                out.append(token)
                token = ""
            out.append(ch)
        elif ch.isspace():
            if token:
                out.append(token)
                token = ""
        elif ch == ";":
            if token:
                out.append(token)
                token = ""
            out.append(ch)
        else:
            token += ch
    if token:
        out.append(token)
    return out


def parse_sexpr(text: str):
    """Parse one s-expression into nested lists of lowercase strings."""
    tokens = tokenize(text)
    pos = 0

    def walk():
        nonlocal pos
        if tokens[pos] != "(":
            atom = tokens[pos]
            pos += 1
            return atom.lower()
        pos += 1
        items = []
        while pos < len(tokens) and tokens[pos] != ")":
            items.append(walk())
        if pos >= len(tokens):
            raise ValueError("unbalanced parentheses")
        pos += 1
        return items

    expr = walk()
    if pos != len(tokens):
        raise ValueError("trailing tokens after s-expression")
    return expr


def _typed_list(items: list) -> list[tuple[str, str]]:
    """Parse 'a b - tile c - item' into [(a, tile), (b, tile), (c, item)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        if items[i] == "-":
            type_name = items[i + 1]
            out.extend((name, type_name) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(items[i])
            i += 1
    out.extend((name, "object") for name in pending)
    return out


def _literal_list(expr) -> tuple[list[Fact], list[Fact]]:
    """Split a condition/effect expression into (positive, negative) literals."""
    pos: list[Fact] = []
    neg: list[Fact] = []
    clauses = expr[1:] if expr and expr[0] == "and" else [expr]
    for clause in clauses:
        if not clause:
            continue
        if clause[0] == "not":
            inner = clause[1]
            neg.append((inner[0], *inner[1:]))
        else:
            pos.append((clause[0], *clause[1:]))
    return pos, neg


@dataclass
class ActionSchema:
    name: str
    params: list[tuple[str, str]]
    pre: list[Fact]
    add: list[Fact]
    delete: list[Fact]


@dataclass
class Domain:
    name: str
    predicates: set[str]
    actions: list[ActionSchema]

    @property
    def mutated_predicates(self) -> set[str]:
        out = set()
        for schema in self.actions:
            out.update(f[0] for f in schema.add)
            out.update(f[0] for f in schema.delete)
        return out


@dataclass
class Problem:
    name: str
    objects: dict[str, list[str]]   # type -> object names
    init: set[Fact]
    goal: list[Fact]


def parse_domain(text: str) -> Domain:
    expr = parse_sexpr(text)
    assert expr[0] == "define" and expr[1][0] == "domain"
    name = expr[1][1]
    predicates: set[str] = set()
    actions: list[ActionSchema] = []
    for section in expr[2:]:
        if section[0] == ":predicates":
            predicates.update(p[0] for p in section[1:])
        elif section[0] == ":action":
            body = dict(zip(section[2::2], section[3::2]))
            pre_pos, pre_neg = _literal_list(body[":precondition"])
            if pre_neg:
                raise ValueError("negative preconditions unsupported")
            add, delete = _literal_list(body[":effect"])
            actions.append(ActionSchema(
                name=section[1],
                params=_typed_list(body[":parameters"]),
                pre=pre_pos, add=add, delete=delete,
            ))
    return Domain(name=name, predicates=predicates, actions=actions)


def parse_problem(text: str) -> Problem:
    expr = parse_sexpr(text)
    assert expr[0] == "define" and expr[1][0] == "problem"
    name = expr[1][1]
    objects: dict[str, list[str]] = {}
    init: set[Fact] = set()
    goal: list[Fact] = []
    for section in expr[2:]:
        if section[0] == ":objects":
            for obj, type_name in _typed_list(section[1:]):
                objects.setdefault(type_name, []).append(obj)
        elif section[0] == ":init":
            for fact in section[1:]:
                init.add((fact[0], *fact[1:]))
        elif section[0] == ":goal":
            goal, neg = _literal_list(section[1])
            if neg:
                raise ValueError("negative goals unsupported")
    return Problem(name=name, objects=objects, init=init, goal=goal)


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: frozenset
    add: frozenset
    delete: frozenset

    def text(self) -> str:
        return f"({self.name} {' '.join(self.args)})" if self.args else f"({self.name})"


def ground_actions(domain: Domain, problem: Problem) -> list[GroundAction]:
    """Instantiate schemas over the objects, pruning on static facts early."""
    mutated = domain.mutated_predicates
    static_facts: dict[str, list[Fact]] = {}
    for fact in problem.init:
        if fact[0] not in mutated:
            static_facts.setdefault(fact[0], []).append(fact)

    grounded: list[GroundAction] = []
    for schema in domain.actions:
        static_lits = [lit for lit in schema.pre if lit[0] not in mutated]
        dynamic_lits = [lit for lit in schema.pre if lit[0] in mutated]

        def extend(bindings: dict[str, str], remaining: list[Fact]):
            if not remaining:
                yield dict(bindings)
                return
            lit = remaining[0]
            for fact in static_facts.get(lit[0], ()):
                trial = dict(bindings)
                ok = True
                for var, value in zip(lit[1:], fact[1:]):
                    if var.startswith("?"):
                        if trial.get(var, value) != value:
                            ok = False
                            break
                        trial[var] = value
                    elif var != value:
                        ok = False
                        break
                if ok:
                    yield from extend(trial, remaining[1:])

        for partial in extend({}, static_lits):
            free = [(v, t) for v, t in schema.params if v not in partial]

            def finish(bindings: dict[str, str], rest: list[tuple[str, str]]):
                if not rest:
                    yield dict(bindings)
                    return
                var, type_name = rest[0]
                for obj in problem.objects.get(type_name, ()):
                    bindings[var] = obj
                    yield from finish(bindings, rest[1:])
                    del bindings[var]

            for binding in finish(dict(partial), free):
                def subst(lits):
                    return frozenset(
                        (lit[0], *(binding.get(a, a) for a in lit[1:])) for lit in lits
                    )
                static_ok = all(
                    fact in problem.init
                    for fact in subst(static_lits)
                )
                if not static_ok:
                    continue
                grounded.append(GroundAction(
                    name=schema.name,
                    args=tuple(binding[v] for v, _ in schema.params),
                    pre=subst(dynamic_lits),
                    add=subst(schema.add),
                    delete=subst(schema.delete),
                ))
    return grounded


@dataclass
class PlanResult:
    steps: list[GroundAction]
    expansions: int

    def text(self) -> str:
        return "\n".join(step.text() for step in self.steps) + ("\n" if self.steps else "")


def solve(domain_text: str, problem_text: str,
          max_expansions: int = 200_000) -> Optional[PlanResult]:
    """Breadth-first search to the goal; None when unreachable or over budget."""
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text)
    mutated = domain.mutated_predicates
    actions = ground_actions(domain, problem)
    start = frozenset(fact for fact in problem.init if fact[0] in mutated)
    goal = [fact for fact in problem.goal]

    def satisfied(state) -> bool:
        return all(fact in state or fact in problem.init for fact in goal)

    if satisfied(start):
        return PlanResult(steps=[], expansions=0)

    seen = {start}
    queue = deque([(start, [])])
    expansions = 0
    while queue:
        state, path = queue.popleft()
        expansions += 1
        if expansions > max_expansions:
            return None
        for action in actions:
            if not action.pre <= state:
                continue
            nxt = frozenset((state - action.delete) | action.add)
            if nxt in seen:
                continue
            new_path = path + [action]
            if satisfied(nxt):
                return PlanResult(steps=new_path, expansions=expansions)
            seen.add(nxt)
            queue.append((nxt, new_path))
    return None
