"""Independent reference implementations used only by tests.

These deliberately share no code with the package: the FOV oracle walks
Bresenham rays per tile, the grammar checker re-parses PDDL from scratch, and
the path oracle is a plain queue BFS. They are the second route of every
dual-route check.
"""

from __future__ import annotations

from collections import deque


def bresenham_fov(opaque, rows, cols, origin, radius=7):
    """Brute force: a tile is visible iff the line to it, sampled at every
    major-axis step (ties toward +row/+col), meets no opaque cell."""
    orow, ocol = origin
    visible = set()
    for r in range(rows):
        for c in range(cols):
            dr, dc = r - orow, c - ocol
            if max(abs(dr), abs(dc)) > radius:
                continue
            if (dr, dc) == (0, 0):
                visible.add((r, c))
                continue
            blocked = False
            if abs(dc) >= abs(dr):
                steps, sign = abs(dc), (1 if dc > 0 else -1)
                for k in range(1, steps):
                    cc = ocol + sign * k
                    rr = orow + (2 * dr * k + steps) // (2 * steps)
                    if not (0 <= rr < rows and 0 <= cc < cols) or opaque(rr, cc):
                        blocked = True
                        break
            else:
                steps, sign = abs(dr), (1 if dr > 0 else -1)
                for k in range(1, steps):
                    rr = orow + sign * k
                    cc = ocol + (2 * dc * k + steps) // (2 * steps)
                    if not (0 <= rr < rows and 0 <= cc < cols) or opaque(rr, cc):
                        blocked = True
                        break
            if not blocked:
                visible.add((r, c))
    return visible


def bfs_path_length(passable, start, goal):
    """Shortest 8-way path length over a passable-set; None if unreachable."""
    if start == goal:
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        (r, c), dist = queue.popleft()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                nxt = (r + dr, c + dc)
                if nxt in seen or nxt not in passable:
                    continue
                if nxt == goal:
                    return dist + 1
                seen.add(nxt)
                queue.append((nxt, dist + 1))
    return None


# ---------------------------------------------------------------------------
# PDDL grammar checker


class PddlSyntaxError(Exception):
    pass


def _tokenize(text):
    out = []
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
        else:
            token += ch
    if token:
        out.append(token)
    return out


def _read(tokens):
    if not tokens:
        raise PddlSyntaxError("unexpected end of input")
    tok = tokens.pop(0)
    if tok == "(":
        out = []
        while tokens and tokens[0] != ")":
            out.append(_read(tokens))
        if not tokens:
            raise PddlSyntaxError("unbalanced parenthesis")
        tokens.pop(0)
        return out
    if tok == ")":
        raise PddlSyntaxError("unexpected ')'")
    return tok


NAME_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789-_")


def _check_name(name):
    if not isinstance(name, str) or not name:
        raise PddlSyntaxError(f"expected a name, got {name!r}")
    if name[0] == "?":
        name = name[1:]
    if not set(name.lower()) <= NAME_CHARS or not name[0].isalpha():
        raise PddlSyntaxError(f"illegal PDDL name {name!r}")


def _check_typed_vars(items):
    """'?a ?b - type ...' lists; returns [(var, type)]."""
    out = []
    pending = []
    i = 0
    while i < len(items):
        if items[i] == "-":
            if i + 1 >= len(items):
                raise PddlSyntaxError("dangling '-' in typed list")
            for name in pending:
                out.append((name, items[i + 1]))
            pending = []
            i += 2
        else:
            _check_name(items[i])
            pending.append(items[i])
            i += 1
    for name in pending:
        out.append((name, "object"))
    return out


def _literal_signature(expr, predicates, variables):
    if not isinstance(expr, list) or not expr:
        raise PddlSyntaxError(f"expected a literal, got {expr!r}")
    if expr[0] == "not":
        if len(expr) != 2:
            raise PddlSyntaxError("'not' wants exactly one literal")
        return _literal_signature(expr[1], predicates, variables)
    name = expr[0]
    if name not in predicates:
        raise PddlSyntaxError(f"unknown predicate {name!r}")
    if len(expr) - 1 != predicates[name]:
        raise PddlSyntaxError(
            f"predicate {name} wants {predicates[name]} args, got {len(expr) - 1}")
    for arg in expr[1:]:
        if isinstance(arg, list):
            raise PddlSyntaxError("nested expression where a term belongs")
        if arg.startswith("?") and arg not in variables:
            raise PddlSyntaxError(f"unbound variable {arg}")
    return name


def _flatten_condition(expr, predicates, variables):
    if not isinstance(expr, list) or not expr:
        raise PddlSyntaxError("empty condition")
    if expr[0] == "and":
        for clause in expr[1:]:
            _flatten_condition(clause, predicates, variables)
    else:
        _literal_signature(expr, predicates, variables)


def _parse_document(text):
    tokens = _tokenize(text.lower())
    expr = _read(tokens)
    if tokens:
        raise PddlSyntaxError(f"trailing tokens after document: {tokens[:3]}")
    return expr


def check_pddl_domain(text):
    """Validate a :strips :typing domain; returns (name, predicates, actions)."""
    expr = _parse_document(text)
    if not expr or expr[0] != "define":
        raise PddlSyntaxError("domain must start with (define ...)")
    if not (isinstance(expr[1], list) and expr[1][0] == "domain"):
        raise PddlSyntaxError("missing (domain <name>)")
    _check_name(expr[1][1])
    predicates = {}
    actions = {}
    types = set()
    saw_requirements = False
    for section in expr[2:]:
        if not isinstance(section, list) or not section:
            raise PddlSyntaxError(f"bad section {section!r}")
        tag = section[0]
        if tag == ":requirements":
            saw_requirements = True
            for req in section[1:]:
                if req not in (":strips", ":typing"):
                    raise PddlSyntaxError(f"unsupported requirement {req}")
        elif tag == ":types":
            for t in section[1:]:
                _check_name(t)
                types.add(t)
        elif tag == ":predicates":
            for pred in section[1:]:
                _check_name(pred[0])
                typed = _check_typed_vars(pred[1:])
                for _var, var_type in typed:
                    if var_type not in types:
                        raise PddlSyntaxError(f"unknown type {var_type!r}")
                predicates[pred[0]] = len(typed)
        elif tag == ":action":
            name = section[1]
            _check_name(name)
            body = dict(zip(section[2::2], section[3::2]))
            for key in (":parameters", ":precondition", ":effect"):
                if key not in body:
                    raise PddlSyntaxError(f"action {name} missing {key}")
            params = _check_typed_vars(body[":parameters"])
            for _var, var_type in params:
                if var_type not in types:
                    raise PddlSyntaxError(f"unknown type {var_type!r}")
            variables = {var for var, _ in params}
            _flatten_condition(body[":precondition"], predicates, variables)
            _flatten_condition(body[":effect"], predicates, variables)
            actions[name] = params
        else:
            raise PddlSyntaxError(f"unknown domain section {tag}")
    if not saw_requirements:
        raise PddlSyntaxError("missing :requirements")
    return expr[1][1], predicates, actions


def check_pddl_problem(text, domain_text):
    """Validate a problem against its domain; returns (name, objects, init, goal)."""
    domain_name, predicates, _actions = check_pddl_domain(domain_text)
    expr = _parse_document(text)
    if not expr or expr[0] != "define":
        raise PddlSyntaxError("problem must start with (define ...)")
    if not (isinstance(expr[1], list) and expr[1][0] == "problem"):
        raise PddlSyntaxError("missing (problem <name>)")
    _check_name(expr[1][1])
    objects = set()
    init = []
    goal = None
    declared_domain = None
    for section in expr[2:]:
        tag = section[0]
        if tag == ":domain":
            declared_domain = section[1]
        elif tag == ":objects":
            for obj, _type in _check_typed_vars(section[1:]):
                objects.add(obj)
        elif tag == ":init":
            for fact in section[1:]:
                name = _literal_signature(fact, predicates, set())
                for arg in fact[1:]:
                    if arg not in objects:
                        raise PddlSyntaxError(f"init fact uses undeclared object {arg!r}")
                init.append((name, *fact[1:]))
        elif tag == ":goal":
            goal = section[1]
            _flatten_condition(goal, predicates, set())
        else:
            raise PddlSyntaxError(f"unknown problem section {tag}")
    if declared_domain != domain_name:
        raise PddlSyntaxError(
            f"problem domain {declared_domain!r} does not match {domain_name!r}")
    if goal is None:
        raise PddlSyntaxError("problem has no :goal")
    return expr[1][1], objects, init, goal
