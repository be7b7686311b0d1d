"""Binary join plan trees, shape generators, and postfix (RPN) programs.

Plans are immutable binary trees: leaves name catalog relations, internal
nodes are join operators with exactly two children. A plan flattens to a
postfix token program that a stack machine can run without ever touching the
call stack, so arbitrarily deep trees are fine. The infix grammar is

    expr := term { "JOIN" term }
    term := IDENT | "(" expr ")"

JOIN is left-associative, whitespace is free, and the glyph "⋈" is accepted
as an alias for the keyword.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .errors import MalformedProgramError, PlanSyntaxError

JOIN_KEYWORD = "JOIN"
JOIN_GLYPH = "⋈"


@dataclass(frozen=True)
class Leaf:
    name: str


@dataclass(frozen=True)
class Join:
    left: "PlanNode"
    right: "PlanNode"


PlanNode = Union[Leaf, Join]


@dataclass(frozen=True)
class Operand:
    name: str


class _JoinOp:
    __slots__ = ()

    def __repr__(self) -> str:
        return "JOIN_OP"


# The single join-operator token; compare with `is`.
JOIN_OP = _JoinOp()

RpnToken = Union[Operand, _JoinOp]
RpnProgram = list[RpnToken]

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_TOKEN_RE = re.compile(r"\(|\)|⋈|[A-Za-z][A-Za-z0-9_]*|\S")


def _scan(text: str) -> Iterator[tuple[str, str, int]]:
    """Yield (kind, lexeme, position) triples; kinds: ident, join, lpar, rpar."""
    for match in _TOKEN_RE.finditer(text):
        lexeme = match.group()
        pos = match.start()
        if lexeme == "(":
            yield "lpar", lexeme, pos
        elif lexeme == ")":
            yield "rpar", lexeme, pos
        elif lexeme == JOIN_KEYWORD or lexeme == JOIN_GLYPH:
            yield "join", lexeme, pos
        elif _IDENT_RE.fullmatch(lexeme):
            yield "ident", lexeme, pos
        else:
            raise PlanSyntaxError(f"unexpected character {lexeme!r}", pos)


def parse_plan(text: str) -> PlanNode:
    """Parse infix plan text such as "R1 JOIN (R2 ⋈ R3)" into a tree.

    A shunting-yard pass emits postfix directly (there is only one operator,
    so precedence degenerates to left associativity); the token stream is
    then folded into a tree. No recursion, so nesting depth is unbounded.
    """
    return rpn_to_plan(_shunting_yard(text))


def _shunting_yard(text: str) -> RpnProgram:
    output: RpnProgram = []
    # Each entry is ("join" | "lpar", position of the source token).
    opstack: list[tuple[str, int]] = []
    expect_term = True
    seen_any = False
    for kind, lexeme, pos in _scan(text):
        seen_any = True
        if kind == "ident":
            if not expect_term:
                raise PlanSyntaxError(
                    f"unexpected identifier {lexeme!r}, expected JOIN or ')'", pos)
            output.append(Operand(lexeme))
            expect_term = False
        elif kind == "join":
            if expect_term:
                raise PlanSyntaxError("JOIN is missing its left operand", pos)
            while opstack and opstack[-1][0] == "join":  # left-associative
                output.append(JOIN_OP)
                opstack.pop()
            opstack.append(("join", pos))
            expect_term = True
        elif kind == "lpar":
            if not expect_term:
                raise PlanSyntaxError("unexpected '(', expected JOIN or ')'", pos)
            opstack.append(("lpar", pos))
        else:  # rpar
            if expect_term:
                raise PlanSyntaxError("unexpected ')'", pos)
            while opstack and opstack[-1][0] == "join":
                output.append(JOIN_OP)
                opstack.pop()
            if not opstack:
                raise PlanSyntaxError("unmatched ')'", pos)
            opstack.pop()
    if not seen_any:
        raise PlanSyntaxError("empty plan text", 0)
    if expect_term:
        raise PlanSyntaxError("unexpected end of input, expected a relation name", len(text))
    while opstack:
        op, pos = opstack.pop()
        if op == "lpar":
            raise PlanSyntaxError("unmatched '('", pos)
        output.append(JOIN_OP)
    return output


def _checked_names(names: Sequence[str]) -> Sequence[str]:
    if not names:
        raise ValueError("at least one relation name is required")
    for name in names:
        if not _IDENT_RE.fullmatch(name) or name == JOIN_KEYWORD:
            raise ValueError(f"invalid relation name {name!r}")
    return names


def make_linear_plan(names: Sequence[str]) -> PlanNode:
    """Left-deep chain: every intermediate result feeds only the next join."""
    names = _checked_names(names)
    node: PlanNode = Leaf(names[0])
    for name in names[1:]:
        node = Join(node, Leaf(name))
    return node


def make_bushy_plan(names: Sequence[str]) -> PlanNode:
    """Balanced shape built by pairing adjacent subtrees bottom-up.

    Adjacent leaves pair first, then adjacent results, and so on until one
    root remains; an odd subtree is promoted unchanged to the next level, so
    the left-to-right relation order is preserved.
    """
    names = _checked_names(names)
    level: list[PlanNode] = [Leaf(name) for name in names]
    while len(level) > 1:
        paired = [Join(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


def to_rpn(plan: PlanNode) -> RpnProgram:
    """Flatten a plan to its postfix token program.

    Post-order traversal with an explicit node stack (emit in root-right-left
    order, then reverse); no call-stack recursion, so chains of any depth
    flatten fine.
    """
    out: RpnProgram = []
    append = out.append
    stack = [plan]
    pop = stack.pop
    push = stack.append
    while stack:
        node = pop()
        if type(node) is Leaf:
            append(Operand(node.name))
        else:
            append(JOIN_OP)
            push(node.left)
            push(node.right)
    out.reverse()
    return out


def rpn_to_plan(program: RpnProgram) -> PlanNode:
    """Fold a postfix program back into a tree; inverse of :func:`to_rpn`."""
    stack: list[PlanNode] = []
    for idx, token in enumerate(program):
        if isinstance(token, Operand):
            stack.append(Leaf(token.name))
        elif isinstance(token, _JoinOp):
            if len(stack) < 2:
                raise MalformedProgramError(
                    f"join operator at token {idx} has fewer than two operands on the stack")
            right = stack.pop()
            left = stack.pop()
            stack.append(Join(left, right))
        else:
            raise TypeError(f"not an RPN token: {token!r}")
    if not stack:
        raise MalformedProgramError("empty program")
    if len(stack) > 1:
        raise MalformedProgramError(
            f"{len(stack)} operands left after the final token, expected exactly one")
    return stack[0]


def plan_to_text(plan: PlanNode) -> str:
    """Render a plan as fully parenthesized infix text, e.g. "(R1 JOIN R2)"."""
    parts: list[str] = []
    append = parts.append
    stack: list[object] = [plan]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            append(item)
        elif type(item) is Leaf:
            append(item.name)
        else:
            stack.extend([")", item.right, " JOIN ", item.left, "("])
    return "".join(parts)


def rpn_to_text(program: RpnProgram) -> str:
    """Render a program as whitespace-separated tokens."""
    return " ".join(
        token.name if isinstance(token, Operand) else JOIN_KEYWORD for token in program
    )


def parse_rpn(text: str) -> RpnProgram:
    """Parse whitespace-separated RPN text back into a token program.

    Structure (operand/operator balance) is checked by the consumer, not
    here; this only tokenizes.
    """
    program: RpnProgram = []
    for match in re.finditer(r"\S+", text):
        word = match.group()
        if word == JOIN_KEYWORD or word == JOIN_GLYPH:
            program.append(JOIN_OP)
        elif _IDENT_RE.fullmatch(word):
            program.append(Operand(word))
        else:
            raise PlanSyntaxError(f"bad RPN token {word!r}", match.start())
    return program
