"""Postfix evaluation of join programs on an explicit operand stack.

The evaluator scans the token program left to right: an operand pushes its
catalog relation, a join operator pops the right then the left operand and
pushes the joined result. One relation must remain at the end. The scan is a
plain loop, so programs flattened from trees of any depth evaluate without
call-stack recursion.

Concurrent mode runs joins from independent subtrees in parallel worker
threads; results are identical to sequential mode because every join is a
pure function of its operands.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import MalformedProgramError
from .joins import ALGORITHMS, CostCounters, JoinResultPolicy
from .plans import Operand, PlanNode, RpnProgram, to_rpn
from .relations import Catalog, Relation

SEQUENTIAL = "sequential"
CONCURRENT = "concurrent"
MODES = (SEQUENTIAL, CONCURRENT)


@dataclass
class EvalContext:
    """Everything one evaluation needs: data, algorithm choice, and accounting.

    Counters accumulate across all joins of the evaluation. A context can be
    reused; counters then keep accumulating.
    """

    catalog: Catalog
    algorithm: str = "sortmerge"
    policy: JoinResultPolicy = field(default_factory=JoinResultPolicy)
    counters: CostCounters = field(default_factory=CostCounters)
    mode: str = SEQUENTIAL
    max_workers: int | None = None  # concurrent mode only; None picks a default

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}, expected one of {sorted(ALGORITHMS)}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")


def eval_rpn(program: RpnProgram, ctx: EvalContext) -> Relation:
    """Run a postfix program against the context's catalog."""
    if ctx.mode == CONCURRENT:
        return _eval_concurrent(program, ctx)
    join = ALGORITHMS[ctx.algorithm]
    stack: list[Relation] = []
    push = stack.append
    pop = stack.pop
    for idx, token in enumerate(program):
        if isinstance(token, Operand):
            push(ctx.catalog.get(token.name))
        else:
            if len(stack) < 2:
                raise MalformedProgramError(
                    f"join operator at token {idx} has fewer than two operands on the stack")
            right = pop()
            left = pop()
            push(join(left, right, ctx.policy, ctx.counters))
    if not stack:
        raise MalformedProgramError("empty program")
    if len(stack) > 1:
        raise MalformedProgramError(
            f"{len(stack)} relations left on the stack, expected exactly one")
    return stack[0]


def eval_plan(plan: PlanNode, ctx: EvalContext) -> Relation:
    """Flatten the plan and evaluate it; identical to eval_rpn(to_rpn(plan))."""
    return eval_rpn(to_rpn(plan), ctx)


def max_stack_depth(program: RpnProgram) -> int:
    """Peak operand-stack depth of a simulated scan; no relations touched.

    Linear chains peak at 2 however long they are; a perfectly balanced tree
    over 2**m leaves peaks at m + 1.
    """
    depth = 0
    peak = 0
    for idx, token in enumerate(program):
        if isinstance(token, Operand):
            depth += 1
            if depth > peak:
                peak = depth
        else:
            if depth < 2:
                raise MalformedProgramError(
                    f"join operator at token {idx} has fewer than two operands on the stack")
            depth -= 1
    if depth != 1:
        raise MalformedProgramError(
            "empty program" if depth == 0 else
            f"{depth} operands left after the final token, expected exactly one")
    return peak


def _eval_concurrent(program: RpnProgram, ctx: EvalContext) -> Relation:
    """Evaluate with independent subtrees running on worker threads.

    The program is turned into a dependency DAG by simulating the operand
    stack over node ids. Completion callbacks submit a join as soon as both
    of its children are done; tasks never block on other tasks, so a bounded
    pool cannot deadlock. Counters are merged under a lock; totals match the
    sequential ones because they are sums of per-join work.
    """
    kinds: list[str] = []
    deps: list[tuple[int, int] | str] = []  # name for leaves, (left, right) for joins
    id_stack: list[int] = []
    for idx, token in enumerate(program):
        if isinstance(token, Operand):
            kinds.append("leaf")
            deps.append(token.name)
        else:
            if len(id_stack) < 2:
                raise MalformedProgramError(
                    f"join operator at token {idx} has fewer than two operands on the stack")
            right = id_stack.pop()
            left = id_stack.pop()
            kinds.append("join")
            deps.append((left, right))
        id_stack.append(len(kinds) - 1)
    if not id_stack:
        raise MalformedProgramError("empty program")
    if len(id_stack) > 1:
        raise MalformedProgramError(
            f"{len(id_stack)} relations left on the stack, expected exactly one")
    root = id_stack[0]

    results: dict[int, Relation] = {}
    parents: dict[int, list[int]] = {}
    waiting: dict[int, int] = {}
    ready: list[int] = []
    for nid, kind in enumerate(kinds):
        if kind == "leaf":
            results[nid] = ctx.catalog.get(deps[nid])  # type: ignore[arg-type]
        else:
            left, right = deps[nid]  # type: ignore[misc]
            missing = (left not in results) + (right not in results)
            for child in (left, right):
                if child not in results:
                    parents.setdefault(child, []).append(nid)
            if missing:
                waiting[nid] = missing
            else:
                ready.append(nid)
    if kinds[root] == "leaf":
        return results[root]

    join = ALGORITHMS[ctx.algorithm]
    lock = threading.Lock()
    done = threading.Event()
    failure: list[BaseException] = []
    workers = ctx.max_workers or min(8, os.cpu_count() or 2)

    with ThreadPoolExecutor(max_workers=workers) as pool:

        def run(nid: int) -> None:
            try:
                left, right = deps[nid]  # type: ignore[misc]
                local = CostCounters(page_size=ctx.counters.page_size)
                rel = join(results[left], results[right], ctx.policy, local)
                newly_ready: list[int] = []
                with lock:
                    ctx.counters.tuple_comparisons += local.tuple_comparisons
                    ctx.counters.page_reads += local.page_reads
                    results[nid] = rel
                    del results[left], results[right]
                    for parent in parents.get(nid, ()):
                        waiting[parent] -= 1
                        if waiting[parent] == 0:
                            newly_ready.append(parent)
                if nid == root:
                    done.set()
                    return
                for parent in newly_ready:
                    pool.submit(run, parent)
            except BaseException as exc:  # propagated to the caller below
                with lock:
                    if not failure:
                        failure.append(exc)
                done.set()

        for nid in ready:
            pool.submit(run, nid)
        done.wait()
    if failure:
        raise failure[0]
    return results[root]
