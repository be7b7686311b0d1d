import random
from collections import Counter

import pytest

from rpnjoin.engine import CONCURRENT, EvalContext, eval_plan, eval_rpn, max_stack_depth
from rpnjoin.errors import CardinalityLimitError, MalformedProgramError, UnknownRelationError
from rpnjoin.joins import JoinResultPolicy, expected_join_cardinality, sort_merge_join
from rpnjoin.plans import (
    JOIN_OP,
    Leaf,
    Operand,
    make_bushy_plan,
    make_linear_plan,
    to_rpn,
)
from rpnjoin.relations import Catalog, Relation, Row, key_histogram, multiset_equal

from oracles import fold_join_oracle, normal_form, random_catalog, random_plan, row_counter


def ctx_for(catalog, **kwargs):
    return EvalContext(catalog=catalog, **kwargs)


class TestEvalRpn:
    def test_single_operand_returns_the_catalog_relation_unchanged(self):
        rel = Relation("R1", 1, [Row(3, (0,))])
        out = eval_rpn([Operand("R1")], ctx_for(Catalog([rel])))
        assert out is rel

    def test_single_join_matches_the_join_function(self):
        rng = random.Random(1)
        catalog, _ = random_catalog(rng, 2, 32, 8)
        out = eval_rpn([Operand("R1"), Operand("R2"), JOIN_OP], ctx_for(catalog))
        direct = sort_merge_join(catalog.get("R1"), catalog.get("R2"))
        assert multiset_equal(out, direct)

    def test_bushy_six_matches_the_fold_oracle(self):
        rng = random.Random(42)
        catalog, names = random_catalog(rng, 6, 32, 8)
        program = to_rpn(make_bushy_plan(names))
        out = eval_rpn(program, ctx_for(catalog))
        oracle = fold_join_oracle(catalog, names)
        assert out.cardinality() == oracle.cardinality()
        assert normal_form(out) == normal_form(oracle)

    def test_underflow_is_a_malformed_program(self):
        catalog = Catalog([Relation("R1", 1)])
        with pytest.raises(MalformedProgramError):
            eval_rpn([Operand("R1"), JOIN_OP], ctx_for(catalog))

    def test_leftover_operand_is_a_malformed_program(self):
        catalog = Catalog([Relation("R1", 1), Relation("R2", 1)])
        with pytest.raises(MalformedProgramError, match="left"):
            eval_rpn([Operand("R1"), Operand("R2")], ctx_for(catalog))

    def test_empty_program_rejected(self):
        with pytest.raises(MalformedProgramError, match="empty"):
            eval_rpn([], ctx_for(Catalog()))

    def test_unknown_relation_is_a_catalog_error(self):
        with pytest.raises(UnknownRelationError):
            eval_rpn([Operand("nope")], ctx_for(Catalog()))

    def test_self_join_reuses_the_base_relation_safely(self):
        rng = random.Random(2)
        rel = Relation("R1", 1, [Row(rng.randrange(4), (i,)) for i in range(30)])
        catalog = Catalog([rel])
        rows_before = list(rel.rows)
        out = eval_rpn([Operand("R1"), Operand("R1"), JOIN_OP], ctx_for(catalog))
        hist = key_histogram(rel)
        assert out.cardinality() == sum(count * count for count in hist.values())
        assert rel.rows == rows_before

    def test_algorithm_and_mode_validated(self):
        with pytest.raises(ValueError):
            ctx_for(Catalog(), algorithm="bogosort")
        with pytest.raises(ValueError):
            ctx_for(Catalog(), mode="psychic")

    def test_counters_accumulate_across_joins(self):
        rng = random.Random(3)
        catalog, names = random_catalog(rng, 3, 24, 6)
        ctx = ctx_for(catalog, algorithm="nested")
        eval_rpn(to_rpn(make_linear_plan(names)), ctx)
        r1, r2, r3 = (catalog.get(n) for n in names)
        # nested-loop comparisons: |R1|*|R2| for the first join, then
        # |R1 join R2| * |R3| for the second
        mid_size = expected_join_cardinality(key_histogram(r1), key_histogram(r2))
        expected = len(r1.rows) * len(r2.rows) + mid_size * len(r3.rows)
        assert ctx.counters.tuple_comparisons == expected


class TestEvalPlan:
    def test_leaf_plan(self):
        rel = Relation("R1", 1, [Row(1, (0,))])
        assert eval_plan(Leaf("R1"), ctx_for(Catalog([rel]))) is rel

    def test_plan_naming_absent_relation(self):
        with pytest.raises(UnknownRelationError):
            eval_plan(Leaf("ghost"), ctx_for(Catalog()))

    def test_linear_and_bushy_shapes_agree(self):
        rng = random.Random(17)
        for _ in range(40):
            catalog, names = random_catalog(rng, rng.randint(2, 6), 24, 8)
            linear = eval_plan(make_linear_plan(names), ctx_for(catalog))
            bushy = eval_plan(make_bushy_plan(names), ctx_for(catalog))
            assert linear.cardinality() == bushy.cardinality()
            assert normal_form(linear) == normal_form(bushy)
            # leaf order is preserved by both shapes, so even the raw
            # column order coincides
            assert row_counter(linear) == row_counter(bushy)

    def test_every_algorithm_matches_the_fold_oracle_on_random_shapes(self):
        rng = random.Random(23)
        for _ in range(15):
            catalog, names = random_catalog(rng, rng.randint(2, 5), 24, 8)
            plan = random_plan(rng, names)
            oracle = row_counter(fold_join_oracle(catalog, names))
            for algorithm in ("sortmerge", "nested", "block", "rocking", "hash"):
                out = eval_plan(plan, ctx_for(catalog, algorithm=algorithm))
                assert row_counter(out) == oracle

    def test_k_way_cardinality_law(self):
        rng = random.Random(29)
        for _ in range(25):
            catalog, names = random_catalog(rng, rng.randint(2, 6), 24, 6)
            hist = key_histogram(catalog.get(names[0]))
            size = sum(hist.values())
            for name in names[1:]:
                nxt = key_histogram(catalog.get(name))
                size = expected_join_cardinality(hist, nxt)
                hist = Counter({k: hist[k] * nxt[k] for k in hist.keys() & nxt.keys()})
            out = eval_plan(make_bushy_plan(names), ctx_for(catalog))
            assert out.cardinality() == size


class TestMaxStackDepth:
    def test_single_operand(self):
        assert max_stack_depth([Operand("R1")]) == 1

    def test_linear_chains_peak_at_two(self):
        for k in range(2, 40):
            program = to_rpn(make_linear_plan([f"R{i}" for i in range(k)]))
            assert max_stack_depth(program) == 2

    def test_bushy_six_token_trace(self):
        program = to_rpn(make_bushy_plan([f"R{i}" for i in range(6)]))
        trace = []
        depth = 0
        for token in program:
            depth += 1 if isinstance(token, Operand) else -1
            trace.append(depth)
        assert trace == [1, 2, 1, 2, 3, 2, 1, 2, 3, 2, 1]
        assert max_stack_depth(program) == 3

    def test_perfect_trees_peak_at_height_plus_one(self):
        for m in range(0, 8):
            program = to_rpn(make_bushy_plan([f"R{i}" for i in range(2 ** m)]))
            assert max_stack_depth(program) == m + 1

    def test_malformed_programs_rejected(self):
        with pytest.raises(MalformedProgramError):
            max_stack_depth([Operand("R1"), JOIN_OP])
        with pytest.raises(MalformedProgramError):
            max_stack_depth([Operand("R1"), Operand("R2")])
        with pytest.raises(MalformedProgramError):
            max_stack_depth([])


class TestDeepPrograms:
    def test_ten_thousand_join_chain(self):
        names = [f"R{i}" for i in range(10_000)]
        catalog = Catalog(Relation(name, 0, [Row(7)]) for name in names)
        program = to_rpn(make_linear_plan(names))
        out = eval_rpn(program, ctx_for(catalog))
        assert out.cardinality() == 1
        assert out.rows == [Row(7, ())]


class TestConcurrentMode:
    def test_matches_sequential_results_and_counters(self):
        rng = random.Random(31)
        for _ in range(15):
            catalog, names = random_catalog(rng, rng.randint(2, 6), 24, 8)
            plan = make_bushy_plan(names)
            seq_ctx = ctx_for(catalog, algorithm="nested")
            con_ctx = ctx_for(catalog, algorithm="nested", mode=CONCURRENT)
            seq = eval_plan(plan, seq_ctx)
            con = eval_plan(plan, con_ctx)
            assert multiset_equal(seq, con)
            assert seq_ctx.counters.tuple_comparisons == con_ctx.counters.tuple_comparisons
            assert seq_ctx.counters.page_reads == con_ctx.counters.page_reads

    def test_single_operand_program(self):
        rel = Relation("R1", 1, [Row(1, (0,))])
        out = eval_rpn([Operand("R1")], ctx_for(Catalog([rel]), mode=CONCURRENT))
        assert out is rel

    def test_linear_chain_runs_concurrently_too(self):
        rng = random.Random(37)
        catalog, names = random_catalog(rng, 6, 16, 4)
        plan = make_linear_plan(names)
        seq = eval_plan(plan, ctx_for(catalog))
        con = eval_plan(plan, ctx_for(catalog, mode=CONCURRENT))
        assert multiset_equal(seq, con)

    def test_cap_errors_propagate(self):
        catalog = Catalog([
            Relation("R1", 1, [Row(1, (i,)) for i in range(4)]),
            Relation("R2", 1, [Row(1, (i,)) for i in range(4)]),
        ])
        ctx = ctx_for(catalog, mode=CONCURRENT, policy=JoinResultPolicy(max_output_tuples=3))
        with pytest.raises(CardinalityLimitError):
            eval_rpn([Operand("R1"), Operand("R2"), JOIN_OP], ctx)

    def test_catalog_errors_propagate(self):
        with pytest.raises(UnknownRelationError):
            eval_rpn([Operand("ghost")], ctx_for(Catalog(), mode=CONCURRENT))

    def test_malformed_programs_rejected_up_front(self):
        catalog = Catalog([Relation("R1", 1)])
        with pytest.raises(MalformedProgramError):
            eval_rpn([Operand("R1"), JOIN_OP], ctx_for(catalog, mode=CONCURRENT))

    def test_wide_tree_with_many_independent_subtrees(self):
        # 16 leaves give 8 leaf-level joins that can genuinely run in parallel
        rng = random.Random(41)
        catalog, names = random_catalog(rng, 16, 8, 4)
        plan = make_bushy_plan(names)
        seq = eval_plan(plan, ctx_for(catalog))
        for workers in (1, 2, 8):
            con = eval_plan(plan, ctx_for(catalog, mode=CONCURRENT, max_workers=workers))
            assert multiset_equal(seq, con)
