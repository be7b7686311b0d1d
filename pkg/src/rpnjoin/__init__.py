"""In-memory multi-join engine: sort-merge joins over postfix plan programs.

Relations are integer-keyed multisets; multi-join queries are binary plan
trees (linear or bushy) flattened to reverse-polish programs and evaluated on
an explicit operand stack. A benchmark harness times plan shapes across a
tuples x relations grid and emits CSV plus rendered figures.
"""

from .bench import BenchConfig, BenchRecord, read_results_csv, run_benchmark, write_results_csv
from .engine import CONCURRENT, SEQUENTIAL, EvalContext, eval_plan, eval_rpn, max_stack_depth
from .errors import (
    CardinalityLimitError,
    CsvFormatError,
    EngineError,
    InvalidRangeError,
    MalformedProgramError,
    PlanSyntaxError,
    UnknownRelationError,
)
from .joins import (
    ALGORITHMS,
    CostCounters,
    JoinResultPolicy,
    block_nested_loop_join,
    expected_join_cardinality,
    hash_join,
    nested_loop_join,
    rocking_nested_loop_join,
    sort_merge_join,
)
from .plans import (
    JOIN_OP,
    Join,
    Leaf,
    Operand,
    make_bushy_plan,
    make_linear_plan,
    parse_plan,
    parse_rpn,
    plan_to_text,
    rpn_to_plan,
    rpn_to_text,
    to_rpn,
)
from .relations import (
    Catalog,
    Relation,
    Row,
    generate_relation,
    key_histogram,
    multiset_equal,
    relation_from_csv,
    relation_to_csv,
)
from .sorting import is_sorted_by_key, quicksort_by_key

__version__ = "0.1.0"
