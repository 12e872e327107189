"""Completeness reasoning for conjunctive queries over partially complete
relational databases: containment, statement entailment, aggregates,
instance reasoning, null values, and quality-aware processes."""

from .errors import CqcheckError, InputError, LimitExceeded, ReasoningError, Refusal
from .model import (
    Atom,
    Bag,
    Comparison,
    Condition,
    ConjunctiveQuery,
    Const,
    DatabaseInstance,
    FrozenConst,
    IncompleteDatabase,
    Null,
    NullKind,
    QCStatement,
    Regime,
    TCStatement,
    Var,
    Verdict,
    evaluate,
    freeze,
    fresh_null,
    satisfies_qc,
    satisfies_tc,
)
from .containment import (
    RepresentativeValuation,
    contained,
    minimize,
    reduce_query,
    representative_valuations,
)
from .completeness import (
    CanonicalStatementSet,
    canonical_statements,
    qc_qc_bag,
    t_c,
    tc_qc_bag,
    tc_qc_set,
    tc_tc,
    weakest_precondition,
)
from .aggregates import AggregateQuery, dominated, tc_qc_count, tc_qc_max, tc_qc_sum
from .instances import DimensionReport, dimension_analysis, qc_qc_instance, tc_qc_instance
from .nulls import (
    chase,
    crucial_query,
    eval_cert,
    eval_sql,
    satisfies_qc_null,
    t_c_proj,
    tc_qc_bag_keys,
    tc_qc_inc,
    tc_qc_nulls,
    tc_qc_res,
    tc_qc_3null,
)
from .process import (
    QATS,
    CopyEffect,
    RealWorldEffect,
    containment_as_qats,
    design_time_verify,
    normalize,
    repaired,
    risky,
    runtime_verify,
    sequence_complete,
)
from .adversarial import Formula, Literal, adversarial_instance, containment_as_tc
from .parser import Workspace, emit_verdict, emit_workspace, parse_workspace

__version__ = "0.1.0"
