"""hexeval: an evaluator for HEX programs.

HEX programs extend answer set programming with external atoms whose truth
is delegated to plugin oracle functions.  The pipeline: parse, ground with
bounded value invention, search with conflict-driven nogood learning over
the guessing translation, learn and minimize input-output nogoods from
oracle calls, and verify candidates with a reduct minimality check that is
skipped when dependency analysis proves it redundant.
"""

from .builtins import CATALOG, builtin_registry
from .errors import (
    EvaluationError,
    GroundingError,
    HexError,
    InputError,
    InventionBudgetError,
    LexError,
    MinimizationError,
    ParseError,
    PluginError,
    SafetyError,
    UnknownPluginError,
)
from .grounding import (
    AtomTable,
    DEFAULT_INVENTION_BUDGET,
    ExternalInstance,
    GroundProgram,
    GroundRule,
    GroundWeak,
    compute_domain,
    ground_program,
    intern,
)
from .interface import (
    CONSTANT,
    PREDICATE,
    InventionQuery,
    Nogood,
    OracleQuery,
    PluginDescriptor,
    PluginRegistry,
    PredicateView,
    Verdict,
    default_learn_nogood,
    evaluate_oracle,
    learn_partial_nogood,
    make_nogood,
    make_validator,
    minimize_nogood_deletion,
    minimize_nogood_quickxplain,
)
from .semantics import (
    DependencyGraph,
    ReductProgram,
    brute_force_answer_sets,
    brute_force_optimum,
    build_dependency_graph,
    flp_reduct,
    is_minimal_model,
    needs_flp_check,
    weak_cost,
)
from .solver import (
    Assignment,
    NogoodStore,
    OptimizeResult,
    SolveResult,
    Solver,
    SolverConfig,
    SolverStats,
    analyze_conflict,
    decide,
    encode_static_nogoods,
    external_propagation_hook,
    optimize,
    propagate,
    solve,
    verify_candidate,
)
from .syntax import (
    Atom,
    Compound,
    Constant,
    ExternalAtom,
    Integer,
    Literal,
    Program,
    Rule,
    Term,
    Variable,
    WeakConstraint,
    check_safety,
    parse_program,
    tokenize,
)

__version__ = "0.1.0"
