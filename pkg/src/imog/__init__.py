"""Toolkit for textual innovation models: parse, check, analyze, export.

The package turns the grid of perspectives and abstraction levels into
an executable workflow: a `.imog` file is parsed into an immutable
Model, cross-perspective references are resolved and validated, the
feature tree gets configuration semantics, requirements are traced
through allocations to detect conflicts, reusable insights live in a
flat-file knowledge store, and filtered views, graphs, tables and
roadmap scaffolds can be exported.
"""

from .diagnostics import Diagnostic, Severity, SourceSpan
from .errors import (
    BudgetExceededError,
    ImogError,
    InvalidFeatureTreeError,
    KindNotExtractableError,
    StoreCorruptError,
    UnknownElementError,
)
from .knowledge import (
    ExtractResult,
    KnowledgeEntry,
    check_kbrefs,
    extract,
    load,
    query,
    save,
)
from .model import (
    AbstractionLevel,
    Element,
    ElementKind,
    Model,
    Perspective,
    ProcessStep,
    Property,
    Relation,
    RelationKind,
    RequirementBody,
    Role,
    Space,
    StepInfo,
    step_info,
    structurally_equal,
)
from .parser import ParseResult, parse, parse_file
from .printer import print_model
from .resolve import check_model, resolve, validate
from .trace import (
    ConflictGroup,
    TraceReport,
    conflict_diagnostics,
    coverage_report,
    effective_requirements,
    find_conflicts,
    impact,
)
from .variability import (
    Configuration,
    PropagationState,
    count_configurations,
    dead_features,
    enumerate_configurations,
    propagate,
    variant_combinations,
)
from .views import (
    export_graph,
    export_requirements_table,
    filter_view,
    parse_requirements_table,
    roadmap_scaffold,
)

__version__ = "0.1.0"
