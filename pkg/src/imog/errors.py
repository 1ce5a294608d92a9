"""Exception types raised by model analyses and the knowledge store."""

from __future__ import annotations


class ImogError(Exception):
    """Base class for all errors raised by this package."""


class UnknownElementError(ImogError):
    def __init__(self, element_id: str):
        super().__init__(f"unknown element id: {element_id!r}")
        self.element_id = element_id


class BudgetExceededError(ImogError):
    """Feature count exceeds the enumeration budget."""

    def __init__(self, budget: int, feature_count: int):
        super().__init__(
            f"feature model has {feature_count} features, "
            f"enumeration budget is {budget}"
        )
        self.budget = budget
        self.feature_count = feature_count


class InvalidFeatureTreeError(ImogError):
    """The feature relations do not form a single-root forest."""


class KindNotExtractableError(ImogError):
    def __init__(self, element_id: str, kind: str):
        super().__init__(
            f"element {element_id!r} of kind {kind} cannot be extracted "
            "(only blocks, variants and requirements are reusable)"
        )
        self.element_id = element_id
        self.kind = kind


class StoreCorruptError(ImogError):
    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: corrupt store line: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason
