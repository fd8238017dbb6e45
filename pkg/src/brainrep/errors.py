"""Exception types shared across the package."""


class BrainrepError(Exception):
    """Base class for all package errors."""


class InvalidDyadError(BrainrepError):
    """Self-loop or out-of-range node pair."""


class EdgeListParseError(BrainrepError):
    """Malformed edge-list or attribute file; carries the offending line number."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ConfigurationError(BrainrepError):
    """Inconsistent model/estimator/sampler configuration."""


class DegenerateGraphError(BrainrepError):
    """Metric undefined for this graph (e.g. path length of an edgeless graph)."""


class NotGraphicalError(BrainrepError):
    """Degree sequence not realizable by a simple graph."""


class DegeneracyError(BrainrepError):
    """Fitted pmf collapsed onto near-empty/near-complete graphs."""

    def __init__(self, term, message):
        self.term = term
        super().__init__(f"degenerate model near term '{term}': {message}")


class EnumerationLimitError(BrainrepError):
    """Graph too large for exact enumeration."""


class ModelSelectionError(BrainrepError):
    """No candidate model survived a selection step."""


class AssessmentError(BrainrepError):
    """Distance undefined for a network (e.g. undefined assortativity)."""


class PipelineError(BrainrepError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
