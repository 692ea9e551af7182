"""Exception types shared across the package."""

from __future__ import annotations


class PinchflowError(Exception):
    """Base class for all package-specific errors."""


class ProfileDomainError(PinchflowError):
    """Evaluation of a profile at/outside the boundary of its smooth domain."""

    def __init__(self, z, label=""):
        self.z = z
        super().__init__(f"z={z!r} is not interior to the smooth domain of {label or 'profile'}")


class GraphConditionError(PinchflowError):
    """Unbounded slope detected: the graph condition is violated."""


class UnsupportedProfileError(PinchflowError):
    """Profile does not meet the structural hypotheses of the requested check."""


class CertificateError(PinchflowError):
    """Certificate constants violate their admissibility constraints."""


class SamplingError(PinchflowError):
    """A check grid hit a point where the sampled quantity is undefined."""


class ConstructionError(PinchflowError):
    """No admissible initial cap for the requested profile/height."""


class DegenerateStateError(PinchflowError):
    """State with non-positive boundary radius."""


class StepRejected(PinchflowError):
    """Single step did not converge; caller should retry with a smaller dt."""


class ConsistencyFault(PinchflowError):
    """Post-acceptance invariant violation; carries the state for post-mortem."""

    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)


class NumericalBlowupError(PinchflowError):
    """Non-finite intermediate value, with the offending node index."""

    def __init__(self, node_index, message=""):
        self.node_index = node_index
        super().__init__(message or f"non-finite value at node {node_index}")


class AnalysisError(PinchflowError):
    """Trajectory does not support the requested fit (e.g. too shallow)."""


class NoFiniteTimeSingularity(PinchflowError):
    """Signal: the radius is not decreasing, no finite singular time to fit."""


class ConfigError(PinchflowError):
    """Malformed scenario configuration, with line/field diagnostics."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        prefix = f"[{', '.join(loc)}] " if loc else ""
        super().__init__(prefix + message)
