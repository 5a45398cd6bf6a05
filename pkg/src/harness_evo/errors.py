"""Engine error classes, one per externally visible failure mode."""

from __future__ import annotations


class EngineError(Exception):
    """Base for every engine-raised failure."""


class ProtocolError(EngineError):
    """External agent violated the wire protocol (framing, seq, version)."""


class AgentTimeout(EngineError):
    """External agent failed to answer within its timeout_ms."""


class TraceInvalid(EngineError):
    """A returned trace violates the Trace invariants or the harness tools."""


class ReportInvalid(EngineError):
    """A returned evaluation report violates its invariants."""


class HarnessInvalid(EngineError):
    """A harness document failed schema validation."""


class BlueprintInvalid(EngineError):
    """A blueprint document failed schema validation."""


class ResumeMismatch(EngineError):
    """An existing run log diverges from a deterministic replay."""


class TrainTestOverlap(EngineError):
    """A meta-test task id also appears in the blueprint's training provenance."""


class EmptyAggregate(EngineError):
    """An aggregate was requested over an empty collection."""
