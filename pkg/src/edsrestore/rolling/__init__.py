from .engine import (
    CcpRecord,
    EndCondition,
    MomentRecord,
    ReportRow,
    Timeline,
    apply_schedule,
    run,
)
from .events import EVENT_KINDS, Event, World, apply_event, inject_events, isolated_dg_autostart

__all__ = [
    "EVENT_KINDS", "CcpRecord", "EndCondition", "Event", "MomentRecord", "ReportRow", "Timeline",
    "World", "apply_event", "apply_schedule", "inject_events", "isolated_dg_autostart", "run",
]
