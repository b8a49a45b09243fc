"""Run monitoring for solver and twin-experiment loops.

Provides a lightweight monitor that:
- Tracks the previous status of named checks (picard, finite, regime, ...)
- Records an event only when a status changes (ok -> unconverged, ...)
- Logs the event once instead of on every step

Same pattern as a polling health monitor: the loop reports observations,
the monitor turns state transitions into events.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

from nles import logger


# =============================================================================
# Status Classification
# =============================================================================

# Statuses that count as healthy; anything else is logged as a warning
HEALTHY_STATES = {"ok", "converged", "finite", "tracking", "synchronized", "not_applicable"}


def _get_event_severity(new_state: str) -> int:
    """1 = info for healthy states, 2 = warning otherwise."""
    return 1 if new_state in HEALTHY_STATES else 2


@dataclass(frozen=True)
class RunEvent:
    """A status transition observed during a run."""

    check: str
    old_state: Optional[str]
    new_state: str
    time: float
    step: int
    severity: int
    message: str

    def to_dict(self) -> Dict:
        return asdict(self)


# =============================================================================
# Run Monitor
# =============================================================================


class RunMonitor:
    """Turns per-step status observations into transition events."""

    def __init__(self, name: str) -> None:
        self.name = name
        self._previous_states: Dict[str, str] = {}
        self.events: List[RunEvent] = []

    def observe(self, check: str, state: str, time: float, step: int, detail: str = "") -> Optional[RunEvent]:
        """Record ``state`` for ``check``; returns the event when the state changed.

        The first observation of a healthy state is silent; a first unhealthy
        observation is reported.
        """
        old_state = self._previous_states.get(check)
        self._previous_states[check] = state
        if old_state == state:
            return None
        if old_state is None and state in HEALTHY_STATES:
            return None

        severity = _get_event_severity(state)
        message = f"{check}: {old_state or 'start'} -> {state} at t={time:.6g} (step {step})"
        if detail:
            message = f"{message}; {detail}"
        event = RunEvent(check, old_state, state, float(time), int(step), severity, message)
        self.events.append(event)

        if severity > 1:
            logger.warn(self.name, message)
        else:
            logger.info(self.name, message)
        return event

    def state(self, check: str) -> Optional[str]:
        return self._previous_states.get(check)

    def as_records(self) -> List[Dict]:
        return [e.to_dict() for e in self.events]
