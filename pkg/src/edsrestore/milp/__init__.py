from .builder import (FAMILY_ORDER, CcpSets, FictitiousNetwork, MilpConfig, build_model, ccp_sets,
                      es_reactive_rows, flow_limits, radiality_rows, vname)
from .instance import BINARY, CONTINUOUS, MilpInstance, Row, Var
from .pwl import breakpoints, max_error, pwl_square, pwl_value, sampled_gap
from .schedule import Schedule, entity_key
from .seed import integer_fields, observed_state, publish_fields, view_from_state
from .verify import Tolerances, VerificationReport, Violation, replay_soc, verify_schedule

__all__ = [
    "BINARY", "CONTINUOUS", "FAMILY_ORDER", "CcpSets", "FictitiousNetwork", "MilpConfig",
    "MilpInstance", "Row", "Schedule", "Tolerances", "Var", "VerificationReport", "Violation",
    "breakpoints", "build_model", "ccp_sets", "entity_key", "es_reactive_rows", "flow_limits",
    "integer_fields", "max_error", "observed_state", "publish_fields", "pwl_square", "pwl_value",
    "radiality_rows", "replay_soc", "sampled_gap", "vname", "verify_schedule", "view_from_state",
]
