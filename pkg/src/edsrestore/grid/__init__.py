from .graphs import RadialityReport, check_islands, connected_components, is_radial_islanding
from .model import (
    ES_Q_TABLE,
    Bus,
    DgUnit,
    EsUnit,
    Feeder,
    Network,
    NetworkState,
    TimeGrid,
    blackout_state,
    feeder_key,
    validate_network,
)

__all__ = [
    "ES_Q_TABLE",
    "Bus",
    "DgUnit",
    "EsUnit",
    "Feeder",
    "Network",
    "NetworkState",
    "RadialityReport",
    "TimeGrid",
    "blackout_state",
    "check_islands",
    "connected_components",
    "feeder_key",
    "is_radial_islanding",
    "validate_network",
]
