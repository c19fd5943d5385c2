from .idp import (
    AgentVector,
    CcpView,
    CommGraph,
    IdpConfig,
    IdpNotConverged,
    IdpRun,
    consensus_step,
    convergence_trace,
    metropolis_weights,
    require_converged,
    run_idp,
    write_trace_csv,
    write_trace_rows,
)

__all__ = [
    "AgentVector",
    "CcpView",
    "CommGraph",
    "IdpConfig",
    "IdpNotConverged",
    "IdpRun",
    "consensus_step",
    "convergence_trace",
    "metropolis_weights",
    "require_converged",
    "run_idp",
    "write_trace_csv",
    "write_trace_rows",
]
