from .bootstrap import BootstrapConfig, BootstrapResult, bootstrap_process, bootstrap_state
from .coherent import (
    AmplificationSeries,
    CoherenceFit,
    cz_phase_error_amplification,
    effective_coherence,
    fit_damped_sine,
    simulate_ramsey_decay,
    simulate_t1_decay,
)
from .convergence import qme_convergence, single_mask_stats
from .rb import FitError, RbFit, clifford_errors, clifford_group, p_from_error, rb_fit, simulate_rb_1q
