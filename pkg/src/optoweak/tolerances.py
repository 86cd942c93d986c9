"""Central numerical tolerance record.

Every hard-coded tolerance used by the library lives here so that tests and
the verification driver agree on one set of defaults.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # state / operator algebra
    norm_atol: float = 1e-12          # |norm - 1| after normalize()
    hermitian_atol: float = 1e-10     # max |M - M^dag| to set the hermitian flag
    unitary_atol: float = 1e-9        # max |M M^dag - I| to set the unitary flag
    coherent_leakage: float = 1e-10   # default allowed coherent-state leakage
    degenerate_prob: float = 1e-300   # below this a branch is degenerate
    # density matrices
    trace_atol: float = 1e-9
    density_hermitian_atol: float = 1e-10
    positivity_floor: float = -1e-9
    # propagators
    dense_dim_cap: int = 4096         # dense propagator exists only for cross-checks
    propagate_leakage: float = 1e-9   # mirror tail allowed in factored_propagate
    series_term_rtol: float = 1e-14   # Taylor series convergence cut
    series_max_terms: int = 200
    # integration
    step_doubling_atol: float = 1e-8  # trace distance allowed between h and h/2 runs
    # parameter-regime warnings
    weak_disp_warn: float = 0.1       # warn when |phi| exceeds this in the weak op
    small_param_warn: float = 0.1     # warn when |alpha|^2 delta^2 exceeds this
    displacement_warn_ratio: float = 0.25  # warn when |beta|^2 > ratio * cutoff


DEFAULT_TOL = Tolerances()
