"""Binary-encoded Pauli-string operator algebra with Heisenberg evolution and Lanczos drivers."""

from .core import PauliTerm, parse_term, shift_left, term_commutator, term_product, to_label, translate, weight
from .dynamics import EvolutionTrace, EvolveConfig, evolve_autocorrelation, evolve_two_point, rk4_step
from .krylov import LanczosRun, lanczos, lanczos_verbose
from .operator import (
    Operator,
    TrimPolicy,
    add_noise,
    add_term,
    compress,
    cutoff,
    dagger,
    norm_lanczos,
    op_commutator,
    op_product,
    trace_normalized,
    trace_product_normalized,
    trim,
    truncate_weight,
)
from .symmetric import SymOperator1D, from_operator, sym_commutator, sym_product, to_operator

__version__ = "0.1.0"
