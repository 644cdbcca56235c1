"""Classical, no-signalling and NPA-bounded values of local simultaneous state discrimination games."""
from .classical import (
    DeterministicStrategy,
    eval_deterministic,
    optimal_classical_3party_binary,
    optimal_classical_exhaustive,
    optimal_classical_symmetric,
    reduced_deterministic_strategies,
)
from .codes import (
    Code,
    code_min_success,
    code_strategy_value,
    hamming_7_4,
    hamming_ball_code,
    identity_code,
    list_behavior,
    majority_win_prob,
    repetition_code,
    strategy_from_code,
)
from .errors import BudgetError, DomainError, GameFormatError, HypothesisError, ShapeError, UnboundedPolytopeError
from .exponent import (
    bsc_exponent_closed_form,
    exponent_objective,
    finite_n_exponent_table,
    optimize_exponent,
)
from .game import (
    Channel,
    GameTable,
    bsc_channel,
    bsc_game,
    channel_game,
    load_game,
    parallel_repetition,
    save_game,
)
from .lp import LinearProgram, LpSolution, dual, solve_max
from .nosignal import (
    Behavior,
    behavior_from_strategy,
    complement_pairing_behavior,
    eval_behavior,
    hamming_ball_behavior,
    optimal_ns,
    qnd_win_prob,
)
from .npa import MomentSdp, MonomialIndex, build_1mn, jacobi_eigh, solve_sdp
from .polytope import HRep, VRep, enumerate_vertices, filter_vertices, max_gap_3party_binary, ns_polytope_hrep
from .rational import FLOAT, RATIONAL

__version__ = "0.1.0"
