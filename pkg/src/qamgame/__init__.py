"""Energy-efficient M-QAM power control for CDMA users with delay QoS."""

from .delay_qos import (
    LinkOperatingPoint,
    TrafficQoS,
    avg_delay,
    feasible_at_bandwidth,
    omega_star,
    required_efficiency,
    service_rate,
    simulate_mg1,
    sir_floor,
)
from .errors import (
    BracketError,
    ConfigurationError,
    ConvergenceError,
    DelayInfeasibleError,
    DomainError,
    InfeasibleTargetError,
    InstabilityError,
    QamGameError,
    SystemInfeasibleError,
)
from .game import (
    EquilibriumResult,
    NetworkEnv,
    Policy,
    Strategy,
    UserProfile,
    best_response,
    closed_form_powers,
    nash_equilibrium,
    required_power,
    select_constellation,
    user_size,
)
from .modulation import (
    CodingGainModel,
    ModulationScheme,
    alpha,
    beta,
    efficiency,
    efficiency_derivative,
    efficiency_inverse,
    optimal_sir,
    packet_success,
    peak_utility_coefficient,
)
from .numerics import RootTolerance, expand_bracket, find_root, gaussian_pdf, q_function

__version__ = "0.1.0"
