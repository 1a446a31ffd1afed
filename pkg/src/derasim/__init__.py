"""derasim: competitive DER aggregation at desk scale.

Closed-form aggregation schedules and payments, retail-tariff benchmark
surpluses, virtual-storage bid curves, wholesale clearing with locational
marginal prices, network-access benefit functions, and long-run competitive
equilibrium analysis, plus a CLI that reproduces the reference experiments.
"""
from .access import AccessAxis, BenefitBranch, BenefitCurve, BenefitSample, access_bid, benefit_curve, benefit_sample
from .aggregation import (
    AggregationOutcome,
    BenchmarkMode,
    BindingSide,
    CompetitiveConfig,
    Device,
    PoaOutcome,
    aggregate_fleet,
    avg_cost,
    dera_profit,
    optimal_schedule,
    poa_schedule,
    zeta_bar,
    zeta_bar_fleet,
)
from .equilibrium import (
    EquilibriumOutcome,
    EquilibriumParams,
    market_firm_count,
    multi_interval_survivors,
    newton_equilibrium,
    single_interval_equilibrium,
    verify_conditions,
)
from .errors import AssumptionError, ConfigError, ConvergenceError, CurveRangeError, FeasibilityError
from .gab import GabOutcome, gab_outcome, s_no
from .market import (
    ClearingOutcome,
    CurveParticipant,
    DemandBid,
    EquivalenceReport,
    GeneratorOffer,
    ProsumerParticipant,
    SupplyCurve,
    TransmissionNetwork,
    build_supply_curve,
    clear,
    equivalence_report,
    invert_supply,
    kkt_stationarity_residual,
    surplus_split,
)
from .nem import NemOutcome, NemTariff, active_surplus, benchmark_k, clamp_f, nem_bill, nem_surplus, passive_surplus
from .prosumer import (
    UNLIMITED,
    Behavior,
    PoAAccess,
    Prosumer,
    QuadraticUtility,
    inverse_demand,
    inverse_marginal,
    load_population,
    marginal_utility,
    utility_value,
)
from .scenario import (
    ScenarioSet,
    SolarTrace,
    TruncGaussSpec,
    build_scenario_set,
    bundled_trace_path,
    load_trace,
    sample_trunc_gauss,
    scale_trace,
    trunc_gauss_moments,
)

__version__ = "0.1.0"
