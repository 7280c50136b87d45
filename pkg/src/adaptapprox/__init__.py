"""Budget-adaptive prediction: a cheap gate routes each example either to a
low-cost predictor or to an expensive pre-trained model."""

from .adapt import (
    AdaptConfig,
    AdaptError,
    ObjectiveTrace,
    adapt_gbrt,
    adapt_lin,
    adapt_lstsq,
    full_objective,
    l1_baseline,
    l1_system,
    solve_opt5,
    solve_opt6,
    solve_opt7,
)
from .dataset import (
    Dataset,
    DatasetError,
    ScoreTable,
    SplitSpec,
    gen_synthetic1,
    gen_synthetic2,
    load_dataset,
    load_scores,
    save_dataset,
    save_scores,
    split,
)
from .gating import (
    AdaptiveSystem,
    Evaluation,
    GateAssignment,
    LossTerms,
    OracleGateConfig,
    compute_loss_terms,
    evaluate,
    jensen_gap,
    oracle_gate,
    route,
    solve_opt1,
    system_cost,
    write_report,
)
from .harness import (
    SweepGrid,
    Splits,
    TradeoffPoint,
    export_curve,
    load_curve,
    pareto_frontier,
    pick_budget,
    sweep,
)
from .linear import ConvergenceError, LinearModel, solve_opt2, train_l1_logistic, train_logistic
from .serialize import load_model, load_system, save_model, save_system
from .trees import FeatureUsage, RegressionTree, TreeEnsemble, fit_cart, greedy_miser, predict, train_gbrt

__version__ = "0.1.0"
