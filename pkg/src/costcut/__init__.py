"""Cost-based cutpoints for binary classifiers, logistic regression with
traffic-light encoding and stepwise AIC selection, and cost audits of
confusion matrices."""

from .decision import (Action, CostPolicy, Decision, HighRisk, LowRisk, classify,
                       classify_all, expected_costs, make_policy)
from .encoding import (DesignMatrix, EncodingPlan, ThresholdSet, build_design, drop_column,
                       interactions, traffic_light)
from .evaluation import (ConfusionMatrix, CostReport, DiagnosticMetrics, baseline_all_negative,
                         baseline_all_positive, break_even_ratio, confusion,
                         cost_saving_vs_all_negative, diagnostic_metrics, evaluate,
                         required_lr_plus, sweep, total_cost)
from .glm import (FitOptions, LogisticFit, aic, fit, log_likelihood, log_odds, probability,
                  wald_p_values)
from .selection import SelectionConfig, SelectionTrace, exhaustive_best_aic, stepwise
from .tabular import ColumnSpec, Dataset, SplitSpec, load_table, split, synth_rare_event

__version__ = "0.1.0"
