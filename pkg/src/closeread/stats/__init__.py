"""Statistical analyses: log-standardization, varying-intercept logistic
regression, Wald tests, source contrasts, quartile and preference models.
"""

from .formula import Formula, Term, parse_formula
from .glmm import ModelFit, fit_logit_varying_intercepts, predict_probability
from .inference import (ContrastRow, HypothesisResult, linear_hypothesis,
                        source_contrasts)
from .preference import (CROWD_GROUPS, EXPERT_GROUPS, PreferencePair,
                         fit_preference_model, nested_level, per_word_delta)
from .reports import (QuartileReport, StandardizeResult, log_standardize,
                      population_curve, quartile_report)
from .table import ObservationTable

__all__ = [
    "Formula", "Term", "parse_formula",
    "ModelFit", "fit_logit_varying_intercepts", "predict_probability",
    "HypothesisResult", "ContrastRow", "linear_hypothesis", "source_contrasts",
    "PreferencePair", "fit_preference_model", "per_word_delta", "nested_level",
    "EXPERT_GROUPS", "CROWD_GROUPS",
    "StandardizeResult", "QuartileReport", "log_standardize",
    "quartile_report", "population_curve",
    "ObservationTable",
]
