"""Published confusion counts for the homicide-forecasting comparison.

Only error counts and group totals were published; the remaining cells follow
from the totals:

* training: 30,000 subjects, 322 cases
* validation: 33,190 subjects, 348 cases
* SLRF is the random-forest forecaster; the benchmark is a logistic model
  with a single high-risk call (one false positive, one true positive)
"""

from .evaluation import ConfusionMatrix

TRAINING_N = 30_000
TRAINING_CASES = 322
VALIDATION_N = 33_190
VALIDATION_CASES = 348
POLICY_RATIO = 10.0

SLRF_TRAINING = ConfusionMatrix(tp=TRAINING_CASES - 185, fp=1764, fn=185,
                                tn=TRAINING_N - TRAINING_CASES - 1764)
BENCHMARK_TRAINING = ConfusionMatrix(tp=TRAINING_CASES - 321, fp=1, fn=321,
                                     tn=TRAINING_N - TRAINING_CASES - 1)
SLRF_VALIDATION = ConfusionMatrix(tp=VALIDATION_CASES - 198, fp=2193, fn=198,
                                  tn=VALIDATION_N - VALIDATION_CASES - 2193)

ALL = {
    "slrf_training": SLRF_TRAINING,
    "benchmark_training": BENCHMARK_TRAINING,
    "slrf_validation": SLRF_VALIDATION,
}
