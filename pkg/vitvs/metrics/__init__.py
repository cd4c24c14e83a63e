from vitvs.metrics.scores import (  # noqa
    ConfusionCounts,
    confusion,
    dice,
    f1,
    iou,
    precision,
    recall,
)
from vitvs.metrics.evaluation import MetricSummary, SampleScores, evaluate_dataset  # noqa
from vitvs.metrics.predictors import (  # noqa
    ConstantPredictor,
    ModelPredictor,
    OraclePredictor,
    Predictor,
)
from vitvs.metrics.report import COLUMNS, format_table, write_csv  # noqa
