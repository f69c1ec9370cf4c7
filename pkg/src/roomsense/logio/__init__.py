from .dataset import (activity_scenario, cnn_windows, load_cnn_dataset,
                      load_rf_dataset, make_cnn_corpus, make_rf_corpus,
                      write_cnn_dataset, write_rf_dataset)
from .exports import std_heatmap, write_csv, write_metrics_json
from .framelog import (MAGIC, FrameLogWriter, GroundTruthRecord,
                       InferenceLogRecord, LogRecord, PointcloudRecord,
                       RangeDopplerRecord, StateTransitionRecord,
                       read_framelog)

__all__ = [
    "activity_scenario", "cnn_windows", "load_cnn_dataset", "load_rf_dataset",
    "make_cnn_corpus", "make_rf_corpus", "write_cnn_dataset",
    "write_rf_dataset", "std_heatmap", "write_csv", "write_metrics_json",
    "MAGIC", "FrameLogWriter", "GroundTruthRecord", "InferenceLogRecord",
    "LogRecord", "PointcloudRecord", "RangeDopplerRecord",
    "StateTransitionRecord", "read_framelog",
]
