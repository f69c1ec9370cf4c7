from .frontend import (ProcessedFrame, detect_moving, frame_from_arrays,
                       process_frames)
from .metrics import (MetricsReport, Segment, activity_segments,
                      compute_metrics, localization_mae,
                      map_tracks_to_subjects)
from .orchestrator import Orchestrator, SenseTarget
from .runner import RunResult, run_live, run_replay

__all__ = [
    "ProcessedFrame", "detect_moving", "frame_from_arrays", "process_frames",
    "MetricsReport", "Segment", "activity_segments", "compute_metrics",
    "localization_mae", "map_tracks_to_subjects", "Orchestrator",
    "SenseTarget", "RunResult", "run_live", "run_replay",
]
