from .motion import (MACRO_MIN_AMPLITUDE, MICRO_MAX_AMPLITUDE, MOTION_TEMPLATES,
                     ActivityMotionModel, MotionInstance, Oscillator, instantiate)
from .scenario import (MAX_SUBJECT_SPEED, SCENARIO_HEADER, Clutter, Reflector,
                       Scenario, SubjectScript, dump_scenario, dumps_scenario,
                       load_scenario, loads_scenario, point_in_polygon)
from .synth import (FOV_HALF_ANGLE, GroundTruthEntry, Scatterer, attenuate,
                    ground_truth_at, mirror_paths, motion_instances,
                    scatterers_at, synthesize_frame)

__all__ = [
    "MACRO_MIN_AMPLITUDE", "MICRO_MAX_AMPLITUDE", "MOTION_TEMPLATES",
    "ActivityMotionModel", "MotionInstance", "Oscillator", "instantiate",
    "MAX_SUBJECT_SPEED", "SCENARIO_HEADER", "Clutter", "Reflector", "Scenario",
    "SubjectScript", "dump_scenario", "dumps_scenario", "load_scenario",
    "loads_scenario", "point_in_polygon", "FOV_HALF_ANGLE", "GroundTruthEntry",
    "Scatterer", "attenuate", "ground_truth_at", "mirror_paths",
    "motion_instances", "scatterers_at", "synthesize_frame",
]
