"""Activity vocabulary and the coarse scale classes the pipeline switches on."""
from __future__ import annotations

from enum import Enum, IntEnum


class ActivityLabel(Enum):
    # macro scale: gross limb/torso displacement
    WALKING = "walking"
    RUNNING = "running"
    JUMPING = "jumping"
    CLAPPING = "clapping"
    LUNGES = "lunges"
    SQUATS = "squats"
    WAVING = "waving"
    VACUUM_CLEANING = "vacuum-cleaning"
    FOLDING_CLOTHES = "folding-clothes"
    CHANGING_CLOTHES = "changing-clothes"
    # micro scale: centimetre-level motion
    LAPTOP_TYPING = "laptop-typing"
    PHONE_TALKING = "phone-talking"
    PHONE_TYPING = "phone-typing"
    SITTING = "sitting"
    PLAYING_GUITAR = "playing-guitar"
    EATING_FOOD = "eating-food"
    COMBING_HAIR = "combing-hair"
    BRUSHING_TEETH = "brushing-teeth"
    DRINKING_WATER = "drinking-water"


MACRO_LABELS: tuple[ActivityLabel, ...] = (
    ActivityLabel.WALKING,
    ActivityLabel.RUNNING,
    ActivityLabel.JUMPING,
    ActivityLabel.CLAPPING,
    ActivityLabel.LUNGES,
    ActivityLabel.SQUATS,
    ActivityLabel.WAVING,
    ActivityLabel.VACUUM_CLEANING,
    ActivityLabel.FOLDING_CLOTHES,
    ActivityLabel.CHANGING_CLOTHES,
)

MICRO_LABELS: tuple[ActivityLabel, ...] = (
    ActivityLabel.LAPTOP_TYPING,
    ActivityLabel.PHONE_TALKING,
    ActivityLabel.PHONE_TYPING,
    ActivityLabel.SITTING,
    ActivityLabel.PLAYING_GUITAR,
    ActivityLabel.EATING_FOOD,
    ActivityLabel.COMBING_HAIR,
    ActivityLabel.BRUSHING_TEETH,
    ActivityLabel.DRINKING_WATER,
)

ALL_LABELS: tuple[ActivityLabel, ...] = MACRO_LABELS + MICRO_LABELS

# stable wire codes (frame logs, dataset sidecars)
LABEL_CODES = {label: i for i, label in enumerate(ALL_LABELS)}
LABELS_BY_CODE = {i: label for label, i in LABEL_CODES.items()}


class ScaleClass(IntEnum):
    """What kind of sensing a subject currently needs.

    Tie-breaking in the scale classifier relies on this numeric order.
    """

    TRACK_SENSE = 0
    MACRO = 1
    MICRO = 2


def scale_of(label: ActivityLabel) -> ScaleClass:
    """Ground-truth scale for a label. Locomotion is tracked, not classified."""
    if label in (ActivityLabel.WALKING, ActivityLabel.RUNNING):
        return ScaleClass.TRACK_SENSE
    if label in MACRO_LABELS:
        return ScaleClass.MACRO
    return ScaleClass.MICRO
