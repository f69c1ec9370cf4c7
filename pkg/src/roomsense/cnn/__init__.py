from .layers import (Conv2D, Dense, Dropout, GlobalAvgPool, Layer, ReLU,
                     cross_entropy, he_uniform, same_pad, softmax,
                     softmax_ce_grad)
from .model import (CNN_MAGIC, MACRO_INPUT, MICRO_INPUT, CnnModel, macro_model,
                    micro_model)
from .slicing import (ENERGY_FACTOR, PAD_BINS, HeatmapStack, slice_subject,
                      stack_frames, subject_range_bins)
from .train import Adam, TrainConfig, TrainResult, stratified_split, train_model

__all__ = [
    "Conv2D", "Dense", "Dropout", "GlobalAvgPool", "Layer", "ReLU",
    "cross_entropy", "he_uniform", "same_pad", "softmax", "softmax_ce_grad",
    "CNN_MAGIC", "MACRO_INPUT", "MICRO_INPUT", "CnnModel", "macro_model",
    "micro_model", "ENERGY_FACTOR", "PAD_BINS", "HeatmapStack",
    "slice_subject", "stack_frames", "subject_range_bins", "Adam",
    "TrainConfig", "TrainResult", "stratified_split", "train_model",
]
