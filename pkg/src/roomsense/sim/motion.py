"""Scatterer motion templates, one per activity.

Each activity is a small set of oscillating point scatterers attached to the
subject center. Oscillation is radial (along the subject-to-radar line), so a
scatterer's range rate is exactly base range rate + A*2*pi*f*cos(...), which
keeps the synthesized doppler analytic. Macro templates move at least one
scatterer by >= 0.10 m (or ride on gross translation for locomotion); micro
templates stay within 0.05 m.

This table is the single editable registry: tweak amplitudes/frequencies/
reflectivities here to reshape the synthetic corpus.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..labels import ActivityLabel

MACRO_MIN_AMPLITUDE = 0.10   # m, at least one scatterer unless locomotion
MICRO_MAX_AMPLITUDE = 0.05   # m, every scatterer


@dataclass(frozen=True)
class Oscillator:
    """One body part: offset from subject center (m), radial oscillation."""

    offset: tuple[float, float]
    amplitude_m: float
    freq_hz: float
    reflectivity: float


@dataclass(frozen=True)
class ActivityMotionModel:
    label: ActivityLabel
    scatterers: tuple[Oscillator, ...]
    locomotion: bool = False   # gross velocity comes from the waypoint path
    freq_jitter: float = 0.15  # per-instance relative frequency spread


def _osc(dx, dy, amp, freq, refl) -> Oscillator:
    return Oscillator(offset=(dx, dy), amplitude_m=amp, freq_hz=freq, reflectivity=refl)


MOTION_TEMPLATES: dict[ActivityLabel, ActivityMotionModel] = {
    # -- macro ---------------------------------------------------------------
    # Each frame integrates ~30 ms, so a limb's in-frame doppler sweep is
    # A*w^2*T (w = 2*pi*f): slow movers render as sharp dots that glide
    # between the five stacked frames, fast movers smear into streaks or
    # whole columns. Classes are told apart by which dots stay put across
    # frames, streak length, dot count and range travel, never by absolute
    # doppler position (the classifier pools that away).
    ActivityLabel.WALKING: ActivityMotionModel(
        ActivityLabel.WALKING, locomotion=True, scatterers=(
            _osc(0.00, 0.00, 0.000, 0.00, 1.00),   # torso, pure translation
            _osc(0.15, 0.10, 0.25, 1.60, 0.40),    # legs: short faint streaks
            _osc(-0.15, -0.10, 0.22, 1.75, 0.35),
        )),
    ActivityLabel.RUNNING: ActivityMotionModel(
        ActivityLabel.RUNNING, locomotion=True, scatterers=(
            _osc(0.00, 0.00, 0.000, 0.00, 1.00),
            _osc(0.15, 0.10, 0.36, 2.90, 0.85),    # legs smear whole columns
            _osc(-0.15, -0.10, 0.34, 3.10, 0.80),
        )),
    # jumping is airborne: no scatterer holds still, so unlike every other
    # class there is no dot that repeats across the stack
    ActivityLabel.JUMPING: ActivityMotionModel(
        ActivityLabel.JUMPING, scatterers=(
            _osc(0.00, 0.00, 0.30, 2.20, 1.00),
            _osc(0.20, 0.00, 0.35, 2.20, 0.50),
            _osc(-0.20, 0.00, 0.35, 2.20, 0.50),
        )),
    ActivityLabel.CLAPPING: ActivityMotionModel(
        ActivityLabel.CLAPPING, scatterers=(
            _osc(0.00, 0.00, 0.02, 0.40, 1.00),    # still torso
            _osc(0.25, 0.10, 0.16, 2.80, 0.35),    # two 12 bin hand streaks
            _osc(-0.25, -0.10, 0.16, 2.80, 0.35),
        )),
    # lunges/squats: planted feet add a second stationary dot while the
    # bright torso glides slowly along a range/doppler ellipse; lunges sweep
    # twice the range of squats at nonoverlapping tempos (0.35 vs 0.62 Hz)
    ActivityLabel.LUNGES: ActivityMotionModel(
        ActivityLabel.LUNGES, scatterers=(
            _osc(0.00, -0.10, 0.02, 0.30, 0.55),   # planted rear foot
            _osc(0.00, 0.00, 0.38, 0.35, 1.00),    # torso, +-10 range bins
            _osc(0.25, 0.10, 0.20, 0.35, 0.35),    # front knee
        )),
    ActivityLabel.SQUATS: ActivityMotionModel(
        ActivityLabel.SQUATS, scatterers=(
            _osc(0.05, 0.00, 0.02, 0.28, 0.55),    # planted feet
            _osc(0.00, 0.00, 0.20, 0.62, 1.00),    # torso, +-5 range bins
            _osc(0.15, 0.00, 0.12, 0.62, 0.30),    # counterbalancing arms
        )),
    ActivityLabel.WAVING: ActivityMotionModel(
        ActivityLabel.WAVING, scatterers=(
            _osc(0.00, 0.00, 0.015, 0.30, 1.00),
            _osc(0.30, 0.20, 0.26, 2.10, 0.40),    # one 11 bin arm streak
        )),
    ActivityLabel.VACUUM_CLEANING: ActivityMotionModel(
        ActivityLabel.VACUUM_CLEANING, scatterers=(
            _osc(0.00, 0.00, 0.10, 0.35, 1.00),    # swaying torso, no anchor
            _osc(0.40, 0.20, 0.32, 0.85, 0.50),    # arm spirals, +-8 range bins
            _osc(0.20, 0.10, 0.15, 1.10, 0.35),
        )),
    ActivityLabel.FOLDING_CLOTHES: ActivityMotionModel(
        ActivityLabel.FOLDING_CLOTHES, scatterers=(
            _osc(0.00, 0.00, 0.03, 0.50, 1.00),    # still torso
            _osc(0.25, 0.15, 0.24, 1.00, 0.45),    # arms stay sharp dots that
            _osc(-0.10, 0.10, 0.12, 1.30, 0.40),   # glide, unlike walking
        )),
    ActivityLabel.CHANGING_CLOTHES: ActivityMotionModel(
        ActivityLabel.CHANGING_CLOTHES, scatterers=(
            _osc(0.00, 0.00, 0.12, 0.90, 1.00),    # torso wanders +-5 bins
            _osc(0.20, 0.20, 0.30, 1.45, 0.50),    # arm streaks hop around
            _osc(-0.20, 0.10, 0.18, 1.90, 0.45),
        )),
    # -- micro ---------------------------------------------------------------
    # Seated poses, 95 ms frames, 0.01 m/s doppler bins. Fast hands (f >= 4 Hz)
    # sweep their whole velocity range inside one frame and render as solid
    # bands whose width 2*A*w ladders the classes: phone-typing 30, laptop 48
    # (two hands, stepped profile), brushing 62 bins. Slow movers render as
    # sharp dots or short arcs that shift between the two stacked frames:
    # sitting (blob at rest), drinking (bright dot, +-9 bins), talking (arcs,
    # +-12). Eating, guitar and combing mix a near-rest band with far arcs of
    # distinct length and brightness. Limbs of the six classes the coarse
    # profile can spot peak above 0.15 m/s; the quiet three stay under 0.12.
    ActivityLabel.LAPTOP_TYPING: ActivityMotionModel(
        ActivityLabel.LAPTOP_TYPING, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.28, 0.65),    # breathing torso
            # both hands plus a wrist bob at one tempo with independent
            # phases: the union of their sweeps keeps the band solid
            _osc(0.20, 0.05, 0.0118, 4.20, 0.55),
            _osc(0.15, -0.05, 0.0098, 4.20, 0.50),
            _osc(0.18, 0.00, 0.0078, 4.20, 0.50),
        )),
    ActivityLabel.PHONE_TALKING: ActivityMotionModel(
        ActivityLabel.PHONE_TALKING, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.27, 0.65),
            _osc(0.12, 0.05, 0.018, 1.05, 0.55),    # gesturing forearm
        )),
    ActivityLabel.PHONE_TYPING: ActivityMotionModel(
        ActivityLabel.PHONE_TYPING, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.26, 0.65),
            _osc(0.15, 0.00, 0.0052, 4.60, 0.50),   # two thumbs, offset
            _osc(0.13, 0.02, 0.0042, 4.60, 0.45),   # phases: narrow solid band
        )),
    ActivityLabel.SITTING: ActivityMotionModel(
        ActivityLabel.SITTING, scatterers=(
            _osc(0.00, 0.00, 0.005, 0.25, 0.70),
            _osc(0.10, 0.00, 0.004, 0.70, 0.50),    # idle fidget
        )),
    ActivityLabel.PLAYING_GUITAR: ActivityMotionModel(
        ActivityLabel.PLAYING_GUITAR, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.30, 0.60),
            _osc(0.20, 0.10, 0.018, 2.40, 0.75),    # bright wide strum arcs
            _osc(-0.15, 0.05, 0.0037, 3.00, 0.55),  # narrow fret band
        )),
    ActivityLabel.EATING_FOOD: ActivityMotionModel(
        ActivityLabel.EATING_FOOD, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.29, 0.60),
            _osc(0.18, 0.05, 0.050, 0.75, 0.70),    # hand-to-mouth arc
            _osc(0.05, 0.00, 0.006, 2.20, 0.40),    # chewing band at rest
        )),
    ActivityLabel.COMBING_HAIR: ActivityMotionModel(
        ActivityLabel.COMBING_HAIR, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.31, 0.60),
            _osc(0.10, 0.15, 0.045, 1.30, 0.75),    # long bright strokes
        )),
    ActivityLabel.BRUSHING_TEETH: ActivityMotionModel(
        ActivityLabel.BRUSHING_TEETH, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.32, 0.60),
            _osc(0.12, 0.12, 0.0138, 5.20, 0.60),   # brush, hand and forearm
            _osc(0.10, 0.10, 0.0124, 5.20, 0.55),   # share the scrub tempo:
            _osc(0.08, 0.08, 0.0105, 5.20, 0.50),   # widest band of all
        )),
    ActivityLabel.DRINKING_WATER: ActivityMotionModel(
        ActivityLabel.DRINKING_WATER, scatterers=(
            _osc(0.00, 0.00, 0.004, 0.24, 0.60),
            _osc(0.15, 0.08, 0.050, 0.30, 0.70),    # slow lift and lower
            _osc(0.10, 0.10, 0.006, 0.30, 0.35),    # head tips back
        )),
}


@dataclass(frozen=True)
class MotionInstance:
    """A template bound to one subject: per-oscillator phase and jittered freq."""

    model: ActivityMotionModel
    phases: tuple[float, ...]
    freqs: tuple[float, ...]


def instantiate(model: ActivityMotionModel, rng: np.random.Generator) -> MotionInstance:
    n = len(model.scatterers)
    phases = tuple(float(p) for p in rng.uniform(0.0, 2.0 * np.pi, size=n))
    jitter = rng.uniform(-model.freq_jitter, model.freq_jitter, size=n)
    freqs = tuple(float(s.freq_hz * (1.0 + j))
                  for s, j in zip(model.scatterers, jitter))
    return MotionInstance(model=model, phases=phases, freqs=freqs)
