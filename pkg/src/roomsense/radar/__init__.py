from .config import (C_LIGHT, Profile, RadarConfig, localization_profile,
                     macro_profile, micro_profile, profile_config)
from .frames import ChirpFrame, RangeDopplerMap
from .dsp import (beat_frequency, doppler_bin_of_velocity, doppler_fft,
                  doppler_spectrum, hann_periodic, range_fft, range_of_bin,
                  range_profiles, rd_cube, rd_map_from_frame,
                  velocity_of_doppler_bin)
from .cfar import CfarParams, Detection, cfar_detect
from .pointcloud import CloudPoint, angle_spectrum, to_pointcloud

__all__ = [
    "C_LIGHT", "Profile", "RadarConfig", "localization_profile", "macro_profile",
    "micro_profile", "profile_config", "ChirpFrame", "RangeDopplerMap",
    "beat_frequency", "doppler_bin_of_velocity", "doppler_fft", "doppler_spectrum",
    "hann_periodic", "range_fft", "range_of_bin", "range_profiles", "rd_cube",
    "rd_map_from_frame", "velocity_of_doppler_bin", "CfarParams", "Detection",
    "cfar_detect", "CloudPoint", "angle_spectrum", "to_pointcloud",
]
