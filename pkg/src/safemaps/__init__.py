"""Safety functions, safe sets and partially controlled orbits for chaotic
maps under bounded disturbance."""

from ._version import __version__
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .control_sim import (ControlledOrbit, control_step, escape_census,
                          run_controlled, run_uncontrolled)
from .disturbance import DisturbanceModel, build_sample_set, draw_disturbance
from .dynamics import (GridRegion, MapSystem, escapes, henon_apply, henon_map,
                       index_to_point, lozi_apply, lozi_map, map_from_name,
                       point_to_index, tent_apply, tent_map)
from .experiment import run_experiment, run_sweep, summarize_outputs
from .safe_sets import (NoSafeSetError, SafeSet, asymptotic_safe_set,
                        count_components, extract_safe_set,
                        membership_threshold, sculpt_safe_set)
from .solver import (ImageTable, SafetyFunction, compute_safety_function,
                     image_table, pruned_inner_min, set_workers, update_sweep)

__all__ = [
    "__version__",
    "ConfigError", "ExperimentConfig", "config_from_dict", "load_config",
    "ControlledOrbit", "control_step", "escape_census", "run_controlled",
    "run_uncontrolled",
    "DisturbanceModel", "build_sample_set", "draw_disturbance",
    "GridRegion", "MapSystem", "escapes", "henon_apply", "henon_map",
    "index_to_point", "lozi_apply", "lozi_map", "map_from_name",
    "point_to_index", "tent_apply", "tent_map",
    "run_experiment", "run_sweep", "summarize_outputs",
    "NoSafeSetError", "SafeSet", "asymptotic_safe_set", "count_components",
    "extract_safe_set", "membership_threshold", "sculpt_safe_set",
    "ImageTable", "SafetyFunction", "compute_safety_function", "image_table",
    "pruned_inner_min", "set_workers", "update_sweep",
]
