"""Zero-shot evaluation over new compositions, sizes and robots."""

from capteamcli.evaluation.protocol import (
    EPISODE_COLUMNS,
    EXTENDED_TEAM_SIZES,
    EpisodeMetrics,
    EvalAxis,
    EvalProtocol,
    MetricsReport,
    UnsupportedVariantError,
)
from capteamcli.evaluation.runner import (
    EvalSetting,
    build_settings,
    check_variant_supports,
    evaluate,
    run_episode,
    run_protocol,
)
from capteamcli.evaluation.samplers import (
    HSN_RADIUS_BINS,
    bin_and_build_hsn_pool,
    sample_composition_teams,
    sample_new_robot_teams,
)

__all__ = [
    "EPISODE_COLUMNS",
    "EXTENDED_TEAM_SIZES",
    "EpisodeMetrics",
    "EvalAxis",
    "EvalProtocol",
    "EvalSetting",
    "HSN_RADIUS_BINS",
    "MetricsReport",
    "UnsupportedVariantError",
    "bin_and_build_hsn_pool",
    "build_settings",
    "check_variant_supports",
    "evaluate",
    "run_episode",
    "run_protocol",
    "sample_composition_teams",
    "sample_new_robot_teams",
]
