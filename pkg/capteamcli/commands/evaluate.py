import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from capteamcli.config import ExperimentConfig, parse_config, write_resolved_config
from capteamcli.envs import OBS_LAYOUT_VERSION, EnvKind, obs_dim_for
from capteamcli.evaluation import MetricsReport, run_protocol
from capteamcli.manifest import RunManifest
from capteamcli.nets import Policy, PolicyVariant
from capteamcli.tensorcore import (
    Checkpoint,
    CheckpointError,
    RngStream,
    Tensor,
)
from capteamcli.utils import colors
from capteamcli.utils.io import write_json_atomic

logger = logging.getLogger(__name__)

SUMMARY_NAME = "summary.json"
REQUIRED_METADATA = ("env_kind", "variant", "obs_layout", "obs_dim", "capability_dim")


@dataclass
class EvalRun:
    reports: List[MetricsReport]
    manifest: RunManifest
    out_dir: Path


def _metadata(checkpoint: Checkpoint, key: str) -> str:
    try:
        return checkpoint.metadata[key]
    except KeyError:
        raise CheckpointError(f"checkpoint metadata is missing {key!r}") from None


def restore_policy(
    checkpoint: Checkpoint,
    env_kind: Optional[Union[str, EnvKind]] = None,
    variant: Optional[Union[str, PolicyVariant]] = None,
) -> Tuple[Policy, Dict[str, Tensor]]:
    """Rebuild the policy a checkpoint was trained with.

    Refuses critic checkpoints, other observation layouts and any requested
    environment or variant that differs from what the checkpoint recorded.
    """
    for key in REQUIRED_METADATA:
        _metadata(checkpoint, key)
    role = checkpoint.metadata.get("role", "policy")
    if role != "policy":
        raise CheckpointError(f"expected a policy checkpoint, got a {role} checkpoint")
    layout = checkpoint.metadata["obs_layout"]
    if layout != OBS_LAYOUT_VERSION:
        raise CheckpointError(
            f"checkpoint uses observation layout {layout}, "
            f"this build expects {OBS_LAYOUT_VERSION}"
        )
    saved_kind = EnvKind.parse(checkpoint.metadata["env_kind"])
    saved_variant = PolicyVariant.parse(checkpoint.metadata["variant"])
    if env_kind is not None and EnvKind.parse(env_kind) is not saved_kind:
        raise CheckpointError(
            f"checkpoint was trained on {saved_kind.value}, not {EnvKind.parse(env_kind).value}"
        )
    if variant is not None and PolicyVariant.parse(variant) is not saved_variant:
        raise CheckpointError(
            f"checkpoint holds a {saved_variant.value} policy, "
            f"not {PolicyVariant.parse(variant).value}"
        )
    obs_dim = int(checkpoint.metadata["obs_dim"])
    capability_dim = int(checkpoint.metadata["capability_dim"])
    if obs_dim != obs_dim_for(saved_kind) or capability_dim != saved_kind.capability_dim:
        raise CheckpointError(
            f"checkpoint dimensions obs={obs_dim} capability={capability_dim} do not "
            f"match the {saved_kind.value} environment"
        )
    policy = Policy(saved_variant, obs_dim, capability_dim)
    checkpoint.validate_against(policy.init_params(RngStream(0, ("layout",))))
    return policy, checkpoint.params


def resolve_eval_config(
    checkpoint: Checkpoint,
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    env_kind: Optional[str] = None,
    seed: Optional[int] = None,
    out_dir: Optional[Path] = None,
    axis: Optional[str] = None,
    sizes: Optional[Sequence[int]] = None,
) -> ExperimentConfig:
    """The checkpoint decides env and variant unless a flag asks otherwise."""
    saved_kind = _metadata(checkpoint, "env_kind")
    if env_kind is not None and EnvKind.parse(env_kind).value != saved_kind:
        raise CheckpointError(
            f"checkpoint was trained on {saved_kind}, not {EnvKind.parse(env_kind).value}"
        )
    return parse_config(
        config_path,
        overrides,
        flags={
            "env_kind": saved_kind,
            "variant": _metadata(checkpoint, "variant"),
            "seed": seed,
            "out_dir": None if out_dir is None else str(out_dir),
            "eval.axis": axis,
            "eval.team_sizes": None if sizes is None else list(sizes),
        },
    )


def run_eval(checkpoint: Checkpoint, config: ExperimentConfig) -> EvalRun:
    policy, params = restore_policy(checkpoint, config.env_kind, config.variant)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest.start("eval", config)
    manifest.add_file(write_resolved_config(config, out_dir), out_dir)

    reports = run_protocol(
        policy,
        params,
        config.env_kind,
        config.eval,
        RngStream(config.seed, ("eval",)),
        config.env,
    )
    summaries = []
    for report in reports:
        path = out_dir / f"eval-{report.setting}.csv"
        report.to_csv(path)
        manifest.add_file(path, out_dir)
        summaries.append(report.summary())
    summary_path = write_json_atomic(
        out_dir / SUMMARY_NAME,
        {
            "env": config.env_kind.value,
            "variant": config.variant.value,
            "axis": config.eval.axis.value,
            "seed": config.seed,
            "settings": summaries,
        },
    )
    manifest.add_file(summary_path, out_dir)
    manifest.write(out_dir)
    return EvalRun(reports, manifest, out_dir)


def summarize(run: EvalRun) -> List[str]:
    lines = []
    for report in run.reports:
        stats = report.summary()["avg_return"] or {"mean": float("nan"), "std": 0.0}
        lines.append(
            f"{colors.c(report.setting, 'cyan', bright=True)}: "
            f"{report.num_episodes} episodes, return "
            f"{colors.ok(format(stats['mean'], '.4f'))} +/- {stats['std']:.4f}"
        )
    lines.append(f"Results written to {run.out_dir}")
    return lines
