import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping

from capteamcli.config import ExperimentConfig, config_hash, write_resolved_config
from capteamcli.envs import OBS_LAYOUT_VERSION, make_env, make_training_teams
from capteamcli.manifest import RunManifest
from capteamcli.tensorcore import Checkpoint, RngStream, Tensor, save_checkpoint
from capteamcli.training import TrainResult, train
from capteamcli.utils import colors
from capteamcli.utils.version import get_capteam_cli_version

logger = logging.getLogger(__name__)

POLICY_CHECKPOINT = "policy.ckpt"
CRITIC_CHECKPOINT = "critic.ckpt"
TRAIN_LOG_NAME = "train_log.csv"
CHECKPOINT_DIR = "checkpoints"


@dataclass
class TrainRun:
    result: TrainResult
    manifest: RunManifest
    out_dir: Path


def checkpoint_metadata(
    config: ExperimentConfig,
    role: str,
    team_size: int,
    obs_dim: int,
    params: Mapping[str, Tensor],
    env_steps: int,
) -> Dict[str, str]:
    """Everything eval needs to rebuild and vet the network.

    Nothing time-dependent goes in here, so identical runs write identical bytes.
    """
    dtype = next(iter(params.values())).dtype if params else "float32"
    return {
        "role": role,
        "env_kind": config.env_kind.value,
        "variant": config.variant.value,
        "obs_layout": OBS_LAYOUT_VERSION,
        "team_size": str(team_size),
        "obs_dim": str(obs_dim),
        "capability_dim": str(config.env_kind.capability_dim),
        "dtype": str(dtype),
        "env_steps": str(env_steps),
        "seed": str(config.seed),
        "config_hash": config_hash(config),
        "version": get_capteam_cli_version(),
    }


def _write_checkpoints(
    config: ExperimentConfig,
    out_dir: Path,
    params_by_role: Mapping[str, Mapping[str, Tensor]],
    team_size: int,
    obs_dim: int,
    env_steps: int,
    names: Mapping[str, str],
) -> List[Path]:
    written = []
    for role, params in params_by_role.items():
        metadata = checkpoint_metadata(
            config, role, team_size, obs_dim, params, env_steps
        )
        path = save_checkpoint(out_dir / names[role], Checkpoint(metadata, dict(params)))
        logger.debug("Saved %s checkpoint: %s", role, path)
        written.append(path)
    return written


def run_train(config: ExperimentConfig) -> TrainRun:
    """Train on the five fixed teams and write every artifact under ``out_dir``."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest.start("train", config)
    manifest.add_file(write_resolved_config(config, out_dir), out_dir)

    kind = config.env_kind
    teams = make_training_teams(kind)
    team_size = teams[0].size

    def env_factory(team):
        return make_env(kind, team, config.env)

    obs_dim = env_factory(teams[0]).obs_dim

    def on_checkpoint(env_steps: int, learner) -> None:
        stamp = f"{env_steps:012d}"
        paths = _write_checkpoints(
            config,
            out_dir,
            {"policy": learner.policy_params, "critic": learner.critic_params},
            team_size,
            obs_dim,
            env_steps,
            {
                "policy": f"{CHECKPOINT_DIR}/policy-{stamp}.ckpt",
                "critic": f"{CHECKPOINT_DIR}/critic-{stamp}.ckpt",
            },
        )
        for path in paths:
            manifest.add_file(path, out_dir)
        logger.info("Checkpoint at %d env steps", env_steps)

    result = train(
        env_factory,
        kind,
        config.variant,
        teams,
        config.train,
        rng=RngStream(config.seed),
        checkpoint_hook=on_checkpoint,
    )

    for path in _write_checkpoints(
        config,
        out_dir,
        {"policy": result.learner.policy_params, "critic": result.learner.critic_params},
        team_size,
        obs_dim,
        result.env_steps,
        {"policy": POLICY_CHECKPOINT, "critic": CRITIC_CHECKPOINT},
    ):
        manifest.add_file(path, out_dir)
    manifest.add_file(result.log.to_csv(out_dir / TRAIN_LOG_NAME), out_dir)
    manifest.write(out_dir)
    return TrainRun(result, manifest, out_dir)


def summarize(run: TrainRun) -> str:
    result = run.result
    returns = result.episode_returns
    recent = returns[-100:]
    mean_recent = sum(recent) / len(recent) if recent else float("nan")
    return (
        f"{colors.c('Trained', 'cyan', bright=True)} {result.policy.variant.value}: "
        f"{result.env_steps} env steps, {len(result.log)} updates, "
        f"{len(returns)} episodes; mean return (last {len(recent)}) "
        f"{colors.ok(f'{mean_recent:.4f}')}; artifacts in {run.out_dir}"
    )
