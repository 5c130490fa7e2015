"""
Module with the two training stages.

Stage one trains the navigation network with synchronous advantage actor-critic: every update,
each worker unrolls up to unroll_length steps of its own episode with the shared parameters, the
workers' losses are summed on one tape and a single Adam step is applied. Deadlock steps (repeated
observations) additionally carry the expert's cross-entropy. The parameters that score best on the
validation split are kept.

Stage two freezes that network and trains the TPN on the expert actions at deadlocks.
"""

# local imports
from src.diffcore import optim
from src.diffcore import parameters as prm
from src.diffcore import tensor as td
from src.errors import errors as err
from src.gridworld.environment import Episode, EpisodeConfig, reset
from src.gridworld.expert import expert_action
from src.gridworld.sensor import SensorConfig, render_observation
from src.harness.agents import NavigationAgent
from src.harness.checkpoint import Checkpoint
from src.harness.evaluation import evaluate_agent, model_from_checkpoint
from src.navpolicy import losses as lss
from src.navpolicy import network as net
from src.tpn import tpn
from src.utils import validate as val
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass, asdict
import threading
import numpy as np

logger = get_logger(__name__)

# episodes whose deadlocks form the fixed set the TPN loss is measured on
MONITOR_EPISODES = 8
# reset redraws on other scenes before a worker gives up
WORKER_RESET_ATTEMPTS = 20

@dataclass
class TrainConfig():
    stage: str = 'nav'
    episodes: int = 50_000
    workers: int = 12
    seed: int = 0
    learning_rate: float = 1e-4
    gamma: float = lss.GAMMA
    entropy_beta: float = lss.ENTROPY_BETA
    value_coef: float = lss.VALUE_COEF
    unroll_length: int = lss.UNROLL_LENGTH
    ablation: str = 'none'
    il_persist: str = 'until-escape'
    eval_interval: int = 1000
    val_episodes_per_scene: int = 5

    def __post_init__(self):
        if self.stage not in ('nav', 'tpn'):
            raise err.InvalidAttribute(f"Unknown training stage '{self.stage}'.", 'stage')
        for name in ('episodes', 'workers', 'unroll_length', 'eval_interval', 'val_episodes_per_scene'):
            if getattr(self, name) < 1:
                raise err.InvalidAttribute(f"{name} must be at least 1, got {getattr(self, name)}.", name)
        if not val.learning_rate(self.learning_rate):
            raise err.InvalidAttribute(f"Learning rate {self.learning_rate} is outside (0, 1).", 'learning_rate')
        if not val.discount(self.gamma):
            raise err.InvalidAttribute(f"Discount {self.gamma} is outside [0, 1].", 'gamma')
        if not val.ablation(self.ablation):
            raise err.InvalidAttribute(f"Unknown ablation '{self.ablation}'.", 'ablation')
        if not val.il_persist(self.il_persist):
            raise err.InvalidAttribute(f"Unknown IL persistence '{self.il_persist}'.", 'il_persist')

    @property
    def use_org(self) -> bool:
        return self.ablation != 'no-org'

    @property
    def use_il(self) -> bool:
        return self.ablation != 'no-il'

    @property
    def il_all(self) -> bool:
        return self.ablation == 'il-all'

    def to_dict(self) -> dict:
        return asdict(self)

def config_echo(config:TrainConfig, episode:EpisodeConfig, sensor:SensorConfig, deadlock:tpn.DeadlockConfig) -> dict:
    return {'train': config.to_dict(), 'episode': asdict(episode), 'sensor': asdict(sensor),
            'deadlock': asdict(deadlock), 'use_org': config.use_org}

class RolloutWorker():
    """
    One episode stream. Holds the episode, the recurrent state between unrolls and the observation log
    used to flag deadlocks.
    """
    def __init__(self, index:int, scenes:list, config:TrainConfig, episode_config:EpisodeConfig,
                 sensor:SensorConfig, deadlock:tpn.DeadlockConfig):
        self.index = index
        self.scenes = scenes
        self.config = config
        self.episode_config = episode_config
        self.sensor = sensor
        self.deadlock = deadlock
        self.rng = np.random.default_rng([config.seed, index])
        self.expert_calls = 0
        self._new_episode()

    def _new_episode(self):
        for _ in range(WORKER_RESET_ATTEMPTS):
            scene = self.scenes[int(self.rng.integers(len(self.scenes)))]
            episode_seed = int(self.rng.integers(2**31))
            try:
                start, target = reset(scene, episode_seed, self.episode_config, self.sensor)
            except err.PlanningError as perr:
                logger.warning(f"Worker {self.index} skipped scene '{scene.scene_id}': {perr.message}")
                continue
            self.episode = Episode(scene=scene, target=target, state=start, config=self.episode_config,
                                   sensor=self.sensor)
            self.noise_seed = episode_seed
            self.memory = tpn.ExternalMemory()
            self.hidden = np.zeros_like(net.initial_hidden().data)
            self.prev_action = None
            self.repeating = False
            self.observation = render_observation(scene, start, target, self.noise_seed, self.sensor)
            return
        raise err.PlanningError(f"Worker {self.index} found no usable episode in {WORKER_RESET_ATTEMPTS} draws.", '', -1)

    def _supervise(self, repeat:bool) -> bool:
        if self.config.il_all:
            return True
        if not self.config.use_il or not repeat:
            return False
        # 'onset' only flags the first step of a run of repeated observations
        return self.config.il_persist == 'until-escape' or not self.repeating

    def unroll(self, model:net.NavigationModel) -> tuple:
        """
        Steps the episode up to unroll_length times on the active tape.
        Returns (LossBreakdown, finished episodes as (success, length)).
        """
        episode = self.episode
        buffer = lss.TrajectoryBuffer(self.config.unroll_length)
        hidden = td.constant(self.hidden)
        finished = []
        while not buffer.full:
            output, _ = model.forward(self.observation, episode.target, self.prev_action, hidden)
            vision = self.observation.fingerprint()
            repeat = tpn.detect_deadlock(self.memory, vision, self.deadlock.threshold, self.deadlock.min_revisits)
            flag = self._supervise(repeat)
            self.repeating = repeat
            self.memory.append(vision)
            expert = None
            if flag:
                expert = int(expert_action(episode.scene, episode.state, episode.target, episode.config, episode.sensor))
                self.expert_calls += 1
            action = net.select_action(output.distribution, 'train', self.rng)
            result = episode.step(action)
            buffer.append(lss.StepRecord(output.distribution, output.value, action, result.reward, flag, expert))
            hidden, self.prev_action = output.next_hidden, action
            if result.done:
                finished.append((episode.success, episode.steps))
                break
            self.observation = render_observation(episode.scene, episode.state, episode.target, self.noise_seed,
                                                  self.sensor)
        bootstrap = 0.0
        if not episode.done:
            with td.no_tape():
                bootstrap = model.forward(self.observation, episode.target, self.prev_action, hidden)[0].value.item()
        nav = lss.a3c_loss(buffer, self.config.gamma, self.config.entropy_beta, self.config.value_coef, bootstrap)
        loss = lss.total_loss(nav, lss.buffer_il_loss(buffer))
        self.hidden = hidden.data.copy()
        if episode.done:
            self._new_episode()
        return loss, finished

def _validate(model, val_scenes, config, episode_config, sensor, deadlock) -> float:
    agent = NavigationAgent(model, deadlock=deadlock, seed=config.seed)
    report, _, _ = evaluate_agent(agent, val_scenes, config.val_episodes_per_scene, config.seed + 1,
                                  episode_config, sensor, deadlock)
    return report.success_rate

def train_navigation(config:TrainConfig, train_scenes:list, val_scenes:list=None,
                     episode_config:EpisodeConfig=EpisodeConfig(), sensor:SensorConfig=SensorConfig(),
                     deadlock:tpn.DeadlockConfig=tpn.DeadlockConfig(), stop_event:threading.Event=None) -> Checkpoint:
    """
    Stage one. Returns a checkpoint with the best-validation parameters (the last ones without a
    validation split) and the per-update loss history.
    """
    if not train_scenes:
        raise err.EmptyInputError("Navigation training needs at least one training scene.")
    stop_event = stop_event or threading.Event()
    model = net.NavigationModel.create(config.seed, config.use_org)
    state = optim.AdamState(learning_rate=config.learning_rate)
    workers = [RolloutWorker(i, train_scenes, config, episode_config, sensor, deadlock) for i in range(config.workers)]
    history = {'loss': [], 'L_nav': [], 'L_il': [], 'train_success': [], 'validation': []}
    episodes, next_eval = 0, config.eval_interval
    best_success, best_params = -1.0, model.snapshot()
    logger.info(f"Started navigation training: {config.episodes} episodes, {config.workers} workers, "
                f"ablation '{config.ablation}'.")
    while episodes < config.episodes and not stop_event.is_set():
        prm.zero_grad(model.params)
        with td.Tape() as tape:
            outcomes = [worker.unroll(model) for worker in workers]
            total = outcomes[0][0].total
            for loss, _ in outcomes[1:]:
                total = total + loss.total
        tape.backward(total)
        optim.adam_step(model.params, prm.gradients(model.params), state)
        history['loss'].append(total.item())
        history['L_nav'].append(sum(loss.nav.item() for loss, _ in outcomes))
        history['L_il'].append(sum(loss.il.item() for loss, _ in outcomes))
        for _, finished in outcomes:
            for success, _ in finished:
                history['train_success'].append(int(success))
                episodes += 1
        if val_scenes and episodes >= next_eval:
            next_eval += config.eval_interval
            success = _validate(model, val_scenes, config, episode_config, sensor, deadlock)
            history['validation'].append([episodes, success])
            logger.info(f"Validation after {episodes} episodes: success {success:.3f} (best {max(best_success, 0):.3f}).")
            if success > best_success:
                best_success, best_params = success, model.snapshot()
    if stop_event.is_set():
        logger.info(f"Navigation training stopped by request after {episodes} episodes.")
    if val_scenes:
        success = _validate(model, val_scenes, config, episode_config, sensor, deadlock)
        history['validation'].append([episodes, success])
        if success > best_success:
            best_success, best_params = success, model.snapshot()
    else:
        best_params = model.snapshot()
    history['expert_calls'] = sum(worker.expert_calls for worker in workers)
    logger.info(f"Finished navigation training after {episodes} episodes and {len(history['loss'])} updates.")
    return Checkpoint(config=config_echo(config, episode_config, sensor, deadlock), nav=best_params, tpn=None,
                      stage='nav', episodes=episodes,
                      rng_states={f'worker{w.index}': w.rng.bit_generator.state for w in workers},
                      history=history)

def train_tpn(config:TrainConfig, nav_checkpoint:Checkpoint, train_scenes:list,
              episode_config:EpisodeConfig=EpisodeConfig(), sensor:SensorConfig=SensorConfig(),
              deadlock:tpn.DeadlockConfig=tpn.DeadlockConfig(), stop_event:threading.Event=None) -> Checkpoint:
    """
    Stage two. The navigation parameters are loaded frozen and returned unchanged alongside the TPN.
    """
    if not train_scenes:
        raise err.EmptyInputError("TPN training needs at least one training scene.")
    stop_event = stop_event or threading.Event()
    model = model_from_checkpoint(nav_checkpoint)
    frozen = model.snapshot()
    tpn_params = tpn.init_tpn_parameters(config.seed)
    state = optim.AdamState(learning_rate=config.learning_rate)
    rng = np.random.default_rng([config.seed, 2])
    monitor_seeds = [int(s) for s in rng.integers(2**31, size=MONITOR_EPISODES)]
    monitor_scenes = [train_scenes[i % len(train_scenes)] for i in range(MONITOR_EPISODES)]
    monitor = tpn.deadlock_dataset(model, monitor_scenes, monitor_seeds, episode_config, sensor, deadlock)
    history = {'loss': [], 'updates': 0, 'deadlock_set_size': len(monitor)}
    if monitor:
        history['deadlock_ce_start'] = tpn.dataset_loss(monitor, tpn_params)
    logger.info(f"Started TPN training: {config.episodes} episodes with the navigation network frozen.")
    episodes = 0
    while episodes < config.episodes and not stop_event.is_set():
        scene = train_scenes[int(rng.integers(len(train_scenes)))]
        episode_seed = int(rng.integers(2**31))
        try:
            report = tpn.train_tpn_step(model, scene, episode_seed, tpn_params, state, episode_config, sensor,
                                        deadlock, noise_seed=episode_seed)
        except err.PlanningError as perr:
            logger.warning(f"Skipped an unreachable TPN episode in '{scene.scene_id}': {perr.message}")
            continue
        episodes += 1
        history['updates'] += report.updates
        if report.trained:
            history['loss'].append(report.loss)
    if history['updates'] == 0:
        logger.warning(f"No deadlock occurred in {episodes} TPN episodes; the TPN parameters are untrained.")
    if monitor:
        history['deadlock_ce_end'] = tpn.dataset_loss(monitor, tpn_params)
    if not prm.bit_equal(model.params, frozen):
        raise err.NumericError("The navigation parameters changed during TPN training.", 'nav')
    logger.info(f"Finished TPN training after {episodes} episodes and {history['updates']} updates.")
    echo = dict(nav_checkpoint.config)
    echo['tpn_train'] = config.to_dict()
    return Checkpoint(config=echo, nav=frozen, tpn=prm.snapshot(tpn_params), stage='tpn',
                      episodes=nav_checkpoint.episodes, rng_states=dict(nav_checkpoint.rng_states, tpn=rng.bit_generator.state),
                      history=dict(nav_checkpoint.history, tpn=history))
