"""
Module that runs evaluation episodes and aggregates them into success / SPL reports
"""

# local imports
from src.constants import constants as const
from src.diffcore import parameters as prm
from src.errors import errors as err
from src.gridworld.environment import Episode, EpisodeConfig, reset
from src.gridworld.expert import optimal_length
from src.gridworld.sensor import SensorConfig, render_observation
from src.gridworld.state import AgentState
from src.harness import metrics as mtr
from src.harness.agents import NavigationAgent
from src.navpolicy import network as net
from src.tpn import tpn
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass, field, asdict
import csv
import json
import numpy as np

logger = get_logger(__name__)

@dataclass
class EpisodeTrace():
    scene_id: str
    target: int
    states: list
    actions: list
    success: bool
    deadlock_steps: list = field(default_factory=list)
    attention: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'scene_id': self.scene_id, 'target': const.CATEGORY_NAMES[self.target],
                'states': [[s.x, s.y, s.rotation, s.horizon] for s in self.states],
                'actions': [const.ACTION_NAMES[a] for a in self.actions], 'success': self.success,
                'deadlock_steps': list(self.deadlock_steps), 'attention': self.attention}

@dataclass
class MetricsReport():
    success_rate: float
    spl: float
    success_rate_L5: float
    spl_L5: float
    episodes: int
    long_episodes: int
    per_type: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {'success': self.success_rate, 'spl': self.spl, 'success_L5': self.success_rate_L5,
                'spl_L5': self.spl_L5, 'n': self.episodes, 'n_L5': self.long_episodes, 'per_type': self.per_type}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self) -> str:
        rows = [('ALL', self.success_rate, self.spl, self.episodes),
                ('L>=5', self.success_rate_L5, self.spl_L5, self.long_episodes)]
        rows += [(name, part['success'], part['spl'], part['n']) for name, part in sorted(self.per_type.items())]
        width = max(len(r[0]) for r in rows)
        lines = [f"{'split':<{width}}  {'success':>8}  {'spl':>6}  {'n':>6}"]
        lines += [f"{name:<{width}}  {100 * s:>7.1f}%  {p:>6.3f}  {n:>6}" for name, s, p, n in rows]
        return '\n'.join(lines)

def summarize(results:list, min_length:int=mtr.LONG_EPISODE_LENGTH) -> MetricsReport:
    """
    Success and SPL over all results and over the long split; an empty long split reports 0.
    """
    long_results = mtr.filter_long(results, min_length)
    per_type = {}
    for scene_type in sorted({r.scene_type for r in results if r.scene_type}):
        subset = [r for r in results if r.scene_type == scene_type]
        per_type[scene_type] = {'success': mtr.compute_success_rate(subset), 'spl': mtr.compute_spl(subset),
                                'n': len(subset)}
    return MetricsReport(success_rate=mtr.compute_success_rate(results), spl=mtr.compute_spl(results),
                         success_rate_L5=mtr.compute_success_rate(long_results) if long_results else 0.0,
                         spl_L5=mtr.compute_spl(long_results) if long_results else 0.0,
                         episodes=len(results), long_episodes=len(long_results), per_type=per_type)

def run_episode(agent, scene, episode_seed:int, config:EpisodeConfig=EpisodeConfig(),
                sensor:SensorConfig=SensorConfig(), deadlock:tpn.DeadlockConfig=tpn.DeadlockConfig()) -> tuple:
    """
    One episode of agent from the seeded reset. Returns (EpisodeResult, EpisodeTrace).
    Deadlocks are counted on observation fingerprints, independently of the agent.
    """
    start, target = reset(scene, episode_seed, config, sensor)
    episode = Episode(scene=scene, target=target, state=start, config=config, sensor=sensor)
    agent.begin_episode(episode, episode_seed)
    memory = tpn.ExternalMemory()
    deadlock_steps = []
    try:
        while not episode.done:
            observation = render_observation(scene, episode.state, target, episode_seed, sensor)
            vision = observation.fingerprint()
            if tpn.detect_deadlock(memory, vision, deadlock.threshold, deadlock.min_revisits):
                deadlock_steps.append(episode.steps)
            memory.append(vision)
            episode.step(agent.act(episode, observation))
    finally:
        agent.end_episode(episode)
    result = mtr.EpisodeResult(success=episode.success, length=episode.steps,
                               optimal_length=optimal_length(scene, start, target, config, sensor),
                               scene_id=scene.scene_id, target=target, deadlock_events=len(deadlock_steps),
                               scene_type=scene.scene_type)
    trace = EpisodeTrace(scene_id=scene.scene_id, target=target, states=list(episode.states),
                         actions=[int(a) for a in episode.actions], success=episode.success,
                         deadlock_steps=deadlock_steps, attention=list(getattr(agent, 'attention', [])))
    return result, trace

def evaluate_agent(agent, scenes:list, episodes_per_scene:int, seed:int=0, config:EpisodeConfig=EpisodeConfig(),
                   sensor:SensorConfig=SensorConfig(), deadlock:tpn.DeadlockConfig=tpn.DeadlockConfig(),
                   min_length:int=mtr.LONG_EPISODE_LENGTH, stop_event=None) -> tuple:
    """
    Runs episodes_per_scene seeded episodes on each scene in order. Returns (MetricsReport, results, traces).
    """
    if not scenes:
        raise err.EmptyInputError("Cannot evaluate on an empty scene set.")
    rng = np.random.default_rng(seed)
    results, traces = [], []
    for scene in scenes:
        for _ in range(episodes_per_scene):
            episode_seed = int(rng.integers(2**31))
            if stop_event is not None and stop_event.is_set():
                break
            try:
                result, trace = run_episode(agent, scene, episode_seed, config, sensor, deadlock)
            except err.PlanningError as perr:
                logger.warning(f"Excluded an unreachable episode in '{scene.scene_id}': {perr.message}")
                continue
            results.append(result)
            traces.append(trace)
    report = summarize(results, min_length)
    logger.info(f"Evaluated '{agent.name}' on {len(scenes)} scenes: success {report.success_rate:.3f}, "
                f"SPL {report.spl:.3f} over {report.episodes} episodes.")
    return report, results, traces

def model_from_checkpoint(checkpoint) -> net.NavigationModel:
    return net.NavigationModel(prm.from_arrays(checkpoint.nav), use_org=bool(checkpoint.config.get('use_org', True)))

def evaluate(checkpoint, scenes:list, episodes_per_scene:int=250, adapt:bool=False, seed:int=0,
             config:EpisodeConfig=EpisodeConfig(), sensor:SensorConfig=SensorConfig(),
             deadlock:tpn.DeadlockConfig=tpn.DeadlockConfig(), tpn_mode:str='deadlock',
             learning_rate:float=1e-4, scope:str='all', min_length:int=mtr.LONG_EPISODE_LENGTH,
             path_file:str='', stop_event=None) -> tuple:
    """
    Greedy evaluation of a checkpoint; adapt enables TPN-guided adaptation with per-episode restore.
    """
    if adapt:
        checkpoint.require_tpn(path_file)
    agent = NavigationAgent(model_from_checkpoint(checkpoint),
                            tpn_params=prm.from_arrays(checkpoint.tpn) if checkpoint.has_tpn else None,
                            adapt=adapt, tpn_mode=tpn_mode, deadlock=deadlock, learning_rate=learning_rate,
                            scope=scope, seed=seed)
    return evaluate_agent(agent, scenes, episodes_per_scene, seed, config, sensor, deadlock, min_length, stop_event)

def write_metrics_json(path_file:str, report:MetricsReport):
    with open(path_file, 'w', encoding='utf-8') as f:
        f.write(report.to_json() + '\n')

CSV_FIELDS = ['scene_id', 'scene_type', 'target', 'success', 'length', 'optimal_length', 'deadlock_events']

def write_results_csv(path_file:str, results:list):
    with open(path_file, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for r in results:
            row = asdict(r)
            row['target'] = const.CATEGORY_NAMES[r.target]
            row['success'] = int(r.success)
            writer.writerow({k: row[k] for k in CSV_FIELDS})

def write_traces_json(path_file:str, traces:list):
    with open(path_file, 'w', encoding='utf-8') as f:
        json.dump([t.to_dict() for t in traces], f, sort_keys=True)

def trace_from_dict(data:dict) -> EpisodeTrace:
    return EpisodeTrace(scene_id=data['scene_id'], target=const.CATEGORY_NAMES.index(data['target']),
                        states=[AgentState(*s) for s in data['states']],
                        actions=[const.ACTION_NAMES.index(a) for a in data['actions']],
                        success=bool(data['success']), deadlock_steps=list(data.get('deadlock_steps', [])),
                        attention=data.get('attention', []))

def load_traces(path_file:str) -> list:
    with open(path_file, 'r', encoding='utf-8') as f:
        return [trace_from_dict(entry) for entry in json.load(f)]
