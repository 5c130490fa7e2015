# local imports
from src.diffcore import parameters as prm
from src.errors import errors as err
from src.gridworld.environment import EpisodeConfig
from src.gridworld.scene import DEFAULT_TEMPLATES
from src.harness import training as trn
from src.harness.checkpoint import Checkpoint
from src.harness.evaluation import evaluate_agent, model_from_checkpoint
from src.harness.agents import NavigationAgent, RandomAgent
from src.harness.suite import build_suite
from src.navpolicy.network import NavigationModel
from src.orggraph.orggraph import ADJACENCY, pair_weight_contrast
from src.tpn import tpn
# external imports
import logging
import threading
import pytest

SHORT = EpisodeConfig(max_steps=6)

def small_config(**overrides) -> trn.TrainConfig:
    values = dict(episodes=2, workers=1, unroll_length=4, seed=3, eval_interval=1)
    values.update(overrides)
    return trn.TrainConfig(**values)

@pytest.mark.parametrize('overrides', [{'workers': 0}, {'episodes': 0}, {'ablation': 'no-graph'},
                                       {'il_persist': 'forever'}, {'learning_rate': 0.0}, {'gamma': 1.5},
                                       {'stage': 'both'}, {'val_episodes_per_scene': 0},
                                       {'val_episodes_per_scene': -2}])
def test_config_validation(overrides):
    with pytest.raises(err.InvalidAttribute):
        small_config(**overrides)

def test_ablation_flags():
    assert not small_config(ablation='no-org').use_org
    assert not small_config(ablation='no-il').use_il
    assert small_config(ablation='il-all').il_all
    plain = small_config()
    assert plain.use_org and plain.use_il and not plain.il_all

def test_navigation_training_is_deterministic(room):
    first = trn.train_navigation(small_config(), [room], episode_config=SHORT)
    second = trn.train_navigation(small_config(), [room], episode_config=SHORT)
    assert first.history['loss'] == second.history['loss']
    assert prm.bit_equal(first.nav, second.nav)
    assert first.episodes >= 2 and first.stage == 'nav' and first.tpn is None

def test_training_changes_the_parameters(room):
    checkpoint = trn.train_navigation(small_config(), [room], episode_config=SHORT)
    assert not prm.bit_equal(checkpoint.nav, NavigationModel.create(3).snapshot())

def test_without_imitation_the_expert_is_never_asked(room, monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError("the expert was queried")
    monkeypatch.setattr(trn, 'expert_action', forbidden)
    checkpoint = trn.train_navigation(small_config(ablation='no-il', episodes=3), [room], episode_config=SHORT)
    assert checkpoint.history['expert_calls'] == 0
    assert all(value == 0.0 for value in checkpoint.history['L_il'])

def test_imitation_everywhere_asks_the_expert_every_step(room):
    checkpoint = trn.train_navigation(small_config(ablation='il-all'), [room], episode_config=SHORT)
    # one query per unrolled step, at most unroll_length per update
    assert 0 < checkpoint.history['expert_calls'] <= 4 * len(checkpoint.history['loss'])
    assert all(value > 0.0 for value in checkpoint.history['L_il'])

def test_ablated_graph_trains_the_smaller_network(room):
    checkpoint = trn.train_navigation(small_config(ablation='no-org'), [room], episode_config=SHORT)
    assert checkpoint.config['use_org'] is False
    assert not any(name.startswith('org.') for name in checkpoint.nav)

def test_validation_history(room, corridor):
    checkpoint = trn.train_navigation(small_config(val_episodes_per_scene=1), [room], val_scenes=[corridor],
                                      episode_config=SHORT)
    assert checkpoint.history['validation']
    assert all(0.0 <= success <= 1.0 for _, success in checkpoint.history['validation'])

def test_stop_request_is_honoured(room):
    stop = threading.Event()
    stop.set()
    checkpoint = trn.train_navigation(small_config(episodes=100), [room], episode_config=SHORT, stop_event=stop)
    assert checkpoint.episodes == 0 and checkpoint.history['loss'] == []

def test_training_needs_scenes():
    with pytest.raises(err.EmptyInputError):
        trn.train_navigation(small_config(), [])

# TPN STAGE
@pytest.fixture
def nav_checkpoint(model):
    return Checkpoint(config={'use_org': True}, nav=model.snapshot(), episodes=5)

def test_tpn_stage_keeps_the_navigation_parameters(room, nav_checkpoint):
    result = trn.train_tpn(small_config(stage='tpn', episodes=3), nav_checkpoint, [room],
                           episode_config=EpisodeConfig(max_steps=20))
    assert prm.bit_equal(result.nav, nav_checkpoint.nav)
    assert result.stage == 'tpn' and result.has_tpn
    assert set(result.tpn) == set(tpn.init_tpn_parameters(3))
    assert result.episodes == nav_checkpoint.episodes
    assert 'tpn_train' in result.config

def test_tpn_stage_without_deadlocks_leaves_the_tpn_untrained(room, nav_checkpoint, caplog):
    caplog.set_level(logging.WARNING)
    result = trn.train_tpn(small_config(stage='tpn', episodes=3), nav_checkpoint, [room],
                           episode_config=EpisodeConfig(max_steps=1))
    assert prm.bit_equal(result.tpn, prm.snapshot(tpn.init_tpn_parameters(3)))
    assert result.history['tpn']['updates'] == 0
    assert 'No deadlock occurred' in caplog.text

# LEARNING EXPERIMENTS
@pytest.mark.slow
def test_trained_navigator_beats_random(room):
    checkpoint = trn.train_navigation(small_config(episodes=3000, workers=4, unroll_length=20), [room],
                                      episode_config=EpisodeConfig(max_steps=40))
    model = model_from_checkpoint(checkpoint)
    trained, _, _ = evaluate_agent(NavigationAgent(model), [room], 50, seed=11, config=EpisodeConfig(max_steps=40))
    baseline, _, _ = evaluate_agent(RandomAgent(11), [room], 50, seed=11, config=EpisodeConfig(max_steps=40))
    assert trained.success_rate > baseline.success_rate

@pytest.mark.slow
def test_graph_weights_grow_between_co_placed_categories():
    train = build_suite(0, sizes={'train': 5, 'val': 0, 'test': 0}).train
    checkpoint = trn.train_navigation(small_config(episodes=5000, workers=4, unroll_length=20), train,
                                      episode_config=EpisodeConfig(max_steps=60))
    pairs = [(p.anchor, p.partner) for template in DEFAULT_TEMPLATES.values() for p in template.pairs]
    paired, other = pair_weight_contrast(checkpoint.nav[ADJACENCY], pairs)
    assert paired > other
