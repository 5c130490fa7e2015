# local imports
from src.constants import constants as const
from src.diffcore import gradcheck as gc
from src.diffcore import optim
from src.diffcore import parameters as prm
from src.diffcore import tensor as td
from src.errors import errors as err
from src.gridworld.environment import EpisodeConfig, Episode
from src.gridworld.expert import expert_rollout
from src.gridworld.sensor import SensorConfig, render_observation
from src.gridworld.state import Action, AgentState
from src.navpolicy import network as net
from src.tpn import tpn
from tests.conftest import PAINTING, random_observation
# external imports
import numpy as np
from numpy.testing import assert_allclose
import pytest

def slot(key, action, following):
    return tpn.MemorySlot(key=np.asarray(key, dtype=float), action=np.asarray(action, dtype=float),
                          next_feature=np.asarray(following, dtype=float))

# DEADLOCK DETECTION
def test_empty_memory_is_never_a_deadlock():
    assert not tpn.detect_deadlock(tpn.ExternalMemory(), np.ones(4))

def test_exact_repeat_is_a_deadlock():
    memory = tpn.ExternalMemory()
    features = np.random.default_rng(0).standard_normal((5, 4))
    for feature in features:
        memory.append(feature)
    assert tpn.detect_deadlock(memory, features[3].copy(), threshold=0.0, min_revisits=1)
    assert not tpn.detect_deadlock(memory, features[3] + 1e-9, threshold=0.0)
    assert tpn.detect_deadlock(memory, features[3] + 1e-9, threshold=1e-6)

def test_min_revisits_counts_matches():
    memory = tpn.ExternalMemory()
    for feature in ([1.0, 0.0], [1.0, 0.0], [0.0, 1.0]):
        memory.append(feature)
    assert tpn.detect_deadlock(memory, [1.0, 0.0], min_revisits=2)
    assert not tpn.detect_deadlock(memory, [0.0, 1.0], min_revisits=2)

def test_deadlock_config_validation():
    with pytest.raises(err.InvalidAttribute):
        tpn.DeadlockConfig(threshold=-1.0)
    with pytest.raises(err.InvalidAttribute):
        tpn.DeadlockConfig(min_revisits=0)

def _fingerprints(scene, start, target, actions, sensor):
    episode = Episode(scene=scene, target=target, state=start, config=EpisodeConfig(), sensor=sensor)
    features = [render_observation(scene, episode.state, target, 0, sensor).fingerprint()]
    for action in actions:
        episode.step(action)
        features.append(render_observation(scene, episode.state, target, 0, sensor).fingerprint())
    return features

def _first_flag(features):
    memory = tpn.ExternalMemory()
    for step, feature in enumerate(features):
        if tpn.detect_deadlock(memory, feature):
            return step
        memory.append(feature)
    return None

def test_rotation_loop_is_flagged_by_step_five(room):
    features = _fingerprints(room, AgentState(3, 5, 0, 0), PAINTING, [Action.ROTATE_LEFT] * 4, SensorConfig())
    flagged = _first_flag(features)
    assert flagged is not None and flagged <= 4

def test_expert_corridor_walk_is_never_flagged(corridor):
    start = AgentState(0, 0, 90, 0)
    actions = expert_rollout(corridor, start, PAINTING)[:-1]
    assert _first_flag(_fingerprints(corridor, start, PAINTING, actions, SensorConfig())) is None

# MEMORIES
def test_record_step_keeps_both_memories_aligned():
    external, internal = tpn.ExternalMemory(), tpn.InternalMemory()
    rng = np.random.default_rng(1)
    features = rng.standard_normal((6, 5))
    for t in range(5):
        tpn.record_step(external, internal, features[t], np.eye(6)[t % 6], features[t + 1])
    assert len(external) == len(internal) == 5
    for i in range(5):
        assert_allclose(internal[i].key, external[i])
        assert_allclose(internal[i].value, np.concatenate([np.eye(6)[i % 6], features[i + 1]]))
    external.clear()
    internal.clear()
    assert len(external) == len(internal) == 0

def test_record_step_with_separate_vision():
    external, internal = tpn.ExternalMemory(), tpn.InternalMemory()
    tpn.record_step(external, internal, np.ones(3), np.zeros(6), np.ones(3), vision=np.full(7, 2.0))
    assert external[0].shape == (7,)
    assert internal[0].key.shape == (3,)

def test_internal_memory_rejects_mixed_shapes():
    internal = tpn.InternalMemory()
    internal.append(slot([1.0, 2.0], np.zeros(6), [0.0, 0.0]))
    with pytest.raises(err.DimensionError):
        internal.append(slot([1.0, 2.0, 3.0], np.zeros(6), [0.0, 0.0, 0.0]))

# ATTENTION
def test_single_slot_attention():
    internal = tpn.InternalMemory()
    internal.append(slot([1.0, 2.0], [0, 1, 0, 0, 0, 0], [3.0, 4.0]))
    embedded, weights = tpn.memory_attention([0.5, -1.0], internal)
    assert_allclose(weights, [1.0])
    assert_allclose(embedded.data[0], [0, 1, 0, 0, 0, 0, 3.0, 4.0])
    assert not embedded.requires_grad

def test_identical_keys_share_attention():
    internal = tpn.InternalMemory()
    internal.append(slot([1.0, 1.0], np.zeros(6), [0.0, 0.0]))
    internal.append(slot([1.0, 1.0], np.ones(6), [2.0, 2.0]))
    embedded, weights = tpn.memory_attention([3.0, -2.0], internal)
    assert_allclose(weights, [0.5, 0.5])
    assert_allclose(embedded.data[0], [0.5] * 6 + [1.0, 1.0])

def test_attention_matches_weighted_sum():
    rng = np.random.default_rng(2)
    internal = tpn.InternalMemory()
    keys, values = rng.standard_normal((7, 4)), rng.standard_normal((7, 10))
    for key, value in zip(keys, values):
        internal.append(slot(key, value[:6], value[6:]))
    feature = rng.standard_normal(4)
    scores = np.exp(keys @ feature)
    reference = (scores / scores.sum()) @ values
    embedded, weights = tpn.memory_attention(feature, internal)
    assert_allclose(embedded.data[0], reference, atol=1e-10)
    assert weights.sum() == pytest.approx(1.0, abs=1e-6) and np.all(weights >= 0.0)

def test_attention_on_empty_memory_fails():
    with pytest.raises(err.EmptyInputError):
        tpn.memory_attention(np.ones(3), tpn.InternalMemory())

# NETWORK
def test_tpn_forward_distribution_and_purity():
    params = tpn.init_tpn_parameters(0, feature_dim=8)
    rng = np.random.default_rng(3)
    feature, embedded = rng.standard_normal(8), td.constant(rng.standard_normal((1, 6 + 8)))
    first = tpn.tpn_forward(feature, embedded, params).data
    assert first.shape == (1, const.NUM_ACTIONS)
    assert first.sum() == pytest.approx(1.0)
    assert_allclose(tpn.tpn_forward(feature, embedded, params).data, first, rtol=0, atol=0)
    with pytest.raises(err.DimensionError):
        tpn.tpn_forward(rng.standard_normal(9), embedded, params)

def test_tpn_gradients_match_finite_differences():
    params = tpn.init_tpn_parameters(1, feature_dim=8)
    rng = np.random.default_rng(4)
    feature, embedded = rng.standard_normal(8), td.constant(rng.standard_normal((1, 14)))
    report = gc.finite_difference_check(lambda: td.cross_entropy(tpn.tpn_forward(feature, embedded, params), 3),
                                        params, samples_per_parameter=30)
    assert report.passed, report

def test_default_tpn_reads_the_visual_prefix():
    params = tpn.init_tpn_parameters(0)
    assert params['tpn.joint.weight'].shape == (2 * const.VISUAL_DIM + const.NUM_ACTIONS, const.TPN_HIDDEN)

# TRAINING
def test_scripted_loop_trains_the_tpn(room, model):
    tpn_params = tpn.init_tpn_parameters(5)
    frozen = model.snapshot()
    before = prm.snapshot(tpn_params)
    report = tpn.train_tpn_step(model, room, 0, tpn_params, optim.AdamState(), EpisodeConfig(max_steps=8),
                                start=AgentState(3, 5, 0, 0), target=PAINTING,
                                scripted_actions=[Action.ROTATE_LEFT] * 8)
    assert report.trained and report.updates >= 1
    assert report.loss > 0.0
    assert not prm.bit_equal(tpn_params, before)
    assert prm.bit_equal(model.params, frozen)

def test_episode_without_deadlock_returns_the_marker(room, model):
    tpn_params = tpn.init_tpn_parameters(5)
    before = prm.snapshot(tpn_params)
    report = tpn.train_tpn_step(model, room, 0, tpn_params, optim.AdamState(), EpisodeConfig(max_steps=1))
    assert not report.trained and report.loss == 0.0
    assert prm.bit_equal(tpn_params, before)

@pytest.mark.slow
def test_tpn_cross_entropy_falls_on_a_fixed_deadlock_set(room, model):
    seeds = list(range(12))
    samples = tpn.deadlock_dataset(model, [room] * len(seeds), seeds, EpisodeConfig(max_steps=30))
    assert samples
    tpn_params = tpn.init_tpn_parameters(0)
    state = optim.AdamState(learning_rate=1e-3)
    start = tpn.dataset_loss(samples, tpn_params)
    for _ in range(100):
        for feature, embedded, label in samples:
            tpn.supervised_tpn_update(feature, td.constant(embedded), label, tpn_params, state)
    assert tpn.dataset_loss(samples, tpn_params) < start

def test_dataset_loss_needs_samples():
    with pytest.raises(err.EmptyInputError):
        tpn.dataset_loss([], tpn.init_tpn_parameters(0))

# TEST-TIME ADAPTATION
def _adapt_inputs(seed):
    observation = random_observation(seed, target=2)
    return observation, 2, Action.ROTATE_RIGHT, net.initial_hidden()

def test_confident_policy_is_not_moved(model):
    model.params['policy.weight'].data[...] = 0.0
    model.params['policy.bias'].data[...] = 0.0
    model.params['policy.bias'].data[0, Action.LOOK_DOWN] = 1000.0
    before = model.snapshot()
    loss = tpn.test_time_adapt(model, *_adapt_inputs(6), Action.LOOK_DOWN, optim.AdamState())
    assert loss == pytest.approx(0.0, abs=1e-12)
    assert prm.bit_equal(model.params, before)

def test_adaptation_raises_the_guided_log_probability(model):
    observation, target, previous, hidden = _adapt_inputs(7)
    output, _ = model.forward(observation, target, previous, hidden)
    guidance = int(np.argmin(output.probabilities))
    before = np.log(output.probabilities[guidance])
    tpn.test_time_adapt(model, observation, target, previous, hidden, guidance, optim.AdamState(learning_rate=1e-5))
    after, _ = model.forward(observation, target, previous, hidden)
    assert np.log(after.probabilities[guidance]) > before

def test_policy_scope_only_moves_the_policy_head(model):
    before = model.snapshot()
    tpn.test_time_adapt(model, *_adapt_inputs(8), Action.MOVE_AHEAD, optim.AdamState(), scope='policy')
    for name, param in model.params.items():
        unchanged = np.array_equal(param.data, before[name])
        assert unchanged != name.startswith('policy.')
    with pytest.raises(err.InvalidAttribute):
        tpn.adaptation_names(model.params, 'heads')
