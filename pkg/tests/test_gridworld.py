# local imports
from src.constants import constants as const
from src.errors import errors as err
from src.gridworld import environment as env
from src.gridworld import expert as exp
from src.gridworld import scene as scn
from src.gridworld import sensor as sns
from src.gridworld.state import Action, AgentState, MOTIONS, transition
from tests.conftest import PAINTING, make_scene
# external imports
from collections import deque
from dataclasses import replace
import json
import math
import numpy as np
from numpy.testing import assert_array_equal
import pytest

EAST, WEST, NORTH = 90, 270, 0

def bfs_distance(scene, start, target, config=env.EpisodeConfig(), sensor=sns.SensorConfig()):
    """
    Forward breadth-first search over motions until a success pose, independent of the expert's tables.
    """
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        state, depth = queue.popleft()
        if env.success_check(scene, state, target, config, sensor):
            return depth
        for action in MOTIONS:
            following, _ = transition(scene, state, action)
            if following not in seen:
                seen.add(following)
                queue.append((following, depth + 1))
    return None

# STATE
def test_agent_state_validates_pose():
    with pytest.raises(err.InvalidAttribute):
        AgentState(0, 0, 45, 0)
    with pytest.raises(err.InvalidAttribute):
        AgentState(0, 0, 0, 60)

def test_rotations_and_look_clamps(corridor):
    state = AgentState(3, 0, NORTH, 30)
    assert transition(corridor, state, Action.ROTATE_LEFT)[0].rotation == WEST
    assert transition(corridor, state, Action.ROTATE_RIGHT)[0].rotation == EAST
    assert transition(corridor, state, Action.LOOK_UP)[0].horizon == 30
    low = AgentState(3, 0, NORTH, -30)
    assert transition(corridor, low, Action.LOOK_DOWN)[0].horizon == -30
    assert transition(corridor, low, Action.LOOK_UP)[0].horizon == 0

def test_move_ahead_and_collisions(room, corridor):
    assert transition(room, AgentState(1, 1, NORTH, 0), Action.MOVE_AHEAD) == (AgentState(1, 0, NORTH, 0), False)
    # interior wall
    assert transition(room, AgentState(1, 1, EAST, 0), Action.MOVE_AHEAD) == (AgentState(1, 1, EAST, 0), True)
    # objects block movement
    assert transition(corridor, AgentState(8, 0, EAST, 0), Action.MOVE_AHEAD)[1]
    # outer boundary
    assert transition(corridor, AgentState(0, 0, WEST, 0), Action.MOVE_AHEAD)[1]

def test_done_is_not_a_motion(corridor):
    with pytest.raises(err.ProtocolError):
        transition(corridor, AgentState(0, 0, EAST, 0), Action.DONE)

# SCENE
def test_generate_scene_is_deterministic():
    template = scn.DEFAULT_TEMPLATES['kitchen']
    assert scn.generate_scene(11, template).to_json() == scn.generate_scene(11, template).to_json()
    assert scn.generate_scene(11, template).to_json() != scn.generate_scene(12, template).to_json()

@pytest.mark.parametrize('scene_type', const.SCENE_TYPES)
def test_generated_scenes_are_valid(scene_type):
    scene = scn.generate_scene(3, scn.DEFAULT_TEMPLATES[scene_type])
    assert scene.scene_type == scene_type
    assert len(scene.categories) >= scn.MIN_TARGET_CATEGORIES
    assert scn._connected(scene.width, scene.height, set(scene.walls) | set(scene.object_cells))
    for obj in scene.objects:
        assert not scene.is_wall(obj.x, obj.y)

def _pair_template(probability:float) -> scn.SceneTemplate:
    return scn.SceneTemplate('living_room', width=(8, 8), height=(8, 8), obstacle_density=0.0,
                             pairs=(scn._pair('Television', 'RemoteControl', probability, 2.0),),
                             singles=scn._ids('Laptop', 'Painting'))

def _coplaced(scene, pair) -> bool:
    anchor = scene.instances(pair.anchor)[0]
    partner = scene.instances(pair.partner)[0]
    return math.hypot(anchor.x - partner.x, anchor.y - partner.y) <= pair.radius

def test_certain_pairs_are_always_coplaced():
    template = _pair_template(1.0)
    for seed in range(50):
        assert _coplaced(scn.generate_scene(seed, template), template.pairs[0])

def test_certain_pairs_hold_in_cramped_walled_rooms():
    template = scn.SceneTemplate('living_room', width=(6, 6), height=(6, 6), obstacle_density=0.3,
                                 pairs=(scn._pair('Television', 'RemoteControl', 1.0, 1.0),),
                                 singles=scn._ids('Laptop', 'Painting'))
    generated = 0
    for seed in range(100):
        try:
            scene = scn.generate_scene(seed, template)
        except err.SceneGenerationError:
            continue
        generated += 1
        assert _coplaced(scene, template.pairs[0])
    assert generated >= 90

def test_pair_without_a_near_cell_is_rejected():
    # no cell other than the anchor lies within half a cell
    template = scn.SceneTemplate('living_room', width=(6, 6), height=(6, 6), obstacle_density=0.0,
                                 pairs=(scn._pair('Television', 'RemoteControl', 1.0, 0.5),),
                                 singles=scn._ids('Laptop', 'Painting'))
    with pytest.raises(err.SceneGenerationError):
        scn.generate_scene(0, template)

def test_coplacement_rate_matches_probability():
    template = _pair_template(0.8)
    rate = np.mean([_coplaced(scn.generate_scene(seed, template), template.pairs[0]) for seed in range(1000)])
    assert abs(rate - 0.8) <= 0.05

def test_unsatisfiable_template_is_rejected():
    template = scn.SceneTemplate('kitchen', width=(3, 3), height=(3, 3), obstacle_density=0.0,
                                 singles=scn._ids('Sink', 'Microwave', 'Toaster', 'Fridge', 'Bowl'))
    with pytest.raises(err.SceneGenerationError):
        scn.generate_scene(0, template)

def test_scene_file_roundtrip(tmp_path):
    scene = scn.generate_scene(5, scn.DEFAULT_TEMPLATES['bedroom'])
    path_file = str(tmp_path / 'scene.json')
    scn.save_scene(path_file, scene)
    assert scn.load_scene(path_file) == scene

def test_scene_file_errors(tmp_path):
    with pytest.raises(err.SceneFileError):
        scn.load_scene(str(tmp_path / 'missing.json'))
    data = scn.generate_scene(5, scn.DEFAULT_TEMPLATES['bedroom']).to_dict()
    data['version'] = 99
    with pytest.raises(err.SceneFileError):
        scn.SceneSpec.from_dict(data)
    broken = tmp_path / 'broken.json'
    broken.write_text('{"version": 1', encoding='utf-8')
    with pytest.raises(err.SceneFileError):
        scn.load_scene(str(broken))

def test_template_file_roundtrip(tmp_path):
    template = scn.DEFAULT_TEMPLATES['bathroom']
    path_file = tmp_path / 'template.json'
    path_file.write_text(json.dumps(template.to_dict()), encoding='utf-8')
    assert scn.load_template(str(path_file)) == template

# SENSOR
def test_empty_view_has_no_detections(corridor, quiet_sensor):
    observation = sns.render_observation(corridor, AgentState(0, 0, WEST, 0), PAINTING, 0, quiet_sensor)
    assert not observation.detected.any()
    assert not observation.boxes.any()
    assert not observation.appearance.any()

def test_observation_is_deterministic(room):
    state = AgentState(3, 5, NORTH, 0)
    first = sns.render_observation(room, state, PAINTING, noise_seed=4)
    second = sns.render_observation(room, state, PAINTING, noise_seed=4)
    assert_array_equal(first.fingerprint(), second.fingerprint())

def test_nearer_objects_look_bigger_and_surer(quiet_sensor):
    scene = make_scene(1, 8, [('Painting', 0, 0)])
    near = sns.render_observation(scene, AgentState(0, 1, NORTH, 0), PAINTING, 0, quiet_sensor)
    far = sns.render_observation(scene, AgentState(0, 5, NORTH, 0), PAINTING, 0, quiet_sensor)
    def area(box):
        return (box[2] - box[0]) * (box[3] - box[1])
    assert area(near.boxes[PAINTING]) > area(far.boxes[PAINTING])
    assert near.confidence[PAINTING] > far.confidence[PAINTING]
    assert near.confidence[PAINTING] == pytest.approx(0.9)

def test_walls_occlude_and_objects_do_not(quiet_sensor):
    state = AgentState(0, 0, EAST, 0)
    walled = make_scene(5, 1, [('Painting', 4, 0)], walls=((2, 0),))
    assert not sns.render_observation(walled, state, PAINTING, 0, quiet_sensor).detected[PAINTING]
    cluttered = make_scene(5, 1, [('Painting', 4, 0), ('Sofa', 2, 0)])
    assert sns.render_observation(cluttered, state, PAINTING, 0, quiet_sensor).detected[PAINTING]

def test_confidence_noise_stays_in_range(room):
    noisy = sns.SensorConfig(confidence_noise=0.1)
    for seed in range(20):
        observation = sns.render_observation(room, AgentState(3, 5, NORTH, 0), PAINTING, seed, noisy)
        assert np.all((observation.confidence >= 0.0) & (observation.confidence <= 1.0))

def test_bad_target_is_rejected(room):
    with pytest.raises(err.OutOfRangeError):
        sns.render_observation(room, AgentState(3, 5, NORTH, 0), const.NUM_CATEGORIES)

# ENVIRONMENT
def test_success_check_examples(corridor):
    assert env.success_check(corridor, AgentState(8, 0, EAST, 0), PAINTING)
    assert env.success_check(corridor, AgentState(6, 0, EAST, 0), PAINTING)
    assert not env.success_check(corridor, AgentState(5, 0, EAST, 0), PAINTING)
    assert not env.success_check(corridor, AgentState(7, 0, WEST, 0), PAINTING)

def test_step_rewards_and_events(corridor):
    config = env.EpisodeConfig()
    done = env.step(corridor, AgentState(8, 0, EAST, 0), Action.DONE, config, PAINTING)
    assert (done.reward, done.done, done.event) == (5.0, True, env.StepEvent.SUCCESS)
    failed = env.step(corridor, AgentState(2, 0, EAST, 0), Action.DONE, config, PAINTING)
    assert (failed.reward, failed.done, failed.event) == (-0.001, True, env.StepEvent.FAILURE)
    bump = env.step(corridor, AgentState(0, 0, WEST, 0), Action.MOVE_AHEAD, config, PAINTING)
    assert (bump.next_state, bump.reward, bump.event) == (AgentState(0, 0, WEST, 0), -0.001, env.StepEvent.COLLISION)
    look = env.step(corridor, AgentState(0, 0, WEST, 30), Action.LOOK_UP, config, PAINTING)
    assert (look.next_state.horizon, look.reward, look.done) == (30, -0.001, False)

def test_reset_is_seeded_and_reachable(room):
    assert env.reset(room, 21) == env.reset(room, 21)
    for seed in range(30):
        state, target = env.reset(room, seed)
        assert target in room.categories
        assert room.is_free(state.x, state.y)
        assert state in exp.distance_field(room, target)

@pytest.fixture
def open_room():
    # 10 x 10 room with an L-shaped wall and four objects
    return make_scene(10, 10, [('Painting', 9, 0), ('Television', 0, 9), ('Sofa', 5, 5), ('Laptop', 2, 7)],
                      walls=((3, 2), (4, 2), (5, 2), (5, 3)), scene_id='open')

def test_reset_never_starts_on_a_blocked_cell(open_room):
    for seed in range(10_000):
        state, _ = env.reset(open_room, seed)
        assert not open_room.is_wall(state.x, state.y)
        assert (state.x, state.y) not in open_room.object_cells

@pytest.mark.slow
def test_reset_covers_the_free_cells(open_room):
    starts = set()
    for seed in range(100_000):
        state, _ = env.reset(open_room, seed)
        starts.add((state.x, state.y))
    assert len(starts) >= 0.9 * len(open_room.free_cells)

def test_reset_fails_without_reachable_start():
    sealed = make_scene(5, 1, [('Painting', 4, 0)], walls=((3, 0),))
    with pytest.raises(err.PlanningError):
        env.reset(sealed, 0)

def test_episode_protocol(corridor):
    episode = env.Episode(scene=corridor, target=PAINTING, state=AgentState(0, 0, EAST, 0))
    episode.step(Action.MOVE_AHEAD)
    result = episode.step(Action.DONE)
    assert result.event == env.StepEvent.FAILURE and episode.done and not episode.success
    assert len(episode.states) == episode.steps + 1 == 3
    with pytest.raises(err.ProtocolError):
        episode.step(Action.MOVE_AHEAD)

def test_episode_times_out(corridor):
    episode = env.Episode(scene=corridor, target=PAINTING, state=AgentState(0, 0, EAST, 0),
                          config=env.EpisodeConfig(max_steps=3))
    events = [episode.step(Action.ROTATE_LEFT).event for _ in range(3)]
    assert events[-1] == env.StepEvent.TIMEOUT
    assert episode.done and episode.steps == 3

# EXPERT
def test_expert_says_done_at_success(corridor):
    state = AgentState(8, 0, EAST, 0)
    assert exp.expert_action(corridor, state, PAINTING) == Action.DONE
    assert exp.optimal_length(corridor, state, PAINTING) == 1

def test_expert_steps_towards_the_target(corridor):
    strict = env.EpisodeConfig(success_distance_m=0.5)
    state = AgentState(7, 0, EAST, 0)
    assert exp.expert_action(corridor, state, PAINTING, strict) == Action.MOVE_AHEAD
    assert exp.optimal_length(corridor, state, PAINTING, strict) == 2

def test_expert_tie_break_prefers_rotate_left(corridor):
    assert exp.expert_action(corridor, AgentState(0, 0, WEST, 0), PAINTING) == Action.ROTATE_LEFT

def test_expert_reports_unreachable_targets():
    sealed = make_scene(5, 1, [('Painting', 4, 0)], walls=((3, 0),))
    with pytest.raises(err.PlanningError):
        exp.expert_action(sealed, AgentState(0, 0, EAST, 0), PAINTING)
    with pytest.raises(err.PlanningError):
        exp.optimal_length(sealed, AgentState(0, 0, EAST, 0), PAINTING)

@pytest.mark.parametrize('scene_type', const.SCENE_TYPES)
def test_expert_rollouts_match_bfs(scene_type):
    scene = scn.generate_scene(17, scn.DEFAULT_TEMPLATES[scene_type])
    for seed in range(15):
        start, target = env.reset(scene, seed)
        actions = exp.expert_rollout(scene, start, target)
        assert len(actions) == bfs_distance(scene, start, target) + 1 == exp.optimal_length(scene, start, target)
        episode = env.Episode(scene=scene, target=target, state=start)
        for action in actions:
            episode.step(action)
        assert episode.success

@pytest.mark.slow
def test_expert_rollouts_match_bfs_at_scale():
    scenes = [scn.generate_scene(seed, scn.DEFAULT_TEMPLATES[t]) for seed in range(25) for t in const.SCENE_TYPES]
    for index in range(500):
        scene = scenes[index % len(scenes)]
        start, target = env.reset(scene, 1000 + index)
        assert len(exp.expert_rollout(scene, start, target)) == bfs_distance(scene, start, target) + 1

def test_distance_field_respects_the_sensor(room):
    narrow = replace(sns.SensorConfig(), visibility_range=1)
    # with a one-cell range the painting is only seen from its neighbours
    for state, distance in exp.distance_field(room, PAINTING, env.EpisodeConfig(), narrow).items():
        if distance == 0:
            assert math.hypot(state.x - 6, state.y - 0) <= 1.0
