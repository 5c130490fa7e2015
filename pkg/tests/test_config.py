# local imports
from src.errors import errors as err
from src.utils.config import Configuration
# external imports
import json
import os
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

def write(tmp_path, name:str, text:str) -> str:
    (tmp_path / name).write_text(text)
    return str(tmp_path)

def test_repository_config_matches_the_defaults():
    config = Configuration(ROOT, 'CONFIG.ini')
    assert config.seed == Configuration.SEED
    assert config.max_steps == 99 and config.success_distance == pytest.approx(1.5)
    assert config.workers == 12 and config.unroll_length == 20
    assert config.episodes_per_scene == 250 and config.split == 'test'
    assert config.scenes_per_type == {'train': 20, 'val': 5, 'test': 5}

def test_ini_sections(tmp_path):
    directory = write(tmp_path, 'run.ini', "[DEFAULT]\nseed = 4\n\n[training]\nablation = no-il\nworkers = 2\n\n"
                                           "[evaluation]\nadapt = on\ntpn_mode = random\n")
    config = Configuration(directory, 'run.ini')
    assert (config.seed, config.ablation, config.workers) == (4, 'no-il', 2)
    assert config.adapt is True and config.tpn_mode == 'random'
    # untouched sections keep their fallbacks
    assert config.max_steps == Configuration.MAX_STEPS

def test_json_file_with_the_same_sections(tmp_path):
    body = {'DEFAULT': {'seed': 9}, 'episode': {'max_steps': 30}, 'tpn': {'min_revisits': 2}}
    config = Configuration(write(tmp_path, 'run.json', json.dumps(body)), 'run.json')
    assert (config.seed, config.max_steps, config.min_revisits) == (9, 30, 2)

def test_missing_file(tmp_path):
    with pytest.raises(err.InvalidConfigFile):
        Configuration(str(tmp_path), 'absent.ini')

@pytest.mark.parametrize('text', ["[training]\nablation = no-graph\n", "[training]\nworkers = 0\n",
                                  "[evaluation]\nsplit = train\n", "[evaluation]\nadapt_scope = heads\n",
                                  "[DEFAULT]\nseed = -1\n", "[training]\nval_episodes_per_scene = 0\n"])
def test_invalid_values(tmp_path, text):
    with pytest.raises(err.InvalidConfigAttr):
        Configuration(write(tmp_path, 'bad.ini', text), 'bad.ini')

def test_values_of_the_wrong_type(tmp_path):
    with pytest.raises(err.ConfigParseError):
        Configuration(write(tmp_path, 'bad.ini', "[training]\nworkers = many\n"), 'bad.ini')
    with pytest.raises(err.ConfigParseError):
        Configuration(write(tmp_path, 'bad.json', "{not json"), 'bad.json')

def test_typed_configs(tmp_path):
    directory = write(tmp_path, 'run.ini', "[episode]\nmax_steps = 40\n\n[sensor]\nconfidence_noise = 0.1\n\n"
                                           "[tpn]\nepisodes = 7\nthreshold = 0.5\n")
    config = Configuration(directory, 'run.ini')
    assert config.episode_config().max_steps == 40
    assert config.sensor_config().confidence_noise == pytest.approx(0.1)
    assert config.deadlock_config().threshold == pytest.approx(0.5)
    tpn_stage = config.train_config('tpn')
    assert (tpn_stage.stage, tpn_stage.episodes, tpn_stage.workers) == ('tpn', 7, 1)
    assert config.train_config().workers == Configuration.WORKERS

def test_domain_validation_surfaces_as_a_config_error(tmp_path):
    config = Configuration(write(tmp_path, 'run.ini', "[episode]\nmax_steps = 0\n"), 'run.ini')
    with pytest.raises(err.InvalidConfigAttr):
        config.episode_config()
