"""
Module that parses an initialization (INI) config file, or a JSON file with the same sections
"""

# local imports
from src.errors import errors as err
from src.utils import validate as val
from src.utils.logger import get_logger
# external imports
from configparser import ConfigParser, Error
import json
import os

logger = get_logger(__name__)

class Configuration():
    """
    Class that generates a configuration object from an initialization (INI) or JSON file
    """
    # fallbacks for configuration variables
    # DEFAULT
    SEED = 0
    OUT = './runs'
    # SCENES
    SCENES_DIRECTORY = './scenes'
    SCENES_PER_TYPE = {'train': 20, 'val': 5, 'test': 5}
    # EPISODE
    MAX_STEPS = 99
    SUCCESS_DISTANCE = 1.5
    STEP_PENALTY = -0.001
    SUCCESS_REWARD = 5.0
    # SENSOR
    CONFIDENCE_NOISE = 0.0
    APPEARANCE_JITTER = 0.05
    VISIBILITY_RANGE = 10
    # TRAINING
    TRAIN_EPISODES = 50_000
    WORKERS = 12
    LEARNING_RATE = 1e-4
    GAMMA = 0.99
    ENTROPY_BETA = 0.01
    VALUE_COEF = 0.5
    UNROLL_LENGTH = 20
    ABLATION = 'none'
    IL_PERSIST = 'until-escape'
    EVAL_INTERVAL = 1000
    VAL_EPISODES_PER_SCENE = 5
    # TPN
    TPN_EPISODES = 10_000
    TPN_LEARNING_RATE = 1e-4
    DEADLOCK_THRESHOLD = 0.0
    MIN_REVISITS = 1
    # EVALUATION
    EPISODES_PER_SCENE = 250
    SPLIT = 'test'
    ADAPT = False
    TPN_MODE = 'deadlock'
    ADAPT_LEARNING_RATE = 1e-4
    ADAPT_SCOPE = 'all'
    LONG_EPISODE_LENGTH = 5

    def __init__(self, config_dir = './', config_file = 'CONFIG.ini'):
        path_file = os.path.join(config_dir, config_file)
        if not val.file_exists(path_file):
            logger.info(f"The config file '{path_file}' does not exist.")
            raise err.InvalidConfigFile(f"The config file '{path_file}' does not exist.", path_file)
        self.config_full_path_file = path_file
        # init raw config with None and then set keys and values from the file via load method
        self.__raw_config = None
        self.__load_raw_config()
        # init config attributes with class defaults and then set values from raw config via load method
        self.__seed = Configuration.SEED
        self.__out = Configuration.OUT
        self.__scenes_directory = Configuration.SCENES_DIRECTORY
        self.__scenes_per_type = dict(Configuration.SCENES_PER_TYPE)
        self.__max_steps = Configuration.MAX_STEPS
        self.__success_distance = Configuration.SUCCESS_DISTANCE
        self.__step_penalty = Configuration.STEP_PENALTY
        self.__success_reward = Configuration.SUCCESS_REWARD
        self.__confidence_noise = Configuration.CONFIDENCE_NOISE
        self.__appearance_jitter = Configuration.APPEARANCE_JITTER
        self.__visibility_range = Configuration.VISIBILITY_RANGE
        self.__train_episodes = Configuration.TRAIN_EPISODES
        self.__workers = Configuration.WORKERS
        self.__learning_rate = Configuration.LEARNING_RATE
        self.__gamma = Configuration.GAMMA
        self.__entropy_beta = Configuration.ENTROPY_BETA
        self.__value_coef = Configuration.VALUE_COEF
        self.__unroll_length = Configuration.UNROLL_LENGTH
        self.__ablation = Configuration.ABLATION
        self.__il_persist = Configuration.IL_PERSIST
        self.__eval_interval = Configuration.EVAL_INTERVAL
        self.__val_episodes_per_scene = Configuration.VAL_EPISODES_PER_SCENE
        self.__tpn_episodes = Configuration.TPN_EPISODES
        self.__tpn_learning_rate = Configuration.TPN_LEARNING_RATE
        self.__deadlock_threshold = Configuration.DEADLOCK_THRESHOLD
        self.__min_revisits = Configuration.MIN_REVISITS
        self.__episodes_per_scene = Configuration.EPISODES_PER_SCENE
        self.__split = Configuration.SPLIT
        self.__adapt = Configuration.ADAPT
        self.__tpn_mode = Configuration.TPN_MODE
        self.__adapt_learning_rate = Configuration.ADAPT_LEARNING_RATE
        self.__adapt_scope = Configuration.ADAPT_SCOPE
        self.__long_episode_length = Configuration.LONG_EPISODE_LENGTH
        try:
            self.__load_config_attributes()
        except ValueError as verr:
            logger.info(f"A value in '{self.config_full_path_file}' has the wrong type: {verr}")
            raise err.ConfigParseError(f"A value in '{self.config_full_path_file}' has the wrong type.", str(verr))
        logger.info(f"A config object for the file '{self.config_full_path_file}' was initialized.")

    def __load_raw_config(self):
        config_parser = ConfigParser()
        try:
            if self.config_full_path_file.endswith('.json'):
                with open(self.config_full_path_file, 'r', encoding='utf-8') as f:
                    config_parser.read_dict(json.load(f))
            else:
                config_parser.read(self.config_full_path_file)
            self.__raw_config = config_parser
        except Error as parse_error:
            logger.info(f"Unable to parse the config file '{self.config_full_path_file}'. Error: '{parse_error.message}'")
            raise err.ConfigParseError(f"Unable to parse the config file '{self.config_full_path_file}'.", parse_error.message)
        except (json.JSONDecodeError, AttributeError) as parse_error:
            logger.info(f"Unable to parse the JSON file '{self.config_full_path_file}'. Error: '{parse_error}'")
            raise err.ConfigParseError(f"Unable to parse the JSON file '{self.config_full_path_file}'.", str(parse_error))

    def __load_config_attributes(self):
        raw = self.__raw_config
        # DEFAULT
        if 'seed' in raw['DEFAULT']:
            self.seed = raw['DEFAULT'].getint('seed', Configuration.SEED)
        self.__out = raw['DEFAULT'].get('out', Configuration.OUT)
        # SCENES
        if 'scenes' in raw.sections():
            self.__scenes_directory = raw['scenes'].get('directory', Configuration.SCENES_DIRECTORY)
            for split in self.__scenes_per_type:
                count = raw['scenes'].getint(f'{split}_per_type', Configuration.SCENES_PER_TYPE[split])
                if count < 0:
                    logger.info(f"Cannot use '{count}' rooms per type in '{split}'. Fix config file.")
                    raise err.InvalidConfigAttr(f"Cannot use '{count}' rooms per type in '{split}'.", f'{split}_per_type')
                self.__scenes_per_type[split] = count
        # EPISODE
        if 'episode' in raw.sections():
            self.__max_steps = raw['episode'].getint('max_steps', Configuration.MAX_STEPS)
            self.__success_distance = raw['episode'].getfloat('success_distance', Configuration.SUCCESS_DISTANCE)
            self.__step_penalty = raw['episode'].getfloat('step_penalty', Configuration.STEP_PENALTY)
            self.__success_reward = raw['episode'].getfloat('success_reward', Configuration.SUCCESS_REWARD)
        # SENSOR
        if 'sensor' in raw.sections():
            self.__confidence_noise = raw['sensor'].getfloat('confidence_noise', Configuration.CONFIDENCE_NOISE)
            self.__appearance_jitter = raw['sensor'].getfloat('appearance_jitter', Configuration.APPEARANCE_JITTER)
            self.__visibility_range = raw['sensor'].getint('visibility_range', Configuration.VISIBILITY_RANGE)
        # TRAINING
        if 'training' in raw.sections():
            self.train_episodes = raw['training'].getint('episodes', Configuration.TRAIN_EPISODES)
            self.workers = raw['training'].getint('workers', Configuration.WORKERS)
            self.learning_rate = raw['training'].getfloat('learning_rate', Configuration.LEARNING_RATE)
            self.__gamma = raw['training'].getfloat('gamma', Configuration.GAMMA)
            self.__entropy_beta = raw['training'].getfloat('entropy_beta', Configuration.ENTROPY_BETA)
            self.__value_coef = raw['training'].getfloat('value_coef', Configuration.VALUE_COEF)
            self.__unroll_length = raw['training'].getint('unroll_length', Configuration.UNROLL_LENGTH)
            self.ablation = raw['training'].get('ablation', Configuration.ABLATION)
            self.il_persist = raw['training'].get('il_persist', Configuration.IL_PERSIST)
            self.__eval_interval = raw['training'].getint('eval_interval', Configuration.EVAL_INTERVAL)
            self.val_episodes_per_scene = raw['training'].getint('val_episodes_per_scene',
                Configuration.VAL_EPISODES_PER_SCENE)
        # TPN
        if 'tpn' in raw.sections():
            self.tpn_episodes = raw['tpn'].getint('episodes', Configuration.TPN_EPISODES)
            self.__tpn_learning_rate = raw['tpn'].getfloat('learning_rate', Configuration.TPN_LEARNING_RATE)
            self.__deadlock_threshold = raw['tpn'].getfloat('threshold', Configuration.DEADLOCK_THRESHOLD)
            self.__min_revisits = raw['tpn'].getint('min_revisits', Configuration.MIN_REVISITS)
        # EVALUATION
        if 'evaluation' in raw.sections():
            self.episodes_per_scene = raw['evaluation'].getint('episodes_per_scene', Configuration.EPISODES_PER_SCENE)
            self.split = raw['evaluation'].get('split', Configuration.SPLIT)
            # 'on'/'off' are read as booleans by configparser
            self.__adapt = raw['evaluation'].getboolean('adapt', Configuration.ADAPT)
            self.tpn_mode = raw['evaluation'].get('tpn_mode', Configuration.TPN_MODE)
            self.__adapt_learning_rate = raw['evaluation'].getfloat('adapt_learning_rate',
                Configuration.ADAPT_LEARNING_RATE)
            self.adapt_scope = raw['evaluation'].get('adapt_scope', Configuration.ADAPT_SCOPE)
            self.__long_episode_length = raw['evaluation'].getint('long_episode_length',
                Configuration.LONG_EPISODE_LENGTH)

    # typed configs handed to the domain packages
    def episode_config(self):
        # local imports: the domain packages load this package themselves
        from src.gridworld.environment import EpisodeConfig
        return self.__domain(EpisodeConfig, max_steps=self.max_steps, success_distance_m=self.success_distance,
                             step_penalty=self.step_penalty, success_reward=self.success_reward)

    def sensor_config(self):
        from src.gridworld.sensor import SensorConfig
        return self.__domain(SensorConfig, confidence_noise=self.confidence_noise,
                             appearance_jitter=self.appearance_jitter, visibility_range=self.visibility_range)

    def deadlock_config(self):
        from src.tpn.tpn import DeadlockConfig
        return self.__domain(DeadlockConfig, threshold=self.deadlock_threshold, min_revisits=self.min_revisits)

    def train_config(self, stage:str='nav'):
        from src.harness.training import TrainConfig
        if stage == 'tpn':
            return self.__domain(TrainConfig, stage='tpn', episodes=self.tpn_episodes, workers=1, seed=self.seed,
                                 learning_rate=self.tpn_learning_rate)
        return self.__domain(TrainConfig, stage='nav', episodes=self.train_episodes, workers=self.workers,
                             seed=self.seed, learning_rate=self.learning_rate, gamma=self.gamma,
                             entropy_beta=self.entropy_beta, value_coef=self.value_coef,
                             unroll_length=self.unroll_length, ablation=self.ablation, il_persist=self.il_persist,
                             eval_interval=self.eval_interval, val_episodes_per_scene=self.val_episodes_per_scene)

    def __domain(self, cls, **kwargs):
        try:
            return cls(**kwargs)
        except err.InvalidAttribute as iaerr:
            logger.info(f"The config file sets an invalid '{iaerr.attribute}': {iaerr.message}")
            raise err.InvalidConfigAttr(iaerr.message, iaerr.attribute)

    # Add validations to setter logic whenever necessary and when loading attrb,
    # refer to this setter in the logic
    @property
    def seed(self):
        return self.__seed
    @seed.setter
    def seed(self, seed:int):
        if not val.seed(seed):
            logger.info(f"Seed cannot be set to '{seed}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set seed to '{seed}'.", 'seed')
        self.__seed = seed

    @property
    def out(self):
        return self.__out
    @out.setter
    def out(self, out:str):
        self.__out = out

    @property
    def scenes_directory(self):
        return self.__scenes_directory
    @scenes_directory.setter
    def scenes_directory(self, directory:str):
        self.__scenes_directory = directory

    @property
    def scenes_per_type(self):
        return dict(self.__scenes_per_type)

    @property
    def max_steps(self):
        return self.__max_steps

    @property
    def success_distance(self):
        return self.__success_distance

    @property
    def step_penalty(self):
        return self.__step_penalty

    @property
    def success_reward(self):
        return self.__success_reward

    @property
    def confidence_noise(self):
        return self.__confidence_noise

    @property
    def appearance_jitter(self):
        return self.__appearance_jitter

    @property
    def visibility_range(self):
        return self.__visibility_range

    @property
    def train_episodes(self):
        return self.__train_episodes
    @train_episodes.setter
    def train_episodes(self, episodes:int):
        if not val.count(episodes):
            logger.info(f"Training episodes cannot be set to '{episodes}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set training episodes to '{episodes}'.", 'episodes')
        self.__train_episodes = episodes

    @property
    def workers(self):
        return self.__workers
    @workers.setter
    def workers(self, workers:int):
        if not val.count(workers):
            logger.info(f"Workers cannot be set to '{workers}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set workers to '{workers}'.", 'workers')
        self.__workers = workers

    @property
    def learning_rate(self):
        return self.__learning_rate
    @learning_rate.setter
    def learning_rate(self, learning_rate:float):
        if not val.learning_rate(learning_rate):
            logger.info(f"Learning rate cannot be set to '{learning_rate}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set learning rate to '{learning_rate}'.", 'learning_rate')
        self.__learning_rate = learning_rate

    @property
    def gamma(self):
        return self.__gamma

    @property
    def entropy_beta(self):
        return self.__entropy_beta

    @property
    def value_coef(self):
        return self.__value_coef

    @property
    def unroll_length(self):
        return self.__unroll_length

    @property
    def ablation(self):
        return self.__ablation
    @ablation.setter
    def ablation(self, ablation:str):
        if not val.ablation(ablation):
            logger.info(f"Ablation '{ablation}' is not supported. Fix config file.")
            raise err.InvalidConfigAttr(f"Ablation '{ablation}' is not supported.", 'ablation')
        self.__ablation = ablation

    @property
    def il_persist(self):
        return self.__il_persist
    @il_persist.setter
    def il_persist(self, il_persist:str):
        if not val.il_persist(il_persist):
            logger.info(f"IL persistence '{il_persist}' is not supported. Fix config file.")
            raise err.InvalidConfigAttr(f"IL persistence '{il_persist}' is not supported.", 'il_persist')
        self.__il_persist = il_persist

    @property
    def eval_interval(self):
        return self.__eval_interval

    @property
    def val_episodes_per_scene(self):
        return self.__val_episodes_per_scene
    @val_episodes_per_scene.setter
    def val_episodes_per_scene(self, episodes:int):
        if not val.count(episodes):
            logger.info(f"Validation episodes per scene cannot be set to '{episodes}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set validation episodes per scene to '{episodes}'.",
                                        'val_episodes_per_scene')
        self.__val_episodes_per_scene = episodes

    @property
    def tpn_episodes(self):
        return self.__tpn_episodes
    @tpn_episodes.setter
    def tpn_episodes(self, episodes:int):
        if not val.count(episodes):
            logger.info(f"TPN episodes cannot be set to '{episodes}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set TPN episodes to '{episodes}'.", 'episodes')
        self.__tpn_episodes = episodes

    @property
    def tpn_learning_rate(self):
        return self.__tpn_learning_rate

    @property
    def deadlock_threshold(self):
        return self.__deadlock_threshold

    @property
    def min_revisits(self):
        return self.__min_revisits

    @property
    def episodes_per_scene(self):
        return self.__episodes_per_scene
    @episodes_per_scene.setter
    def episodes_per_scene(self, episodes:int):
        if not val.count(episodes):
            logger.info(f"Episodes per scene cannot be set to '{episodes}'. Fix config file.")
            raise err.InvalidConfigAttr(f"Cannot set episodes per scene to '{episodes}'.", 'episodes_per_scene')
        self.__episodes_per_scene = episodes

    @property
    def split(self):
        return self.__split
    @split.setter
    def split(self, split:str):
        if split not in ('val', 'test'):
            logger.info(f"Split '{split}' cannot be evaluated. Fix config file.")
            raise err.InvalidConfigAttr(f"Split '{split}' cannot be evaluated.", 'split')
        self.__split = split

    @property
    def adapt(self):
        return self.__adapt
    @adapt.setter
    def adapt(self, adapt:bool):
        self.__adapt = bool(adapt)

    @property
    def tpn_mode(self):
        return self.__tpn_mode
    @tpn_mode.setter
    def tpn_mode(self, tpn_mode:str):
        if not val.tpn_mode(tpn_mode):
            logger.info(f"TPN mode '{tpn_mode}' is not supported. Fix config file.")
            raise err.InvalidConfigAttr(f"TPN mode '{tpn_mode}' is not supported.", 'tpn_mode')
        self.__tpn_mode = tpn_mode

    @property
    def adapt_learning_rate(self):
        return self.__adapt_learning_rate

    @property
    def adapt_scope(self):
        return self.__adapt_scope
    @adapt_scope.setter
    def adapt_scope(self, scope:str):
        if not val.adapt_scope(scope):
            logger.info(f"Adaptation scope '{scope}' is not supported. Fix config file.")
            raise err.InvalidConfigAttr(f"Adaptation scope '{scope}' is not supported.", 'adapt_scope')
        self.__adapt_scope = scope

    @property
    def long_episode_length(self):
        return self.__long_episode_length
