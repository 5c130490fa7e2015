#!/usr/bin/python3
# -*- coding: utf-8 -*-

"""
This script contains the command-line entry point of the org-navigation project.
Edit the 'CONFIG.ini' configuration file (or pass another one with --config) before
running it. Subcommands:

    gen-scenes   generate the train/val/test scene splits
    train-nav    stage one: train the navigation network
    train-tpn    stage two: train the TPN with the navigation network frozen
    eval         evaluate a checkpoint (or the random/expert baselines) on a split
    render       draw recorded episode traces as SVG and ASCII
"""

# local imports
import src.errors as err
import src.utils as utils
from src.harness import agents
from src.harness import checkpoint as ckpt
from src.harness import evaluation
from src.harness import suite as sut
from src.harness import training
from src.harness import trajectory
from src.gridworld import scene as scn
from src.utils.logger import get_logger
# external imports
import argparse
import json
import os
import signal as sig
import sys
import threading

logger = get_logger(__name__)

# set by the signal handler; long-running loops poll it between units of work
stop_event = threading.Event()

# methods of the main logic
def start(*signals):
    logger.info("Starting org-navigation.")
    # trap signals from args using stop function as handler
    for s in signals: sig.signal(s, stop)

def stop(signum, frame=None):
    logger.info(f"Received a signal '{signum}' to stop. Finishing the current unit of work.")
    stop_event.set()

def abort(code:int):
    logger.info(f"Exiting with code {code}.")
    sys.exit(code)

def load_config(path_file:str):
    try:
        if path_file:
            return utils.Configuration(os.path.dirname(path_file) or './', os.path.basename(path_file))
        return utils.Configuration()
    except err.InvalidConfigFile as cferr:
        logger.info(f"Unable to load settings because the config file does not exist: {cferr.path_file}.")
        abort(1)
    except err.ConfigParseError as cperr:
        logger.info(f"Unable to parse settings in the config file: {cperr.error}.")
        abort(1)
    except err.InvalidConfigAttr as caerr:
        logger.info(f"Check your config file. There's an invalid attribute: {caerr.attribute}.")
        abort(1)

def apply_overrides(config, args):
    # flags win over the config file; setters validate them
    if args.seed is not None: config.seed = args.seed
    if getattr(args, 'episodes', None) is not None:
        if args.command == 'train-tpn': config.tpn_episodes = args.episodes
        else: config.train_episodes = args.episodes
    if getattr(args, 'workers', None) is not None: config.workers = args.workers
    if getattr(args, 'ablation', None) is not None: config.ablation = args.ablation
    if getattr(args, 'adapt', None) is not None: config.adapt = args.adapt == 'on'
    if getattr(args, 'episodes_per_scene', None) is not None: config.episodes_per_scene = args.episodes_per_scene
    if getattr(args, 'split', None) is not None: config.split = args.split
    if getattr(args, 'tpn_mode', None) is not None: config.tpn_mode = args.tpn_mode
    if getattr(args, 'scenes', None) is not None: config.scenes_directory = args.scenes
    if args.out is not None: config.out = args.out

def write_json(path_file:str, data):
    with open(path_file, 'w', encoding='utf-8') as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write('\n')

# subcommands
def gen_scenes(config, args):
    directory = args.out or config.scenes_directory
    if args.template:
        # a flat directory of scenes from one template file
        template = scn.load_template(args.template)
        os.makedirs(directory, exist_ok=True)
        for i in range(args.count):
            scene = scn.generate_scene(config.seed * sut.SEED_STRIDE + i, template)
            scn.save_scene(os.path.join(directory, f"{scene.scene_id}.json"), scene)
        print(f"Wrote {args.count} '{template.scene_type}' scenes to '{directory}'.")
        return
    suite = sut.build_suite(config.seed, sizes=config.scenes_per_type)
    sut.save_suite(directory, suite)
    print(f"Wrote {len(suite.train)} train, {len(suite.val)} val and {len(suite.test)} test scenes to '{directory}'.")

def train_nav(config, args):
    suite = sut.load_suite(config.scenes_directory)
    result = training.train_navigation(config.train_config('nav'), suite.train, suite.val,
                                       config.episode_config(), config.sensor_config(), config.deadlock_config(),
                                       stop_event)
    os.makedirs(config.out, exist_ok=True)
    path_file = os.path.join(config.out, 'nav.ckpt')
    ckpt.save_checkpoint(path_file, result)
    write_json(os.path.join(config.out, 'nav_history.json'), result.history)
    print(f"Saved the navigation checkpoint ({result.episodes} episodes) to '{path_file}'.")

def train_tpn(config, args):
    suite = sut.load_suite(config.scenes_directory)
    nav_path = args.checkpoint or os.path.join(config.out, 'nav.ckpt')
    nav = ckpt.load_checkpoint(nav_path)
    deadlock = config.deadlock_config()
    result = training.train_tpn(config.train_config('tpn'), nav, suite.train, config.episode_config(),
                                config.sensor_config(), deadlock, stop_event)
    os.makedirs(config.out, exist_ok=True)
    path_file = os.path.join(config.out, 'tpn.ckpt')
    ckpt.save_checkpoint(path_file, result)
    print(f"Saved the combined checkpoint to '{path_file}'.")

def evaluate(config, args):
    scenes = sut.load_split(config.scenes_directory, config.split)
    common = dict(episodes_per_scene=config.episodes_per_scene, seed=config.seed, config=config.episode_config(),
                  sensor=config.sensor_config(), deadlock=config.deadlock_config(),
                  min_length=config.long_episode_length, stop_event=stop_event)
    if args.policy == 'random':
        report, results, traces = evaluation.evaluate_agent(agents.RandomAgent(config.seed), scenes, **common)
    elif args.policy == 'expert':
        report, results, traces = evaluation.evaluate_agent(agents.ExpertAgent(), scenes, **common)
    else:
        path_file = args.checkpoint or os.path.join(config.out, 'tpn.ckpt' if config.adapt else 'nav.ckpt')
        checkpoint = ckpt.load_checkpoint(path_file)
        report, results, traces = evaluation.evaluate(checkpoint, scenes, adapt=config.adapt, tpn_mode=config.tpn_mode,
                                                      learning_rate=config.adapt_learning_rate,
                                                      scope=config.adapt_scope, path_file=path_file, **common)
    os.makedirs(config.out, exist_ok=True)
    evaluation.write_metrics_json(os.path.join(config.out, 'metrics.json'), report)
    evaluation.write_results_csv(os.path.join(config.out, 'episodes.csv'), results)
    evaluation.write_traces_json(os.path.join(config.out, 'traces.json'), traces)
    print(report.table())

def render(config, args):
    scenes = {s.scene_id: s for s in sut.load_suite(config.scenes_directory).all_scenes()}
    loaded = {f: evaluation.load_traces(f) for f in args.traces}
    chosen = {label: traces[args.index] for label, traces in loaded.items()}
    first = next(iter(chosen.values()))
    if first.scene_id not in scenes:
        raise err.TraceMismatchError(f"Scene '{first.scene_id}' is not part of '{config.scenes_directory}'.")
    scene = scenes[first.scene_id]
    os.makedirs(config.out, exist_ok=True)
    stem = os.path.join(config.out, f"trajectory_{args.index}")
    if len(chosen) == 1:
        svg, ascii_grid = trajectory.render_trajectory(scene, first)
        with open(f"{stem}.txt", 'w', encoding='utf-8') as f:
            f.write(ascii_grid)
        print(ascii_grid, end='')
    else:
        svg = trajectory.render_case_study(scene, chosen)
    with open(f"{stem}.svg", 'w', encoding='utf-8') as f:
        f.write(svg)

COMMANDS = {'gen-scenes': gen_scenes, 'train-nav': train_nav, 'train-tpn': train_tpn, 'eval': evaluate, 'render': render}

def parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--seed', type=int)
    shared.add_argument('--config', help="INI or JSON config file (default: ./CONFIG.ini)")
    shared.add_argument('--out', help="output directory")
    shared.add_argument('--scenes', help="scene split directory")
    main_parser = argparse.ArgumentParser(prog='org_navigation', description=__doc__,
                                          formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = main_parser.add_subparsers(dest='command', required=True)
    scenes_parser = sub.add_parser('gen-scenes', parents=[shared])
    scenes_parser.add_argument('--template', help="scene template JSON; writes --count scenes of it instead of the split")
    scenes_parser.add_argument('--count', type=int, default=1)
    for name in ('train-nav', 'train-tpn'):
        train = sub.add_parser(name, parents=[shared])
        train.add_argument('--episodes', type=int)
        train.add_argument('--workers', type=int)
        train.add_argument('--ablation', choices=['none', 'no-org', 'no-il', 'il-all'])
        train.add_argument('--checkpoint', help="navigation checkpoint to freeze (train-tpn)")
    evaluate_parser = sub.add_parser('eval', parents=[shared])
    evaluate_parser.add_argument('--checkpoint')
    evaluate_parser.add_argument('--adapt', choices=['on', 'off'])
    evaluate_parser.add_argument('--episodes-per-scene', type=int)
    evaluate_parser.add_argument('--split', choices=['val', 'test'])
    evaluate_parser.add_argument('--tpn-mode', choices=['deadlock', 'all', 'random'])
    evaluate_parser.add_argument('--policy', choices=['model', 'random', 'expert'], default='model')
    render_parser = sub.add_parser('render', parents=[shared])
    render_parser.add_argument('--traces', nargs='+', required=True, help="traces.json files written by 'eval'")
    render_parser.add_argument('--index', type=int, default=0)
    return main_parser

def main(argv=None):
    args = parser().parse_args(argv)
    # startup procedure to trap INT and TERM signals
    start(sig.SIGINT, sig.SIGTERM, *([sig.SIGHUP] if hasattr(sig, "SIGHUP") else []))
    config = load_config(args.config)
    try:
        apply_overrides(config, args)
        COMMANDS[args.command](config, args)
    except err.InvalidConfigAttr as caerr:
        logger.info(f"There's an invalid attribute: {caerr.attribute}.")
        print(f"error: {caerr.message}", file=sys.stderr)
        abort(1)
    except err.NavigationException as nerr:
        logger.info(f"'{args.command}' failed: {nerr.message}")
        print(f"error: {nerr.message}", file=sys.stderr)
        abort(1)
    logger.info(f"'{args.command}' is done.")

if __name__ == "__main__":
    main()
