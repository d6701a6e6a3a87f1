"""
Main Entry Point for the HAR Activity-Image System
Command line for encode / filter / extract / fuse / train / eval / pipeline / demo
"""

from typing import List, Optional
import argparse
import logging
import os
import sys

from HAR_core import FileAccessError, HARError, UsageError
from HAR_demo import make_demo_dataset
from HAR_encoders import ChannelMode, Encoder
from HAR_pipeline import cmd_encode, cmd_eval, cmd_extract, cmd_filter, cmd_fuse, cmd_pipeline, cmd_train
from har_env import ENV_LOG_LEVEL, PipelineConfig, apply_overrides, format_config, load_config

logger = logging.getLogger("HAR_main")


def _shared_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--config', help='config file of `key = value` lines')
    shared.add_argument('--seed', type=int, help='base random seed (env II_SEED)')
    shared.add_argument('--jobs', type=int, help='parallel workers, -1 = all cores, 1 = serial')
    shared.add_argument('--repeats', type=int, help='number of random splits')
    shared.add_argument('--train-frac', type=float, help='training share per class')
    shared.add_argument('--encoder', choices=[e.value for e in Encoder], help='activity-image encoder')
    shared.add_argument('--channel-mode', choices=[m.value for m in ChannelMode])
    shared.add_argument('--print-config', action='store_true',
                        help='print the effective configuration and exit')
    shared.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR (env II_LOG_LEVEL)')
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(
        prog='HAR_main',
        description='Inertial activity images with multi-modality CCA fusion',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    encode = commands.add_parser('encode', parents=[shared], help='write activity images for every window')
    encode.add_argument('--manifest')
    encode.add_argument('--out', required=True)

    filter_ = commands.add_parser('filter', parents=[shared], help='derive Prewitt / high-boost images')
    filter_.add_argument('--images', required=True)
    filter_.add_argument('--out', required=True)

    extract = commands.add_parser('extract', parents=[shared], help='baseline features per modality')
    extract.add_argument('--images', required=True)
    extract.add_argument('--out', required=True)

    fuse = commands.add_parser('fuse', parents=[shared], help='two-stage CCF of three feature files')
    fuse.add_argument('--features-dir', required=True)
    fuse.add_argument('--out', required=True)

    train = commands.add_parser('train', parents=[shared], help='train the linear SVM')
    train.add_argument('--features', required=True)
    train.add_argument('--model', required=True)

    evaluate = commands.add_parser('eval', parents=[shared], help='score features with a trained SVM')
    evaluate.add_argument('--features', required=True)
    evaluate.add_argument('--model', required=True)
    evaluate.add_argument('--out', required=True)

    pipeline = commands.add_parser('pipeline', parents=[shared], help='repeated-split end-to-end evaluation')
    source = pipeline.add_mutually_exclusive_group()
    source.add_argument('--manifest')
    source.add_argument('--features-dir')
    pipeline.add_argument('--out')
    pipeline.add_argument('--save-images', action='store_true')

    demo = commands.add_parser('demo', parents=[shared], help='write the synthetic demo dataset')
    demo.add_argument('--out', required=True)
    demo.add_argument('--classes', type=int, default=3)
    demo.add_argument('--per-class', type=int, default=6)
    demo.add_argument('--length', type=int, default=104)
    return parser


def setup_logging(level_name: Optional[str]):
    level_name = (level_name or os.getenv(ENV_LOG_LEVEL) or 'INFO').upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        raise UsageError(f"unknown log level {level_name!r}")
    logging.basicConfig(level=level, format='%(message)s', stream=sys.stderr)


def effective_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults < config file < environment < flags"""
    config = load_config(args.config)
    return apply_overrides(config, {
        'seed': args.seed,
        'jobs': args.jobs,
        'repeats': args.repeats,
        'train_frac': args.train_frac,
        'encoder': args.encoder,
        'channel_mode': args.channel_mode,
        'manifest': getattr(args, 'manifest', None),
        'features_dir': getattr(args, 'features_dir', None),
        'output_dir': getattr(args, 'out', None) if args.command == 'pipeline' else None,
    })


def run_command(args: argparse.Namespace, config: PipelineConfig):
    if args.command == 'encode':
        if not config.manifest:
            raise UsageError("encode needs --manifest (or manifest in the config file)")
        cmd_encode(config, args.out)
    elif args.command == 'filter':
        cmd_filter(config, args.images, args.out)
    elif args.command == 'extract':
        cmd_extract(config, args.images, args.out)
    elif args.command == 'fuse':
        cmd_fuse(config, args.features_dir, args.out)
    elif args.command == 'train':
        cmd_train(config, args.features, args.model)
    elif args.command == 'eval':
        cmd_eval(config, args.features, args.model, args.out)
    elif args.command == 'pipeline':
        if not (config.manifest or config.features_dir):
            raise UsageError("pipeline needs --manifest or --features-dir")
        if not config.output_dir:
            raise UsageError("pipeline needs --out (or output_dir in the config file)")
        cmd_pipeline(config, config.output_dir, args.save_images)
    elif args.command == 'demo':
        make_demo_dataset(args.out, n_classes=args.classes, per_class=args.per_class,
                          length=args.length, seed=config.seed)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return the process exit code"""
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.log_level)
        config = effective_config(args)
        if args.print_config:
            sys.stdout.write(format_config(config))
            return 0
        run_command(args, config)
    except HARError as exc:
        logger.error("Error: %s", exc)
        return exc.exit_code
    except OSError as exc:
        error = FileAccessError(f"{exc.filename or 'file'}: {exc.strerror or exc}")
        logger.error("Error: %s", error)
        return error.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
