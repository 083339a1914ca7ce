# ============================================================================
# main.py - Command-Line Entry Point
# ============================================================================

import argparse
import logging
import sys

from pydantic import ValidationError

from config import Config
from tetris.command_registry import registry
from tetris.experiment_config import load_config
from tetris.experiments import ExperimentRunner

# Setup logging
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tetris-dynamics",
        description="Randomized-compilation simulator for continuous Hamiltonian dynamics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {Config.VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)
    for entry in registry.get_commands():
        sub = commands.add_parser(entry["name"], help=entry["description"])
        sub.add_argument("--config", required=True, help="experiment TOML file")
        sub.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
        sub.add_argument("--threads", type=int, default=None,
                         help="worker threads; never changes results")
        sub.add_argument("--out", default=None, help="output path (overrides the config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        Config.validate()
        config = load_config(args.config, {"seed": args.seed, "output": args.out})
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "<root>"
            print(f"config error: {location}: {error['msg']}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        logger.error(f"Cannot load config: {str(e)}")
        return 2

    if args.threads is not None and args.threads < 1:
        logger.error(f"--threads must be positive, got {args.threads}")
        return 2

    try:
        path = ExperimentRunner(config, threads=args.threads).run(args.command)
    except ValueError as e:
        logger.error(f"Run failed: {str(e)}")
        return 1
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}", exc_info=True)
        return 1

    logger.info(f"Done: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
