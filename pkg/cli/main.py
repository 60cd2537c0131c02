"""Argument parsing and exit-code mapping."""
import sys
import logging
import argparse

from cli.commands import COMMAND_HANDLERS
from cli.config import COMMANDS, load_config
from cli.output import EXIT_NEGATIVE, EXIT_USAGE
from core.errors import ConfigError, FinslerKitError, InputError

logger = logging.getLogger(__name__)


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="finslerkit",
        description="Numerical experiments on Finsler and Riemannian metric-measure spaces.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run document")
    parser.add_argument("--out", default=None, help="output directory (overrides the document)")
    parser.add_argument("--seed", type=int, default=None, help="seed (overrides the document)")
    return parser.parse_args(argv)


def run(argv: list[str] | None = None) -> int:
    """
    Run one command.

    Returns:
        0 pass, 1 negative result, 2 usage or config error, 3 inconclusive
    """
    args = _parse_args(argv)
    try:
        config = load_config(args.config, args.command, out=args.out, seed=args.seed)
        return COMMAND_HANDLERS[config.command](config)
    except (ConfigError, InputError) as e:
        print(f"finslerkit {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FinslerKitError as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"finslerkit {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NEGATIVE
