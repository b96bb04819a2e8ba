import argparse

from loguru import logger

from igeflow.schemas import load_config


def validate(args: argparse.Namespace) -> int:
    """Parse a config and report it as valid; errors propagate to main."""
    config = load_config(args.config)
    logger.info(f"{args.config}: {config.model.catalog_name}, {config.grid_points} grid points")
    print(f"OK: {args.config}")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("validate", help="Check an experiment config")
    parser.add_argument("config", help="Path to a JSON config")
    parser.set_defaults(handler=validate)
