import argparse

from igeflow.cli.commands import models, run, validate
from igeflow.core.config import settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Information geometric entropy of geodesic flows on statistical manifolds",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include all commands
    run.register(subparsers)
    models.register(subparsers)
    validate.register(subparsers)
    return parser
