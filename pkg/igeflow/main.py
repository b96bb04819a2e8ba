import sys
from typing import List, Optional

from loguru import logger

from igeflow.cli.routes import build_parser
from igeflow.core.config import settings
from igeflow.core.errors import ConfigValidationError, IgeflowError


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    logger.remove()
    logger.add(sys.stderr, level=settings.LOG_LEVEL)

    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigValidationError as exc:
        print(exc.one_line(), file=sys.stderr)
        return 2
    except IgeflowError as exc:
        print(exc.one_line(), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
