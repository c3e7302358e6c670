"""
Main entry point for the Bergman projection norm toolkit
Parses the command line, runs one command and maps failures to exit codes
"""
import logging
import sys

from cli import ConsoleUI, RunConfig, build_parser, render
from config import EXIT_CODES
from errors import DomainError, IntegrationError, ParameterError, PreconditionError

logger = logging.getLogger(__name__)


def main(argv=None):
    """
    Run one command; returns the process exit code
    0 ok, 2 invalid input, 3 numerical failure, 4 failed verification
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = RunConfig.from_args(args)
        output = ConsoleUI(cfg).run()
    except (ParameterError, DomainError, PreconditionError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CODES["INVALID_INPUT"]
    except IntegrationError as e:
        logger.error("numerical failure: %s", e)
        print(f"Numerical failure: {e}", file=sys.stderr)
        return EXIT_CODES["NUMERICAL_FAILURE"]

    text = render(output, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return output.exit_code


if __name__ == "__main__":
    sys.exit(main())
