import argparse
import logging

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('confhor.cli')

from api.analyze import cmd_analyze
from api.diagram import cmd_diagram
from api.verify import cmd_verify
from lib.config import load_config
from lib.errors import ConfhorError, ConfigError, ConvergenceError
from lib.types import VerifySuite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_CONVERGENCE = 4

# flag name -> config key; values stay strings and are typed by the config layer
METRIC_FLAGS = {
    "--metric": "metric",
    "--M": "M",
    "--Q": "Q",
    "--a": "a",
    "--sigma": "sigma",
    "--kappa": "kappa",
    "--compactifier": "compactifier",
    "--grid": "grid",
    "--tol": "root_tol",
    "--dtol": "dtol",
    "--threads": "threads",
}
ANALYZE_FLAGS = {
    "--stages": "stages",
    "--quad-nodes": "quad_nodes",
    "--depth": "refine_depth",
    "--band": "band",
    "--out": "out",
}


def _add_flags(parser, flags):
    for flag, key in flags.items():
        parser.add_argument(flag, dest=key, default=None, metavar=key.upper())


def build_parser():
    parser = argparse.ArgumentParser(prog="confhor",
                                     description="Horizon and mass analysis of compactified spacetimes")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Run the analysis stages and write a JSON report")
    analyze.add_argument("--config", default=None, help="key = value configuration file")
    _add_flags(analyze, METRIC_FLAGS)
    _add_flags(analyze, ANALYZE_FLAGS)

    diagram = commands.add_parser("diagram", help="Write the horizon diagram CSV")
    diagram.add_argument("--config", default=None, help="key = value configuration file")
    _add_flags(diagram, METRIC_FLAGS)
    diagram.add_argument("--out", dest="diagram_out", default=None, metavar="DIAGRAM_OUT")

    verify = commands.add_parser("verify", help="Run a built-in verification suite")
    verify.add_argument("suite", help=", ".join(s.value for s in VerifySuite))
    verify.add_argument("--out", default=None, help="Also write the check results as JSON")
    verify.add_argument("--threads", type=int, default=None)
    return parser


def _flags(args):
    keys = list(METRIC_FLAGS.values())
    keys += list(ANALYZE_FLAGS.values()) if args.command == "analyze" else ["diagram_out"]
    return {key: getattr(args, key) for key in keys}


def run(args):
    if args.command == "verify":
        return cmd_verify(args.suite, args.out, args.threads)
    config = load_config(args.config, _flags(args))
    logging.getLogger().setLevel(config.log_level)
    if args.command == "analyze":
        cmd_analyze(config)
    else:
        cmd_diagram(config)
    return EXIT_OK


def main(argv=None):
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIG
    except ConvergenceError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONVERGENCE
    except ConfhorError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_STAGE
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        return EXIT_STAGE


if __name__ == "__main__":
    raise SystemExit(main())
