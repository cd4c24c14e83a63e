"""argparse plumbing shared by the ``vitvs`` subcommands."""

import argparse
import logging
import multiprocessing as mp
import sys

import vitvs
from vitvs.common.exceptions import ConfigurationError, InvalidInputError
from vitvs.version import __version__

logger = logging.getLogger(__name__)

app_service_name = vitvs.config['app']['service_name']

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SHAPE = 4


def exit_code(exc):
    """Map an exception to the command-line exit status."""
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, InvalidInputError):
        return EXIT_SHAPE
    return None


def start(parser, argv, scope):
    """Parse ``argv`` and hand the namespace to ``scope['run_<command>']``.

    ``-m/--multiprocess`` is normalized to a worker count: absent means 1,
    given without a value means one worker per CPU. Configuration, I/O and
    shape errors print ``vitvs: error: ...`` and exit with 2, 3 and 4.

    Raises:
        NotImplementedError: no ``run_<command>`` in ``scope``.
    """
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        raise SystemExit()

    func = scope.get('run_' + args.command.replace('-', '_'))
    if not func:
        raise NotImplementedError('no handler for command `{}`'.format(args.command))

    workers = getattr(args, 'multiprocess', False)
    if workers is False:
        workers = 1
    elif workers is None:
        workers = mp.cpu_count()
    args.multiprocess = workers

    try:
        return func(args) or EXIT_OK
    except Exception as exc:
        code = exit_code(exc)
        if code is None:
            raise
        logger.debug('command `%s` failed', args.command, exc_info=True)
        print('{}: error: {}'.format(app_service_name, exc), file=sys.stderr)
        raise SystemExit(code)


def int_list(text):
    """``'4,5,9'`` -> ``[4, 5, 9]`` for argparse."""
    try:
        return [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated integers, got `{}`'.format(text))


base_parser = argparse.ArgumentParser(add_help=False, prog='{}'.format(app_service_name))

base_parser.add_argument('-c', '--config',
                         help='Key-value configuration file; keys without a '
                              'section prefix belong to the command\'s own section')

base_parser.add_argument('--no-log-file',
                         action='store_true',
                         help='Only log to the console')

base_parser.add_argument('-v', '--version',
                         action='version',
                         version='%(prog)s {}'.format(__version__))

# the same options after the subcommand; SUPPRESS keeps a value given
# before the subcommand
command_parser = argparse.ArgumentParser(add_help=False)

command_parser.add_argument('-c', '--config',
                            default=argparse.SUPPRESS,
                            help=argparse.SUPPRESS)

command_parser.add_argument('--no-log-file',
                            action='store_true',
                            default=argparse.SUPPRESS,
                            help=argparse.SUPPRESS)
