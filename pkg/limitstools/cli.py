import argparse
import copy
import csv
import io
import json
import logging
import sys

from tabulate import tabulate

import limitstools.architecture as architecture
import limitstools.scenario as scenario
from limitstools.errors import (
    BoundViolationException,
    DomainException,
    GraphValidationException,
    MissingBranchStatException,
    ResolutionException,
    ScenarioParseException,
    UnoptimizedException,
    UnsupportedDetectorException,
    UsageException,
)
from limitstools.graph import load_graph
from limitstools.report import FORMATS, render, render_series
from limitstools.reproduce import CASES, reproduce
from limitstools.version import __version__


log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

# c_gate assumed for a bare graph file
DEFAULT_C_GATE = 1.0

# failures reported as a one-line diagnostic and exit code 1
HANDLED = (
    BoundViolationException,
    DomainException,
    GraphValidationException,
    MissingBranchStatException,
    OSError,
    ResolutionException,
    ScenarioParseException,
    UnoptimizedException,
    UnsupportedDetectorException,
    UsageException,
)

COMMANDS = [
    ('capacity', 'cap'),
    ('demand', 'dem'),
    ('supply', 'sup'),
    ('mincut', 'mc'),
    ('tail', 'tl'),
    ('fbl', None),
    ('throughput', 'tp'),
    ('simulate', 'sim'),
    ('feasible', 'feas'),
    ('reproduce', 'rep'),
    ('sweep', 'sw'),
    ('list-architectures', 'ls'),
    ('describe-architecture', 'ds'),
]


class ArgumentParser(argparse.ArgumentParser):
    """
    Raises UsageException instead of exiting, so usage errors map to exit code 1.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageException(f'{self.prog}: {message}')


def infeasible(rows):
    return any(r.quantity == 'feasible' and r.value is False for r in rows)


def emit(args, rows, out):
    print(render(rows, args.format), file=out)
    if args.strict and infeasible(rows):
        log.warning('infeasible verdict under --strict')
        return EXIT_INFEASIBLE
    return EXIT_OK


def cli_evaluate(args, out):
    """
    Runs one scenario evaluator (capacity, demand, supply, tail, fbl, throughput, feasible).
    """
    s = scenario.load_scenario(args.scenario)
    if getattr(args, 'block_len', None) is not None:
        s = _override(s, 'block_len', args.block_len)
    return emit(args, scenario.EVALUATORS[args.command](s), out)


def load_mincut_target(path, c_gate):
    """
    A graph file or a scenario with a graph; returns (graph, c_gate).
    """
    try:
        with open(path) as f:
            obj = json.load(f)
    except json.JSONDecodeError as err:
        raise ScenarioParseException(f'{path}: line {err.lineno} column {err.colno}: {err.msg}') from err
    if isinstance(obj, dict) and 'schema' in obj:
        s = scenario.load_scenario(path)
        s.require('graph')
        if c_gate is None:
            s.require('budget')
            c_gate = s.budget.c_gate
        return s.graph, c_gate
    graph = load_graph(path)
    if c_gate is None:
        log.warning('%s: no --c-gate given; edge capacities use c_gate=%g bit/primitive', path, DEFAULT_C_GATE)
        c_gate = DEFAULT_C_GATE
    return graph, c_gate


def cli_mincut(args, out):
    graph, c_gate = load_mincut_target(args.path, args.c_gate)
    if c_gate < 0:
        raise DomainException(f'--c-gate must be nonnegative, got {c_gate}')
    return emit(args, scenario.mincut_rows(graph, c_gate), out)


def cli_simulate(args, out):
    s = scenario.load_scenario(args.scenario)
    for axis, value in (('simulation.trials', args.trials), ('simulation.master_seed', args.seed),
                        ('simulation.parallelism_hint', args.parallelism)):
        if value is not None:
            s = _override(s, axis, value)
    return emit(args, scenario.simulate_rows(s, args.experiment), out)


def _override(s, axis, value):
    """
    Sets a scenario field from a command-line flag whether or not the file spells it out.
    """
    raw = copy.deepcopy(s.raw)
    node = raw
    *parents, last = axis.split('.')
    for part in parents:
        node = node.setdefault(part, {})
    node[last] = value
    return scenario.parse_scenario(raw, base_dir=s.base_dir, name=s.name)


def cli_reproduce(args, out):
    return emit(args, reproduce(args.case), out)


def sweep_grid(args):
    if args.grid:
        return [float(v) for v in args.grid]
    if args.range:
        start, stop, num = args.range
        return scenario.linear_grid(start, stop, num)
    if args.logrange:
        start, stop, num = args.logrange
        return scenario.log_grid(start, stop, num)
    raise UsageException('sweep needs one of --grid, --range or --logrange')


def cli_sweep(args, out):
    s = scenario.load_scenario(args.scenario)
    header, series = scenario.sweep(s, args.axis, sweep_grid(args), args.quantity)
    print(render_series(header, series, args.format), file=out)
    return EXIT_OK


def cli_list_architectures(args, out):
    """
    Prints the architecture registry: kind, class and tags.
    """
    if args.tags:
        pairs = architecture.list_architectures_matching_tags(args.tags)
    else:
        pairs = architecture.list_architectures()
    records = sorted([cls.kind, name, ', '.join(cls.tags())] for name, cls in pairs)
    headers = ['Kind', 'Class', 'Tags']
    if args.format == 'json':
        print(json.dumps([dict(zip(headers, r)) for r in records], indent=2), file=out)
    elif args.format == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(headers)
        writer.writerows(records)
        print(buffer.getvalue(), end='', file=out)
    else:
        print(tabulate(records, headers=headers, tablefmt='grid'), file=out)
    return EXIT_OK


def cli_describe_architecture(args, out):
    cls = architecture.get_architecture(args.name)
    print(f'\n{cls.kind}\n', file=out)
    print(cls.describe(), file=out)
    fields = cls.field_names()
    if fields:
        print(f'\nScenario fields: {", ".join(fields)}', file=out)
    return EXIT_OK


def cli_show_options(args, out):
    """
    Show when no subcommand given.
    """
    print('No subcommand given. Choose one of the following subcommands:', file=sys.stderr)
    for command, alias in COMMANDS:
        print(f'\t{command} ({alias})' if alias else f'\t{command}', file=sys.stderr)
    return EXIT_ERROR


def build_parser():
    parser = ArgumentParser(prog='limitstools',
                            description='Supply-demand limits for remote inference under channel and compute noise.')
    parser.add_argument('--format', choices=FORMATS, default='table', help='Output format.')
    parser.add_argument('--strict', action='store_true', help='Exit with code 2 on an infeasible verdict.')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging on stderr.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.set_defaults(func=cli_show_options, command=None)
    subparsers = parser.add_subparsers(help='sub-command help')

    helps = {
        'capacity': 'Channel and primitive capacities, dispersions and error exponent.',
        'demand': 'MMSE floor, rate-distortion demand and water-filling quantities.',
        'supply': 'Labelled compute cuts, supply and binding cut for the architecture.',
        'tail': 'Detector outcome laws, message composition and replica sizing.',
        'fbl': 'Normal-approximation cuts, verdict and distortion at block length T.',
        'throughput': 'Per-instance budgets, distortion floor and lambda_max.',
        'feasible': 'End-to-end feasibility verdict: supply, demand and margin.',
    }
    for command, alias in COMMANDS:
        if command not in helps:
            continue
        sub = subparsers.add_parser(command, aliases=[alias] if alias else [], help=helps[command])
        sub.add_argument('scenario', help='Scenario JSON file.')
        if command == 'fbl':
            sub.add_argument('-T', '--block-len', type=float, help='Override the scenario block length.')
        sub.set_defaults(func=cli_evaluate, command=command)

    # mincut
    parser_mc = subparsers.add_parser('mincut', aliases=['mc'], help='Compute-graph min-cut supply and witness.')
    parser_mc.add_argument('path', help='Graph JSON file or scenario JSON file with a graph.')
    parser_mc.add_argument('-c', '--c-gate', type=float,
                           help='Primitive capacity (bits/primitive); defaults to the scenario budget, or 1.0 '
                                'with a warning for a bare graph file.')
    parser_mc.set_defaults(func=cli_mincut, command='mincut')

    # simulate
    parser_sim = subparsers.add_parser('simulate', aliases=['sim'], help='Monte Carlo check of a closed form.')
    parser_sim.add_argument('scenario', help='Scenario JSON file with a simulation block.')
    parser_sim.add_argument('-e', '--experiment', choices=scenario.EXPERIMENTS, help='Experiment to run.')
    parser_sim.add_argument('-n', '--trials', type=int, help='Override the trial count.')
    parser_sim.add_argument('-s', '--seed', type=int, help='Override the master seed.')
    parser_sim.add_argument('-p', '--parallelism', type=int, help='Override the parallelism hint.')
    parser_sim.set_defaults(func=cli_simulate, command='simulate')

    # reproduce
    parser_rep = subparsers.add_parser('reproduce', aliases=['rep'], help='Regenerate a worked example.')
    parser_rep.add_argument('--case', choices=list(CASES), required=True, help='Worked example.')
    parser_rep.set_defaults(func=cli_reproduce, command='reproduce')

    # sweep
    parser_sw = subparsers.add_parser('sweep', aliases=['sw'], help='Evaluate a command over a parameter grid.')
    parser_sw.add_argument('scenario', help='Scenario JSON file.')
    parser_sw.add_argument('-a', '--axis', required=True, help="Dotted numeric field, e.g. 'budget.m'.")
    parser_sw.add_argument('-q', '--quantity', default='supply', choices=list(scenario.EVALUATORS),
                           help='Command evaluated at each point.')
    grid = parser_sw.add_mutually_exclusive_group(required=True)
    grid.add_argument('--grid', type=float, nargs='+', help='Explicit grid values.')
    grid.add_argument('--range', type=float, nargs=3, metavar=('START', 'STOP', 'NUM'), help='Linear grid.')
    grid.add_argument('--logrange', type=float, nargs=3, metavar=('START', 'STOP', 'NUM'), help='Geometric grid.')
    parser_sw.set_defaults(func=cli_sweep, command='sweep')

    # list-architectures
    parser_ls = subparsers.add_parser('list-architectures', aliases=['ls'], help='List all architectures.')
    parser_ls.add_argument('-t', '--tags', nargs='+', help="Only architectures carrying any of the tags.")
    parser_ls.set_defaults(func=cli_list_architectures, command='list-architectures')

    # describe-architecture
    parser_ds = subparsers.add_parser('describe-architecture', aliases=['ds'], help='Describe named architecture.')
    parser_ds.add_argument('name', help='Architecture kind, e.g. hard-separation.')
    parser_ds.set_defaults(func=cli_describe_architecture, command='describe-architecture')

    return parser


def run(argv=None, out=None):
    """
    Parses argv, runs one subcommand and writes its report to out.

    Returns:
    --------
    code : int
        0 on success, 2 on an infeasible verdict under --strict, 1 on errors
    """
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except UsageException as err:
        print(f'error: {err}', file=sys.stderr)
        return EXIT_ERROR
    if args.verbose:
        logging.getLogger('limitstools').setLevel(logging.DEBUG)
    log.debug('running %s', args.command)
    try:
        return args.func(args, out)
    except HANDLED as err:
        print(f'limitstools: error: {err}', file=sys.stderr)
        return EXIT_ERROR


def main():
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)
    sys.exit(run())


if __name__ == "__main__":
    main()
