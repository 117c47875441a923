# Command-line front end: argument parsing -> RunConfig -> dispatch to the engine ->
# self-describing JSON lines or CSV on stdout, diagnostics on stderr

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import pandas as pd

from src import __version__
from src.character_engine import character_table, q_regular_classes, ENGINE
from src.partition_core import Partition, CycleType, parse_partition, parse_cycle_type
from src.pipeline import AuditPipeline, SUITES, create_database, load_growth_h, save_growth_series
from src.presentations import DemuskinPresentation, invariants, parse_presentation
from src.random_walks import (
    WalkSpec,
    l2_distance_sq,
    mixing_time_combinatorial,
    mixing_time_statistical,
    sample_walk,
    step_distribution,
)
from src.root_numbers import multiplicity_records, stabilized_constant, closed_form_constant
from src.subgroup_growth import (
    growth_series,
    main_term,
    one_relator_main_term,
    demuskin_main_term,
    triangle_237_prediction,
    TRIANGLE_237,
)
from src.sym_statistics import MomentSpec, hom_sequence, cycle_moment_sum, moment_polynomial
from src.utils import (
    setup_logger,
    attach_log_file,
    set_console_level,
    load_settings,
    format_exact,
    SymCharError,
    NonConvergenceError,
    SizeMismatchError,
    UsageError,
)

logger = setup_logger('CLI')

COMMANDS = ('chartable', 'homcount', 'moments', 'rootmult', 'growth', 'walk', 'audit', 'main-term')


@dataclass
class RunConfig:
    """One parsed invocation; the ceilings are validated by load_settings."""
    command: str
    params: dict = field(default_factory=dict)
    emit: str = 'json'
    seed: int = None
    threads: int = None
    precision: int = None
    n_ceiling: int = None
    log_file: str = None
    quiet: bool = False

    def settings(self):
        return load_settings(seed=self.seed, threads=self.threads, precision=self.precision,
                             n_ceiling=self.n_ceiling, log_file=self.log_file)


# Serialization

def to_serializable(value, precision: int = 50):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, CycleType):
        return value.to_json()
    if isinstance(value, Partition):
        return value.to_json()
    if isinstance(value, Fraction):
        return format_exact(value)
    if isinstance(value, int):
        return value
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, precision)
    if isinstance(value, dict):
        return {str(key): to_serializable(item, precision) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(item, precision) for item in value]
    return str(value)


def emit_json(records: list, config: RunConfig, stream, precision: int = 50):
    for record in records:
        payload = dict(record)
        payload.update({'command': config.command, 'params': config.params, 'version': __version__})
        stream.write(json.dumps(to_serializable(payload, precision), sort_keys=True) + '\n')


def emit_csv(records: list, config: RunConfig, stream, precision: int = 50):
    rows = []
    for record in records:
        # Same provenance fields as the JSON records
        row = {'command': config.command, 'version': __version__}
        for key, value in to_serializable(record, precision).items():
            row[key] = json.dumps(value) if isinstance(value, (list, dict)) else value
        rows.append(row)
    pd.DataFrame(rows).to_csv(stream, index=False)


# Commands

def cmd_chartable(config: RunConfig, settings) -> list:
    n = config.params['n']
    classes = None
    selector = config.params.get('classes')
    if selector:
        kind, _, value = selector.partition(':')
        if kind != 'q-regular' or not value.isdigit():
            raise UsageError(f"--classes expects q-regular:Q, got {selector!r}")
        classes = q_regular_classes(n, int(value), ceiling=settings.n_ceiling)
    return [
        {'partition': lam, 'class': c, 'value': format_exact(value)}
        for lam, c, value in character_table(n, classes=classes, ceiling=settings.n_ceiling)
    ]


def cmd_homcount(config: RunConfig, settings) -> list:
    q, n_max = config.params['q'], config.params['n_max']
    counts = hom_sequence(q, n_max)
    return [{'q': q, 'n': n, 'count': format_exact(counts[n])} for n in range(n_max + 1)]


def cmd_moments(config: RunConfig, settings) -> list:
    spec = MomentSpec.parse(config.params['q'], config.params.get('e', ''),
                            alternating=config.params.get('alternating', False),
                            shifted=config.params.get('shifted', False))
    if spec.shifted:
        logger.warning("shifted moments: prod (s_t + 1)^{e_t}")
    polynomial = moment_polynomial(spec)
    n = config.params['n']
    return [{
        'q': spec.q,
        'n': n,
        'exponents': [list(pair) for pair in spec.exponents],
        'alternating': spec.alternating,
        'shifted': spec.shifted,
        'value': format_exact(cycle_moment_sum(spec, n)),
        'polynomial': [format_exact(c) for c in polynomial.coefficients],
    }]


def cmd_rootmult(config: RunConfig, settings) -> list:
    n, q = config.params['n'], config.params['q']
    mu_text = config.params.get('mu')
    if mu_text:
        mu = parse_partition(mu_text)
        value = stabilized_constant(mu, q)
        return [{'mu': mu, 'q': q, 'constant': value, 'closed_form': closed_form_constant(mu, q)}]
    return [
        {'partition': record.partition, 'q': q, 'm': format_exact(record.m), 'l': format_exact(record.l)}
        for record in multiplicity_records(n, q)
    ]


def cmd_growth(config: RunConfig, settings, show_progress: bool) -> list:
    presentation = parse_presentation(config.params['preset'])
    n_max = config.params['n_max']
    create_database(settings.db_path)
    cached = load_growth_h(settings.db_path, presentation.to_string())
    series = growth_series(presentation, n_max, threads=settings.threads, ceiling=settings.n_ceiling,
                           show_progress=show_progress, cached_h=cached)
    if len(series.h) > len(cached):
        save_growth_series(settings.db_path, series)
    return [
        {'n': n, 'h': format_exact(series.h[n]), 's': format_exact(series.s[n])}
        for n in range(1, n_max + 1)
    ]


def _walk_class(n: int, text: str) -> CycleType:
    c = parse_cycle_type(text)
    if c.weight > n:
        raise SizeMismatchError(f"class {c} does not fit in S_{n}")
    # Unlisted points are fixed
    return CycleType(tuple(c) + (1,) * (n - c.weight))


def cmd_walk(config: RunConfig, settings) -> list:
    n, k = config.params['n'], config.params['k']
    spec = WalkSpec(n, _walk_class(n, config.params['class']), config.params.get('target', 'alternating'))
    try:
        t_s = mixing_time_statistical(spec, threads=settings.threads)
    except NonConvergenceError as e:
        logger.warning(str(e))
        t_s = None
    record = {
        'n': n,
        'class': spec.c,
        'k': k,
        'target': spec.target,
        'odd_class': spec.odd_class,
        'exact_l2_sq': format_exact(l2_distance_sq(spec, k, threads=settings.threads)),
        't_c': mixing_time_combinatorial(spec.c),
        't_s': t_s,
        'exact': {str(c): format_exact(mass) for c, mass in step_distribution(spec, k).masses.items() if mass},
    }
    trials = config.params.get('trials')
    if trials:
        empirical = sample_walk(spec, k, trials, seed=settings.seed, threads=settings.threads)
        record['seed'] = settings.seed
        record['empirical'] = {str(c): format_exact(mass) for c, mass in empirical.masses.items()}
    return [record]


def cmd_audit(config: RunConfig, settings, show_progress: bool) -> list:
    pipeline = AuditPipeline(config.params['n'], db_path=settings.db_path, threads=settings.threads,
                             show_progress=show_progress)
    summary = pipeline.run(config.params.get('suite', 'all'))
    return [summary]


def cmd_main_term(config: RunConfig, settings) -> list:
    presentation = parse_presentation(config.params['preset'])
    n, precision = config.params['n'], settings.precision

    if isinstance(presentation, DemuskinPresentation):
        value = demuskin_main_term(presentation.q, presentation.d, n)
        return [{'n': n, 'kind': 'demuskin', 'main_term': format_exact(value)}]

    inv = invariants(presentation)
    if presentation.is_one_relator and inv.alpha < 0:
        log_value = one_relator_main_term(presentation.e, n, precision=precision)
        kind = 'one_relator'
    else:
        log_value = main_term(presentation, n, precision=precision)
        kind = 'fuchsian'

    record = {
        'n': n,
        'kind': kind,
        'precision': precision,
        'mu': format_exact(inv.mu),
        'alpha': format_exact(inv.alpha),
        'delta': inv.delta,
        'log_main_term': log_value,
        'main_term': mpmath.exp(log_value),
    }
    terms = config.params.get('corrections') or 0
    if terms:
        if presentation != TRIANGLE_237:
            raise UsageError("--corrections is only available for fuchsian(r=3;a=2,3,7;s=0;t=0)")
        record['corrections'] = terms
        record['prediction'] = triangle_237_prediction(n, terms=terms, precision=precision)
    return [record]


# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='symchar', description="Exact character theory of S_n")
    parser.add_argument('--threads', type=int, default=None, help="worker processes (default SYMCHAR_THREADS)")
    parser.add_argument('--seed', type=int, default=None, help="master seed for Monte Carlo")
    parser.add_argument('--precision', type=int, default=None, help="decimal digits for main terms")
    parser.add_argument('--n-ceiling', type=int, default=None, help="largest n for exact sweeps")
    parser.add_argument('--log-file', type=str, default=None)
    parser.add_argument('--quiet', action='store_true', help="warnings only, no progress bars")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")

    commands = parser.add_subparsers(dest='command', required=True)

    def add(name: str, emit_default: str = 'json'):
        sub = commands.add_parser(name)
        sub.add_argument('--emit', choices=('json', 'csv'), default=emit_default)
        return sub

    sub = add('chartable', 'csv')
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--classes', type=str, default=None, help="q-regular:Q")

    sub = add('homcount')
    sub.add_argument('--q', type=int, required=True)
    sub.add_argument('--n-max', type=int, required=True)

    sub = add('moments')
    sub.add_argument('--q', type=int, required=True)
    sub.add_argument('--e', type=str, default='', help="exponents as t:e pairs, e.g. 1:2,2:1")
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--alternating', action='store_true')
    sub.add_argument('--shifted', action='store_true')

    sub = add('rootmult', 'csv')
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--q', type=int, required=True)
    sub.add_argument('--mu', type=str, default=None)

    sub = add('growth')
    sub.add_argument('--preset', type=str, required=True)
    sub.add_argument('--n-max', type=int, required=True)

    sub = add('walk')
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--class', dest='class_', type=str, required=True)
    sub.add_argument('--k', type=int, required=True)
    sub.add_argument('--trials', type=int, default=None)
    sub.add_argument('--target', choices=('alternating', 'symmetric'), default='alternating')

    sub = add('audit')
    sub.add_argument('--suite', choices=SUITES + ('all',), default='all')
    sub.add_argument('--n', type=int, required=True)

    sub = add('main-term')
    sub.add_argument('--preset', type=str, required=True)
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--corrections', type=int, default=0)

    return parser


_GLOBAL = ('threads', 'seed', 'precision', 'n_ceiling', 'log_file', 'quiet', 'command', 'emit')


def parse_config(argv: list = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {('class' if key == 'class_' else key): value
              for key, value in vars(args).items() if key not in _GLOBAL and value is not None}
    return RunConfig(
        command=args.command,
        params=params,
        emit=args.emit,
        seed=args.seed,
        threads=args.threads,
        precision=args.precision,
        n_ceiling=args.n_ceiling,
        log_file=args.log_file,
        quiet=args.quiet,
    )


def run(config: RunConfig, stream=None) -> int:
    """
    Dispatch one command and write its records

    Returns:
        exit status: 0 ok, 2 usage, 3 resource ceiling, 4 integrity violation
        (also used when an audit records a hard failure)
    """
    stream = stream or sys.stdout
    try:
        settings = config.settings()
        if settings.log_file:
            attach_log_file(settings.log_file)
        if config.quiet:
            set_console_level(logging.WARNING)
        show_progress = not config.quiet
        logger.info(f"{config.command} {config.params} (seed {settings.seed}, threads {settings.threads})")

        if config.command == 'chartable':
            records = cmd_chartable(config, settings)
        elif config.command == 'homcount':
            records = cmd_homcount(config, settings)
        elif config.command == 'moments':
            records = cmd_moments(config, settings)
        elif config.command == 'rootmult':
            records = cmd_rootmult(config, settings)
        elif config.command == 'growth':
            records = cmd_growth(config, settings, show_progress)
        elif config.command == 'walk':
            records = cmd_walk(config, settings)
        elif config.command == 'audit':
            records = cmd_audit(config, settings, show_progress)
        elif config.command == 'main-term':
            records = cmd_main_term(config, settings)
        else:
            raise UsageError(f"unknown command {config.command!r}")

        emitter = emit_csv if config.emit == 'csv' else emit_json
        emitter(records, config, stream, precision=settings.precision)
        logger.debug(f"{config.command}: {len(records)} records, cache size {ENGINE.cache_size()}")

        if config.command == 'audit' and records[0]['failed']:
            logger.error(f"audit finished with {records[0]['failed']} hard failures")
            return 4
        return 0

    except SymCharError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


def main(argv: list = None) -> int:
    return run(parse_config(argv))
