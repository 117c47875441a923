# Audit suites: every exact identity and oracle comparison gets run, classified
# PASS / FAIL / REPORT -> stored in SQLite -> and logged with a closing summary

import json
import math
import sqlite3
import os
from fractions import Fraction

import sympy
from tqdm import tqdm

from src import __version__
from src.character_engine import ENGINE, audit_character_bounds, character_polynomial
from src.partition_core import partitions_of, cycle_types_of, class_size, Partition
from src.presentations import FuchsianPresentation, DemuskinPresentation
from src.root_numbers import (
    multiplicity,
    stabilized_constant,
    closed_form_constant,
    alpha_discrepancy_audit,
)
from src.subgroup_growth import (
    GrowthSeries,
    hom_count_fuchsian,
    hom_count_brute,
    demuskin_hom,
    growth_series,
    one_relator_ratio,
    transform_round_trip,
    TRIANGLE_237,
)
from src.sym_statistics import (
    MomentSpec,
    constrained_count,
    iter_cycle_constraints,
    hom_count_cyclic,
    cycle_moment_sum,
    moment_polynomial,
    poisson_moment_check,
    stirling2,
    q_poly_coefficients,
)
from src.random_walks import (
    WalkSpec,
    step_distribution,
    l2_distance_sq,
    l2_distance_sq_direct,
    combinatorial_bracket,
    linf_l2_check,
    roichman_report,
)
from src.utils import setup_logger, format_exact, SymCharError, load_settings, factorial

SUITES = ('partitions', 'characters', 'statistics', 'roots', 'growth', 'walks')

# Index-k subgroup counts of the (2,3,7) triangle group, k = 1..22
TRIANGLE_237_SUBGROUPS = (1, 0, 0, 0, 0, 0, 2, 1, 1, 0, 0, 0, 0, 9, 3, 0, 0, 0, 0, 0, 9, 13)

# h_1..h_5 of the Demuskin group Gamma_{q,2}, keyed by gcd(q, 30), with a representative q
DEMUSKIN_TABLE = {
    1: (7, (1, 8, 72, 1424, 37192)),
    2: (2, (1, 4, 45, 720, 21092)),
    3: (3, (1, 8, 63, 1280, 36040)),
    5: (5, (1, 8, 72, 1424, 35792)),
    6: (6, (1, 4, 36, 576, 20840)),
    10: (10, (1, 4, 45, 720, 19692)),
    15: (15, (1, 8, 63, 1280, 34640)),
    30: (30, (1, 4, 36, 576, 19440)),
}


# Create the results tables if they don't exist
def create_database(db_path: str):
    '''

    Args:
        db_path: Path to SQLite database file (e.g., '.symchar_cache/results.db')
    '''
    directory = os.path.dirname(db_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    con = sqlite3.connect(db_path)
    cur = con.cursor()

    cur.execute('''CREATE TABLE IF NOT EXISTS results (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                suite TEXT NOT NULL,
                check_name TEXT NOT NULL,
                params TEXT,
                status TEXT,
                detail TEXT,
                created TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )''')

    # Exact h_n values per presentation, reused by later growth runs
    cur.execute('''CREATE TABLE IF NOT EXISTS growth_series (
                presentation TEXT PRIMARY KEY,
                h TEXT NOT NULL,
                created TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )''')
    con.commit()
    con.close()


# Insert one audit outcome
def insert_result(db_path: str, record: dict) -> int:
    """
    Args:
        db_path: Path to SQLite database
        record: dict with keys suite, check_name, params (dict), status, detail

    Returns:
        int: ID of inserted row
    """
    con = sqlite3.connect(db_path)
    cur = con.cursor()
    cur.execute(
        '''INSERT INTO results (suite, check_name, params, status, detail) VALUES (?, ?, ?, ?, ?)''',
        (
            record['suite'],
            record['check_name'],
            json.dumps(record['params'], sort_keys=True),
            record['status'],
            record['detail'],
        ),
    )
    con.commit()
    row_id = cur.lastrowid
    con.close()
    return row_id


def get_all_results(db_path: str) -> list:
    '''
    Returns:
        list of dicts, one per stored result, params decoded
    '''
    con = sqlite3.connect(db_path)
    con.row_factory = sqlite3.Row
    cur = con.cursor()
    cur.execute("SELECT * FROM results ORDER BY id")
    rows = [dict(row) for row in cur.fetchall()]
    con.close()
    for row in rows:
        row['params'] = json.loads(row['params']) if row['params'] else {}
    return rows


def get_results_by_suite(db_path: str, suite: str) -> list:
    con = sqlite3.connect(db_path)
    con.row_factory = sqlite3.Row
    cur = con.cursor()
    cur.execute("SELECT * FROM results WHERE suite = ? ORDER BY id", (suite,))
    rows = [dict(row) for row in cur.fetchall()]
    con.close()
    for row in rows:
        row['params'] = json.loads(row['params']) if row['params'] else {}
    return rows


# Growth series cache

def save_growth_series(db_path: str, series: GrowthSeries):
    con = sqlite3.connect(db_path)
    cur = con.cursor()
    cur.execute(
        "INSERT OR REPLACE INTO growth_series (presentation, h) VALUES (?, ?)",
        (series.presentation, json.dumps([format_exact(value) for value in series.h])),
    )
    con.commit()
    con.close()


def load_growth_h(db_path: str, presentation: str) -> list:
    """Cached [h_0, h_1, ...] for the presentation, or [] when nothing is stored."""
    if not os.path.exists(db_path):
        return []
    con = sqlite3.connect(db_path)
    cur = con.cursor()
    try:
        cur.execute("SELECT h FROM growth_series WHERE presentation = ?", (presentation,))
        row = cur.fetchone()
    except sqlite3.OperationalError:
        row = None
    con.close()
    return [Fraction(value) for value in json.loads(row[0])] if row else []


# Main pipeline for auditing the engine
class AuditPipeline:

    # Initialize pipeline
    def __init__(self, n: int, db_path: str = None, log_file: str = None, threads: int = 1,
                 show_progress: bool = False):
        """
        Args:
            n: size parameter each suite scales its checks to
            db_path: SQLite database (defaults to <SYMCHAR_CACHE_DIR>/results.db)
            log_file: Optional log file path (e.g., 'logs/audit.log')
            threads: worker processes for the character sums

        Example:
            pipeline = AuditPipeline(8, '.symchar_cache/results.db', 'logs/audit.log')
            pipeline.run('all')
        """
        self.n = n
        self.db_path = db_path or load_settings().db_path
        self.threads = threads
        self.show_progress = show_progress

        self.logger = setup_logger('AuditPipeline', log_file)
        self.logger.info(f"Initializing AuditPipeline (n={n})")
        self.logger.info(f"Database: {self.db_path}")

        create_database(self.db_path)
        self.logger.info("Database Ready")

        self.records = []
        self.stats = {
            'total': 0,
            'passed': 0,
            'failed': 0,
            'reported': 0,
            'errors': []
        }

    # Store one outcome
    def record(self, suite: str, check_name: str, params: dict, status: str, detail: str = '') -> dict:
        entry = {
            'suite': suite,
            'check_name': check_name,
            'params': params,
            'status': status,
            'detail': detail,
        }
        self.records.append(entry)
        self.stats['total'] += 1
        if status == 'PASS':
            self.stats['passed'] += 1
        elif status == 'FAIL':
            self.stats['failed'] += 1
            self.stats['errors'].append({'check': f"{suite}/{check_name}", 'error': detail})
            self.logger.error(f"{suite}/{check_name} {params}: {detail}")
        else:
            self.stats['reported'] += 1

        try:
            insert_result(self.db_path, entry)
        except sqlite3.Error as e:
            self.logger.error(f"Database error for {suite}/{check_name}: {str(e)}")
        return entry

    def expect(self, suite: str, check_name: str, params: dict, ok: bool, detail: str = ''):
        return self.record(suite, check_name, params, 'PASS' if ok else 'FAIL', detail)

    # Run one check, turning engine errors into FAIL records
    def guarded(self, suite: str, check_name: str, params: dict, check):
        try:
            return check()
        except SymCharError as e:
            self.record(suite, check_name, params, 'FAIL', f"{type(e).__name__}: {e}")
            return None

    # Suites

    def suite_partitions(self):
        for m in range(1, self.n + 1):
            lams = partitions_of(m, ceiling=m)
            self.expect('partitions', 'count', {'n': m}, len(lams) == sympy.npartitions(m),
                        f"{len(lams)} partitions")
            self.expect('partitions', 'distinct_sorted', {'n': m},
                        len(set(lams)) == len(lams) and all(a > b for a, b in zip(lams, lams[1:])))
            sizes = sum(class_size(c) for c in cycle_types_of(m, ceiling=m))
            self.expect('partitions', 'class_sizes', {'n': m}, sizes == factorial(m), format_exact(sizes))

    def suite_characters(self):
        n = self.n
        lams = partitions_of(n, ceiling=n)
        classes = cycle_types_of(n, ceiling=n)
        dims = [ENGINE.dimension(lam) for lam in lams]
        self.expect('characters', 'degree_squares', {'n': n}, sum(d * d for d in dims) == factorial(n))

        table = [[ENGINE.value(lam, c) for c in classes] for lam in lams]
        sizes = [class_size(c) for c in classes]
        rows_ok = all(
            sum(sizes[k] * table[i][k] * table[j][k] for k in range(len(classes))) == (factorial(n) if i == j else 0)
            for i in range(len(lams)) for j in range(i, len(lams))
        )
        self.expect('characters', 'row_orthogonality', {'n': n}, rows_ok)
        cols_ok = all(
            sum(table[i][a] * table[i][b] for i in range(len(lams)))
            == (factorial(n) // sizes[a] if a == b else 0)
            for a in range(len(classes)) for b in range(a, len(classes))
        )
        self.expect('characters', 'column_orthogonality', {'n': n}, cols_ok)

        report = audit_character_bounds(n, show_progress=self.show_progress)
        for name, entry in report['checks'].items():
            detail = f"holds={entry['holds']} fails={entry['fails']}"
            if entry['assertable']:
                self.expect('characters', name, {'n': n}, entry['fails'] == 0, detail)
            else:
                self.record('characters', name, {'n': n}, 'REPORT', detail)

        for mu in ((1,), (2,), (1, 1)):
            poly = character_polynomial(Partition(mu))
            if n < poly.threshold:
                continue
            lam = Partition((n - sum(mu),) + mu)
            ok = all(poly.evaluate(c) == ENGINE.value(lam, c) for c in classes)
            self.expect('characters', 'character_polynomial', {'n': n, 'mu': list(mu)}, ok)

    def suite_statistics(self):
        n = self.n
        for q in range(2, 7):
            total = sum(constrained_count(n, q, s) for s in iter_cycle_constraints(n, q))
            self.expect('statistics', 'constrained_total', {'n': n, 'q': q},
                        total == hom_count_cyclic(q, n), format_exact(total))

        for q in (2, 3, 4, 6):
            for alternating in (False, True):
                spec = MomentSpec(q=q, exponents=((1, 2),), alternating=alternating)
                brute = 0
                for c in cycle_types_of(n, ceiling=n):
                    if q % c.order:
                        continue
                    weight = -1 if alternating and sum(c.multiplicity(t) for t in range(2, q + 1, 2)) % 2 else 1
                    brute += weight * class_size(c) * c.fixed_points ** 2
                self.expect('statistics', 'moment_brute', {'n': n, 'q': q, 'alternating': alternating},
                            cycle_moment_sum(spec, n) == brute, format_exact(brute))
                polynomial = moment_polynomial(spec)
                self.expect('statistics', 'moment_polynomial', {'n': n, 'q': q, 'alternating': alternating},
                            polynomial.moment(n) == brute)

        for d in range(1, n + 1):
            for k in range(0, n // d + 1):
                self.guarded('statistics', 'poisson_moment', {'n': n, 'd': d, 'k': k},
                             lambda: self.expect('statistics', 'poisson_moment', {'n': n, 'd': d, 'k': k},
                                                 poisson_moment_check(d, k, n) is not None))

        mismatches = [
            (k, mu)
            for k in range(0, 21)
            for mu in range(0, k)
            if (mu + 1) * stirling2(k + 1, mu + 2)
            != sum(math.comb(k, nu) * stirling2(k - nu + 1, mu + 1) for nu in range(1, k + 1))
        ]
        self.expect('statistics', 'stirling_identity', {'k_max': 20}, not mismatches,
                    f"mismatches at {mismatches[:5]}" if mismatches else '')

        dominated = True
        for a in range(1, 16):
            for b in range(1, 31 - a):
                product = [0] * (a + b - 1)
                for i, x in enumerate(q_poly_coefficients(a)):
                    for j, y in enumerate(q_poly_coefficients(b)):
                        product[i + j] += x * y
                target = q_poly_coefficients(a + b)
                dominated &= all(x <= target[i] for i, x in enumerate(product))
        self.expect('statistics', 'q_poly_superadditive', {'n_max': 30}, dominated)

    def suite_roots(self):
        n = self.n
        for q in range(2, 7):
            for m in range(1, n + 1):
                def check():
                    for lam in partitions_of(m, ceiling=m):
                        multiplicity(lam, q)
                    return self.expect('roots', 'multiplicity_integral', {'n': m, 'q': q}, True)
                self.guarded('roots', 'multiplicity_integral', {'n': m, 'q': q}, check)

        for q in range(1, 9):
            for mu in ((1,), (2,), (1, 1)):
                params = {'q': q, 'mu': list(mu)}
                value = self.guarded('roots', 'stabilized_constant', params,
                                     lambda: stabilized_constant(Partition(mu), q))
                if value is not None:
                    self.expect('roots', 'stabilized_constant', params,
                                value == closed_form_constant(mu, q), format_exact(value))

        if n >= 2:
            for q in (2, 3):
                record = alpha_discrepancy_audit(n, q)
                self.record('roots', 'alpha_display', {'n': n, 'q': q}, 'REPORT',
                            f"difference {format_exact(record['difference'])}")

    def suite_growth(self):
        n = self.n
        settings = load_settings()
        genus_two = FuchsianPresentation(r=0, s=0, t=2)
        oracle_cases = [
            (genus_two, min(4, settings.brute_ceiling)),
            (FuchsianPresentation(r=3, a=(2, 3, 3)), settings.torsion_brute_ceiling),
            (TRIANGLE_237, settings.torsion_brute_ceiling),
            (FuchsianPresentation(s=2, e=(2, 2), label='onerel'), settings.brute_ceiling),
            (FuchsianPresentation(s=2, e=(3, 3), label='onerel'), settings.brute_ceiling),
        ]
        for gamma, limit in oracle_cases:
            for m in range(1, min(n, limit) + 1):
                params = {'presentation': gamma.to_string(), 'n': m}
                fast = hom_count_fuchsian(gamma, m, threads=self.threads)
                slow = hom_count_brute(gamma, m)
                self.expect('growth', 'brute_force', params, fast == slow,
                            f"{format_exact(fast)} vs {format_exact(slow)}")

        n_max = min(n, len(TRIANGLE_237_SUBGROUPS))
        cached = load_growth_h(self.db_path, TRIANGLE_237.to_string())
        series = growth_series(TRIANGLE_237, n_max, threads=self.threads, show_progress=self.show_progress,
                               cached_h=cached)
        if len(cached) < len(series.h):
            save_growth_series(self.db_path, series)
        self.expect('growth', 'triangle_237_subgroups', {'n_max': n_max},
                    tuple(series.s[1:]) == TRIANGLE_237_SUBGROUPS[:n_max],
                    ','.join(str(s) for s in series.s[1:]))
        self.expect('growth', 'transform_round_trip', {'n_max': n_max},
                    transform_round_trip(series) == series.s)

        for residue, (q, expected) in DEMUSKIN_TABLE.items():
            m_max = min(n, len(expected))
            values = tuple(Fraction(demuskin_hom(q, 2, m), factorial(m)) for m in range(1, m_max + 1))
            self.expect('growth', 'demuskin_table', {'q': q, 'gcd': residue, 'n_max': m_max},
                        values == expected[:m_max], ','.join(format_exact(v) for v in values))

        if n >= 10:
            self.one_relator_trend((3, 3), range(10, min(n, 20) + 1))

    # Hom ratio against the free product, reported per n with a trend summary
    def one_relator_trend(self, e, n_values) -> list:
        e = tuple(e)
        ratios = []
        for m in n_values:
            ratio = one_relator_ratio(e, m, threads=self.threads)
            ratios.append(ratio)
            self.record('growth', 'one_relator_ratio', {'e': list(e), 'n': m}, 'REPORT',
                        f"{format_exact(ratio)} ~ {float(ratio):.4f}")
        if ratios:
            # The ratio tends to 1; at these sizes it neither decreases monotonically nor gets within 0.05
            monotone = all(a >= b for a, b in zip(ratios, ratios[1:]))
            gap = abs(float(ratios[-1]) - 1)
            self.record('growth', 'one_relator_trend', {'e': list(e), 'n_values': list(n_values)}, 'REPORT',
                        f"monotone={monotone} final_gap={gap:.4f}")
        return ratios

    def suite_walks(self):
        n = self.n
        for m in range(3, min(n, 8) + 1):
            for c in cycle_types_of(m, ceiling=m):
                if c.is_identity:
                    continue
                spec = WalkSpec(m, c, 'alternating' if c.is_even else 'symmetric')
                params = {'n': m, 'class': c.to_json()['parts']}
                distribution = step_distribution(spec, 2)
                self.expect('walks', 'mass_total', params, distribution.total() == 1)
                self.expect('walks', 'l2_routes', params,
                            l2_distance_sq(spec, 2) == l2_distance_sq_direct(spec, 2))
                if m <= 6:
                    self.expect('walks', 'linf_l2', params, linf_l2_check(spec, 2)['holds'])

        for m in range(3, n + 1):
            for c in cycle_types_of(m, ceiling=m):
                if c.is_identity:
                    continue
                bracket = combinatorial_bracket(c)
                params = {'n': m, 'class': c.to_json()['parts']}
                self.expect('walks', 'tc_bracket', params, bracket['bracket_holds'], f"t_c={bracket['t_c']}")
                if 1 <= c.fixed_points <= m - 2:
                    self.expect('walks', 'tc_estimate', params, bracket['estimate_gap'] <= 3)
                elif c.fixed_points == 0:
                    self.expect('walks', 'tc_fixed_point_free', params, bracket['t_c'] == 2)

        if n >= 3:
            report = roichman_report(n, threads=self.threads)
            summary = report['summary']
            self.record('walks', 'roichman', {'n': n}, 'REPORT',
                        f"classes={summary['classes']} tc_le_ts={summary['tc_le_ts']} "
                        f"max_ratio={format_exact(summary['max_ratio']) if summary['max_ratio'] else 'none'}")
            self.expect('walks', 'roichman_consistency', {'n': n},
                        summary['linf_holds'] == summary['classes']
                        and summary['monotone'] == summary['classes'] - summary['periodic'])

    # Run suites
    def run(self, suite: str = 'all') -> dict:
        """
        Run one suite or all of them

        Uses tqdm for progress bar.
        Logs summary statistics at the end.

        Returns:
            summary dict with counts per status and per suite
        """
        names = SUITES if suite == 'all' else (suite,)
        for name in tqdm(names, desc="Running audit suites", disable=not self.show_progress):
            self.logger.info(f"Suite: {name}")
            getattr(self, f"suite_{name}")()

        self.logger.info("="*60)
        self.logger.info("AUDIT COMPLETE")
        self.logger.info(f"Total checks: {self.stats['total']}")
        self.logger.info(f"Passed: {self.stats['passed']}")
        self.logger.info(f"Failed: {self.stats['failed']}")
        self.logger.info(f"Reported: {self.stats['reported']}")

        if self.stats['errors']:
            self.logger.info("Failures:")
            for error in self.stats['errors']:
                self.logger.error(f"  {error['check']}: {error['error']}")

        self.logger.info("="*60)
        return self.summary()

    def summary(self) -> dict:
        per_suite = {}
        for entry in self.records:
            counts = per_suite.setdefault(entry['suite'], {'PASS': 0, 'FAIL': 0, 'REPORT': 0})
            counts[entry['status']] += 1
        return {
            'version': __version__,
            'n': self.n,
            'total': self.stats['total'],
            'passed': self.stats['passed'],
            'failed': self.stats['failed'],
            'reported': self.stats['reported'],
            'suites': per_suite,
        }

    # Get audit stats
    def get_statistics(self) -> dict:
        """
        Returns:
            dict with keys: total, passed, failed, reported, errors
        """
        return self.stats.copy()
