# test_cli.py

import io
import json

import pandas as pd
import pytest

from src import __version__
from src.cli import parse_config, run, to_serializable
from src.pipeline import get_all_results
from src.partition_core import CycleType
from src.utils import parse_exact


def invoke(argv):
    stream = io.StringIO()
    status = run(parse_config(argv), stream)
    return status, stream.getvalue()


def json_records(text):
    return [json.loads(line) for line in text.splitlines() if line]


def test_homcount_json():
    status, out = invoke(['homcount', '--q', '2', '--n-max', '4'])
    assert status == 0
    records = json_records(out)
    assert [r['count'] for r in records] == ['1', '1', '2', '4', '10']
    assert records[0]['command'] == 'homcount'
    assert records[0]['params'] == {'q': 2, 'n_max': 4}
    assert records[0]['version'] == __version__


def test_chartable_defaults_to_csv():
    status, out = invoke(['chartable', '--n', '3'])
    assert status == 0
    frame = pd.read_csv(io.StringIO(out), dtype=str)
    assert len(frame) == 9
    assert set(frame.columns) == {'command', 'version', 'partition', 'class', 'value'}
    assert list(frame.columns[:2]) == ['command', 'version']
    assert set(frame['command']) == {'chartable'}
    assert set(frame['version']) == {__version__}


def test_chartable_q_regular_selector():
    status, out = invoke(['chartable', '--n', '4', '--classes', 'q-regular:2', '--emit', 'json'])
    assert status == 0
    assert len(json_records(out)) == 5 * 3
    status, _ = invoke(['chartable', '--n', '4', '--classes', 'odd'])
    assert status == 2


def test_moments_record():
    status, out = invoke(['moments', '--q', '2', '--e', '1:1', '--n', '3'])
    assert status == 0
    record = json_records(out)[0]
    assert record['value'] == '6'
    assert record['polynomial'] == ['0', '1']


def test_rootmult_csv_and_constant():
    status, out = invoke(['rootmult', '--n', '4', '--q', '2'])
    assert status == 0
    frame = pd.read_csv(io.StringIO(out), dtype=str)
    # every irreducible of S_n is real, so each appears once in the involution count
    assert list(frame['m']) == ['1'] * 5
    status, out = invoke(['rootmult', '--n', '4', '--q', '6', '--mu', '1', '--emit', 'json'])
    assert status == 0
    assert json_records(out)[0]['constant'] == 3


def test_growth_uses_cache(cache_dir):
    argv = ['growth', '--preset', 'fuchsian(r=3;a=2,3,7;s=0;t=0)', '--n-max', '8']
    status, first = invoke(argv)
    assert status == 0
    assert [r['s'] for r in json_records(first)] == ['1', '0', '0', '0', '0', '0', '2', '1']
    assert (cache_dir / 'results.db').exists()
    status, second = invoke(argv)
    assert second == first


def test_walk_record():
    status, out = invoke(['walk', '--n', '3', '--class', '3', '--k', '2'])
    assert status == 0
    record = json_records(out)[0]
    assert record['exact_l2_sq'] == '1/4'
    assert record['t_c'] == 2 and record['t_s'] == 2
    assert record['class'] == {'role': 'class', 'parts': [3]}
    assert sum(parse_exact(v) for v in record['exact'].values()) == 1


def test_walk_pads_fixed_points_and_samples():
    argv = ['--seed', '7', 'walk', '--n', '5', '--class', '2', '--k', '1', '--trials', '50']
    status, out = invoke(argv)
    assert status == 0
    record = json_records(out)[0]
    assert record['class']['parts'] == [2, 1, 1, 1]
    assert record['empirical'] == {'(2,1,1,1)': '1'}
    assert record['seed'] == 7
    assert invoke(argv)[1] == out


def test_walk_periodic_class_reports_no_statistical_time():
    status, out = invoke(['walk', '--n', '4', '--class', '2', '--k', '2', '--target', 'symmetric'])
    assert status == 0
    assert json_records(out)[0]['t_s'] is None


def test_main_term_records():
    status, out = invoke(['--precision', '30', 'main-term', '--preset', 'fuchsian(r=3;a=2,3,7;s=0;t=0)', '--n', '40',
                          '--corrections', '1'])
    assert status == 0
    record = json_records(out)[0]
    assert record['kind'] == 'fuchsian' and record['mu'] == '1/42'
    assert float(record['prediction']) > 0
    status, out = invoke(['main-term', '--preset', 'demuskin(q=3,d=2)', '--n', '4'])
    assert json_records(out)[0]['main_term'] == str(2 * 4 * 24 ** 2)
    status, _ = invoke(['main-term', '--preset', 'onerel(e=2,2)', '--n', '10'])
    assert status == 2


@pytest.mark.parametrize('argv, code', [
    (['growth', '--preset', 'surface(g=2)', '--n-max', '3'], 2),
    (['walk', '--n', '3', '--class', '2,2', '--k', '1'], 2),
    (['--n-ceiling', '10', 'chartable', '--n', '12'], 3),
    (['--n-ceiling', '200', 'homcount', '--q', '2', '--n-max', '3'], 3),
    (['--threads', '0', 'homcount', '--q', '2', '--n-max', '3'], 2),
])
def test_exit_codes(argv, code):
    status, out = invoke(argv)
    assert status == code
    assert out == ''


def test_argparse_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        parse_config(['walk', '--n', '3'])
    assert exc.value.code == 2


def test_audit_command(cache_dir):
    status, out = invoke(['--quiet', 'audit', '--suite', 'partitions', '--n', '6'])
    assert status == 0
    summary = json_records(out)[0]
    assert summary['failed'] == 0 and summary['passed'] == 18


def test_serialization_is_exact():
    from fractions import Fraction
    assert to_serializable(Fraction(3, 5)) == '3/5'
    assert to_serializable(CycleType((2, 1))) == {'role': 'class', 'parts': [2, 1]}
    assert to_serializable({'a': (1, True, None)}) == {'a': [1, True, None]}


def _audit_transcript(tmp_path, monkeypatch, threads):
    target = tmp_path / f'cache_{threads}'
    monkeypatch.setenv('SYMCHAR_CACHE_DIR', str(target))
    text = ''
    for suite in ('partitions', 'roots', 'walks'):
        status, out = invoke(['--quiet', '--threads', str(threads), '--seed', '2024',
                              'audit', '--suite', suite, '--n', '5'])
        assert status == 0
        text += out
    rows = [
        (row['suite'], row['check_name'], json.dumps(row['params'], sort_keys=True), row['status'], row['detail'])
        for row in get_all_results(str(target / 'results.db'))
    ]
    return text, rows


def test_audit_output_independent_of_threads(tmp_path, monkeypatch):
    baseline = _audit_transcript(tmp_path, monkeypatch, 1)
    assert baseline[1]
    for threads in (4, 16):
        assert _audit_transcript(tmp_path, monkeypatch, threads) == baseline
