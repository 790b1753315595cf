#!/usr/bin/env python3

import contextlib
import io
import json
import sys

import cli
from cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, run_command
from config import SessionConfig


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue()


def test_coproduct_text():
    code, out = run(['coproduct', '--algebra', 'B', '--gen', '1', '--cap', '6'])
    assert code == EXIT_OK
    assert out.strip() == 'h0⊗h1 + h1⊗h0^2'


def test_coproduct_json():
    code, out = run(['coproduct', '--gen', '1', '--cap', '6', '--output', 'json'])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data['algebra'] == 'A' and data['generator'] == 1


def test_qstruct_json():
    code, out = run(['qstruct', '--gen', '0', '--cap', '8', '--output', 'json'])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data['op'] == 'Q' and data['gen'] == 'ξ0'
    assert data['series'][0] == [0, 'ξ0^2']


def test_qstruct_reaches_the_cap():
    code, out = run(['qstruct', '--gen', '0', '--cap', '8', '--output', 'json'])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data['cap'] == 8
    # Q_t(ξ0) = ξ0·Σ ξ_j t^(2^j - 1)
    assert [k for k, _ in data['series']] == [0, 1, 3, 7]
    assert 'ξ3' in data['series'][3][1]
    code, out = run(['qstruct', '--gen', '0', '--cap', '8'])
    assert 'ξ3' in out and out.strip().endswith('O(9)')


def test_fgl_ranks():
    code, out = run(['fgl', '--fgl', 'universal', '--cap', '6', '--output', 'json'])
    assert code == EXIT_OK
    assert json.loads(out)['ranks'] == [1, 0, 1, 0, 2, 1]


def test_boardman_of_rp2():
    code, out = run(['charnum', 'beta', '--manifold', 'RP2'])
    assert code == EXIT_OK
    assert out.strip() == 'h0·h2 + h1^2'


def test_unknown_manifold_is_usage_error():
    code, _ = run(['charnum', 'beta', '--manifold', 'CP2'])
    assert code == EXIT_USAGE


def test_unknown_flag_is_usage_error():
    code, _ = run(['verify', '--bogus'])
    assert code == EXIT_USAGE


def test_cap_over_budget():
    code, _ = run(['coproduct', '--gen', '1', '--cap', '100'])
    assert code == EXIT_BUDGET


def test_bad_environment_cap_is_usage_error():
    saved = cli.config
    cli.config = SessionConfig(cap='eight')
    try:
        code, _ = run(['coproduct', '--gen', '1'])
    finally:
        cli.config = saved
    assert code == EXIT_USAGE


def test_internal_error_is_a_failure_not_usage():
    saved = cli._dispatch

    def broken(args, cfg):
        raise ValueError('not enough values to unpack')

    cli._dispatch = broken
    try:
        code, _ = run(['coproduct', '--gen', '1', '--cap', '6'])
    finally:
        cli._dispatch = saved
    assert code == EXIT_FAIL


def test_main_is_run_command():
    assert main is run_command


def test_verify_hopf_json_lines():
    code, out = run(['verify', '--suite', 'hopf', '--cap', '6', '--output', 'json'])
    assert code == EXIT_OK
    lines = [json.loads(line) for line in out.splitlines() if line.strip()]
    cases = [line for line in lines if 'status' in line]
    assert cases and all(case['status'] != 'fail' for case in cases)
    assert all(line['schema'] == lines[0]['schema'] for line in lines)


def test_verify_all_passes_without_skips():
    code, out = run(['verify', '--suite', 'all', '--cap', '8', '--output', 'json'])
    lines = [json.loads(line) for line in out.splitlines() if line.strip()]
    statuses = {line['status'] for line in lines if 'status' in line}
    assert code == EXIT_OK, [line for line in lines if line.get('status') != 'pass']
    assert statuses == {'pass'}
    suites = {line['suite'] for line in lines}
    assert 'qring' in suites and 'negative-control' in suites


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith('test_')]
    failed = 0
    for name, fn in tests:
        try:
            fn()
            print(f"✓ {name}")
        except Exception as e:
            failed += 1
            print(f"✗ {name}: {e!r}")
    sys.exit(1 if failed else 0)
