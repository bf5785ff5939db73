import io
import json

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from twoweight import cli

from .factories import fixture_file


def run_command(name, fixture, out_dir, **options):
    stdout = io.StringIO()
    call_command(name, input=str(fixture_file(fixture)), out_dir=str(out_dir), stdout=stdout,
                 stderr=io.StringIO(), **options)
    return stdout.getvalue()


def read_report(out_dir, name):
    return json.loads((out_dir / f'{name}.json').read_text())


class TestConstantsCommand:
    def test_lebesgue(self, tmp_path):
        output = run_command('constants', 'lebesgue_d1', tmp_path)
        assert 'constants: done' in output
        report = read_report(tmp_path, 'constants')
        assert report['result']['A_p']['value'] == pytest.approx(1.0)
        assert report['manifest']['parameters']['nu'] == 2
        assert report['manifest']['parameters']['D'] == pytest.approx(16.0)
        assert (tmp_path / 'constants_constants.csv').exists()

    def test_all_constants_and_witnesses(self, tmp_path):
        run_command('constants', 'spike_d1', tmp_path, scope='general')
        result = read_report(tmp_path, 'constants')['result']
        for key in ('A_p', 'S_p', 'RH', 'testing'):
            assert result[key]['witness'] is not None
        assert result['norm_lower']['value'] == pytest.approx(result['S_p']['value'])

    def test_t_sets_the_doubling_constant(self, tmp_path):
        run_command('constants', 'lebesgue_d1', tmp_path, t=3.0)
        assert read_report(tmp_path, 'constants')['result']['D'] == pytest.approx(8.0)

    def test_workbook(self, tmp_path):
        run_command('constants', 'spike_d1', tmp_path, xlsx=True)
        assert (tmp_path / 'constants.xlsx').exists()

    def test_nu_mismatch(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run_command('constants', 'lebesgue_d1', tmp_path, nu=3)
        assert exc.value.returncode == 2
        assert 'nu' in str(exc.value)

    def test_reports_are_reproducible(self, tmp_path):
        run_command('constants', 'equal_m2_d1', tmp_path / 'a', strategy='random', seed=2)
        run_command('constants', 'equal_m2_d1', tmp_path / 'b', strategy='random', seed=2)
        assert (tmp_path / 'a' / 'constants.json').read_bytes() == (tmp_path / 'b' / 'constants.json').read_bytes()


class TestOtherCommands:
    def test_maximal_shifted(self, tmp_path):
        run_command('maximal', 'shifted_d1', tmp_path, scope='shifted')
        result = read_report(tmp_path, 'maximal')['result']
        assert result['shifted_bound']['holds']
        assert len(result['values']) == 12

    def test_maximal_budget(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run_command('maximal', 'lebesgue_d1', tmp_path, scope='general', budget=10)
        assert exc.value.returncode == 2

    def test_sparse(self, tmp_path):
        run_command('sparse', 'spike_d1', tmp_path)
        result = read_report(tmp_path, 'sparse')['result']
        assert result['failures'] == []
        assert result['coefficients'] == pytest.approx([0.75, 4.0])
        assert (tmp_path / 'sparse_family.csv').read_text().startswith('k,j,level')

    def test_sparse_failure_writes_the_report(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run_command('sparse', 'lebesgue_d1', tmp_path, base=1.01)
        assert exc.value.returncode == 1
        assert 'error' in read_report(tmp_path, 'sparse')['result']

    def test_verify_theorem(self, tmp_path):
        run_command('verify_theorem', 'lebesgue_d1', tmp_path)
        report = read_report(tmp_path, 'verify_theorem')
        assert report['result']['passed']
        assert report['result']['partitions'][0]['counts']['L'] == 0
        assert report['manifest']['parameters']['k'] == 1

    def test_verify_theorem_roots(self, tmp_path):
        run_command('verify_theorem', 'spike_d1', tmp_path, R='1:0;1:1', q=3.0)
        report = read_report(tmp_path, 'verify_theorem')
        assert len(report['result']['partitions']) == 2

    def test_verify_theorem_bad_root(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run_command('verify_theorem', 'spike_d1', tmp_path, R='1:7')
        assert exc.value.returncode == 2

    def test_small_doubling_needs_diagnostic(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run_command('verify_theorem', 'lebesgue_d1', tmp_path, D=2.0)
        assert exc.value.returncode == 2
        run_command('verify_theorem', 'lebesgue_d1', tmp_path, D=2.0, diagnostic=True)
        assert not read_report(tmp_path, 'verify_theorem')['result']['parameters']['guaranteed']

    def test_leftover_writes_a_certificate(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run_command('verify_theorem', 'leftover_d1', tmp_path, D=1.01, diagnostic=True)
        assert exc.value.returncode == 1
        result = read_report(tmp_path, 'verify_theorem')['result']
        assert not result['passed']
        (failure,) = result['failures']
        assert failure['check'] == 'leftover'
        partition = result['partitions'][0]
        assert partition['counts']['L'] == 1
        (certificate,) = partition['emptiness']['certificates']
        assert certificate['depth'] == 2
        assert [cube['level'] for cube in certificate['ancestors']] == [2, 1, 0]
        assert certificate['doubling_ratios'][0][0] == pytest.approx(1.02)

    def test_search_extremal(self, tmp_path):
        run_command('search_extremal', 'equal_m2_d1', tmp_path, population=2, iterations=2, xlsx=True)
        result = read_report(tmp_path, 'search_extremal')['result']
        assert result['iterations'] == 2
        assert result['best_input']['resolution'] == 8
        assert (tmp_path / 'search_extremal_trace.csv').exists()
        assert (tmp_path / 'search_extremal.xlsx').exists()

    def test_reduce_linear(self, tmp_path):
        run_command('reduce_linear', 'equal_m2_d1', tmp_path)
        identities = read_report(tmp_path, 'reduce_linear')['result']['identities']
        assert len(identities) == 5
        assert all(identity['holds'] for identity in identities)


class TestCli:
    def test_verify_theorem(self, tmp_path):
        status = cli.run(['verify-theorem', '--input', str(fixture_file('lebesgue_d1')), '--out-dir', str(tmp_path)])
        assert status == 0
        assert (tmp_path / 'verify_theorem.json').exists()

    def test_reduce_linear(self, tmp_path):
        argv = ['reduce-linear', '--input', str(fixture_file('equal_m2_d1')), '--out-dir', str(tmp_path)]
        assert cli.run(argv) == 0

    def test_malformed_input(self, tmp_path):
        data = json.loads(fixture_file('spike_d1').read_text())
        data['omega'][2] = -1.0
        path = tmp_path / 'negative.json'
        path.write_text(json.dumps(data))
        assert cli.run(['constants', '--input', str(path), '--out-dir', str(tmp_path)]) == 2

    def test_unknown_subcommand(self):
        assert cli.run(['plot']) == 2
        assert cli.run([]) == 2

    def test_unknown_flag(self, tmp_path):
        argv = ['sparse', '--input', str(fixture_file('spike_d1')), '--colour', 'blue']
        assert cli.run(argv) == 2

    def test_verification_failure(self, tmp_path):
        argv = ['sparse', '--input', str(fixture_file('lebesgue_d1')), '--out-dir', str(tmp_path), '--base', '1.01']
        assert cli.run(argv) == 1
        assert (tmp_path / 'sparse.json').exists()
