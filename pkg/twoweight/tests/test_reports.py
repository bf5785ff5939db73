import json
import math

import numpy as np
import openpyxl
import pytest

from twoweight.reports import RunManifest, canonical_json, emit_report, jsonable, write_csv


def test_jsonable():
    data = jsonable({'a': np.float64(math.inf), 'b': [np.int64(3), np.bool_(True)], 'c': np.zeros(2)})
    assert data == {'a': 'inf', 'b': [3, True], 'c': [0.0, 0.0]}
    assert jsonable(-math.inf) == '-inf'
    assert jsonable(math.nan) == 'nan'


def test_canonical_json_is_sorted_and_exact():
    text = canonical_json({'b': 0.1 + 0.2, 'a': 1})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)['b'] == 0.1 + 0.2
    assert text.endswith('\n')


@pytest.mark.parametrize('value', [0.1 + 0.2, 1 / 3, 2 ** -1074, 1.7976931348623157e308, 100.0, 26.0 / 3])
def test_canonical_json_floats_round_trip(value):
    text = canonical_json({'x': value})
    rendered = text.split(': ')[1].split('\n')[0]
    assert rendered == repr(value)
    assert float(rendered) == value
    assert len(rendered.lstrip('-').replace('.', '').split('e')[0].lstrip('0')) <= 17
    assert canonical_json({'x': value}) == text


def test_manifest_uses_the_configured_timestamp():
    manifest = RunManifest('constants', 'in.json', {'nu': 2}, seed=3)
    assert manifest.timestamp == '2024-01-01T00:00:00+00:00'
    assert manifest.to_dict()['seed'] == 3


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / 'table.csv', ['name', 'value'], [['x', 1 / 3], ['y', math.inf]])
    lines = path.read_text().splitlines()
    assert lines[1] == f'x,{1 / 3!r}'
    assert lines[2] == 'y,inf'


def test_emit_report(tmp_path):
    manifest = RunManifest('sparse', 'in.json', {'base': 4.0})
    tables = {'family': (['k', 'j'], [[0, 0], [1, 0]])}
    paths = emit_report('sparse', {'value': 1.5}, manifest, tmp_path, tables, xlsx=True)
    assert [path.name for path in paths] == ['sparse.json', 'sparse_family.csv', 'sparse.xlsx']
    report = json.loads(paths[0].read_text())
    assert report['manifest']['subcommand'] == 'sparse'
    assert report['result'] == {'value': 1.5}

    workbook = openpyxl.load_workbook(paths[2])
    assert workbook.sheetnames == ['Manifest', 'family']
    header = workbook['family']['A1']
    assert header.value == 'k'
    assert header.font.bold
    assert workbook['family']['A3'].value == 1


def test_emit_report_default_directory(settings):
    paths = emit_report('maximal', {}, RunManifest('maximal', 'in.json', {}))
    assert str(paths[0]).startswith(settings.WEIGHTLAB_OUT_DIR)
