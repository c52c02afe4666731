import json
import os

import numpy as np
import pandas as pd
import pytest

from src.lab.geom import make_rectangle
from src.lab.grid import rasterize
from src.utils.data_saver import DataSaver, format_float, quantile_to_color, save_json


@pytest.fixture
def rows():
    return [{'name': 'a', 'value': 1.0 / 3.0, 'count': 2, 'ok': True},
            {'name': 'b', 'value': np.float64(2.5), 'count': np.int64(5), 'ok': False}]


def test_format_float():
    assert format_float(1.0 / 3.0) == '3.333333e-01'
    assert format_float(-2.0) == '-2.000000e+00'


def test_save_data_uses_settings(tmp_path, rows):
    saver = DataSaver({'output_dir': str(tmp_path), 'report_name': 'summary', 'report_formats': ['csv', 'json']})
    saved = saver.save_data(rows)
    assert saved == {'csv': os.path.join(str(tmp_path), 'summary.csv'),
                     'json': os.path.join(str(tmp_path), 'summary.json')}
    with open(saved['csv'], encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == 'name,value,count,ok'
    assert lines[1] == 'a,3.333333e-01,2,True'
    with open(saved['json'], encoding='utf-8') as f:
        data = json.load(f)
    assert data[0]['value'] == 0.3333333
    assert data[1]['count'] == 5


def test_save_xlsx(tmp_path, rows):
    path = DataSaver.save_report(rows, 'XLSX', str(tmp_path / 'report.xlsx'))
    frame = pd.read_excel(path, engine='openpyxl')
    assert list(frame['name']) == ['a', 'b']


def test_unsupported_format(tmp_path, rows):
    with pytest.raises(ValueError):
        DataSaver.save_report(rows, 'txt', str(tmp_path / 'report.txt'))


def test_same_input_same_bytes(tmp_path, rows):
    first = DataSaver.save_report(rows, 'csv', str(tmp_path / 'a.csv'))
    second = DataSaver.save_report(rows, 'csv', str(tmp_path / 'b.csv'))
    with open(first, 'rb') as a, open(second, 'rb') as b:
        assert a.read() == b.read()


def test_save_field(tmp_path):
    grid = rasterize(make_rectangle(0.0, 1.0, 0.0, 1.0), 8)
    real_path = DataSaver.save_field(grid.field(lambda z: z.real), str(tmp_path / 'real.csv'))
    complex_path = DataSaver.save_field(grid.field(lambda z: z * 1j), str(tmp_path / 'complex.csv'))
    assert list(pd.read_csv(real_path).columns) == ['x', 'y', 'value']
    frame = pd.read_csv(complex_path)
    assert list(frame.columns) == ['x', 'y', 'value_re', 'value_im']
    assert len(frame) == grid.size


def test_quantile_to_color():
    low, high = quantile_to_color(0.0), quantile_to_color(1.0)
    assert low.startswith('#') and len(low) == 7
    assert low != high
    assert quantile_to_color(-1.0) == low
    assert quantile_to_color(2.0) == high


def test_save_json(tmp_path):
    path = save_json({'weights': [0.25, 0.75], 'capacity': 0.5, 'converged': True},
                     str(tmp_path / 'deep' / 'measure.json'))
    with open(path, encoding='utf-8') as f:
        assert json.load(f) == {'weights': [0.25, 0.75], 'capacity': 0.5, 'converged': True}
