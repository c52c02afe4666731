import json
import math

import numpy as np
import pandas as pd
import pytest

from src.lab.geom import Segment, make_disk, subtract_compact
from src.lab.spectral import HARDY_UPPER_BOUND
from src.lab.verify import (COMPARISON_MONOTONE, CORPUS_LABEL, DEFAULT_TOLERANCES, HARDY_REFINEMENT,
                            KERNEL_EIGEN_C0, KERNEL_EIGEN_RATIO, KERNEL_ROBIN, SUITE_HANDLERS, DomainContext,
                            ReportRow, c0_estimate, check_comparison_monotone, check_hardy_refinement,
                            check_kernel_eigen_ratio, complement_fraction, default_corpus, emit_report,
                            error_row, excision_sweep, relative_margin, run_suite, svg_heatmap)
from src.utils.config_parser import get_default_config_template


@pytest.fixture
def lab():
    settings = get_default_config_template()['lab']
    settings.update({'resolution': 24, 'degree': 6, 'dbar_resolution': 24, 'capacity_samples': 512,
                     'boundary_samples': 32, 'center_grid': 1, 'radius_bisections': 4, 'ladder_size': 4})
    return settings


@pytest.fixture
def disk():
    return make_disk(0j, 1.0, label='unit-disk')


def test_relative_margin():
    assert relative_margin(2.0, 1.0, 'ge') == pytest.approx(1.0)
    assert relative_margin(1.0, 2.0, 'le') == pytest.approx(0.5)
    assert relative_margin(0.9, 1.0, 'ge') == pytest.approx(-0.1)
    assert relative_margin(3.0, 0.0, 'positive') == 3.0
    assert relative_margin(5.0, 1.0, 'record') == 0.0


def test_report_row_tolerance():
    row = ReportRow(KERNEL_ROBIN, 'unit-disk', {}, 0.99, 1.0, 'ge', tolerance=0.02)
    assert row.passed
    assert row.margin == pytest.approx(-0.01)
    row = ReportRow(KERNEL_ROBIN, 'unit-disk', {}, 0.97, 1.0, 'ge', tolerance=0.02)
    assert not row.passed


def test_report_row_positive_and_record():
    assert ReportRow(KERNEL_EIGEN_RATIO, 'd', {}, 0.1, 0.0, 'positive').passed
    assert not ReportRow(KERNEL_EIGEN_RATIO, 'd', {}, 0.0, 0.0, 'positive').passed
    assert ReportRow(KERNEL_EIGEN_RATIO, 'd', {}, -5.0, 0.0, 'record').passed


def test_report_row_non_finite():
    row = ReportRow(KERNEL_ROBIN, 'd', {}, math.nan, 1.0, 'ge')
    assert not row.passed
    assert row.error
    assert row.lhs == 0.0


def test_report_row_unknown_relation():
    with pytest.raises(ValueError):
        ReportRow(KERNEL_ROBIN, 'd', {}, 1.0, 1.0, 'gt')


def test_report_row_to_dict():
    row = ReportRow(KERNEL_ROBIN, 'unit-disk', {'y': 0.5, 'x': 0.25}, 2.0, 1.0, 'ge', resolution=64)
    data = row.to_dict()
    assert list(data) == ['inequality', 'domain', 'parameters', 'lhs', 'rhs', 'relation', 'margin',
                          'tolerance', 'pass', 'resolution', 'error']
    assert data['parameters'] == 'x=2.500000e-01;y=5.000000e-01'
    assert data['pass'] is True


def test_error_row():
    row = error_row(KERNEL_ROBIN, 'unit-disk', 'boom')
    assert not row.passed
    assert row.error == 'boom'


def test_default_corpus():
    labels = [d.label for d in default_corpus()]
    assert labels == ['unit-disk', 'unit-square', 'annulus', 'slit-disk', 'rectangle-2x1']


def test_every_check_has_a_tolerance():
    assert set(SUITE_HANDLERS) <= set(DEFAULT_TOLERANCES)


def test_context_tolerance_override(disk, lab):
    lab['tolerances'] = {KERNEL_ROBIN: 0.5}
    ctx = DomainContext(disk, lab)
    assert ctx.tolerance(KERNEL_ROBIN) == 0.5
    assert ctx.tolerance(COMPARISON_MONOTONE) == DEFAULT_TOLERANCES[COMPARISON_MONOTONE]


def test_context_caches(disk, lab):
    ctx = DomainContext(disk, lab)
    assert ctx.grid is ctx.grid
    assert ctx.basis is ctx.basis
    points = ctx.interior_points(5)
    assert len(points) == 5
    assert points[0] == ctx.anchor


def test_complement_fraction(disk):
    inside = complement_fraction(disk, np.array([0j]), 0.5)
    assert inside[0] == 0.0
    edge = complement_fraction(disk, np.array([1.0 + 0j]), 0.5)
    assert 0.35 < edge[0] < 0.65


def test_run_suite_with_custom_handlers(disk, lab):
    def failing(ctx):
        raise RuntimeError('solver blew up')

    rows = run_suite([disk], lab, handlers={KERNEL_EIGEN_RATIO: check_kernel_eigen_ratio,
                                            KERNEL_ROBIN: failing})
    assert [row.inequality for row in rows] == [KERNEL_EIGEN_C0, KERNEL_EIGEN_RATIO, KERNEL_ROBIN]
    assert rows[0].domain == CORPUS_LABEL
    assert rows[0].lhs == pytest.approx(rows[1].lhs)
    assert rows[0].passed and rows[1].passed
    assert rows[2].error == 'solver blew up'
    assert not rows[2].passed


def test_run_suite_is_sorted_and_parallel(disk, lab):
    square = default_corpus()[1]
    handlers = {KERNEL_EIGEN_RATIO: check_kernel_eigen_ratio}
    rows = run_suite([square, disk], lab, jobs=2, handlers=handlers)
    assert [row.domain for row in rows] == [CORPUS_LABEL, 'unit-disk', 'unit-square']
    assert rows[0].lhs == pytest.approx(min(rows[1].lhs, rows[2].lhs))


def test_run_suite_without_ratio_check_has_no_c0_row(disk, lab):
    rows = run_suite([disk], lab, handlers={HARDY_REFINEMENT: check_hardy_refinement})
    assert {row.inequality for row in rows} == {HARDY_REFINEMENT}


def test_c0_of_default_corpus(lab):
    rows = run_suite(default_corpus(), lab, handlers={KERNEL_EIGEN_RATIO: check_kernel_eigen_ratio})
    c0 = [row for row in rows if row.inequality == KERNEL_EIGEN_C0]
    assert len(c0) == 1
    assert c0[0].lhs > 0.0 and c0[0].passed
    assert c0[0].lhs == pytest.approx(min(row.lhs for row in rows if row.inequality == KERNEL_EIGEN_RATIO))


def test_c0_of_unit_disk(disk, lab):
    # κ = 1/π，λ₁ = j₀,₁²
    lab.update({'resolution': 64, 'degree': 8})
    expected = 1.0 / (math.pi * 2.404825557695773 ** 2)
    assert c0_estimate([disk], lab) == pytest.approx(expected, rel=3e-2)


def test_c0_is_dilation_invariant(disk, lab):
    # 半径 2、分辨率 16 的网格是单位圆盘分辨率 32 网格的精确放大
    small = c0_estimate([disk], dict(lab, resolution=32))
    large = c0_estimate([make_disk(0j, 2.0, label='disk-2')], dict(lab, resolution=16))
    assert large == pytest.approx(small, rel=2e-2)


def test_c0_reuses_contexts(disk, lab):
    ctx = DomainContext(disk, lab)
    value = c0_estimate([disk], lab, contexts=[ctx])
    assert value == pytest.approx(ctx.kappa / ctx.lambda1)
    with pytest.raises(ValueError):
        c0_estimate([disk, disk], lab, contexts=[ctx])
    with pytest.raises(ValueError):
        c0_estimate([], lab)


def test_hardy_refinement_rows(disk, lab):
    ctx = DomainContext(disk, lab)
    rows = check_hardy_refinement(ctx)
    assert [row.resolution for row in rows] == [12, 24]
    assert all(row.relation == 'record' and row.passed for row in rows)
    assert all(row.rhs == pytest.approx(ctx.hardy) for row in rows)
    assert rows[0].lhs >= rows[1].lhs
    assert ctx.admissible_hardy == min(HARDY_UPPER_BOUND, ctx.hardy)


def test_run_suite_empty_corpus(lab):
    with pytest.raises(ValueError):
        run_suite([], lab)


def test_comparison_monotone(disk, lab):
    assert check_comparison_monotone(DomainContext(disk, lab)) == []
    slit = subtract_compact(disk, Segment(0j, 0.75 + 0j), label='slit-disk')
    rows = check_comparison_monotone(DomainContext(slit, lab))
    assert len(rows) == 4
    assert all(row.passed for row in rows)


def test_excision_sweep(disk, lab):
    result = excision_sweep(disk, 0.5 + 0.3j, -0.2 + 0.5j, lab, levels=2)
    assert [row.length for row in result.rows] == [1.0, 0.25]
    assert not any(row.error for row in result.rows)
    for row in result.rows:
        assert row.capacity == pytest.approx(row.length / 4.0, rel=5e-2)
        assert row.difference > 0.0
    assert result.r0 == pytest.approx(1.0 - abs(0.5 + 0.3j))
    assert result.point_difference < 1e-8
    assert math.isfinite(result.exponent)


def test_emit_report(tmp_path):
    rows = [ReportRow(KERNEL_ROBIN, 'unit-disk', {'x': 0.0}, 2.0, 1.0, 'ge', resolution=32)]
    csv_path = emit_report(rows, 'csv', str(tmp_path / 'out' / 'report.csv'))
    frame = pd.read_csv(csv_path)
    with open(csv_path, encoding='utf-8') as f:
        assert f.readline().strip() == 'inequality,domain,parameters,lhs,rhs,relation,margin,tolerance,pass,resolution,error'
    assert frame.loc[0, 'lhs'] == pytest.approx(2.0)
    json_path = emit_report(rows, 'json', str(tmp_path / 'report.json'))
    with open(json_path, encoding='utf-8') as f:
        data = json.load(f)
    assert data[0]['pass'] is True
    assert data[0]['margin'] == 1.0
    with pytest.raises(ValueError):
        emit_report(rows, 'parquet', str(tmp_path / 'report.parquet'))


def test_svg_heatmap_is_deterministic(tmp_path, lab, disk):
    grid = DomainContext(disk, lab).grid
    f = grid.field(lambda z: np.abs(z) ** 2)
    first = svg_heatmap(f, str(tmp_path / 'a.svg'))
    second = svg_heatmap(f, str(tmp_path / 'b.svg'), log_scale=False)
    with open(first, 'rb') as a, open(second, 'rb') as b:
        content = a.read()
        assert content == b.read()
    assert content.startswith(b'<svg')
    assert content.count(b'<rect') == grid.size
