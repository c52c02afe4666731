import json
import os

import pytest

from src.lab.geom import Annulus, ClosedDisk, Difference, Disk, PointCloud, Polygon, Rectangle, Segment, SegmentUnion
from src.utils.domain_factory import DomainFactory, dump_domain, dumps, load_corpus, load_domain, parse_point

CONFIG_DIR = os.path.join(os.path.dirname(__file__), '..', '..', 'config')


def build_origin(payload, factory):
    return PointCloud((0j,))


@pytest.fixture
def registry(monkeypatch):
    monkeypatch.setattr(DomainFactory, '_registered_shapes', DomainFactory.get_registered_shapes())
    return DomainFactory


def test_parse_point():
    assert parse_point([1, -2.5]) == complex(1.0, -2.5)
    for bad in ([1], [1, 'a'], 'xy', [True, 0], None):
        with pytest.raises(ValueError):
            parse_point(bad)


@pytest.mark.parametrize('payload, cls', [
    ({'type': 'disk', 'center': [0, 0], 'radius': 1.0}, Disk),
    ({'type': 'annulus', 'center': [0, 0], 'r_in': 0.5, 'r_out': 1.0}, Annulus),
    ({'type': 'rectangle', 'x': [0, 2], 'y': [0, 1]}, Rectangle),
    ({'type': 'polygon', 'vertices': [[0, 0], [1, 0], [0, 1]]}, Polygon),
    ({'type': 'difference', 'outer': {'type': 'disk', 'center': [0, 0], 'radius': 1.0},
      'excise': {'type': 'closed_disk', 'center': [0, 0], 'radius': 0.25}}, Difference),
])
def test_build_domains(payload, cls):
    domain = DomainFactory.from_dict(payload)
    assert isinstance(domain, cls)
    assert DomainFactory.from_dict(json.loads(dumps(domain))).to_dict() == domain.to_dict()


@pytest.mark.parametrize('payload, cls', [
    ({'type': 'segment', 'a': [-2, 0], 'b': [2, 0]}, Segment),
    ({'type': 'closed_disk', 'center': [0.5, 0], 'radius': 0.1}, ClosedDisk),
    ({'type': 'segment_union', 'segments': [{'type': 'segment', 'a': [0, 0], 'b': [1, 0]},
                                            {'type': 'segment', 'a': [0, 1], 'b': [1, 1]}]}, SegmentUnion),
    ({'type': 'point_cloud', 'points': [[0, 0], [0.5, 0.5]]}, PointCloud),
])
def test_build_compacts(payload, cls):
    compact = DomainFactory.compact_from_dict(payload)
    assert isinstance(compact, cls)
    assert compact.to_dict()['type'] == payload['type']


def test_difference_label():
    payload = {'type': 'difference', 'label': 'slit',
               'outer': {'type': 'disk', 'center': [0, 0], 'radius': 1.0, 'label': 'unit-disk'},
               'excise': {'type': 'segment', 'a': [0, 0], 'b': [0.75, 0]}}
    assert DomainFactory.from_dict(payload).label == 'slit'
    del payload['label']
    assert DomainFactory.from_dict(payload).label == 'unit-disk-minus-segment'


@pytest.mark.parametrize('payload', [
    {'type': 'hexagon'},
    {'center': [0, 0]},
    [1, 2],
    {'type': 'disk', 'center': [0, 0]},
    {'type': 'disk', 'center': [0, 0], 'radius': 'one'},
    {'type': 'disk', 'center': [0, 0], 'radius': 1.0, 'label': 7},
    {'type': 'segment', 'a': [0, 0], 'b': [1, 0]},
    {'type': 'difference', 'outer': {'type': 'disk', 'center': [0, 0], 'radius': 1.0},
     'excise': {'type': 'segment', 'a': [0, 0], 'b': [5, 0]}},
])
def test_invalid_domains(payload):
    with pytest.raises(ValueError):
        DomainFactory.from_dict(payload)


def test_invalid_compacts():
    with pytest.raises(ValueError):
        DomainFactory.compact_from_dict({'type': 'disk', 'center': [0, 0], 'radius': 1.0})
    with pytest.raises(ValueError):
        DomainFactory.compact_from_dict({'type': 'closed_disk', 'center': [0, 0], 'radius': -1.0})
    with pytest.raises(ValueError):
        DomainFactory.compact_from_dict({'type': 'segment_union', 'segments': [
            {'type': 'closed_disk', 'center': [0, 0], 'radius': 1.0}]})


def test_register_shape(registry):
    registry.register_shape('origin', 'tests.utils.test_domain_factory', 'build_origin')
    assert 'origin' in registry.get_registered_shapes()
    assert registry.compact_from_dict({'type': 'origin'}).points == (0j,)


def test_register_shape_with_missing_builder(registry):
    registry.register_shape('ghost', 'tests.utils.test_domain_factory', 'build_ghost')
    with pytest.raises(ImportError):
        registry.build({'type': 'ghost'})


def test_registered_shapes_is_a_copy():
    shapes = DomainFactory.get_registered_shapes()
    shapes['bogus'] = ('x', 'y')
    assert 'bogus' not in DomainFactory.get_registered_shapes()


def test_dump_and_load_domain(tmp_path):
    domain = DomainFactory.from_dict({'type': 'annulus', 'center': [0.1, 0.2], 'r_in': 0.3, 'r_out': 0.9,
                                      'label': '圆环'})
    path = dump_domain(domain, str(tmp_path / 'nested' / 'annulus.json'))
    loaded = load_domain(path)
    assert loaded.to_dict() == domain.to_dict()
    with open(path, encoding='utf-8') as f:
        assert '圆环' in f.read()


def test_load_domain_bad_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"type": ', encoding='utf-8')
    with pytest.raises(ValueError):
        load_domain(str(path))


def test_shipped_compacts_load():
    folder = os.path.join(CONFIG_DIR, 'compacts')
    for name in sorted(os.listdir(folder)):
        with open(os.path.join(folder, name), encoding='utf-8') as f:
            DomainFactory.compact_from_dict(json.load(f))


def test_load_corpus_default():
    labels = [d.label for d in load_corpus('default')]
    assert labels == ['unit-disk', 'unit-square', 'annulus', 'slit-disk', 'rectangle-2x1']


def test_load_corpus_directory():
    labels = [d.label for d in load_corpus(os.path.join(CONFIG_DIR, 'domains'))]
    assert labels == ['annulus', 'rectangle-2x1', 'slit-disk', 'unit-disk', 'unit-square']


def test_load_corpus_file(tmp_path):
    path = tmp_path / 'corpus.json'
    path.write_text(json.dumps([{'type': 'disk', 'center': [0, 0], 'radius': 1.0, 'label': 'a'},
                                {'type': 'rectangle', 'x': [0, 1], 'y': [0, 1], 'label': 'b'}]),
                    encoding='utf-8')
    assert [d.label for d in load_corpus(str(path))] == ['a', 'b']


def test_load_corpus_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(str(tmp_path / 'missing.json'))
    empty = tmp_path / 'empty.json'
    empty.write_text('[]', encoding='utf-8')
    with pytest.raises(ValueError):
        load_corpus(str(empty))
    with pytest.raises(ValueError):
        load_corpus(str(tmp_path))
