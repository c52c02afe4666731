import json

import pytest

from src.utils.config_parser import (ConfigParser, create_default_config, get_default_config_template,
                                     validate_section, LAB_SCHEMA)


def write_config(tmp_path, payload):
    path = tmp_path / 'lab_config.json'
    path.write_text(json.dumps(payload), encoding='utf-8')
    return str(path)


def test_template_defaults():
    template = get_default_config_template()
    assert template['lab']['resolution'] == 128
    assert template['lab']['degree'] == 20
    assert template['lab']['p_ladder'] == [1.5, 1.7, 1.9, 1.95, 1.99]
    assert template['global_settings']['report_formats'] == ['csv', 'json']
    validate_section('lab', template['lab'], LAB_SCHEMA)


def test_template_is_fresh_copy():
    get_default_config_template()['lab']['alphas'].append(0.9)
    assert get_default_config_template()['lab']['alphas'] == [0.1, 0.3, 0.5]


def test_create_default_config(tmp_path):
    path = create_default_config(str(tmp_path / 'config' / 'lab_config.json'))
    lab, settings = ConfigParser(path).parse_config()
    template = get_default_config_template()
    assert lab == template['lab']
    assert settings == template['global_settings']


def test_without_file_uses_defaults():
    lab, settings = ConfigParser().parse_config()
    assert lab['corpus'] == 'default'
    assert settings['log_level'] == 'info'


def test_file_values_override_defaults(tmp_path):
    path = write_config(tmp_path, {'lab': {'degree': 10, 'tolerances': {'kernel_robin_lower': 0.1}},
                                   'global_settings': {'output_dir': 'out'}})
    parser = ConfigParser(path)
    lab, settings = parser.parse_config()
    assert lab['degree'] == 10
    assert lab['resolution'] == 128
    assert lab['tolerances'] == {'kernel_robin_lower': 0.1}
    assert settings['output_dir'] == 'out'
    assert parser.get_lab_settings() is lab


@pytest.mark.parametrize('payload', [
    {'lab': {'resolution': 4}},
    {'lab': {'resolution': 64.0}},
    {'lab': {'degree': True}},
    {'lab': {'alphas': [0.5, 1.0]}},
    {'lab': {'p_ladder': []}},
    {'lab': {'p_ladder': [2.0]}},
    {'lab': {'ms_ratio_n': 2}},
    {'lab': {'jobs': 0}},
    {'lab': {'unknown_key': 1}},
    {'lab': {'tolerances': {'not_an_inequality': 0.1}}},
    {'lab': {'tolerances': {'kernel_robin_lower': -0.1}}},
    {'global_settings': {'report_formats': ['csv', 'pdf']}},
    {'global_settings': {'log_level': 'verbose'}},
    {'global_settings': {'log_to_file': 'yes'}},
    {'extra': {}},
    {'lab': []},
])
def test_invalid_config(tmp_path, payload):
    with pytest.raises(ValueError):
        ConfigParser(write_config(tmp_path, payload)).parse_config()


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ConfigParser(str(tmp_path / 'missing.json')).load_config()


def test_malformed_json(tmp_path):
    path = tmp_path / 'lab_config.json'
    path.write_text('{"lab": ', encoding='utf-8')
    with pytest.raises(ValueError):
        ConfigParser(str(path)).load_config()


def test_top_level_must_be_object(tmp_path):
    with pytest.raises(ValueError):
        ConfigParser(write_config(tmp_path, [1, 2])).load_config()


def test_apply_overrides():
    parser = ConfigParser()
    lab, settings = parser.apply_overrides({'resolution': 64, 'degree': None}, {'log_level': 'debug'})
    assert lab['resolution'] == 64
    assert lab['degree'] == 20
    assert settings['log_level'] == 'debug'
    with pytest.raises(ValueError):
        parser.apply_overrides({'resolution': 2})
