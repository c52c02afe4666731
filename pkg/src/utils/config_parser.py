"""
配置文件解析模块

负责解析 lab_config.json，返回数值参数（lab 段）和全局设置（global_settings 段）。
解析是严格的：未知键、类型错误或超出范围的取值都会被拒绝。
"""
import copy
import json
import os
from typing import Any, Callable, Dict, Optional, Tuple

from src.utils.logger import Logger

logger = Logger.get_logger(name='config_parser')

DEFAULT_CONFIG_PATH = 'config/lab_config.json'


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _int_at_least(low: int) -> Callable[[Any], bool]:
    return lambda v: _is_int(v) and v >= low


def _number_list(check: Callable[[float], bool]) -> Callable[[Any], bool]:
    return lambda v: isinstance(v, list) and len(v) > 0 and all(_is_number(x) and check(x) for x in v)


# 键 -> (校验函数, 取值范围说明)
LAB_SCHEMA = {
    'resolution': (_int_at_least(8), '整数 ≥ 8'),
    'degree': (_int_at_least(0), '整数 ≥ 0'),
    'alphas': (_number_list(lambda x: 0.0 < x < 1.0), '非空列表，每项位于 (0, 1)'),
    'p_ladder': (_number_list(lambda x: 1.0 < x < 2.0), '非空列表，每项位于 (1, 2)'),
    'seed': (_is_int, '整数'),
    'tolerances': (lambda v: isinstance(v, dict), '不等式编号 -> 非负数'),
    'capacity_samples': (_int_at_least(2), '整数 ≥ 2'),
    'boundary_samples': (_int_at_least(8), '整数 ≥ 8'),
    'ladder_size': (_int_at_least(2), '整数 ≥ 2'),
    'center_grid': (_int_at_least(1), '整数 ≥ 1'),
    'radius_bisections': (_int_at_least(1), '整数 ≥ 1'),
    'ms_ratio_n': (lambda v: _is_number(v) and v > 2.0, '数值 > 2'),
    'ms_eps': (lambda v: _is_number(v) and v > 0.0, '数值 > 0'),
    'jobs': (_int_at_least(1), '整数 ≥ 1'),
    'corpus': (lambda v: isinstance(v, str) and len(v) > 0, '"default" 或区域 JSON 文件路径'),
    'dbar_resolution': (_int_at_least(8), '整数 ≥ 8'),
}

GLOBAL_SCHEMA = {
    'output_dir': (lambda v: isinstance(v, str), '字符串'),
    'report_name': (lambda v: isinstance(v, str) and len(v) > 0, '非空字符串'),
    'report_formats': (lambda v: isinstance(v, list) and all(x in ('csv', 'json', 'xlsx') for x in v),
                       '由 csv / json / xlsx 组成的列表'),
    'figs_dir': (lambda v: isinstance(v, str), '字符串（空串表示不输出热图）'),
    'log_level': (lambda v: v in ('debug', 'info', 'warning', 'error', 'critical'),
                  'debug / info / warning / error / critical'),
    'log_to_file': (lambda v: isinstance(v, bool), '布尔值'),
    'log_dir': (lambda v: isinstance(v, str), '字符串'),
}


def get_default_config_template() -> Dict:
    """
    获取默认配置模板

    Returns:
        默认配置模板
    """
    return {
        "lab": {
            "resolution": 128,
            "degree": 20,
            "alphas": [0.1, 0.3, 0.5],
            "p_ladder": [1.5, 1.7, 1.9, 1.95, 1.99],
            "seed": 0,
            "tolerances": {},
            "capacity_samples": 256,
            "boundary_samples": 256,
            "ladder_size": 16,
            "center_grid": 5,
            "radius_bisections": 12,
            "ms_ratio_n": 8.0,
            "ms_eps": 0.01,
            "jobs": 1,
            "corpus": "default",
            "dbar_resolution": 48
        },
        "global_settings": {
            "output_dir": "data",
            "report_name": "report",
            "report_formats": ["csv", "json"],
            "figs_dir": "",
            "log_level": "info",
            "log_to_file": False,
            "log_dir": "logs"
        }
    }


def validate_section(section: str, values: Dict, schema: Dict) -> None:
    """
    按模式校验一个配置段

    Raises:
        ValueError: 未知键或取值不合法
    """
    if not isinstance(values, dict):
        raise ValueError(f"配置段 {section} 必须是 JSON 对象")
    unknown = sorted(set(values) - set(schema))
    if unknown:
        raise ValueError(f"配置段 {section} 含未知键: {', '.join(unknown)}")
    for key, value in values.items():
        check, description = schema[key]
        if not check(value):
            raise ValueError(f"配置项 {section}.{key} 取值 {value!r} 不合法，应为{description}")


def validate_tolerances(tolerances: Dict) -> None:
    from src.lab.verify import DEFAULT_TOLERANCES

    for key, value in tolerances.items():
        if key not in DEFAULT_TOLERANCES:
            raise ValueError(f"未知的不等式编号: {key}，可选 {', '.join(sorted(DEFAULT_TOLERANCES))}")
        if not _is_number(value) or value < 0:
            raise ValueError(f"容差 {key} 必须是非负数，当前为 {value!r}")


class ConfigParser:
    """
    配置文件解析器

    缺省值来自 get_default_config_template()，文件中的键覆盖缺省值，
    命令行参数再通过 apply_overrides 覆盖文件中的值。
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        初始化配置解析器

        Args:
            config_path: 配置文件路径；为 None 时只使用缺省值
        """
        self.config_path = config_path
        self.config = {}
        self.lab_settings = {}
        self.global_settings = {}

    def load_config(self) -> Dict:
        """
        加载配置文件

        Returns:
            配置文件内容

        Raises:
            FileNotFoundError: 配置文件不存在
            ValueError: 配置文件不是合法 JSON
        """
        if self.config_path is None:
            self.config = {}
            return self.config
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                self.config = json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"配置文件 {self.config_path} 不存在")
        except json.JSONDecodeError as e:
            raise ValueError(f"配置文件 {self.config_path} 格式错误: {e}")
        if not isinstance(self.config, dict):
            raise ValueError(f"配置文件 {self.config_path} 顶层必须是 JSON 对象")
        return self.config

    def parse_config(self) -> Tuple[Dict, Dict]:
        """
        解析并校验配置

        Returns:
            (lab 参数, 全局设置)

        Raises:
            ValueError: 未知键或取值不合法
        """
        if not self.config:
            self.load_config()

        unknown = sorted(set(self.config) - {'lab', 'global_settings'})
        if unknown:
            raise ValueError(f"配置文件含未知段: {', '.join(unknown)}")

        template = get_default_config_template()
        lab = self.config.get('lab', {})
        settings = self.config.get('global_settings', {})
        validate_section('lab', lab, LAB_SCHEMA)
        validate_section('global_settings', settings, GLOBAL_SCHEMA)
        validate_tolerances(lab.get('tolerances', {}))

        self.lab_settings = {**template['lab'], **copy.deepcopy(lab)}
        self.global_settings = {**template['global_settings'], **copy.deepcopy(settings)}
        logger.debug(f"配置解析完成: {self.config_path or '缺省配置'}")
        return self.lab_settings, self.global_settings

    def apply_overrides(self, lab: Optional[Dict] = None, settings: Optional[Dict] = None) -> Tuple[Dict, Dict]:
        """
        用命令行参数覆盖配置（值为 None 的项忽略）

        Raises:
            ValueError: 覆盖值不合法
        """
        if not self.lab_settings:
            self.parse_config()
        lab = {k: v for k, v in (lab or {}).items() if v is not None}
        settings = {k: v for k, v in (settings or {}).items() if v is not None}
        validate_section('lab', lab, LAB_SCHEMA)
        validate_section('global_settings', settings, GLOBAL_SCHEMA)
        self.lab_settings.update(lab)
        self.global_settings.update(settings)
        return self.lab_settings, self.global_settings

    def get_lab_settings(self) -> Dict:
        if not self.lab_settings:
            self.parse_config()
        return self.lab_settings

    def get_global_settings(self) -> Dict:
        if not self.global_settings:
            self.parse_config()
        return self.global_settings


def create_default_config(config_path: str = DEFAULT_CONFIG_PATH) -> str:
    """
    创建默认配置文件

    Args:
        config_path: 配置文件路径

    Returns:
        配置文件路径
    """
    config_dir = os.path.dirname(config_path)
    if config_dir:
        os.makedirs(config_dir, exist_ok=True)

    with open(config_path, 'w', encoding='utf-8') as f:
        json.dump(get_default_config_template(), f, ensure_ascii=False, indent=2)
        f.write('\n')

    logger.info(f"已在 {config_path} 创建默认配置文件")
    return config_path
