"""
区域工厂模块

把 JSON 描述转换为区域（Domain）和紧集（CompactSet），并能反向序列化。
每种 type 标签对应一个构造函数，通过注册表按模块路径动态加载，可扩展新的形状。
"""
import importlib
import json
import os
from typing import Any, Callable, Dict, List, Tuple

from src.lab import geom
from src.utils.logger import Logger

logger = Logger.get_logger(name='domain_factory')


def parse_point(value: Any, key: str = 'point') -> complex:
    """[x, y] -> x + iy"""
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ValueError(f"字段 {key} 必须是 [x, y] 数值对，当前为 {value!r}")
    return complex(float(value[0]), float(value[1]))


def _require(payload: Dict, *keys: str) -> None:
    missing = [k for k in keys if k not in payload]
    if missing:
        raise ValueError(f"{payload.get('type')} 描述缺少字段: {', '.join(missing)}")


def _number(payload: Dict, key: str) -> float:
    value = payload[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValueError(f"字段 {key} 必须是数值，当前为 {value!r}")
    return float(value)


def _label(payload: Dict, default: str) -> str:
    label = payload.get('label', default)
    if not isinstance(label, str):
        raise ValueError(f"字段 label 必须是字符串，当前为 {label!r}")
    return label


# ---------------------------------------------------------------------------
# 各形状的构造函数：(描述, 工厂) -> 对象
# ---------------------------------------------------------------------------

def build_disk(payload: Dict, factory) -> Any:
    _require(payload, 'center', 'radius')
    return geom.make_disk(parse_point(payload['center'], 'center'), _number(payload, 'radius'),
                          _label(payload, 'disk'))


def build_annulus(payload: Dict, factory) -> Any:
    _require(payload, 'center', 'r_in', 'r_out')
    return geom.make_annulus(parse_point(payload['center'], 'center'), _number(payload, 'r_in'),
                             _number(payload, 'r_out'), _label(payload, 'annulus'))


def build_rectangle(payload: Dict, factory) -> Any:
    _require(payload, 'x', 'y')
    x = parse_point(payload['x'], 'x')
    y = parse_point(payload['y'], 'y')
    return geom.make_rectangle(x.real, x.imag, y.real, y.imag, _label(payload, 'rectangle'))


def build_polygon(payload: Dict, factory) -> Any:
    _require(payload, 'vertices')
    if not isinstance(payload['vertices'], list):
        raise ValueError("字段 vertices 必须是 [x, y] 列表")
    vertices = [parse_point(v, 'vertices') for v in payload['vertices']]
    return geom.make_polygon(vertices, _label(payload, 'polygon'))


def build_difference(payload: Dict, factory) -> Any:
    _require(payload, 'outer', 'excise')
    outer = factory.from_dict(payload['outer'])
    excise = factory.compact_from_dict(payload['excise'])
    return geom.subtract_compact(outer, excise, payload.get('label'))


def build_segment(payload: Dict, factory) -> Any:
    _require(payload, 'a', 'b')
    return geom.Segment(parse_point(payload['a'], 'a'), parse_point(payload['b'], 'b'))


def build_closed_disk(payload: Dict, factory) -> Any:
    _require(payload, 'center', 'radius')
    radius = _number(payload, 'radius')
    if radius < 0:
        raise ValueError(f"闭圆盘半径不能为负: {radius}")
    return geom.ClosedDisk(parse_point(payload['center'], 'center'), radius)


def build_segment_union(payload: Dict, factory) -> Any:
    _require(payload, 'segments')
    segments = tuple(factory.compact_from_dict(s) for s in payload['segments'])
    if not all(isinstance(s, geom.Segment) for s in segments):
        raise ValueError("segment_union 只能包含 segment")
    return geom.SegmentUnion(segments)


def build_point_cloud(payload: Dict, factory) -> Any:
    _require(payload, 'points')
    return geom.PointCloud(tuple(parse_point(p, 'points') for p in payload['points']))


class DomainFactory:
    """
    区域工厂类

    注册表把 JSON 的 type 标签映射到 (模块路径, 构造函数名)。
    """

    # 已注册的形状类型
    _registered_shapes = {
        'disk': ('src.utils.domain_factory', 'build_disk'),
        'annulus': ('src.utils.domain_factory', 'build_annulus'),
        'rectangle': ('src.utils.domain_factory', 'build_rectangle'),
        'polygon': ('src.utils.domain_factory', 'build_polygon'),
        'difference': ('src.utils.domain_factory', 'build_difference'),
        'segment': ('src.utils.domain_factory', 'build_segment'),
        'closed_disk': ('src.utils.domain_factory', 'build_closed_disk'),
        'segment_union': ('src.utils.domain_factory', 'build_segment_union'),
        'point_cloud': ('src.utils.domain_factory', 'build_point_cloud'),
    }

    @classmethod
    def _builder(cls, shape_type: str) -> Callable:
        if shape_type not in cls._registered_shapes:
            raise ValueError(f"未注册的形状类型: {shape_type}，可选 {', '.join(sorted(cls._registered_shapes))}")
        module_path, builder_name = cls._registered_shapes[shape_type]
        try:
            module = importlib.import_module(module_path)
            return getattr(module, builder_name)
        except ImportError as e:
            raise ImportError(f"无法导入形状模块 {module_path}: {str(e)}")
        except AttributeError:
            raise ImportError(f"形状模块 {module_path} 中没有构造函数 {builder_name}")

    @classmethod
    def build(cls, payload: Dict) -> Any:
        """
        按 type 标签构造区域或紧集

        Args:
            payload: JSON 描述

        Returns:
            Domain 或 CompactSet

        Raises:
            ValueError: 描述不合法或类型未注册
        """
        if not isinstance(payload, dict) or 'type' not in payload:
            raise ValueError(f"形状描述必须是带 type 字段的 JSON 对象，当前为 {payload!r}")
        return cls._builder(payload['type'])(payload, cls)

    @classmethod
    def from_dict(cls, payload: Dict) -> Any:
        """构造区域；描述的不是区域时抛出 ValueError"""
        shape = cls.build(payload)
        if not isinstance(shape, geom.Domain):
            raise ValueError(f"{payload['type']} 不是区域类型")
        return shape

    @classmethod
    def compact_from_dict(cls, payload: Dict) -> Any:
        """构造紧集；描述的不是紧集时抛出 ValueError"""
        shape = cls.build(payload)
        if not isinstance(shape, geom.CompactSet):
            raise ValueError(f"{payload['type']} 不是紧集类型")
        return shape

    @classmethod
    def register_shape(cls, shape_type: str, module_path: str, builder_name: str) -> None:
        """
        注册新的形状类型

        Args:
            shape_type: JSON type 标签
            module_path: 构造函数所在模块
            builder_name: 构造函数名，签名为 (描述, 工厂) -> 对象
        """
        cls._registered_shapes[shape_type] = (module_path, builder_name)
        logger.debug(f"已注册形状类型: {shape_type} -> {module_path}.{builder_name}")

    @classmethod
    def get_registered_shapes(cls) -> Dict[str, Tuple[str, str]]:
        """
        获取所有已注册的形状类型

        Returns:
            已注册的形状类型字典
        """
        return cls._registered_shapes.copy()


def dumps(shape) -> str:
    """规范序列化：键顺序固定，浮点数用 repr 保证解析后逐位相同"""
    return json.dumps(shape.to_dict(), ensure_ascii=False, indent=2)


def _read_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"区域文件 {path} 格式错误: {e}")


def load_domain(path: str):
    """从 JSON 文件读取一个区域"""
    return DomainFactory.from_dict(_read_json(path))


def dump_domain(shape, path: str) -> str:
    output_dir = os.path.dirname(path)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps(shape) + '\n')
    return path


def load_corpus(source: str) -> List:
    """
    读取验证语料

    Args:
        source: "default"、单个 JSON 文件（区域描述或区域描述列表）或目录（按文件名排序读取其中的 *.json）

    Returns:
        区域列表

    Raises:
        ValueError: 语料为空或描述不合法
        FileNotFoundError: 路径不存在
    """
    if source == 'default':
        from src.lab.verify import default_corpus
        return default_corpus()
    if os.path.isdir(source):
        names = sorted(n for n in os.listdir(source) if n.endswith('.json'))
        corpus = [load_domain(os.path.join(source, n)) for n in names]
    else:
        if not os.path.exists(source):
            raise FileNotFoundError(f"语料文件 {source} 不存在")
        payload = _read_json(source)
        items = payload if isinstance(payload, list) else [payload]
        corpus = [DomainFactory.from_dict(item) for item in items]
    if not corpus:
        raise ValueError(f"语料 {source} 中没有区域")
    logger.info(f"已读取语料 {source}: {', '.join(d.label for d in corpus)}")
    return corpus
