"""
平面区域模块

用构造树描述有界平面区域（圆盘、圆环、矩形、多边形以及挖去紧集后的差集），
并提供成员判定、边界距离 δ_Ω、面积、直径、内切半径等几何量。

所有点都用复数表示，所有方法都接受标量或 numpy 数组。
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.utils.logger import Logger

logger = Logger.get_logger(name='geom')

# 与多边形边距离小于该值的点判为区域外，保证区域内 δ_Ω 严格为正
EDGE_TOLERANCE = 1e-12
# 紧集默认采样密度：每单位直径 64 个点
DEFAULT_SAMPLES_PER_UNIT = 64
# 非精确内切半径的格点扫描分辨率（每个包围盒方向）
INRADIUS_SCAN_POINTS = 256

BoundingBox = Tuple[float, float, float, float]


def _as_points(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _result(values: np.ndarray, z):
    """标量输入返回标量，数组输入返回数组"""
    if np.ndim(z) == 0:
        return values.item()
    return values


def segment_distance(z, a: complex, b: complex) -> np.ndarray:
    """
    点到线段 [a, b] 的精确距离

    Args:
        z: 复数点（标量或数组）
        a: 线段起点
        b: 线段终点

    Returns:
        距离数组
    """
    p = _as_points(z)
    d = b - a
    length2 = abs(d) ** 2
    if length2 == 0.0:
        return np.abs(p - a)
    t = np.clip(((p - a) * np.conj(d)).real / length2, 0.0, 1.0)
    return np.abs(p - (a + t * d))


# ---------------------------------------------------------------------------
# 紧集
# ---------------------------------------------------------------------------

class CompactSet:
    """
    被挖去的紧集 E 的公共接口

    子类需实现 distance / sample / 包围盒等方法。采样对固定 n 是确定性的，
    且每个采样点都满足 contains。
    """

    kind = 'compact'

    def distance(self, z) -> np.ndarray:
        raise NotImplementedError

    def contains(self, z):
        dist = np.asarray(self.distance(z))
        return _result(dist <= EDGE_TOLERANCE, z)

    def sample(self, n: Optional[int] = None, seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    @property
    def bounding_box(self) -> Optional[BoundingBox]:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def area(self) -> float:
        return 0.0

    @property
    def length(self) -> float:
        """用于分配边界采样点的一维测度"""
        return 0.0

    @property
    def center(self) -> complex:
        raise NotImplementedError

    @property
    def is_polar(self) -> bool:
        return False

    def default_sample_count(self) -> int:
        return max(2, int(math.ceil(DEFAULT_SAMPLES_PER_UNIT * self.diameter)))

    def translate(self, v: complex) -> 'CompactSet':
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Segment(CompactSet):
    """闭线段 [a, b]"""

    a: complex
    b: complex

    kind = 'segment'

    def distance(self, z):
        return _result(segment_distance(z, self.a, self.b), z)

    def sample(self, n: Optional[int] = None, seed: int = 0) -> np.ndarray:
        # Chebyshev 型分布，端点附近加密，对应线段平衡测度的反正弦密度
        n = n or self.default_sample_count()
        k = np.arange(n)
        t = 0.5 * (1.0 - np.cos(np.pi * (k + 0.5) / n))
        return self.a + t * (self.b - self.a)

    @property
    def bounding_box(self):
        xs = (self.a.real, self.b.real)
        ys = (self.a.imag, self.b.imag)
        return (min(xs), max(xs), min(ys), max(ys))

    @property
    def diameter(self):
        return abs(self.b - self.a)

    @property
    def length(self):
        return abs(self.b - self.a)

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def is_polar(self):
        return self.a == self.b

    def translate(self, v):
        return Segment(self.a + v, self.b + v)

    def to_dict(self):
        return {'type': 'segment', 'a': [self.a.real, self.a.imag], 'b': [self.b.real, self.b.imag]}


@dataclass(frozen=True)
class ClosedDisk(CompactSet):
    """闭圆盘 |z - center| <= radius"""

    center_point: complex
    radius: float

    kind = 'closed_disk'

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"闭圆盘半径不能为负: {self.radius}")

    def distance(self, z):
        p = _as_points(z)
        return _result(np.maximum(np.abs(p - self.center_point) - self.radius, 0.0), z)

    def sample(self, n: Optional[int] = None, seed: int = 0) -> np.ndarray:
        # 平衡测度落在外边界圆周上，只采样边界
        n = n or self.default_sample_count()
        theta = 2.0 * np.pi * np.arange(n) / n
        return self.center_point + self.radius * np.exp(1j * theta)

    @property
    def bounding_box(self):
        c, r = self.center_point, self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    @property
    def diameter(self):
        return 2.0 * self.radius

    @property
    def area(self):
        return math.pi * self.radius ** 2

    @property
    def length(self):
        return 2.0 * math.pi * self.radius

    @property
    def center(self):
        return self.center_point

    @property
    def is_polar(self):
        return self.radius == 0.0

    def translate(self, v):
        return ClosedDisk(self.center_point + v, self.radius)

    def to_dict(self):
        c = self.center_point
        return {'type': 'closed_disk', 'center': [c.real, c.imag], 'radius': self.radius}


@dataclass(frozen=True)
class SegmentUnion(CompactSet):
    """有限条线段的并"""

    segments: Tuple[Segment, ...]

    kind = 'segment_union'

    def __post_init__(self):
        if not self.segments:
            raise ValueError("线段并至少需要一条线段")

    def distance(self, z):
        dist = np.min([np.asarray(segment_distance(z, s.a, s.b)) for s in self.segments], axis=0)
        return _result(np.asarray(dist), z)

    def sample(self, n: Optional[int] = None, seed: int = 0) -> np.ndarray:
        n = n or self.default_sample_count()
        total = sum(s.length for s in self.segments) or 1.0
        parts = [s.sample(max(2, int(round(n * s.length / total)))) for s in self.segments]
        return np.concatenate(parts)

    @property
    def bounding_box(self):
        boxes = [s.bounding_box for s in self.segments]
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))

    @property
    def diameter(self):
        ends = np.array([p for s in self.segments for p in (s.a, s.b)])
        return float(np.max(np.abs(ends[:, None] - ends[None, :])))

    @property
    def length(self):
        return sum(s.length for s in self.segments)

    @property
    def center(self):
        xmin, xmax, ymin, ymax = self.bounding_box
        return complex(0.5 * (xmin + xmax), 0.5 * (ymin + ymax))

    def translate(self, v):
        return SegmentUnion(tuple(s.translate(v) for s in self.segments))

    def to_dict(self):
        return {'type': 'segment_union', 'segments': [s.to_dict() for s in self.segments]}


@dataclass(frozen=True)
class PointCloud(CompactSet):
    """有限点集；空点集表示 ∅，单点集是极集"""

    points: Tuple[complex, ...] = ()

    kind = 'point_cloud'

    def distance(self, z):
        p = _as_points(z)
        if not self.points:
            return _result(np.full(p.shape, np.inf), z)
        pts = np.asarray(self.points, dtype=complex)
        dist = np.min(np.abs(p[..., None] - pts), axis=-1)
        return _result(np.asarray(dist), z)

    def sample(self, n: Optional[int] = None, seed: int = 0) -> np.ndarray:
        pts = np.asarray(self.points, dtype=complex)
        if n is None or n >= len(pts):
            return pts
        idx = np.unique(np.linspace(0, len(pts) - 1, n).round().astype(int))
        return pts[idx]

    @property
    def bounding_box(self):
        if not self.points:
            return None
        pts = np.asarray(self.points, dtype=complex)
        return (pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max())

    @property
    def diameter(self):
        if len(self.points) < 2:
            return 0.0
        pts = np.asarray(self.points, dtype=complex)
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    @property
    def center(self):
        if not self.points:
            return 0j
        return complex(np.mean(np.asarray(self.points, dtype=complex)))

    @property
    def is_polar(self):
        return len(set(self.points)) <= 1

    def default_sample_count(self):
        return len(self.points)

    def translate(self, v):
        return PointCloud(tuple(p + v for p in self.points))

    def to_dict(self):
        return {'type': 'point_cloud', 'points': [[p.real, p.imag] for p in self.points]}


EMPTY_SET = PointCloud(())


# ---------------------------------------------------------------------------
# 区域
# ---------------------------------------------------------------------------

class Domain:
    """
    有界平面区域的公共接口

    不变量：
      - boundary_distance(z) > 0 当且仅当 z 属于区域；
      - boundary_distance 是 1-Lipschitz 函数；
      - 构造后不可变，可在并发任务之间共享。
    """

    kind = 'domain'
    label: str = ''

    def contains(self, z):
        raise NotImplementedError

    def boundary_distance(self, z):
        raise NotImplementedError

    @property
    def bounding_box(self) -> BoundingBox:
        raise NotImplementedError

    @property
    def area(self) -> float:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def inradius(self) -> float:
        return scan_inradius(self)

    @property
    def perimeter(self) -> float:
        raise NotImplementedError

    @property
    def centroid(self) -> complex:
        raise NotImplementedError

    def boundary_samples(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def excised_sets(self) -> List[CompactSet]:
        """区域补集的有界分支（按紧集描述），供 Bergman 基做 Laurent 扩充"""
        return []

    def translate(self, v: complex) -> 'Domain':
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def scan_inradius(domain: Domain, points_per_side: int = INRADIUS_SCAN_POINTS) -> float:
    """
    在包围盒格点上取 δ_Ω 的最大值，作为内切半径的下近似

    Args:
        domain: 区域
        points_per_side: 每个方向的格点数

    Returns:
        内切半径下近似
    """
    xmin, xmax, ymin, ymax = domain.bounding_box
    xs = np.linspace(xmin, xmax, points_per_side)
    ys = np.linspace(ymin, ymax, points_per_side)
    zz = xs[None, :] + 1j * ys[:, None]
    return float(np.max(domain.boundary_distance(zz)))


@dataclass(frozen=True)
class Disk(Domain):
    center: complex
    radius: float
    label: str = 'disk'

    kind = 'disk'

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"圆盘半径必须为正: {self.radius}")

    def contains(self, z):
        return _result(np.abs(_as_points(z) - self.center) < self.radius, z)

    def boundary_distance(self, z):
        d = self.radius - np.abs(_as_points(z) - self.center)
        return _result(np.maximum(d, 0.0), z)

    @property
    def bounding_box(self):
        c, r = self.center, self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    @property
    def area(self):
        return math.pi * self.radius ** 2

    @property
    def diameter(self):
        return 2.0 * self.radius

    @property
    def inradius(self):
        return self.radius

    @property
    def perimeter(self):
        return 2.0 * math.pi * self.radius

    @property
    def centroid(self):
        return self.center

    def boundary_samples(self, n):
        theta = 2.0 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)

    def translate(self, v):
        return Disk(self.center + v, self.radius, self.label)

    def to_dict(self):
        return {'type': 'disk', 'center': [self.center.real, self.center.imag],
                'radius': self.radius, 'label': self.label}


@dataclass(frozen=True)
class Annulus(Domain):
    center: complex
    r_in: float
    r_out: float
    label: str = 'annulus'

    kind = 'annulus'

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise ValueError(f"圆环半径需满足 0 < r_in < r_out: {self.r_in}, {self.r_out}")

    def contains(self, z):
        rho = np.abs(_as_points(z) - self.center)
        return _result((rho > self.r_in) & (rho < self.r_out), z)

    def boundary_distance(self, z):
        rho = np.abs(_as_points(z) - self.center)
        d = np.minimum(self.r_out - rho, rho - self.r_in)
        return _result(np.maximum(d, 0.0), z)

    @property
    def bounding_box(self):
        c, r = self.center, self.r_out
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    @property
    def area(self):
        return math.pi * (self.r_out ** 2 - self.r_in ** 2)

    @property
    def diameter(self):
        return 2.0 * self.r_out

    @property
    def inradius(self):
        return 0.5 * (self.r_out - self.r_in)

    @property
    def perimeter(self):
        return 2.0 * math.pi * (self.r_out + self.r_in)

    @property
    def centroid(self):
        return self.center

    def boundary_samples(self, n):
        n_out = max(1, int(round(n * self.r_out / (self.r_out + self.r_in))))
        n_in = max(1, n - n_out)
        outer = self.center + self.r_out * np.exp(2j * np.pi * np.arange(n_out) / n_out)
        inner = self.center + self.r_in * np.exp(2j * np.pi * np.arange(n_in) / n_in)
        return np.concatenate([outer, inner])

    def excised_sets(self):
        return [ClosedDisk(self.center, self.r_in)]

    def translate(self, v):
        return Annulus(self.center + v, self.r_in, self.r_out, self.label)

    def to_dict(self):
        return {'type': 'annulus', 'center': [self.center.real, self.center.imag],
                'r_in': self.r_in, 'r_out': self.r_out, 'label': self.label}


def _perimeter_samples(vertices: np.ndarray, n: int) -> np.ndarray:
    """沿闭折线按弧长均匀取 n 个点（取每段中点位置，避开角点）"""
    closed = np.append(vertices, vertices[0])
    edges = np.diff(closed)
    lengths = np.abs(edges)
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    s = (np.arange(n) + 0.5) * cumulative[-1] / n
    idx = np.clip(np.searchsorted(cumulative, s, side='right') - 1, 0, len(edges) - 1)
    t = (s - cumulative[idx]) / lengths[idx]
    return closed[idx] + t * edges[idx]


class Polygon(Domain):
    """
    简单多边形区域

    成员判定使用环绕数；与边距离小于 EDGE_TOLERANCE 的点判为区域外。
    """

    kind = 'polygon'

    def __init__(self, vertices: Sequence[complex], label: str = 'polygon'):
        pts = np.asarray(vertices, dtype=complex)
        if pts.ndim != 1 or len(pts) < 3:
            raise ValueError("多边形至少需要 3 个顶点")
        if pts[0] == pts[-1]:
            pts = pts[:-1]
        self._vertices = pts
        self.label = label
        x, y = pts.real, pts.imag
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if signed_area == 0:
            raise ValueError("多边形面积为零")
        self._signed_area = float(signed_area)

    @property
    def vertices(self) -> Tuple[complex, ...]:
        return tuple(complex(v) for v in self._vertices)

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.vertices == other.vertices and self.label == other.label

    def __hash__(self):
        return hash((self.vertices, self.label))

    def __repr__(self):
        return f"Polygon(vertices={self.vertices!r}, label={self.label!r})"

    def _edge_distance(self, p: np.ndarray) -> np.ndarray:
        a = self._vertices
        b = np.roll(a, -1)
        return np.min([segment_distance(p, a[i], b[i]) for i in range(len(a))], axis=0)

    def _winding_number(self, p: np.ndarray) -> np.ndarray:
        a = self._vertices
        b = np.roll(a, -1)
        px, py = p.real, p.imag
        wn = np.zeros(p.shape, dtype=int)
        for i in range(len(a)):
            ax, ay, bx, by = a[i].real, a[i].imag, b[i].real, b[i].imag
            is_left = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
            upward = (ay <= py) & (by > py) & (is_left > 0)
            downward = (ay > py) & (by <= py) & (is_left < 0)
            wn += upward.astype(int) - downward.astype(int)
        return wn

    def contains(self, z):
        p = _as_points(z)
        inside = (self._winding_number(p) != 0) & (self._edge_distance(p) > EDGE_TOLERANCE)
        return _result(np.asarray(inside), z)

    def boundary_distance(self, z):
        p = _as_points(z)
        d = np.asarray(self._edge_distance(p))
        inside = (self._winding_number(p) != 0) & (d > EDGE_TOLERANCE)
        return _result(np.where(inside, d, 0.0), z)

    @property
    def bounding_box(self):
        v = self._vertices
        return (float(v.real.min()), float(v.real.max()), float(v.imag.min()), float(v.imag.max()))

    @property
    def area(self):
        return abs(self._signed_area)

    @property
    def diameter(self):
        v = self._vertices
        return float(np.max(np.abs(v[:, None] - v[None, :])))

    @property
    def perimeter(self):
        return float(np.sum(np.abs(np.roll(self._vertices, -1) - self._vertices)))

    @property
    def centroid(self):
        x, y = self._vertices.real, self._vertices.imag
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        cx = np.sum((x + xn) * cross) / (6.0 * self._signed_area)
        cy = np.sum((y + yn) * cross) / (6.0 * self._signed_area)
        return complex(cx, cy)

    def boundary_samples(self, n):
        return _perimeter_samples(self._vertices, n)

    def translate(self, v):
        return Polygon(self._vertices + v, self.label)

    def to_dict(self):
        return {'type': 'polygon', 'vertices': [[p.real, p.imag] for p in self.vertices],
                'label': self.label}


@dataclass(frozen=True)
class Rectangle(Domain):
    """轴对齐矩形 (x0, x1) × (y0, y1)"""

    x0: float
    x1: float
    y0: float
    y1: float
    label: str = 'rectangle'

    kind = 'rectangle'

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"矩形边界无效: x0={self.x0}, x1={self.x1}, y0={self.y0}, y1={self.y1}")

    def contains(self, z):
        p = _as_points(z)
        inside = (p.real > self.x0) & (p.real < self.x1) & (p.imag > self.y0) & (p.imag < self.y1)
        return _result(inside, z)

    def boundary_distance(self, z):
        p = _as_points(z)
        d = np.minimum(np.minimum(p.real - self.x0, self.x1 - p.real),
                       np.minimum(p.imag - self.y0, self.y1 - p.imag))
        return _result(np.maximum(d, 0.0), z)

    @property
    def bounding_box(self):
        return (self.x0, self.x1, self.y0, self.y1)

    @property
    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def diameter(self):
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def inradius(self):
        return 0.5 * min(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def perimeter(self):
        return 2.0 * ((self.x1 - self.x0) + (self.y1 - self.y0))

    @property
    def centroid(self):
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def boundary_samples(self, n):
        corners = np.array([complex(self.x0, self.y0), complex(self.x1, self.y0),
                            complex(self.x1, self.y1), complex(self.x0, self.y1)])
        return _perimeter_samples(corners, n)

    def translate(self, v):
        return Rectangle(self.x0 + v.real, self.x1 + v.real, self.y0 + v.imag, self.y1 + v.imag, self.label)

    def to_dict(self):
        return {'type': 'rectangle', 'x': [self.x0, self.x1], 'y': [self.y0, self.y1], 'label': self.label}


@dataclass(frozen=True)
class Difference(Domain):
    """Ω ∖ E：成员为 Ω 内且到 E 距离为正的点"""

    outer: Domain
    excise: CompactSet
    label: str = ''

    kind = 'difference'

    def contains(self, z):
        inside = np.asarray(self.outer.contains(z)) & (np.asarray(self.excise.distance(z)) > 0)
        return _result(inside, z)

    def boundary_distance(self, z):
        d = np.minimum(np.asarray(self.outer.boundary_distance(z)), np.asarray(self.excise.distance(z)))
        return _result(d, z)

    @property
    def bounding_box(self):
        return self.outer.bounding_box

    @property
    def area(self):
        return self.outer.area - self.excise.area

    @property
    def diameter(self):
        return self.outer.diameter

    @property
    def perimeter(self):
        return self.outer.perimeter + self.excise.length

    @property
    def centroid(self):
        a_out, a_ex = self.outer.area, self.excise.area
        if a_ex == 0.0:
            return self.outer.centroid
        return (a_out * self.outer.centroid - a_ex * self.excise.center) / (a_out - a_ex)

    def boundary_samples(self, n):
        if isinstance(self.excise, PointCloud):
            excise_pts = self.excise.sample()
            if len(excise_pts) == 0:
                return self.outer.boundary_samples(n)
            return np.concatenate([self.outer.boundary_samples(max(8, n - len(excise_pts))), excise_pts])
        total = self.outer.perimeter + self.excise.length
        n_ex = max(2, int(round(n * self.excise.length / total)))
        n_out = max(8, n - n_ex)
        return np.concatenate([self.outer.boundary_samples(n_out), self.excise.sample(n_ex)])

    def excised_sets(self):
        sets = list(self.outer.excised_sets())
        if not self.excise.is_polar:
            sets.append(self.excise)
        return sets

    def translate(self, v):
        return Difference(self.outer.translate(v), self.excise.translate(v), self.label)

    def to_dict(self):
        return {'type': 'difference', 'outer': self.outer.to_dict(),
                'excise': self.excise.to_dict(), 'label': self.label}


# ---------------------------------------------------------------------------
# 操作接口
# ---------------------------------------------------------------------------

def make_disk(center: complex, radius: float, label: str = 'disk') -> Disk:
    """构造圆盘 Δ(center, radius)；半径非正时抛出 ValueError"""
    return Disk(complex(center), float(radius), label)


def make_annulus(center: complex, r_in: float, r_out: float, label: str = 'annulus') -> Annulus:
    return Annulus(complex(center), float(r_in), float(r_out), label)


def make_rectangle(x0: float, x1: float, y0: float, y1: float, label: str = 'rectangle') -> Rectangle:
    return Rectangle(float(x0), float(x1), float(y0), float(y1), label)


def make_polygon(vertices: Sequence[complex], label: str = 'polygon') -> Polygon:
    return Polygon(vertices, label)


def _box_inside(inner: BoundingBox, outer: BoundingBox, tol: float = 1e-12) -> bool:
    return (inner[0] >= outer[0] - tol and inner[1] <= outer[1] + tol
            and inner[2] >= outer[2] - tol and inner[3] <= outer[3] + tol)


def subtract_compact(domain: Domain, excise: CompactSet, label: Optional[str] = None) -> Domain:
    """
    挖去紧集 E 得到 Ω ∖ E

    Args:
        domain: 原区域 Ω
        excise: 紧集 E（应位于 Ω 的闭包内）
        label: 新区域标签，缺省时由原标签派生

    Returns:
        差集区域；E 为空集时返回的区域与 Ω 行为一致

    Raises:
        ValueError: E 超出 Ω 的包围盒
    """
    box = excise.bounding_box
    if box is not None and not _box_inside(box, domain.bounding_box):
        raise ValueError(f"紧集 {excise.kind} 超出区域 {domain.label} 的包围盒")
    name = label if label is not None else f"{domain.label}-minus-{excise.kind}"
    return Difference(domain, excise, name)


def boundary_distance(domain: Domain, z):
    return domain.boundary_distance(z)


def area(domain: Domain) -> float:
    return domain.area


def diameter(domain: Domain) -> float:
    return domain.diameter


def inradius(domain: Domain) -> float:
    """内切半径；圆盘、圆环、矩形精确给出，其余取格点扫描的下近似"""
    return domain.inradius
