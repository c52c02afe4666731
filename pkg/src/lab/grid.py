"""
求积网格模块

把区域栅格化为均匀网格（单元中心在区域内的单元被标记），提供单元权重、
格点场的积分、梯度、∂̄ 导数，以及谱模块使用的五点差分模板。
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Tuple, Union

import numpy as np

from src.lab.geom import Domain
from src.utils.logger import Logger

logger = Logger.get_logger(name='grid')

MIN_RESOLUTION = 8
SUBSAMPLE = 4            # 边界单元面积分数的子采样数（每个方向）
FACE_BISECTIONS = 30     # 求边界面距离的二分次数
EDGE_SAMPLES = 17        # 检测相邻单元连线是否穿过挖去集合的采样点数
MIN_FACE_FRACTION = 0.1  # 边界面距离下限（以 h 为单位）

Number = Union[int, float, complex]

# 四个轴向邻居：(名称, di, dj, 方向)
_DIRECTIONS = (('xp', 1, 0, 1.0 + 0j), ('xm', -1, 0, -1.0 + 0j),
               ('yp', 0, 1, 1j), ('ym', 0, -1, -1j))


class QuadratureGrid:
    """
    区域上的带掩码均匀网格

    Attributes:
        domain: 所属区域
        origin: 包围盒左下角
        h: 网格步长
        nx, ny: 包围盒内单元数
        ix, iy: 被标记单元的格点下标（按 x 再按 y 的字典序）
        points: 被标记单元中心（复数）
        weights: 单元求积权重
    """

    def __init__(self, domain: Domain, resolution: int):
        if resolution < MIN_RESOLUTION:
            raise ValueError(f"分辨率至少为 {MIN_RESOLUTION}，当前为 {resolution}")
        self.domain = domain
        self.resolution = resolution
        self.h = 1.0 / resolution

        xmin, xmax, ymin, ymax = domain.bounding_box
        self.origin = complex(xmin, ymin)
        self.nx = max(1, int(math.ceil((xmax - xmin) / self.h - 1e-9)))
        self.ny = max(1, int(math.ceil((ymax - ymin) / self.h - 1e-9)))

        centers = self._cell_centers()
        mask = np.asarray(domain.contains(centers), dtype=bool)
        if not mask.any():
            raise ValueError(f"分辨率 {resolution} 过低，区域 {domain.label} 内没有任何单元")

        fractions = self._area_fractions(centers, mask)
        self.ix, self.iy = np.nonzero(mask)
        self.points = centers[self.ix, self.iy]
        self.index = np.full((self.nx, self.ny), -1, dtype=int)
        self.index[self.ix, self.iy] = np.arange(len(self.ix))
        self.weights = self._lend_cut_cells(fractions, mask)

        logger.debug(f"栅格化 {domain.label}: 分辨率 {resolution}, 单元数 {self.size}, "
                     f"面积 {self.area:.6f} (精确 {domain.area:.6f})")

    # -- 构造 ---------------------------------------------------------------

    def _cell_centers(self) -> np.ndarray:
        i = np.arange(self.nx)[:, None]
        j = np.arange(self.ny)[None, :]
        return self.origin + (i + 0.5) * self.h + 1j * (j + 0.5) * self.h

    def _area_fractions(self, centers: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """δ_Ω 不小于半对角线的单元完全在区域内，其余单元用 4×4 子采样估计面积分数"""
        delta = np.asarray(self.domain.boundary_distance(centers))
        fractions = np.ones(centers.shape)
        cut = ~(mask & (delta >= 0.5 * math.sqrt(2.0) * self.h))
        if cut.any():
            offsets = ((np.arange(SUBSAMPLE) + 0.5) / SUBSAMPLE - 0.5) * self.h
            sub = offsets[:, None] + 1j * offsets[None, :]
            probes = centers[cut][:, None, None] + sub[None, :, :]
            inside = np.asarray(self.domain.contains(probes), dtype=float)
            fractions[cut] = inside.reshape(len(probes), -1).mean(axis=1)
        return fractions

    def _lend_cut_cells(self, fractions: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """中心在区域外但部分在区域内的单元，把面积平分给相邻的被标记单元"""
        cell_area = self.h * self.h
        weights = fractions[mask] * cell_area
        lender = (~mask) & (fractions > 0)
        li, lj = np.nonzero(lender)
        if len(li) == 0:
            return weights

        receivers = []
        for _, di, dj, _ in _DIRECTIONS:
            ni, nj = li + di, lj + dj
            ok = (ni >= 0) & (ni < self.nx) & (nj >= 0) & (nj < self.ny)
            target = np.full(len(li), -1)
            target[ok] = self.index[ni[ok], nj[ok]]
            receivers.append(target)
        receivers = np.stack(receivers, axis=1)
        counts = (receivers >= 0).sum(axis=1)
        share = np.where(counts > 0, fractions[li, lj] * cell_area / np.maximum(counts, 1), 0.0)
        for k in range(receivers.shape[1]):
            ok = receivers[:, k] >= 0
            np.add.at(weights, receivers[ok, k], share[ok])
        return weights

    # -- 基本量 ---------------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    @property
    def lattice_mass(self) -> float:
        """差分格式使用的单元质量 h²"""
        return self.h * self.h

    @cached_property
    def delta(self) -> np.ndarray:
        """单元中心处的边界距离 δ_Ω"""
        return np.asarray(self.domain.boundary_distance(self.points), dtype=float)

    @cached_property
    def neighbors(self) -> dict:
        """四个轴向邻居的单元编号，不在掩码内记为 -1"""
        result = {}
        for name, di, dj, _ in _DIRECTIONS:
            ni, nj = self.ix + di, self.iy + dj
            ok = (ni >= 0) & (ni < self.nx) & (nj >= 0) & (nj < self.ny)
            target = np.full(self.size, -1)
            target[ok] = self.index[ni[ok], nj[ok]]
            result[name] = target
        return result

    # -- 场 -------------------------------------------------------------------

    def scalar_field(self, values) -> 'ScalarField':
        return ScalarField(self, np.asarray(values, dtype=float))

    def complex_field(self, values) -> 'ComplexField':
        return ComplexField(self, np.asarray(values, dtype=complex))

    def field(self, func: Callable[[np.ndarray], np.ndarray]):
        """在单元中心上求值函数，按返回类型生成实场或复场"""
        values = np.asarray(func(self.points))
        if np.iscomplexobj(values):
            return self.complex_field(values)
        return self.scalar_field(values)

    def ones(self) -> 'ScalarField':
        return self.scalar_field(np.ones(self.size))

    # -- 差分模板 ---------------------------------------------------------------

    @cached_property
    def stencil(self) -> 'Stencil':
        """
        五点差分模板

        内部边连接两个被标记且连线不穿过 ∂Ω 的单元；边界面把 h/d 加到对角，
        d 为单元中心沿轴向到 ∂Ω 的距离（截断到 [0.1h, h]）。
        """
        edge_i, edge_j = [], []
        face_cells, face_coeffs = [], []
        h = self.h

        for name, _, _, direction in _DIRECTIONS:
            target = self.neighbors[name]

            # 邻居不在掩码内：二分求边界位置
            outside = np.nonzero(target < 0)[0]
            if len(outside):
                t = self._bisect_face(self.points[outside], direction)
                face_cells.append(outside)
                face_coeffs.append(1.0 / np.clip(t, MIN_FACE_FRACTION, 1.0))

            # 只取正方向，避免内部边重复
            if name not in ('xp', 'yp'):
                continue
            inside = np.nonzero(target >= 0)[0]
            a, b = inside, target[inside]
            near = np.minimum(self.delta[a], self.delta[b]) < h
            cut = np.zeros(len(a), dtype=bool)
            t_cut = np.zeros(len(a))
            if near.any():
                cut_near, t_near = self._edge_crossings(self.points[a[near]], direction)
                cut[near] = cut_near
                t_cut[near] = t_near
            edge_i.append(a[~cut])
            edge_j.append(b[~cut])
            if cut.any():
                tc = t_cut[cut]
                face_cells.extend([a[cut], b[cut]])
                face_coeffs.extend([1.0 / np.clip(tc, MIN_FACE_FRACTION, 1.0),
                                    1.0 / np.clip(1.0 - tc, MIN_FACE_FRACTION, 1.0)])

        cells = np.concatenate(face_cells) if face_cells else np.zeros(0, dtype=int)
        coeffs = np.concatenate(face_coeffs) if face_coeffs else np.zeros(0)
        return Stencil(np.concatenate(edge_i), np.concatenate(edge_j), cells, coeffs)

    def _bisect_face(self, starts: np.ndarray, direction: complex) -> np.ndarray:
        lo = np.zeros(len(starts))
        hi = np.ones(len(starts))
        for _ in range(FACE_BISECTIONS):
            mid = 0.5 * (lo + hi)
            inside = np.asarray(self.domain.contains(starts + mid * self.h * direction), dtype=bool)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return 0.5 * (lo + hi)

    def _edge_crossings(self, starts: np.ndarray, direction: complex) -> Tuple[np.ndarray, np.ndarray]:
        """检测两个被标记单元的连线是否碰到零面积的挖去集合（如割缝）"""
        t = np.linspace(0.0, 1.0, EDGE_SAMPLES)
        probes = starts[:, None] + t[None, :] * self.h * direction
        delta = np.asarray(self.domain.boundary_distance(probes))
        spacing = self.h / (EDGE_SAMPLES - 1)
        crossing = delta.min(axis=1) <= 0.5 * spacing
        return crossing, t[np.argmin(delta, axis=1)]


@dataclass(frozen=True)
class Stencil:
    edge_i: np.ndarray
    edge_j: np.ndarray
    face_cells: np.ndarray
    face_coeffs: np.ndarray


def rasterize(domain: Domain, resolution: int) -> QuadratureGrid:
    """
    把区域栅格化为求积网格

    Args:
        domain: 区域
        resolution: 每单位长度的单元数（至少 8）

    Returns:
        求积网格；掩码对固定输入是确定性的

    Raises:
        ValueError: 分辨率过低或区域内没有任何单元
    """
    return QuadratureGrid(domain, resolution)


# ---------------------------------------------------------------------------
# 格点场
# ---------------------------------------------------------------------------

@dataclass
class _Field:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise ValueError(f"场的取值个数 {self.values.shape} 与网格单元数 {self.grid.size} 不符")

    def _other_values(self, other):
        if isinstance(other, _Field):
            if other.grid is not self.grid:
                raise ValueError("场运算要求相同的网格")
            return other.values
        return other

    def _wrap(self, values):
        if np.iscomplexobj(values):
            return ComplexField(self.grid, np.asarray(values, dtype=complex))
        return ScalarField(self.grid, np.asarray(values, dtype=float))

    def __add__(self, other):
        return self._wrap(self.values + self._other_values(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other_values(other))

    def __rsub__(self, other):
        return self._wrap(self._other_values(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other_values(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other_values(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def abs(self) -> 'ScalarField':
        return ScalarField(self.grid, np.abs(self.values))

    def integrate(self):
        return integrate(self)

    def norm(self, p: float = 2.0) -> float:
        """L^p 范数 (∫|f|^p)^{1/p}"""
        return float(integrate(ScalarField(self.grid, np.abs(self.values) ** p)) ** (1.0 / p))


class ScalarField(_Field):
    """实值格点场"""


class ComplexField(_Field):
    """复值格点场"""

    def conj(self) -> 'ComplexField':
        return ComplexField(self.grid, np.conj(self.values))

    @property
    def real(self) -> ScalarField:
        return ScalarField(self.grid, self.values.real.copy())

    @property
    def imag(self) -> ScalarField:
        return ScalarField(self.grid, self.values.imag.copy())


@dataclass
class VectorField:
    grid: QuadratureGrid
    x: np.ndarray
    y: np.ndarray

    def norm2(self) -> ScalarField:
        """逐点 |∇f|²"""
        return ScalarField(self.grid, np.abs(self.x) ** 2 + np.abs(self.y) ** 2)


def integrate(f: _Field):
    """
    ∫_Ω f，按 Σ f·weights 计算

    numpy 对连续数组的求和采用固定的成对归约树，结果可逐位复现。
    """
    total = np.sum(f.values * f.grid.weights)
    if np.iscomplexobj(total):
        return complex(total)
    return float(total)


def _partial(values: np.ndarray, grid: QuadratureGrid, plus: str, minus: str) -> np.ndarray:
    nb = grid.neighbors
    p, m = nb[plus], nb[minus]
    has_p, has_m = p >= 0, m >= 0
    vp = np.where(has_p, values[np.maximum(p, 0)], 0)
    vm = np.where(has_m, values[np.maximum(m, 0)], 0)
    h = grid.h
    central = (vp - vm) / (2.0 * h)
    forward = (vp - values) / h
    backward = (values - vm) / h
    return np.where(has_p & has_m, central,
                    np.where(has_p, forward, np.where(has_m, backward, 0.0 * values)))


def gradient(f: _Field) -> VectorField:
    """内部用中心差分，掩码边缘用单侧差分"""
    return VectorField(f.grid, _partial(f.values, f.grid, 'xp', 'xm'),
                       _partial(f.values, f.grid, 'yp', 'ym'))


def dbar_derivative(f: _Field) -> ComplexField:
    """∂̄f = ½(∂_x f + i ∂_y f)"""
    grad = gradient(f)
    return ComplexField(f.grid, 0.5 * (grad.x + 1j * grad.y))


def dirichlet_form(f: _Field) -> float:
    """
    与五点 Dirichlet 拉普拉斯一致的离散 ∫|∇f|²

    Σ_内部边 |f_i - f_j|² + Σ_边界面 c·|f_i|²，区域外视为零。
    """
    st = f.grid.stencil
    v = f.values
    edges = np.sum(np.abs(v[st.edge_i] - v[st.edge_j]) ** 2)
    faces = np.sum(st.face_coeffs * np.abs(v[st.face_cells]) ** 2)
    return float(edges + faces)
