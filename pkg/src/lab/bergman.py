"""
Bergman 核模块

在求积网格的内积下把全纯函数族（以形心为中心的单项式，外加每个挖去集合
对应的 Laurent 型元素）正交化，得到有限秩 Bergman 空间，再计算核、核的
最小值 κ、p-Bergman 核、Bergman 投影与比较泛函 R±/I±。
"""
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg

from src.lab.geom import ClosedDisk, CompactSet, Domain, PointCloud, Segment, SegmentUnion
from src.lab.grid import ComplexField, QuadratureGrid, rasterize
from src.utils.logger import Logger

logger = Logger.get_logger(name='bergman')

PIVOT_TOL = 1e-10
P_KERNEL_TOL = 1e-7
P_KERNEL_MAX_ITER = 500
WEIGHT_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# 原始函数族
# ---------------------------------------------------------------------------

def joukowski_exterior(z, a: complex, b: complex) -> np.ndarray:
    """
    把 ℂ ∖ [a, b] 共形映到单位圆外部的 ζ(z)

    w 为 z 在线段局部坐标下的位置（端点映到 ±1），ζ = w + √(w-1)·√(w+1)，
    主值平方根的割线恰为 [-1, 1]。
    """
    half = abs(b - a) / 2.0
    mid = (a + b) / 2.0
    direction = (b - a) / abs(b - a)
    w = (np.asarray(z, dtype=complex) - mid) * np.conj(direction) / half
    return w + np.sqrt(w - 1.0) * np.sqrt(w + 1.0)


@dataclass(frozen=True)
class RawElement:
    """原始函数族的一个元素：单项式 (z-c)^k、极点幂 (z-c)^{-m} 或 Joukowski 幂 ζ^{-m}"""

    kind: str
    power: int
    center: complex = 0j
    a: complex = 0j
    b: complex = 0j

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        if self.kind == 'monomial':
            return (z - self.center) ** self.power
        if self.kind == 'pole':
            return (z - self.center) ** (-self.power)
        return joukowski_exterior(z, self.a, self.b) ** (-self.power)

    def describe(self) -> str:
        if self.kind == 'monomial':
            return f"(z-{self.center:.3g})^{self.power}"
        if self.kind == 'pole':
            return f"(z-{self.center:.3g})^-{self.power}"
        return f"zeta[{self.a:.3g},{self.b:.3g}]^-{self.power}"


def _enrichment(excise: CompactSet, order: int) -> List[RawElement]:
    if isinstance(excise, ClosedDisk):
        return [RawElement('pole', m, center=excise.center_point) for m in range(1, order + 1)]
    if isinstance(excise, Segment):
        if excise.a == excise.b:
            return []
        return [RawElement('joukowski', m, a=excise.a, b=excise.b) for m in range(1, order + 1)]
    if isinstance(excise, SegmentUnion):
        elements = []
        for seg in excise.segments:
            elements.extend(_enrichment(seg, order))
        return elements
    # 点集是极集，不改变 Bergman 空间
    return []


def raw_family(domain: Domain, degree: int, center: complex,
               laurent_order: Optional[int] = None) -> List[RawElement]:
    """单项式 (z-center)^k, k=0..N，外加每个挖去集合的 Laurent 型元素"""
    order = max(1, degree // 2) if laurent_order is None else laurent_order
    elements = [RawElement('monomial', k, center=center) for k in range(degree + 1)]
    for excise in domain.excised_sets():
        elements.extend(_enrichment(excise, order))
    return elements


# ---------------------------------------------------------------------------
# 正交化
# ---------------------------------------------------------------------------

def truncated_cholesky(gram: np.ndarray, tol: float = PIVOT_TOL):
    """
    按顺序的截断 Cholesky 分解

    依次处理每一列，剩余对角元（相对于 Jacobi 缩放后的 1）小于 tol 的列被跳过，
    保留列的顺序不变。

    Returns:
        (保留列下标, 下三角因子 L)，满足 gram[keep][:, keep] ≈ L Lᴴ
    """
    n = gram.shape[0]
    factor = np.zeros((n, n), dtype=complex)
    keep = []
    for j in range(n):
        col = gram[:, j].astype(complex)
        if keep:
            rows = factor[:, :len(keep)]
            col = col - rows @ np.conj(rows[j, :])
        pivot = col[j].real
        if pivot <= tol:
            continue
        col[:j] = 0.0
        factor[:, len(keep)] = col / math.sqrt(pivot)
        keep.append(j)
    keep = np.array(keep, dtype=int)
    return keep, factor[np.ix_(keep, np.arange(len(keep)))]


class BergmanBasis:
    """
    有限秩 Bergman 空间的正交规范基

    e_k(z) = Σ_j raw_j(z)·coefficients[j, k]，在网格内积下 Gram 矩阵为单位阵，
    可在区域内任意点求值。
    """

    def __init__(self, grid: QuadratureGrid, degree: int, center: Optional[complex] = None,
                 laurent_order: Optional[int] = None):
        if degree < 0:
            raise ValueError(f"次数必须非负，当前为 {degree}")
        self.grid = grid
        self.domain = grid.domain
        self.degree = degree
        self.center = complex(grid.domain.centroid if center is None else center)
        self.laurent_order = laurent_order
        self.elements = raw_family(self.domain, degree, self.center, laurent_order)
        if grid.size < len(self.elements):
            raise ValueError(f"网格单元数 {grid.size} 少于基函数个数 {len(self.elements)}，网格过粗")

        raw = self.raw_values(grid.points)
        self.raw_gram = (np.conj(raw).T * grid.weights) @ raw
        self.condition = float(np.linalg.cond(self.raw_gram))

        scale = 1.0 / np.sqrt(np.diag(self.raw_gram).real)
        scaled = self.raw_gram * scale[:, None] * scale[None, :]
        keep, factor = truncated_cholesky(scaled)
        self.kept = keep
        self.truncated = len(self.elements) - len(keep)

        coeffs = np.zeros((len(self.elements), len(keep)), dtype=complex)
        coeffs[keep, :] = scale[keep, None] * linalg.solve_triangular(
            factor.conj().T, np.eye(len(keep)), lower=False)
        # 第二遍正交化消除截断带来的舍入误差
        gram_e = np.conj(coeffs).T @ self.raw_gram @ coeffs
        second = linalg.cholesky(0.5 * (gram_e + gram_e.conj().T), lower=True)
        self.coefficients = coeffs @ linalg.solve_triangular(second.conj().T, np.eye(len(keep)), lower=False)
        self._grid_values = raw @ self.coefficients

        if self.truncated:
            logger.warning(f"{self.domain.label}: Gram 矩阵截断了 {self.truncated} 个病态元素")
        logger.info(f"{self.domain.label}: 基函数 {self.size} 个（原始 {len(self.elements)} 个），"
                    f"原始 Gram 条件数 {self.condition:.3e}")

    @property
    def size(self) -> int:
        return self.coefficients.shape[1]

    @property
    def grid_values(self) -> np.ndarray:
        """网格单元中心处的 e_k 值，形状 (单元数, 基函数数)"""
        return self._grid_values

    def raw_values(self, z) -> np.ndarray:
        pts = np.asarray(z, dtype=complex)
        return np.stack([el.evaluate(pts) for el in self.elements], axis=-1)

    def evaluate(self, z) -> np.ndarray:
        """e_k(z)，z 可为标量或数组，最后一维为基函数编号"""
        return self.raw_values(z) @ self.coefficients

    def gram(self) -> np.ndarray:
        """正交基在网格内积下的 Gram 矩阵（应为单位阵）"""
        values = self._grid_values
        return (np.conj(values).T * self.grid.weights) @ values

    def synthesize(self, coefficients: np.ndarray) -> ComplexField:
        return self.grid.complex_field(self._grid_values @ np.asarray(coefficients))

    def _require_inside(self, z) -> None:
        if not np.all(self.domain.contains(z)):
            raise ValueError(f"求值点 {z} 不在区域 {self.domain.label} 内")


def build_basis(grid: QuadratureGrid, degree: int, center: Optional[complex] = None,
                laurent_order: Optional[int] = None) -> BergmanBasis:
    """
    在网格上构造正交规范基

    Args:
        grid: 求积网格
        degree: 单项式最高次数 N
        center: 单项式中心，缺省为区域形心
        laurent_order: 每个挖去集合的 Laurent 元素个数，缺省为 max(1, N//2)

    Returns:
        正交规范基；病态尾部被截断并记录在 truncated 中

    Raises:
        ValueError: 次数为负或网格单元数少于基函数个数
    """
    return BergmanBasis(grid, degree, center, laurent_order)


# ---------------------------------------------------------------------------
# 核
# ---------------------------------------------------------------------------

def kernel(basis: BergmanBasis, z, w) -> complex:
    """K(z, w) = Σ e_k(z)·conj(e_k(w))"""
    basis._require_inside(z)
    basis._require_inside(w)
    values = np.sum(basis.evaluate(z) * np.conj(basis.evaluate(w)), axis=-1)
    return complex(values) if np.ndim(values) == 0 else values


def kernel_diag(basis: BergmanBasis, z):
    """K(z) = Σ |e_k(z)|²"""
    basis._require_inside(z)
    values = np.sum(np.abs(basis.evaluate(z)) ** 2, axis=-1)
    return float(values) if np.ndim(values) == 0 else values


def kernel_min(basis: BergmanBasis, grid: Optional[QuadratureGrid] = None):
    """
    κ = min K(z) over 网格节点，再在最小点附近做一次 3×3 细化

    平局按 (x, y) 字典序取第一个。

    Returns:
        (κ, 最小点)
    """
    grid = grid or basis.grid
    values = np.sum(np.abs(basis.evaluate(grid.points)) ** 2, axis=-1)
    best = grid.points[int(np.argmin(values))]

    offsets = np.array([-1.0, 0.0, 1.0]) * grid.h / 3.0
    local = (best + offsets[:, None] + 1j * offsets[None, :]).ravel()
    local = local[np.asarray(basis.domain.contains(local), dtype=bool)]
    order = np.lexsort((local.imag, local.real))
    local = local[order]
    local_values = np.sum(np.abs(basis.evaluate(local)) ** 2, axis=-1)
    k = int(np.argmin(local_values))
    return float(local_values[k]), complex(local[k])


@dataclass
class PKernelResult:
    value: float
    converged: bool
    iterations: int
    coefficients: np.ndarray


def p_kernel(basis: BergmanBasis, z: complex, p: float,
             grid: Optional[QuadratureGrid] = None) -> PKernelResult:
    """
    p-Bergman 核 K_{Ω,p}(z) = sup{|f(z)|^p : ∫|f|^p ≤ 1}，f 取自基函数张成的空间

    迭代重加权最小二乘：固定 f(z) = 1，每步以 |f|^{p-2} 为权求加权 L² 极小，
    K_p = 1/∫|f|^p。

    Raises:
        ValueError: p 不在 (1, 2] 内或 z 不在区域内
    """
    if not 1.0 < p <= 2.0:
        raise ValueError(f"p 必须位于 (1, 2]，当前为 {p}")
    basis._require_inside(z)
    grid = grid or basis.grid
    values = basis.grid_values if grid is basis.grid else basis.evaluate(grid.points)
    at_z = basis.evaluate(z)
    omega = np.ones(grid.size)
    previous = None

    for iteration in range(1, P_KERNEL_MAX_ITER + 1):
        weighted_gram = (np.conj(values).T * (grid.weights * omega)) @ values
        x = linalg.solve(weighted_gram, np.conj(at_z), assume_a='her')
        coeffs = x / (at_z @ x)
        f = values @ coeffs
        modulus = np.abs(f)
        current = 1.0 / float(np.sum(grid.weights * modulus ** p))
        if previous is not None and abs(current - previous) <= P_KERNEL_TOL * abs(previous):
            return PKernelResult(current, True, iteration, coeffs)
        if p == 2.0:
            return PKernelResult(current, True, iteration, coeffs)
        previous = current
        omega = np.maximum(np.maximum(modulus, WEIGHT_FLOOR) ** (p - 2.0), WEIGHT_FLOOR)

    logger.warning(f"p-Bergman 核在 {P_KERNEL_MAX_ITER} 次迭代内未收敛 (p={p}, z={z})")
    return PKernelResult(current, False, P_KERNEL_MAX_ITER, coeffs)


class ComparisonValues(NamedTuple):
    r_plus: float
    r_minus: float
    i_plus: float
    i_minus: float


def comparison_functionals(basis: BergmanBasis, z: complex, w: complex) -> ComparisonValues:
    """R± = K(z)+K(w)±2Re K(z,w)，I± = K(z)+K(w)±2Im K(z,w)"""
    kz = kernel_diag(basis, z)
    kw = kernel_diag(basis, w)
    kzw = kernel(basis, z, w)
    return ComparisonValues(kz + kw + 2 * kzw.real, kz + kw - 2 * kzw.real,
                            kz + kw + 2 * kzw.imag, kz + kw - 2 * kzw.imag)


def bergman_projection(basis: BergmanBasis, f: ComplexField) -> np.ndarray:
    """系数 c_k = ⟨f, e_k⟩ = Σ weights·f·conj(e_k)"""
    if f.grid is not basis.grid:
        raise ValueError("投影要求场与基定义在同一网格上")
    return np.conj(basis.grid_values).T @ (basis.grid.weights * f.values)


@dataclass
class BetaProbeResult:
    resolutions: List[int]
    values: List[float]
    exponent: float


def beta_norm_probe(basis: BergmanBasis, w: complex, beta: float, resolutions: Sequence[int]) -> BetaProbeResult:
    """
    在分辨率阶梯上计算 ∫|K(·,w)|^β，并拟合其随分辨率的增长指数

    每个分辨率上按 basis 的区域、次数、中心和 Laurent 阶数重建基。
    指数接近 0 表示积分随加密趋于稳定。

    Raises:
        ValueError: β < 2
    """
    if beta < 2.0:
        raise ValueError(f"β 必须不小于 2，当前为 {beta}")
    values = []
    for res in resolutions:
        ladder = build_basis(rasterize(basis.domain, res), basis.degree, basis.center, basis.laurent_order)
        ladder._require_inside(w)
        column = ladder.grid_values @ np.conj(ladder.evaluate(w))
        values.append(float(np.sum(ladder.grid.weights * np.abs(column) ** beta)))
    if len(values) > 1:
        exponent = float(np.polyfit(np.log(resolutions), np.log(values), 1)[0])
    else:
        exponent = 0.0
    logger.info(f"β={beta} 范数探测：{values}，增长指数 {exponent:.4f}")
    return BetaProbeResult(list(resolutions), values, exponent)
