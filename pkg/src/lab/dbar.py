"""
∂̄ 方程模块

用面积 Cauchy 变换构造 ∂̄u = v 的解，减去 Bergman 投影得到 L² 极小（典范）解，
并对带权估计、L^p 估计与核的边界衰减做数值检查。
"""
import math
from dataclasses import dataclass, asdict
from typing import List, Optional, Sequence

import numpy as np

from src.lab.bergman import BergmanBasis, bergman_projection
from src.lab.grid import ComplexField, QuadratureGrid
from src.utils.logger import Logger

logger = Logger.get_logger(name='dbar')

TARGET_CHUNK = 256
HARDY_SAFETY = 0.9
DECAY_SLACK = 0.1


def cauchy_transform(grid: QuadratureGrid, v: ComplexField,
                     targets: Optional[np.ndarray] = None) -> ComplexField:
    """
    u(z) = (1/π)·Σ v(ζ)·weight/(z - ζ)

    正方形单元上 1/(z-ζ) 关于中心的平均值为零，自单元贡献取 0。
    按目标点分块计算，块内求和顺序固定。

    Args:
        grid: 求积网格
        v: 右端项
        targets: 目标点，缺省为网格单元中心

    Returns:
        目标为网格中心时返回复场，否则返回数组
    """
    sources = grid.points
    charge = v.values * grid.weights / math.pi
    pts = grid.points if targets is None else np.asarray(targets, dtype=complex)
    result = np.empty(len(pts), dtype=complex)
    for start in range(0, len(pts), TARGET_CHUNK):
        block = pts[start:start + TARGET_CHUNK]
        diff = block[:, None] - sources[None, :]
        inverse = np.zeros_like(diff)
        np.divide(1.0, diff, out=inverse, where=diff != 0)
        result[start:start + TARGET_CHUNK] = inverse @ charge
    if targets is None:
        return grid.complex_field(result)
    return result


def canonical_solution(basis: BergmanBasis, v: ComplexField,
                       cauchy: Optional[ComplexField] = None) -> ComplexField:
    """
    典范解 u₀ = u_C - P(u_C)，与所有 e_k 正交

    Args:
        basis: Bergman 基
        v: 右端项
        cauchy: 已计算的 Cauchy 变换（可选）
    """
    u_c = cauchy if cauchy is not None else cauchy_transform(basis.grid, v)
    coeffs = bergman_projection(basis, u_c)
    return u_c - basis.synthesize(coeffs)


def bump_field(grid: QuadratureGrid, center: complex, radius: float) -> ComplexField:
    """光滑紧支撑函数 exp(1 - 1/(1 - |z-c|²/s²))，支撑在 Δ(c, s)"""
    t = np.abs(grid.points - center) ** 2 / (radius * radius)
    values = np.zeros(grid.size)
    inside = t < 1.0
    values[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside]))
    return grid.complex_field(values)


@dataclass
class WeightedCheck:
    alpha: float
    hardy: float
    constant: float
    lhs: float
    rhs: float
    ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def weighted_constant(hardy: float, alpha: float) -> float:
    """C = 16h² / (2h - 3α)²"""
    return 16.0 * hardy ** 2 / (2.0 * hardy - 3.0 * alpha) ** 2


def weighted_estimate_check(basis: BergmanBasis, v: ComplexField, alpha: float, hardy: float,
                            solution: Optional[ComplexField] = None) -> WeightedCheck:
    """
    带权估计 ∫|u₀|²δ^α ≤ C∫|v|²δ^{2+α}

    Args:
        basis: Bergman 基
        v: 右端项
        alpha: 权指数
        hardy: 谱模块算得的 Hardy 常数（内部乘 0.9）
        solution: 已算得的典范解（可选）

    Raises:
        ValueError: α 不在 (0, 2h/3) 内
    """
    h = HARDY_SAFETY * hardy
    upper = 2.0 * h / 3.0
    if not 0.0 < alpha < upper:
        raise ValueError(f"α 必须位于 (0, {upper:.6f})，当前为 {alpha}")
    u0 = solution if solution is not None else canonical_solution(basis, v)
    grid = basis.grid
    delta = grid.delta
    constant = weighted_constant(h, alpha)
    lhs = float(np.sum(grid.weights * np.abs(u0.values) ** 2 * delta ** alpha))
    rhs = constant * float(np.sum(grid.weights * np.abs(v.values) ** 2 * delta ** (2.0 + alpha)))
    ratio = lhs / rhs
    logger.info(f"{grid.domain.label}: 带权估计 α={alpha:.4f}, 比值 {ratio:.6f}")
    return WeightedCheck(alpha, h, constant, lhs, rhs, ratio)


@dataclass
class LpRow:
    p: float
    norm_p: float
    l1_data: float
    implied_c0: float

    def to_dict(self) -> dict:
        return asdict(self)


def lp_estimate_check(basis: BergmanBasis, v: ComplexField, p_ladder: Sequence[float],
                      solution: Optional[ComplexField] = None) -> List[LpRow]:
    """
    L^p 估计的常数形状审计：implied_C0 = ‖u₀‖_p / ((2-p)^{-1/2}|Ω|^{1/p-1/2}∫|v|)

    Raises:
        ValueError: p 不在 (1, 2) 内
    """
    u0 = solution if solution is not None else canonical_solution(basis, v)
    grid = basis.grid
    area = grid.domain.area
    l1 = float(np.sum(grid.weights * np.abs(v.values)))
    rows = []
    for p in p_ladder:
        if not 1.0 < p < 2.0:
            raise ValueError(f"p 必须位于 (1, 2)，当前为 {p}")
        norm_p = u0.norm(p)
        shape = (2.0 - p) ** -0.5 * area ** (1.0 / p - 0.5) * l1
        rows.append(LpRow(float(p), norm_p, l1, norm_p / shape))
    return rows


@dataclass
class DecayResult:
    epsilons: List[float]
    integrals: List[float]
    slope: float
    truncated: bool
    c: Optional[float] = None

    @property
    def threshold(self) -> Optional[float]:
        """斜率下界 2c/3 - 0.1；未给定 c 时为 None"""
        return None if self.c is None else 2.0 * self.c / 3.0 - DECAY_SLACK

    @property
    def satisfied(self) -> bool:
        return self.threshold is None or self.slope >= self.threshold


def boundary_decay(basis: BergmanBasis, w: complex, c: Optional[float] = None) -> DecayResult:
    """
    边界条带积分 ∫_{δ≤ε}|K(·,w)|² 在 ε = 2^{-k}（ε ≥ 2h）上的双对数斜率

    最小 ε 处条带为空时截断阶梯并标记。给定 c（0 < c < h(Ω)）时，
    结果带有下界 2c/3 - 0.1 及是否满足。

    Raises:
        ValueError: c 非正，或可用的条带宽度少于两个
    """
    if c is not None and c <= 0.0:
        raise ValueError(f"c 必须为正，当前为 {c}")
    grid = basis.grid
    column = basis.grid_values @ np.conj(basis.evaluate(w))
    density = grid.weights * np.abs(column) ** 2
    delta = grid.delta

    epsilons, integrals = [], []
    truncated = False
    k = 1
    while 2.0 ** -k >= 2.0 * grid.h:
        eps = 2.0 ** -k
        collar = delta <= eps
        if not collar.any():
            truncated = True
            break
        epsilons.append(eps)
        integrals.append(float(np.sum(density[collar])))
        k += 1
    if truncated:
        logger.warning(f"{grid.domain.label}: 条带在 ε={2.0 ** -k} 处为空，阶梯被截断")
    if len(epsilons) < 2:
        raise ValueError("边界衰减拟合至少需要两个条带宽度")
    slope = float(np.polyfit(np.log(epsilons), np.log(integrals), 1)[0])
    return DecayResult(epsilons, integrals, slope, truncated, c)
