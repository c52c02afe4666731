"""
位势论模块

离散平衡测度（对数核与圆盘 Green 核）、对数容量与 Green 容量、Robin 常数、
容量半径，以及由平衡位势构造的截断函数。

离散能量 I(w) = wᵀAw，A 的非对角元为核值 k(x_i, x_j)，对角元为第 i 个原子
的自能量：把原子看作长度为局部采样间距 ℓ_i 的均匀弧元，log 核的自能量为
log(e^{-3/2}·ℓ_i)。
"""
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.spatial import cKDTree

from src.lab.geom import ClosedDisk, CompactSet, Disk, Domain, PointCloud
from src.lab.grid import QuadratureGrid, ScalarField, dirichlet_form, rasterize
from src.utils.logger import Logger

logger = Logger.get_logger(name='potential')

STATIONARITY_TOL = 1e-8
MAX_ITERATIONS = 2000
ARMIJO_SHRINK = 0.5
DEDUPE_DECIMALS = 12
SELF_ENERGY_FACTOR = math.exp(-1.5)
SPACING_CAP = 4.0  # 局部间距上限（中位数的倍数）
DEFAULT_ROBIN_SAMPLES = 256
LADDER_TOP = 1.0 - 1e-6
CIRCLE_PROBES = 48
LATTICE_PER_RADIUS = 8


@dataclass
class DiscreteMeasure:
    """有限点集上的概率测度"""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.support) != len(self.weights):
            raise ValueError("支撑点个数与权重个数不一致")
        if len(self.weights) and abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise ValueError(f"测度总质量应为 1，当前为 {np.sum(self.weights):.15f}")

    def to_dict(self) -> dict:
        return {
            'support': [[float(p.real), float(p.imag)] for p in self.support],
            'weights': [float(w) for w in self.weights],
        }


@dataclass
class EquilibriumResult:
    """
    平衡问题的结果

    Attributes:
        measure: 平衡测度
        energy: I(μ₀)
        capacity: e^{I(μ₀)}
        kernel: 'logarithmic' 或 'green'
        disk: Green 核所在的圆盘（对数核时为 None）
        converged: 优化器是否收敛
        iterations: 迭代次数
        self_radii: 每个原子自能量使用的半径 ρ_i
    """

    measure: DiscreteMeasure
    energy: float
    capacity: float
    kernel: str
    disk: Optional[Disk] = None
    converged: bool = True
    iterations: int = 0
    self_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def potential(self, z):
        """位势 p_μ(z) = Σ w_j k(z, x_j)，|z - x_j| 下限取 ρ_j"""
        pts = np.asarray(z, dtype=complex)
        x = self.measure.support
        if len(x) == 0:
            return np.zeros(pts.shape) if pts.ndim else 0.0
        dist = np.maximum(np.abs(pts[..., None] - x), self.self_radii)
        values = np.log(dist)
        if self.kernel == 'green':
            c, r = self.disk.center, self.disk.radius
            values = values + np.log(r) - np.log(np.abs(r * r - (pts[..., None] - c) * np.conj(x - c)))
        result = values @ self.measure.weights
        return float(result) if pts.ndim == 0 else result

    def to_dict(self) -> dict:
        data = self.measure.to_dict()
        data.update({
            'energy': float(self.energy),
            'capacity': float(self.capacity),
            'kernel': self.kernel,
            'converged': bool(self.converged),
            'iterations': int(self.iterations),
        })
        if self.disk is not None:
            data['disk'] = self.disk.to_dict()
        return data


# ---------------------------------------------------------------------------
# 离散能量与优化
# ---------------------------------------------------------------------------

def _distinct_points(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=complex).ravel()
    _, keep = np.unique(np.round(pts, DEDUPE_DECIMALS), return_index=True)
    return pts[np.sort(keep)]


def _self_radii(points: np.ndarray) -> np.ndarray:
    """ρ_i = e^{-3/2}·ℓ_i，ℓ_i 为到最近两个邻点的平均距离"""
    xy = np.column_stack([points.real, points.imag])
    k = min(3, len(points))
    dist, _ = cKDTree(xy).query(xy, k=k)
    spacing = dist[:, 1:].mean(axis=1)
    spacing = np.minimum(spacing, SPACING_CAP * np.median(spacing))
    return SELF_ENERGY_FACTOR * spacing


def _energy_matrix(points: np.ndarray, radii: np.ndarray, disk: Optional[Disk]) -> np.ndarray:
    diff = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(diff, 1.0)
    matrix = np.log(diff)
    np.fill_diagonal(matrix, np.log(radii))
    if disk is not None:
        c, r = disk.center, disk.radius
        shifted = points - c
        matrix += math.log(r) - np.log(np.abs(r * r - shifted[:, None] * np.conj(shifted)[None, :]))
    return matrix


def project_simplex(v: np.ndarray) -> np.ndarray:
    """欧氏投影到概率单纯形 {w ≥ 0, Σw = 1}（排序阈值法）"""
    n = len(v)
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, n + 1)
    rho = ind[u - cssv / ind > 0][-1]
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _face_newton(matrix: np.ndarray, w: np.ndarray) -> Optional[np.ndarray]:
    """在当前支撑面上精确求解 max wᵀAw, Σw = 1 的鞍点方程"""
    support = np.nonzero(w > 0)[0]
    m = len(support)
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = matrix[np.ix_(support, support)]
    kkt[:m, m] = 1.0
    kkt[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    if np.any(sol[:m] < 0) or not np.all(np.isfinite(sol)):
        return None
    candidate = np.zeros_like(w)
    candidate[support] = sol[:m] / np.sum(sol[:m])
    return candidate


def maximize_energy(matrix: np.ndarray, tol: float = STATIONARITY_TOL,
                    max_iter: int = MAX_ITERATIONS):
    """
    在概率单纯形上最大化 wᵀAw

    投影梯度上升（Armijo 回溯），每步之后在当前支撑面上尝试一次精确 Newton 步，
    能量不下降且权重非负时接受。平稳性用投影梯度残差判定。

    Args:
        matrix: 对称能量矩阵
        tol: 平稳性容差
        max_iter: 最大迭代次数

    Returns:
        (权重, 能量, 是否收敛, 迭代次数)
    """
    n = len(matrix)
    w = np.full(n, 1.0 / n)
    lipschitz = max(2.0 * float(np.max(np.abs(matrix).sum(axis=1))), 1e-12)
    energy = float(w @ matrix @ w)
    step = 1.0 / lipschitz

    for iteration in range(1, max_iter + 1):
        grad = 2.0 * matrix @ w
        residual = np.linalg.norm(project_simplex(w + grad / lipschitz) - w) * lipschitz
        if residual <= tol * (1.0 + np.max(np.abs(grad))):
            return w, energy, True, iteration

        t = min(2.0 * step, 1e3 / lipschitz)
        while True:
            trial = project_simplex(w + t * grad)
            move = trial - w
            trial_energy = float(trial @ matrix @ trial)
            if trial_energy >= energy + grad @ move - 0.5 / t * (move @ move) or t < 1e-16:
                break
            t *= ARMIJO_SHRINK
        step = t
        w, energy = trial, trial_energy

        newton = _face_newton(matrix, w)
        if newton is not None:
            newton_energy = float(newton @ matrix @ newton)
            if newton_energy >= energy:
                w, energy = newton, newton_energy
        logger.debug(f"迭代 {iteration}: 能量 {energy:.12f}, 残差 {residual:.3e}")

    logger.warning(f"平衡测度优化在 {max_iter} 次迭代内未收敛，返回最后迭代值")
    return w, energy, False, max_iter


def equilibrium_of_points(points: np.ndarray, disk: Optional[Disk] = None) -> EquilibriumResult:
    """
    点云上的离散平衡测度

    能量矩阵对角元取 log ρ_i（ρ_i 为自能半径，见 _self_radii）。对角元只影响
    自作用项，使离散最大化问题有界；非对角元为精确的点对核值。

    Args:
        points: 复数点云（重复点会被合并）
        disk: 给定时使用该圆盘的 Green 核，否则使用对数核

    Returns:
        平衡问题结果；只有一个不同点时容量精确为 0
    """
    kernel = 'green' if disk is not None else 'logarithmic'
    pts = _distinct_points(points)
    if len(pts) == 0:
        raise ValueError("平衡问题需要非空点集")
    if len(pts) == 1:
        measure = DiscreteMeasure(pts, np.ones(1))
        return EquilibriumResult(measure, -math.inf, 0.0, kernel, disk, True, 0, np.zeros(1))

    radii = _self_radii(pts)
    matrix = _energy_matrix(pts, radii, disk)
    w, energy, converged, iterations = maximize_energy(matrix)
    w = w / np.sum(w)
    if disk is not None and energy >= 0.0:
        raise RuntimeError(f"Green 能量应为负，当前为 {energy:.6e}")
    return EquilibriumResult(DiscreteMeasure(pts, w), energy, math.exp(energy),
                             kernel, disk, converged, iterations, radii)


# ---------------------------------------------------------------------------
# 操作接口
# ---------------------------------------------------------------------------

def _compact_samples(excise: CompactSet, n: Optional[int], seed: int) -> np.ndarray:
    if n is not None and n < 2:
        raise ValueError(f"采样点数至少为 2，当前为 {n}")
    points = excise.sample(n, seed)
    if len(points) == 0:
        raise ValueError("紧集为空，无法计算平衡测度")
    return points


def log_equilibrium(excise: CompactSet, n: Optional[int] = None, seed: int = 0) -> EquilibriumResult:
    """
    对数平衡测度与对数容量 𝒞_l(E) = e^{I(μ₀)}

    Args:
        excise: 紧集 E
        n: 采样点数（至少 2），缺省按紧集直径取默认密度
        seed: 采样种子

    Returns:
        平衡问题结果
    """
    result = equilibrium_of_points(_compact_samples(excise, n, seed))
    logger.debug(f"{excise.kind} 的对数容量 {result.capacity:.6f}")
    return result


def green_function_disk(radius: float, z, w, center: complex = 0j):
    """
    圆盘 Δ(center, R) 的 Green 函数 log(R|z-w| / |R² - (z-c)conj(w-c)|)

    z = w 时返回 -inf。

    Raises:
        ValueError: z 或 w 不在圆盘内
    """
    zz = np.asarray(z, dtype=complex) - center
    ww = np.asarray(w, dtype=complex) - center
    if np.any(np.abs(zz) >= radius) or np.any(np.abs(ww) >= radius):
        raise ValueError(f"Green 函数的两个自变量都必须位于半径 {radius} 的圆盘内")
    num = radius * np.abs(zz - ww)
    den = np.abs(radius * radius - zz * np.conj(ww))
    with np.errstate(divide='ignore'):
        values = np.log(num) - np.log(den)
    return float(values) if values.ndim == 0 else values


def green_equilibrium(excise: CompactSet, disk: Disk, n: Optional[int] = None,
                      seed: int = 0) -> EquilibriumResult:
    """
    Green 平衡测度与 Green 容量 𝒞_g(E, U) = e^{I(μ₀)}

    Raises:
        ValueError: E 接触或超出 ∂U
    """
    points = _compact_samples(excise, n, seed)
    if np.max(np.abs(points - disk.center)) >= disk.radius - 1e-12:
        raise ValueError(f"紧集必须严格位于圆盘 Δ({disk.center}, {disk.radius}) 内")
    return equilibrium_of_points(points, disk)


def equilibrium_cutoff(excise: CompactSet, disk: Disk, n: Optional[int] = None,
                       resolution: int = 64, seed: int = 0):
    """
    截断函数 χ = p_{μ₀}/I(μ₀)

    Args:
        excise: 紧集 E
        disk: 外圆盘 U
        n: 采样点数
        resolution: U 上网格分辨率
        seed: 采样种子

    Returns:
        (χ 场, c = -2π/I(μ₀), 求积 Dirichlet 能量 ∫|∇χ|², 平衡结果)
    """
    result = green_equilibrium(excise, disk, n, seed)
    if result.energy >= 0.0:
        raise RuntimeError("Green 平衡能量非负，无法构造截断函数")
    grid = rasterize(disk, resolution)
    chi = cutoff_field(grid, result)
    energy_value = -2.0 * math.pi / result.energy
    quadrature = dirichlet_form(chi)
    logger.info(f"截断能量 c = {energy_value:.6f}，求积值 {quadrature:.6f}")
    return chi, energy_value, quadrature, result


def cutoff_field(grid: QuadratureGrid, result: EquilibriumResult) -> ScalarField:
    """
    在网格上取 χ = p/I，不做截断

    离散测度下 χ 在支撑附近可略超 1（量级 1/(n·|I|)），区域边界上为 0。
    需要 [0, 1] 值的调用方自行截断。
    """
    values = np.asarray(result.potential(grid.points)) / result.energy
    return grid.scalar_field(values)


def robin_constant(domain: Domain, z: complex, n: int = DEFAULT_ROBIN_SAMPLES) -> float:
    """
    Robin 常数 c_Ω(z)：把 ∂Ω 的采样点经 ζ ↦ 1/(ζ - z) 反演（∞ 映到原点），
    取像点云的对数容量

    Raises:
        ValueError: z 不在区域内
    """
    if not domain.contains(z):
        raise ValueError(f"点 {z} 不在区域 {domain.label} 内")
    samples = domain.boundary_samples(n)
    images = np.concatenate([1.0 / (samples - z), [0j]])
    if np.ptp(images.real) < 1e-12 and np.ptp(images.imag) < 1e-12:
        return 0.0
    result = equilibrium_of_points(images)
    return result.capacity


# ---------------------------------------------------------------------------
# 容量半径
# ---------------------------------------------------------------------------

@dataclass
class CapacityRadiusResult:
    """容量半径 R_{L,α} 的结果：最优半径、对应中心以及各候选中心的半径"""

    radius: float
    center: complex
    alpha: float
    centers: np.ndarray
    radii: np.ndarray

    def to_dict(self) -> dict:
        return {
            'alpha': self.alpha,
            'radius': self.radius,
            'center': [self.center.real, self.center.imag],
            'candidates': [{'center': [c.real, c.imag], 'radius': float(r)}
                           for c, r in zip(self.centers, self.radii)],
        }


def excluded_cloud(domain: Domain, center: complex, s: float) -> np.ndarray:
    """闭圆盘 Δ̄(center, s) ∖ Ω 的采样点：圆周、格点以及落在圆盘内的挖去集合采样"""
    theta = 2.0 * np.pi * np.arange(CIRCLE_PROBES) / CIRCLE_PROBES
    circle = center + s * np.exp(1j * theta)
    ticks = np.linspace(-s, s, 2 * LATTICE_PER_RADIUS + 1)
    lattice = (center + ticks[:, None] + 1j * ticks[None, :]).ravel()
    lattice = lattice[np.abs(lattice - center) <= s]
    probes = np.concatenate([circle, lattice])
    outside = probes[~np.asarray(domain.contains(probes), dtype=bool)]

    pieces = [outside]
    for excise in domain.excised_sets():
        pts = excise.sample()
        pieces.append(pts[np.abs(pts - center) <= s])
    return np.concatenate(pieces)


def _excluded_capacity(domain: Domain, center: complex, s: float) -> float:
    cloud = excluded_cloud(domain, center, s)
    if len(cloud) == 0:
        return 0.0
    return equilibrium_of_points(cloud).capacity


def _radius_admissible(domain: Domain, center: complex, r: float, alpha: float,
                       delta: float, ladder_size: int) -> bool:
    top = r * LADDER_TOP
    if top <= delta:
        return True
    ladder = np.geomspace(delta, top, ladder_size)[::-1]
    for s in ladder:
        if _excluded_capacity(domain, center, s) > alpha * s:
            return False
    return True


def candidate_centers(domain: Domain, center_grid: int) -> np.ndarray:
    """包围盒上 center_grid × center_grid 的格点中位于区域内的点，外加近似内心"""
    xmin, xmax, ymin, ymax = domain.bounding_box
    ticks = (np.arange(center_grid) + 0.5) / center_grid
    xs = xmin + ticks * (xmax - xmin)
    ys = ymin + ticks * (ymax - ymin)
    lattice = (xs[:, None] + 1j * ys[None, :]).ravel()
    members = lattice[np.asarray(domain.contains(lattice), dtype=bool)]

    scan = 64
    sx = np.linspace(xmin, xmax, scan)
    sy = np.linspace(ymin, ymax, scan)
    probes = (sx[:, None] + 1j * sy[None, :]).ravel()
    incenter = probes[int(np.argmax(domain.boundary_distance(probes)))]
    return np.concatenate([members, [incenter]])


def capacity_radius(domain: Domain, alpha: float, center_grid: int = 5,
                    bisections: int = 12, ladder_size: int = 16) -> CapacityRadiusResult:
    """
    容量半径 R_{L,α}(Ω)

    对每个候选中心 z 二分求最大的 r，使几何阶梯上的每个 s ≤ r 都满足
    𝒞_l(Δ̄(z,s) ∖ Ω) ≤ αs，再对中心取最大值。

    Args:
        domain: 区域
        alpha: 比例 α ∈ (0, 1)
        center_grid: 候选中心格点数（每个方向）
        bisections: 二分次数
        ladder_size: s 阶梯长度

    Returns:
        容量半径结果

    Raises:
        ValueError: α 不在 (0, 1) 内
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"α 必须位于 (0, 1)，当前为 {alpha}")

    centers = candidate_centers(domain, center_grid)
    radii = np.zeros(len(centers))
    upper = 2.0 * domain.diameter
    for k, center in enumerate(centers):
        delta = float(domain.boundary_distance(center))
        lo, hi = delta, upper
        if _radius_admissible(domain, center, hi, alpha, delta, ladder_size):
            radii[k] = hi
            continue
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            if _radius_admissible(domain, center, mid, alpha, delta, ladder_size):
                lo = mid
            else:
                hi = mid
        radii[k] = lo
        logger.debug(f"中心 {center:.4f}: 半径 {lo:.6f}")

    best = int(np.argmax(radii))
    logger.info(f"{domain.label} 的容量半径 (α={alpha}) 为 {radii[best]:.6f}")
    return CapacityRadiusResult(float(radii[best]), complex(centers[best]), alpha, centers, radii)
