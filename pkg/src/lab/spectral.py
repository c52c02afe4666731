"""
谱模块

五点差分 Dirichlet 拉普拉斯的最小特征值 λ₁、Hardy 常数、Rayleigh 商，
以及由平衡位势截断构造的检验函数。
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, ArpackNoConvergence, eigsh, splu

from src.lab.geom import Disk, Domain
from src.lab.grid import MIN_RESOLUTION, QuadratureGrid, ScalarField, dirichlet_form, rasterize
from src.lab.potential import EquilibriumResult, equilibrium_of_points, excluded_cloud
from src.utils.logger import Logger

logger = Logger.get_logger(name='spectral')

HARDY_UPPER_BOUND = 0.5
HARDY_LOG_COEFF = math.pi ** 2
DEFAULT_MS_EPS = 0.01
DEFAULT_MS_RATIO = 8.0
SUPPORT_TOL = 1e-9


@dataclass
class EigenResult:
    """
    最小特征对

    Attributes:
        value: 特征值
        field: 特征函数（Σu²h² = 1，符号取正）
        residual: ‖Au - λBu‖ / (λ‖Bu‖)
        iterations: 移位求逆的内层求解次数
    """

    value: float
    field: ScalarField
    residual: float
    iterations: int

    def to_dict(self) -> dict:
        return {'value': self.value, 'residual': self.residual, 'iterations': self.iterations,
                'cells': self.field.grid.size, 'resolution': self.field.grid.resolution}


def dirichlet_matrix(grid: QuadratureGrid) -> sp.csr_matrix:
    """
    五点模板矩阵 A（未除以 h²），fᵀAf 等于 grid.dirichlet_form(f)
    """
    st = grid.stencil
    n = grid.size
    rows = np.concatenate([st.edge_i, st.edge_j, st.edge_i, st.edge_j, st.face_cells])
    cols = np.concatenate([st.edge_j, st.edge_i, st.edge_i, st.edge_j, st.face_cells])
    ones = np.ones(len(st.edge_i))
    data = np.concatenate([-ones, -ones, ones, ones, st.face_coeffs])
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def _smallest_pair(matrix: sp.csr_matrix, mass: Optional[sp.spmatrix] = None):
    """移位 σ = 0 的 Lanczos（稀疏 LU 作为内层求解）"""
    lu = splu(matrix.tocsc())
    counter = {'solves': 0}

    def solve(x):
        counter['solves'] += 1
        return lu.solve(np.asarray(x, dtype=float).ravel())

    op_inv = LinearOperator(matrix.shape, matvec=solve, dtype=float)
    try:
        values, vectors = eigsh(matrix, k=1, M=mass, sigma=0.0, which='LM', OPinv=op_inv, tol=0.0)
    except (ArpackNoConvergence, RuntimeError) as e:
        raise RuntimeError(f"特征值求解失败：{e}") from e
    return float(values[0]), vectors[:, 0], counter['solves']


def _sign_fixed(u: np.ndarray) -> np.ndarray:
    return -u if np.sum(u) < 0 else u


def dirichlet_lambda1(grid: QuadratureGrid) -> EigenResult:
    """
    第一 Dirichlet 特征值 λ₁

    Args:
        grid: 求积网格

    Returns:
        特征对，特征函数按 Σu²h² = 1 归一并取正号

    Raises:
        RuntimeError: 特征值求解失败
    """
    matrix = dirichlet_matrix(grid)
    mu, u, solves = _smallest_pair(matrix)
    h2 = grid.lattice_mass
    value = mu / h2
    u = _sign_fixed(u) / math.sqrt(np.sum(u * u) * h2)
    residual = float(np.linalg.norm(matrix @ u / h2 - value * u) / (value * np.linalg.norm(u)))
    logger.info(f"{grid.domain.label}: λ₁ = {value:.6f}（分辨率 {grid.resolution}，残差 {residual:.2e}）")
    return EigenResult(value, grid.scalar_field(u), residual, solves)


def hardy_weight(grid: QuadratureGrid) -> np.ndarray:
    """1/δ²，δ 下限截断为 h/2"""
    delta = np.maximum(grid.delta, 0.5 * grid.h)
    return 1.0 / (delta * delta)


def hardy_pencil(grid: QuadratureGrid) -> EigenResult:
    """
    广义特征问题 A u = μ·h²·diag(1/δ²) u 的最小特征对，value 为 μ
    """
    matrix = dirichlet_matrix(grid)
    weight = hardy_weight(grid) * grid.lattice_mass
    mass = sp.diags(weight).tocsc()
    mu, u, solves = _smallest_pair(matrix, mass)
    u = _sign_fixed(u)
    bu = weight * u
    residual = float(np.linalg.norm(matrix @ u - mu * bu) / (mu * np.linalg.norm(bu)))
    return EigenResult(mu, grid.scalar_field(u), residual, solves)


@dataclass
class HardyEstimate:
    """
    Hardy 常数的分辨率外推

    令 f = δ^{1/2}g(log δ)，Hardy 商化为 ¼ + ∫g'²/∫g²，离散化只保留
    log(1/h) 量级的对数尺度区间，因此 μ_N ≈ μ∞ + π²/(a + log N)²。
    由粗、细两个分辨率上的 μ_N 解出 a 与 μ∞。

    Attributes:
        resolutions: (粗, 细) 分辨率
        pencils: 两个分辨率上的离散束特征值 μ_N
        offset: 拟合得到的 a
        limit: 外推得到的 μ∞
        extrapolated: μ 未随加密下降或外推值非正时为 False，此时 limit 取细网格的 μ
    """

    resolutions: Tuple[int, int]
    pencils: Tuple[float, float]
    offset: float
    limit: float
    extrapolated: bool

    @property
    def constant(self) -> float:
        """外推后的 Hardy 常数 √μ∞"""
        return math.sqrt(self.limit)

    def refinement(self) -> List[Tuple[int, float]]:
        """(分辨率, √μ_N) 加密序列"""
        return [(n, math.sqrt(mu)) for n, mu in zip(self.resolutions, self.pencils)]


def _log_scale_gap(offset: float, coarse: int, fine: int) -> float:
    return HARDY_LOG_COEFF * (1.0 / (offset + math.log(coarse)) ** 2 - 1.0 / (offset + math.log(fine)) ** 2)


def hardy_extrapolation(grid: QuadratureGrid, coarse: Optional[int] = None) -> HardyEstimate:
    """
    在 grid 与更粗的网格上求离散束，按对数尺度模型外推 μ∞

    Args:
        grid: 细网格
        coarse: 粗网格分辨率，缺省为细网格的一半

    Returns:
        外推结果；粗分辨率低于网格下限时不外推

    Raises:
        ValueError: 粗分辨率不小于细分辨率
        RuntimeError: 特征值求解失败
    """
    fine = grid.resolution
    coarse = coarse or fine // 2
    if coarse >= fine:
        raise ValueError(f"粗分辨率 {coarse} 必须小于细分辨率 {fine}")
    mu_fine = hardy_pencil(grid).value
    if coarse < MIN_RESOLUTION:
        logger.warning(f"{grid.domain.label}: 分辨率 {fine} 过低，Hardy 常数不做外推")
        return HardyEstimate((fine, fine), (mu_fine, mu_fine), math.inf, mu_fine, False)

    mu_coarse = hardy_pencil(rasterize(grid.domain, coarse)).value
    drop = mu_coarse - mu_fine
    if drop <= 0.0:
        logger.warning(f"{grid.domain.label}: 离散束未随加密下降（{mu_coarse:.6f} → {mu_fine:.6f}），不做外推")
        return HardyEstimate((coarse, fine), (mu_coarse, mu_fine), math.inf, mu_fine, False)

    # 间隙关于 a 严格递减，a → -log(粗) 时趋于无穷
    lower = -math.log(coarse) + 1e-9
    upper = 1.0
    while _log_scale_gap(upper, coarse, fine) > drop:
        upper *= 2.0
    offset = brentq(lambda a: _log_scale_gap(a, coarse, fine) - drop, lower, upper, xtol=1e-12)
    limit = mu_fine - HARDY_LOG_COEFF / (offset + math.log(fine)) ** 2
    if limit <= 0.0:
        logger.warning(f"{grid.domain.label}: 外推值 {limit:.6f} 非正，改用细网格离散束")
        return HardyEstimate((coarse, fine), (mu_coarse, mu_fine), offset, mu_fine, False)
    return HardyEstimate((coarse, fine), (mu_coarse, mu_fine), offset, limit, True)


def hardy_constant(grid: QuadratureGrid) -> float:
    """
    Hardy 常数 h(Ω) = √μ∞

    μ∞ 由 hardy_extrapolation 在 grid 与其一半分辨率上外推得到；
    单一网格的 √μ_N 见 hardy_pencil。

    Raises:
        RuntimeError: 特征值求解失败
    """
    estimate = hardy_extrapolation(grid)
    value = estimate.constant
    steps = '，'.join(f"N={n}: {v:.6f}" for n, v in estimate.refinement())
    logger.info(f"{grid.domain.label}: Hardy 常数 {value:.6f}（离散束 √μ_N {steps}）")
    return value


def rayleigh_quotient(f: ScalarField) -> float:
    """
    ∫|∇f|² / ∫f²（区域外视为零）

    Raises:
        ValueError: 零场
    """
    denominator = float(np.sum(f.values ** 2)) * f.grid.lattice_mass
    if denominator == 0.0:
        raise ValueError("零场没有 Rayleigh 商")
    return dirichlet_form(f) / denominator


def hardy_quotient(f: ScalarField) -> float:
    """∫|∇f|² / ∫f²/δ²，分母使用与 hardy_pencil 相同的截断权重"""
    denominator = float(np.sum(hardy_weight(f.grid) * f.values ** 2)) * f.grid.lattice_mass
    if denominator == 0.0:
        raise ValueError("零场没有 Hardy 商")
    return dirichlet_form(f) / denominator


def richardson_lambda1(domain: Domain, coarse: int, fine: int) -> float:
    """按 O(h²) 收敛对两个分辨率上的 λ₁ 做 Richardson 外推"""
    q2 = (fine / coarse) ** 2
    lam_c = dirichlet_lambda1(rasterize(domain, coarse)).value
    lam_f = dirichlet_lambda1(rasterize(domain, fine)).value
    return (q2 * lam_f - lam_c) / (q2 - 1.0)


def random_admissible_fields(grid: QuadratureGrid, count: int, seed: int = 0):
    """随机生成在掩码外为零的检验场（随机系数乘以 δ 截断）"""
    rng = np.random.default_rng(seed)
    delta = grid.delta
    for _ in range(count):
        modes = rng.normal(size=(3, 3))
        x = (grid.points.real - grid.origin.real) * np.pi
        y = (grid.points.imag - grid.origin.imag) * np.pi
        values = sum(modes[a, b] * np.cos(a * x) * np.cos(b * y) for a in range(3) for b in range(3))
        yield grid.scalar_field(values * delta)


# ---------------------------------------------------------------------------
# 容量截断检验函数
# ---------------------------------------------------------------------------

@dataclass
class CapacityCutoffResult:
    """
    φ = (1 - χ)η 的构造结果

    Attributes:
        field: 网格上的 φ
        quotient: φ 的 Rayleigh 商（λ₁ 的上界）
        center, r, r1, r2, outer_radius: 构造参数
        equilibrium: 被排除集合在 Δ(center, outer_radius) 中的 Green 平衡结果（可能为 None）
    """

    field: ScalarField
    quotient: float
    center: complex
    r: float
    r1: float
    r2: float
    outer_radius: float
    equilibrium: Optional[EquilibriumResult]
    domain: Domain

    def evaluate(self, z):
        """逐点求 φ(z)；区域外和挖去集合上取零"""
        pts = np.asarray(z, dtype=complex)
        rho = np.abs(pts - self.center)
        eta = np.clip((self.r2 - rho) / (self.r2 - self.r1), 0.0, 1.0)
        if self.equilibrium is None:
            chi = np.zeros(pts.shape)
        else:
            chi = np.clip(np.asarray(self.equilibrium.potential(pts)) / self.equilibrium.energy, 0.0, 1.0)
        inside = np.asarray(self.domain.contains(pts), dtype=bool) & \
            (np.asarray(self.domain.boundary_distance(pts)) > SUPPORT_TOL)
        values = np.where(inside, (1.0 - chi) * eta, 0.0)
        return float(values) if pts.ndim == 0 else values


def ms_test_function(grid: QuadratureGrid, alpha: float, r: float, center: complex,
                     eps: float = DEFAULT_MS_EPS, ratio: float = DEFAULT_MS_RATIO) -> CapacityCutoffResult:
    """
    构造 φ = (1 - χ)η 并返回其 Rayleigh 商

    r₁ = e^{1/2}(1+2ε)αr，r₂ = e^{1/2}(1+3ε)αr，外圆盘半径 R = N·r；
    χ 为 Δ̄(center, r) ∖ Ω 在 Δ(center, R) 中的 Green 平衡截断，η 为径向线性截断。

    Args:
        grid: 区域上的求积网格
        alpha: α ∈ (0, 1)
        r: 半径（应小于容量半径）
        center: 中心
        eps: 参数 ε
        ratio: 参数 N（> 2）

    Raises:
        ValueError: 参数不满足 r₁ < r₂ < r < R/2
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"α 必须位于 (0, 1)，当前为 {alpha}")
    r1 = math.exp(0.5) * (1.0 + 2.0 * eps) * alpha * r
    r2 = math.exp(0.5) * (1.0 + 3.0 * eps) * alpha * r
    outer = ratio * r
    if not (0.0 < r1 < r2 < r < outer / 2.0):
        raise ValueError(f"参数需满足 r1 < r2 < r < R/2，当前 r1={r1:.4g}, r2={r2:.4g}, r={r:.4g}, R={outer:.4g}")

    domain = grid.domain
    cloud = excluded_cloud(domain, center, r)
    equilibrium = None
    if len(cloud) > 0:
        equilibrium = equilibrium_of_points(cloud, Disk(complex(center), outer))

    result = CapacityCutoffResult(grid.scalar_field(np.zeros(grid.size)), 0.0, complex(center),
                                r, r1, r2, outer, equilibrium, domain)
    result.field = grid.scalar_field(result.evaluate(grid.points))
    result.quotient = rayleigh_quotient(result.field)
    logger.info(f"{domain.label}: 检验函数商 {result.quotient:.6f}（r={r:.4f}, α={alpha}）")
    return result
