"""
验证模块

在区域语料上逐条运行各个不等式，汇总为报告行；另含挖去集合扫描、
κ/λ₁ 经验常数与报告/热图导出。

每个区域的网格、基、特征值等中间量在 DomainContext 中按需计算并缓存，
同一区域的任务共享这些结果。
"""
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.lab import geom
from src.lab.bergman import build_basis, comparison_functionals, kernel, kernel_diag, kernel_min
from src.lab.dbar import (boundary_decay, bump_field, canonical_solution, lp_estimate_check,
                          weighted_estimate_check)
from src.lab.geom import Difference, Domain, PointCloud, Segment
from src.lab.grid import ScalarField, rasterize
from src.lab.potential import capacity_radius, log_equilibrium, robin_constant
from src.lab.spectral import HARDY_UPPER_BOUND, dirichlet_lambda1, hardy_extrapolation, ms_test_function
from src.utils.data_saver import DataSaver
from src.utils.logger import Logger
from src.utils.task_processor import TaskProcessor

logger = Logger.get_logger(name='verify')

# 不等式编号
KERNEL_ROBIN = 'kernel_robin_lower'
KERNEL_RADIUS = 'kernel_capacity_radius'
KERNEL_EIGEN_RATIO = 'kernel_eigenvalue_ratio'
KERNEL_EIGEN_C0 = 'kernel_eigenvalue_c0'
EIGEN_CERTIFICATE = 'eigenvalue_cutoff_certificate'
EIGEN_RADIUS_CONSTANT = 'eigenvalue_radius_constant'
EIGEN_VOLUME = 'eigenvalue_volume_lower'
DBAR_WEIGHTED = 'dbar_weighted'
DBAR_LP_SHAPE = 'dbar_lp_shape'
DBAR_LP_SPREAD = 'dbar_lp_spread'
KERNEL_DECAY = 'kernel_boundary_decay'
COMPARISON_MONOTONE = 'comparison_monotone'
HARDY_REFINEMENT = 'hardy_refinement'

DEFAULT_TOLERANCES = {
    KERNEL_ROBIN: 0.02,
    KERNEL_RADIUS: 0.05,
    KERNEL_EIGEN_RATIO: 0.0,
    KERNEL_EIGEN_C0: 0.0,
    EIGEN_CERTIFICATE: 1e-6,
    EIGEN_RADIUS_CONSTANT: 0.0,
    EIGEN_VOLUME: 0.02,
    DBAR_WEIGHTED: 0.05,
    DBAR_LP_SHAPE: 0.0,
    DBAR_LP_SPREAD: 0.0,
    KERNEL_DECAY: 0.05,
    COMPARISON_MONOTONE: 0.02,
    HARDY_REFINEMENT: 0.0,
}

RELATIONS = ('ge', 'le', 'positive', 'record')
SAMPLE_POINTS = 10
INTERIOR_FRACTION = 0.2
VOLUME_RADII = (0.25, 0.5, 1.0, 2.0, 4.0)
VOLUME_CENTERS = 400
VOLUME_PROBES = 12
COMPARISON_PAIRS = 20
CERTIFICATE_ALPHA = 0.3
CORPUS_LABEL = 'corpus'
LP_SPREAD_LIMIT = 10.0


@dataclass
class ReportRow:
    """
    报告行

    margin 为不等式方向上的相对余量；pass ⇔ margin ≥ -tolerance。
    relation 为 'record' 时只记录数值，'positive' 时要求 lhs > 0。
    """

    inequality: str
    domain: str
    parameters: Dict[str, float]
    lhs: float
    rhs: float
    relation: str
    tolerance: float = 0.0
    resolution: int = 0
    margin: float = 0.0
    passed: bool = True
    error: str = ''

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"未知的关系 {self.relation}，可选 {RELATIONS}")
        if self.error:
            self.margin, self.passed = 0.0, False
            return
        if not (math.isfinite(self.lhs) and math.isfinite(self.rhs)):
            self.error = f"非有限数值 lhs={self.lhs}, rhs={self.rhs}"
            self.lhs, self.rhs = 0.0, 0.0
            self.margin, self.passed = 0.0, False
            return
        self.margin = relative_margin(self.lhs, self.rhs, self.relation)
        if self.relation == 'positive':
            self.passed = self.lhs > 0.0
        else:
            self.passed = self.margin >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            'inequality': self.inequality,
            'domain': self.domain,
            'parameters': ';'.join(f"{k}={v:.6e}" for k, v in sorted(self.parameters.items())),
            'lhs': self.lhs,
            'rhs': self.rhs,
            'relation': self.relation,
            'margin': self.margin,
            'tolerance': self.tolerance,
            'pass': self.passed,
            'resolution': self.resolution,
            'error': self.error,
        }


def relative_margin(lhs: float, rhs: float, relation: str) -> float:
    """lhs ≥ rhs 时为 (lhs - rhs)/|rhs|，lhs ≤ rhs 时为 (rhs - lhs)/|rhs|"""
    if relation == 'record':
        return 0.0
    if relation == 'positive':
        return lhs
    scale = abs(rhs) or abs(lhs) or 1.0
    gap = lhs - rhs if relation == 'ge' else rhs - lhs
    return gap / scale


def error_row(inequality: str, domain: str, message: str) -> ReportRow:
    return ReportRow(inequality, domain, {}, 0.0, 0.0, 'record', error=message)


# ---------------------------------------------------------------------------
# 区域上下文
# ---------------------------------------------------------------------------

class DomainContext:
    """单个区域的中间量缓存（线程安全，按需计算）"""

    def __init__(self, domain: Domain, lab: Dict):
        self.domain = domain
        self.lab = lab
        self._cache = {}
        self._lock = threading.RLock()

    def _memo(self, key, build: Callable):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    @property
    def label(self) -> str:
        return self.domain.label

    @property
    def resolution(self) -> int:
        return self.lab['resolution']

    @property
    def grid(self):
        return self._memo('grid', lambda: rasterize(self.domain, self.lab['resolution']))

    @property
    def basis(self):
        return self._memo('basis', lambda: build_basis(self.grid, self.lab['degree']))

    @property
    def lambda1(self) -> float:
        return self._memo('lambda1', lambda: dirichlet_lambda1(self.grid).value)

    @property
    def hardy_estimate(self):
        return self._memo('hardy', lambda: hardy_extrapolation(self.grid))

    @property
    def hardy(self) -> float:
        return self.hardy_estimate.constant

    @property
    def admissible_hardy(self) -> float:
        """∂̄ 估计使用的 Hardy 常数，不超过普适上界 ½"""
        return min(HARDY_UPPER_BOUND, self.hardy)

    @property
    def kappa(self) -> float:
        return self._memo('kappa', lambda: kernel_min(self.basis)[0])

    @property
    def inradius(self) -> float:
        return self._memo('inradius', lambda: float(self.domain.inradius))

    @property
    def anchor(self) -> complex:
        """网格上 δ_Ω 最大的单元中心（字典序第一个）"""
        grid = self.grid
        return self._memo('anchor', lambda: complex(grid.points[int(np.argmax(grid.delta))]))

    def radius(self, alpha: float):
        return self._memo(('radius', alpha), lambda: capacity_radius(
            self.domain, alpha,
            center_grid=self.lab['center_grid'],
            bisections=self.lab['radius_bisections'],
            ladder_size=self.lab['ladder_size']))

    @property
    def dbar_basis(self):
        return self._memo('dbar_basis', lambda: build_basis(
            rasterize(self.domain, self.lab['dbar_resolution']), self.lab['degree']))

    def interior_points(self, count: int) -> np.ndarray:
        """δ_Ω ≥ 0.2·内切半径的单元中心中均匀抽取的点，第一个为锚点"""
        grid = self.grid
        candidates = grid.points[grid.delta >= INTERIOR_FRACTION * self.inradius]
        picks = np.linspace(0, len(candidates) - 1, count - 1).round().astype(int)
        return np.concatenate([[self.anchor], candidates[picks]])

    def bumps(self) -> List:
        """三个光滑紧支撑右端项，中心取 δ 较大的单元"""
        def build():
            grid = self.dbar_basis.grid
            delta = grid.delta
            deep = np.nonzero(delta >= 0.5 * delta.max())[0]
            centers = [grid.points[int(np.argmax(delta))], grid.points[deep[0]], grid.points[deep[-1]]]
            return [bump_field(grid, c, 0.6 * float(self.domain.boundary_distance(c))) for c in centers]
        return self._memo('bumps', build)

    def tolerance(self, inequality: str) -> float:
        return float(self.lab.get('tolerances', {}).get(inequality, DEFAULT_TOLERANCES[inequality]))

    def row(self, inequality: str, parameters: Dict, lhs: float, rhs: float, relation: str,
            resolution: Optional[int] = None) -> ReportRow:
        return ReportRow(inequality, self.label, parameters, float(lhs), float(rhs), relation,
                         self.tolerance(inequality), resolution or self.resolution)


# ---------------------------------------------------------------------------
# 各不等式
# ---------------------------------------------------------------------------

def check_kernel_robin(ctx: DomainContext) -> List[ReportRow]:
    """K(z) ≥ c_Ω(z)²/π"""
    rows = []
    for z in ctx.interior_points(SAMPLE_POINTS):
        k = kernel_diag(ctx.basis, z)
        c = robin_constant(ctx.domain, z, ctx.lab['boundary_samples'])
        rows.append(ctx.row(KERNEL_ROBIN, {'x': z.real, 'y': z.imag}, k, c * c / math.pi, 'ge'))
    return rows


def check_kernel_radius(ctx: DomainContext) -> List[ReportRow]:
    """κ ≥ α²/(π·R_{L,α}²)"""
    rows = []
    for alpha in ctx.lab['alphas']:
        radius = ctx.radius(alpha).radius
        rows.append(ctx.row(KERNEL_RADIUS, {'alpha': alpha, 'radius': radius},
                            ctx.kappa, alpha ** 2 / (math.pi * radius ** 2), 'ge'))
    return rows


def check_kernel_eigen_ratio(ctx: DomainContext) -> List[ReportRow]:
    return [ctx.row(KERNEL_EIGEN_RATIO, {'kappa': ctx.kappa, 'lambda1': ctx.lambda1},
                    ctx.kappa / ctx.lambda1, 0.0, 'positive')]


def check_eigen_certificate(ctx: DomainContext) -> List[ReportRow]:
    """截断检验函数的 Rayleigh 商是 λ₁ 的上界，并记录商·R² 作为经验常数"""
    alpha = CERTIFICATE_ALPHA
    radius = ctx.radius(alpha)
    cutoff = ms_test_function(ctx.grid, alpha, radius.radius, radius.center,
                              eps=ctx.lab['ms_eps'], ratio=ctx.lab['ms_ratio_n'])
    params = {'alpha': alpha, 'radius': radius.radius, 'r1': cutoff.r1, 'r2': cutoff.r2}
    return [
        ctx.row(EIGEN_CERTIFICATE, params, cutoff.quotient, ctx.lambda1, 'ge'),
        ctx.row(EIGEN_RADIUS_CONSTANT, params, cutoff.quotient * radius.radius ** 2, 0.0, 'record'),
    ]


def complement_fraction(domain: Domain, centers: np.ndarray, r: float,
                        probes: int = VOLUME_PROBES) -> np.ndarray:
    """每个中心处 |B(x,r) ∖ Ω| / |B(x,r)| 的格点估计"""
    ticks = (np.arange(probes) + 0.5) / probes * 2.0 - 1.0
    offsets = (ticks[:, None] + 1j * ticks[None, :]).ravel()
    offsets = offsets[np.abs(offsets) <= 1.0] * r
    samples = centers[:, None] + offsets[None, :]
    outside = ~np.asarray(domain.contains(samples), dtype=bool)
    return outside.mean(axis=1)


def check_eigen_volume(ctx: DomainContext) -> List[ReportRow]:
    """λ₁ ≥ (n/4r²)·inf_x |B(x,r)∖Ω|/|B(x,r)|，n = 2"""
    grid = ctx.grid
    stride = max(1, grid.size // VOLUME_CENTERS)
    centers = grid.points[::stride]
    rows = []
    for factor in VOLUME_RADII:
        r = factor * ctx.inradius
        theta = float(np.min(complement_fraction(ctx.domain, centers, r)))
        bound = 2.0 / (4.0 * r * r) * theta
        rows.append(ctx.row(EIGEN_VOLUME, {'r': r, 'fraction': theta}, ctx.lambda1, bound, 'ge'))
    return rows


def check_dbar_weighted(ctx: DomainContext) -> List[ReportRow]:
    basis = ctx.dbar_basis
    h = ctx.admissible_hardy
    upper = 2.0 * 0.9 * h / 3.0
    rows = []
    for index, v in enumerate(ctx.bumps()):
        u0 = canonical_solution(basis, v)
        for share in (0.2, 0.8):
            check = weighted_estimate_check(basis, v, share * upper, h, solution=u0)
            rows.append(ctx.row(DBAR_WEIGHTED, {'alpha': check.alpha, 'bump': index, 'hardy': h},
                                check.lhs, check.rhs, 'le', basis.grid.resolution))
    return rows


def check_dbar_lp(ctx: DomainContext) -> List[ReportRow]:
    basis = ctx.dbar_basis
    table = lp_estimate_check(basis, ctx.bumps()[0], ctx.lab['p_ladder'])
    res = basis.grid.resolution
    rows = [ctx.row(DBAR_LP_SHAPE, {'p': row.p, 'norm_p': row.norm_p, 'l1': row.l1_data},
                    row.implied_c0, 0.0, 'record', res) for row in table]
    implied = [row.implied_c0 for row in table]
    rows.append(ctx.row(DBAR_LP_SPREAD, {'min': min(implied), 'max': max(implied)},
                        max(implied) / min(implied), LP_SPREAD_LIMIT, 'le', res))
    return rows


def check_kernel_decay(ctx: DomainContext) -> List[ReportRow]:
    c = 0.9 * ctx.admissible_hardy
    decay = boundary_decay(ctx.basis, ctx.anchor, c)
    params = {'c': c, 'levels': len(decay.epsilons), 'truncated': float(decay.truncated)}
    return [ctx.row(KERNEL_DECAY, params, decay.slope, decay.threshold, 'ge')]


def check_hardy_refinement(ctx: DomainContext) -> List[ReportRow]:
    """记录各分辨率的 √μ_N 与外推常数，供加密收敛检查"""
    estimate = ctx.hardy_estimate
    rows = []
    for n, value in estimate.refinement():
        params = {'h': 1.0 / n, 'extrapolated': float(estimate.extrapolated)}
        rows.append(ctx.row(HARDY_REFINEMENT, params, value, estimate.constant, 'record', resolution=n))
    return rows


def check_comparison_monotone(ctx: DomainContext) -> List[ReportRow]:
    """Ω ∖ E 与 Ω 的比较泛函 R±、I±：前者不小于后者（取 20 对点中的最差余量）"""
    domain = ctx.domain
    if not isinstance(domain, Difference):
        return []
    outer_basis = build_basis(rasterize(domain.outer, ctx.resolution), ctx.lab['degree'])
    rng = np.random.default_rng(ctx.lab['seed'])
    grid = ctx.grid
    candidates = grid.points[grid.delta >= INTERIOR_FRACTION * ctx.inradius]
    names = ('r_plus', 'r_minus', 'i_plus', 'i_minus')
    worst = {name: None for name in names}
    for _ in range(COMPARISON_PAIRS):
        z, w = candidates[rng.choice(len(candidates), size=2, replace=False)]
        inner = comparison_functionals(ctx.basis, z, w)
        outer = comparison_functionals(outer_basis, z, w)
        for name in names:
            lhs, rhs = getattr(inner, name), getattr(outer, name)
            margin = relative_margin(lhs, rhs, 'ge')
            if worst[name] is None or margin < worst[name][0]:
                worst[name] = (margin, lhs, rhs, z, w)
    rows = []
    for name in names:
        _, lhs, rhs, z, w = worst[name]
        params = {'functional': float(names.index(name)), 'zx': z.real, 'zy': z.imag,
                  'wx': w.real, 'wy': w.imag}
        rows.append(ctx.row(COMPARISON_MONOTONE, params, lhs, rhs, 'ge'))
    return rows


SUITE_HANDLERS = {
    KERNEL_ROBIN: check_kernel_robin,
    KERNEL_RADIUS: check_kernel_radius,
    KERNEL_EIGEN_RATIO: check_kernel_eigen_ratio,
    EIGEN_CERTIFICATE: check_eigen_certificate,
    EIGEN_VOLUME: check_eigen_volume,
    DBAR_WEIGHTED: check_dbar_weighted,
    DBAR_LP_SHAPE: check_dbar_lp,
    KERNEL_DECAY: check_kernel_decay,
    COMPARISON_MONOTONE: check_comparison_monotone,
    HARDY_REFINEMENT: check_hardy_refinement,
}


def default_corpus() -> List[Domain]:
    """单位圆盘、单位正方形、圆环(0,½,1)、割缝圆盘（挖去 [0, ¾]）、2×1 矩形"""
    return [
        geom.make_disk(0j, 1.0, label='unit-disk'),
        geom.make_rectangle(0.0, 1.0, 0.0, 1.0, label='unit-square'),
        geom.make_annulus(0j, 0.5, 1.0, label='annulus'),
        geom.subtract_compact(geom.make_disk(0j, 1.0, label='unit-disk'), Segment(0j, 0.75 + 0j),
                              label='slit-disk'),
        geom.make_rectangle(0.0, 2.0, 0.0, 1.0, label='rectangle-2x1'),
    ]


def run_suite(corpus: Sequence[Domain], lab: Dict, jobs: int = 1,
              handlers: Optional[Dict[str, Callable]] = None) -> List[ReportRow]:
    """
    在语料上运行所有检查

    Args:
        corpus: 区域列表（非空）
        lab: 数值参数（见配置的 lab 段）
        jobs: 并发任务数
        handlers: 检查函数注册表，缺省为全部检查

    Returns:
        按 (不等式编号, 区域标签) 排序的报告行；单个检查失败时记为失败行。
        含 κ/λ₁ 检查时追加一行语料常数 c₀（区域标签为 corpus）

    Raises:
        ValueError: 语料为空
    """
    if not corpus:
        raise ValueError("验证语料不能为空")
    processor = TaskProcessor(handlers or SUITE_HANDLERS, error_factory=error_row)
    contexts = [DomainContext(domain, lab) for domain in corpus]
    tasks = [(inequality, ctx) for ctx in contexts for inequality in processor.task_handlers]
    results = processor.process_tasks(tasks, jobs=jobs)
    rows = [row for result in results for row in result]
    if KERNEL_EIGEN_RATIO in processor.task_handlers:
        rows.append(c0_row(corpus, lab, contexts))
    rows.sort(key=lambda row: (row.inequality, row.domain))
    summary = processor.summary
    logger.info(f"验证完成：{summary['total_tasks']} 项任务，{summary['failed_tasks']} 项失败，"
                f"{sum(1 for r in rows if not r.passed)} 行未通过")
    return rows


# ---------------------------------------------------------------------------
# 挖去集合扫描与经验常数
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    k: int
    length: float
    capacity: float
    difference: float
    error: str = ''

    def to_dict(self) -> dict:
        return {'k': self.k, 'length': self.length, 'capacity': self.capacity,
                'difference': self.difference, 'error': self.error}


@dataclass
class SweepResult:
    rows: List[SweepRow]
    exponent: float
    r0: float
    point_difference: float

    def monotone(self, slack: float = 0.1) -> bool:
        diffs = [row.difference for row in self.rows if not row.error]
        return all(b <= a * (1.0 + slack) for a, b in zip(diffs, diffs[1:]))

    @property
    def decay_ratio(self) -> float:
        diffs = [row.difference for row in self.rows if not row.error]
        return diffs[-1] / diffs[0]


def excision_sweep(domain: Domain, z: complex, w: complex, lab: Dict,
                   levels: int = 6, center: complex = 0j) -> SweepResult:
    """
    依次挖去长度 4^{1-k} 的居中线段，记录 |K_{Ω∖E_k}(z,w) - K_Ω(z,w)|，
    并拟合 d_k ≈ C·[log(r₀/𝒞_l(E_k))]^{-a} 中的 a

    Args:
        domain: 区域 Ω
        z, w: 求值点
        lab: 数值参数
        levels: 线段个数
        center: 线段中心

    Returns:
        扫描结果；单个线段失败时记入该行
    """
    resolution, degree = lab['resolution'], lab['degree']
    base = build_basis(rasterize(domain, resolution), degree)
    reference = kernel(base, z, w)
    r0 = min(float(domain.boundary_distance(z)), float(domain.boundary_distance(w)))

    rows = []
    for k in range(1, levels + 1):
        length = 4.0 ** (1 - k)
        segment = Segment(center - length / 2.0, center + length / 2.0)
        try:
            excised = geom.subtract_compact(domain, segment)
            basis = build_basis(rasterize(excised, resolution), degree)
            capacity = log_equilibrium(segment, lab['capacity_samples']).capacity
            rows.append(SweepRow(k, length, capacity, abs(kernel(basis, z, w) - reference)))
        except (ValueError, RuntimeError) as e:
            logger.error(f"线段 k={k} 扫描失败：{e}")
            rows.append(SweepRow(k, length, 0.0, 0.0, str(e)))

    good = [row for row in rows if not row.error and row.difference > 0.0 and row.capacity < r0]
    exponent = 0.0
    if len(good) >= 2:
        x = np.log([math.log(r0 / row.capacity) for row in good])
        y = np.log([row.difference for row in good])
        exponent = float(-np.polyfit(x, y, 1)[0])

    point = geom.subtract_compact(domain, PointCloud((center,)))
    point_basis = build_basis(rasterize(point, resolution), degree)
    point_difference = abs(kernel(point_basis, z, w) - reference)
    logger.info(f"挖去扫描：指数 a = {exponent:.4f}，点挖去差 {point_difference:.3e}")
    return SweepResult(rows, exponent, r0, point_difference)


def c0_estimate(corpus: Sequence[Domain], lab: Dict,
                contexts: Optional[Sequence[DomainContext]] = None) -> float:
    """
    语料上 κ/λ₁ 的最小值

    Args:
        corpus: 区域列表（非空）
        lab: 数值参数
        contexts: 已有的区域上下文，与 corpus 一一对应；缺省时新建

    Raises:
        ValueError: 语料为空或上下文个数不符
        RuntimeError: 特征值求解失败
    """
    if not corpus:
        raise ValueError("语料不能为空")
    contexts = contexts or [DomainContext(domain, lab) for domain in corpus]
    if len(contexts) != len(corpus):
        raise ValueError(f"上下文个数 {len(contexts)} 与语料个数 {len(corpus)} 不符")
    ratios = []
    for domain, ctx in zip(corpus, contexts):
        ratios.append(ctx.kappa / ctx.lambda1)
        logger.info(f"{domain.label}: κ/λ₁ = {ratios[-1]:.6f}")
    return float(min(ratios))



def c0_row(corpus: Sequence[Domain], lab: Dict,
           contexts: Optional[Sequence[DomainContext]] = None) -> ReportRow:
    """语料常数 c₀ = min κ/λ₁ 的报告行，要求 c₀ > 0"""
    try:
        c0 = c0_estimate(corpus, lab, contexts)
    except (ValueError, RuntimeError) as e:
        logger.error(f"语料常数 c₀ 计算失败：{e}")
        return error_row(KERNEL_EIGEN_C0, CORPUS_LABEL, str(e))
    tolerance = float(lab.get('tolerances', {}).get(KERNEL_EIGEN_C0, DEFAULT_TOLERANCES[KERNEL_EIGEN_C0]))
    return ReportRow(KERNEL_EIGEN_C0, CORPUS_LABEL, {'domains': float(len(corpus))}, c0, 0.0, 'positive',
                     tolerance, lab['resolution'])


# ---------------------------------------------------------------------------
# 导出
# ---------------------------------------------------------------------------

def svg_heatmap(f: ScalarField, path: str, log_scale: bool = False) -> str:
    """把格点场写成 SVG 热图，输出字节对固定输入确定"""
    return DataSaver.save_heatmap(f, path, log_scale=log_scale)


def emit_report(rows: Sequence[ReportRow], fmt: str, path: str) -> str:
    """按 csv / json / xlsx 格式写报告"""
    return DataSaver.save_report([row.to_dict() for row in rows], fmt, path)
