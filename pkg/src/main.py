"""
命令行主模块

python -m src.main <子命令> [参数]

子命令：kernel, capacity, robin, radius, eigen, hardy, dbar, verify, sweep。
诊断信息写标准错误，数据写标准输出或文件。退出码：0 成功，1 计算失败，2 用法错误。
"""
import argparse
import json
import os
import sys
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.lab import bergman, potential, spectral, verify
from src.lab.geom import Disk
from src.lab.grid import rasterize
from src.utils.config_parser import ConfigParser, create_default_config, get_default_config_template
from src.utils.data_saver import SUPPORTED_FORMATS, DataSaver, format_float, save_json
from src.utils.domain_factory import DomainFactory, load_corpus, load_domain
from src.utils.logger import setup_logger

TEMPLATE = get_default_config_template()['lab']


def parse_complex(text: str) -> complex:
    """'x,y' -> x + iy"""
    try:
        x, y = (float(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"坐标格式应为 x,y，当前为 {text!r}")
    return complex(x, y)


def format_of(path: str) -> str:
    fmt = os.path.splitext(path)[1].lstrip('.').lower()
    if fmt not in SUPPORTED_FORMATS:
        raise ValueError(f"无法从文件名 {path} 判断输出格式，可选扩展名 {SUPPORTED_FORMATS}")
    return fmt


def _write_table(rows: List[Dict], path: str) -> str:
    return DataSaver.save_report(rows, format_of(path), path)


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

def cmd_kernel(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    grid = rasterize(domain, lab['resolution'])
    basis = bergman.build_basis(grid, lab['degree'])
    if args.eval is not None:
        if args.p is not None:
            result = bergman.p_kernel(basis, args.eval, args.p)
            print(f"{result.value:.6f}")
        elif args.with_point is not None:
            value = bergman.kernel(basis, args.eval, args.with_point)
            print(f"{value.real:.6f} {value.imag:.6f}")
        else:
            print(f"{bergman.kernel_diag(basis, args.eval):.6f}")
    if args.min:
        kappa, point = bergman.kernel_min(basis)
        print(f"{kappa:.6f} {point.real:.6f} {point.imag:.6f}")
    if args.heatmap:
        diagonal = grid.scalar_field(np.sum(np.abs(basis.grid_values) ** 2, axis=-1))
        verify.svg_heatmap(diagonal, args.heatmap, log_scale=True)
    return 0


def cmd_capacity(args, lab: Dict, settings: Dict, logger) -> int:
    with open(args.compact, 'r', encoding='utf-8') as f:
        excise = DomainFactory.compact_from_dict(json.load(f))
    samples = args.samples or lab['capacity_samples']
    if args.green_radius is not None:
        disk = Disk(args.green_center, args.green_radius, 'green-disk')
        result = potential.green_equilibrium(excise, disk, samples, seed=lab['seed'])
    else:
        result = potential.log_equilibrium(excise, samples, seed=lab['seed'])
    print(f"{result.capacity:.6f} {result.energy:.6f}")
    if not result.converged:
        logger.warning("平衡测度未收敛，输出为最后一次迭代")
    if args.out:
        save_json(result.to_dict(), args.out)
    return 0


def cmd_robin(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    value = potential.robin_constant(domain, args.at, args.samples or lab['boundary_samples'])
    print(f"{value:.6f}")
    return 0


def cmd_radius(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    result = potential.capacity_radius(domain, args.alpha, center_grid=lab['center_grid'],
                                       bisections=lab['radius_bisections'],
                                       ladder_size=lab['ladder_size'])
    print(f"{result.radius:.6f} {result.center.real:.6f} {result.center.imag:.6f}")
    if args.out:
        save_json(result.to_dict(), args.out)
    return 0


def cmd_eigen(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    result = spectral.dirichlet_lambda1(rasterize(domain, lab['resolution']))
    print(f"{result.value:.6f}")
    if args.richardson is not None:
        extrapolated = spectral.richardson_lambda1(domain, lab['resolution'], args.richardson)
        print(f"{extrapolated:.6f}")
    if args.field:
        DataSaver.save_field(result.field, args.field)
    if args.heatmap:
        verify.svg_heatmap(result.field, args.heatmap)
    return 0


def cmd_hardy(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    grid = rasterize(domain, lab['resolution'])
    estimate = spectral.hardy_extrapolation(grid)
    print(f"{estimate.constant:.6f} {estimate.pencils[-1]:.6f}")
    for n, value in estimate.refinement():
        logger.info(f"N={n}: √μ_N = {value:.6f}")
    return 0


def cmd_dbar(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    ctx = verify.DomainContext(domain, lab)
    rows = verify.check_dbar_weighted(ctx) + verify.check_dbar_lp(ctx)
    table = [row.to_dict() for row in rows]
    if args.out:
        _write_table(table, args.out)
    else:
        for row in table:
            print(f"{row['inequality']} {row['parameters']} {format_float(row['lhs'])} "
                  f"{format_float(row['rhs'])} {row['pass']}")
    return 0


def _write_figures(corpus: Sequence, lab: Dict, figs_dir: str, logger) -> None:
    """每个区域输出核对角线（对数色带）与第一特征函数的热图"""
    for domain in corpus:
        ctx = verify.DomainContext(domain, lab)
        diagonal = ctx.grid.scalar_field(np.sum(np.abs(ctx.basis.grid_values) ** 2, axis=-1))
        verify.svg_heatmap(diagonal, os.path.join(figs_dir, f"{domain.label}-kernel.svg"), log_scale=True)
        eigen = spectral.dirichlet_lambda1(ctx.grid)
        verify.svg_heatmap(eigen.field, os.path.join(figs_dir, f"{domain.label}-eigen.svg"))
    logger.info(f"热图已写入 {figs_dir}")


def cmd_verify(args, lab: Dict, settings: Dict, logger) -> int:
    corpus = load_corpus(lab['corpus'])
    start_time = time.time()
    rows = verify.run_suite(corpus, lab, jobs=lab['jobs'])
    table = [row.to_dict() for row in rows]
    if args.out:
        saved = [_write_table(table, args.out)]
    else:
        saved = list(DataSaver(settings).save_data(table).values())
    if settings.get('figs_dir'):
        _write_figures(corpus, lab, settings['figs_dir'], logger)

    failed = sum(1 for row in rows if not row.passed)
    logger.info("=" * 50)
    logger.info(f"报告行: {len(rows)}，未通过: {failed}")
    logger.info(f"总用时: {time.time() - start_time:.2f} 秒")
    logger.info("=" * 50)
    for path in saved:
        print(path)
    return 0


def cmd_sweep(args, lab: Dict, settings: Dict, logger) -> int:
    domain = load_domain(args.domain)
    result = verify.excision_sweep(domain, args.z, args.w, lab, levels=args.levels, center=args.center)
    table = [row.to_dict() for row in result.rows]
    if args.out:
        _write_table(table, args.out)
    print(f"exponent {result.exponent:.6f}")
    print(f"point_difference {result.point_difference:.6e}")
    print(f"monotone {result.monotone()}")
    return 0


COMMANDS = {
    'kernel': cmd_kernel,
    'capacity': cmd_capacity,
    'robin': cmd_robin,
    'radius': cmd_radius,
    'eigen': cmd_eigen,
    'hardy': cmd_hardy,
    'dbar': cmd_dbar,
    'verify': cmd_verify,
    'sweep': cmd_sweep,
}


# ---------------------------------------------------------------------------
# 参数解析
# ---------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', default=None,
                        help='配置文件路径 (default: 使用内置模板)')
    common.add_argument('--log-level', default=None,
                        choices=['debug', 'info', 'warning', 'error', 'critical'],
                        help='日志级别 (default: 配置中的 log_level，模板值 info)')
    common.add_argument('--resolution', type=int, default=None,
                        help=f"网格分辨率，每单位长度的单元数 (default: 配置值，模板值 {TEMPLATE['resolution']})")
    common.add_argument('--degree', type=int, default=None,
                        help=f"单项式最高次数 (default: 配置值，模板值 {TEMPLATE['degree']})")
    common.add_argument('--seed', type=int, default=None,
                        help=f"随机种子 (default: 配置值，模板值 {TEMPLATE['seed']})")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog='python -m src.main', description='平面 Bergman 核与位势论数值实验工具')
    parser.add_argument('--create-config', metavar='PATH', default=None,
                        help='创建默认配置文件并退出 (default: 不创建)')
    sub = parser.add_subparsers(dest='command', metavar='子命令')

    p = sub.add_parser('kernel', parents=[common], help='Bergman 核求值、最小值与热图')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')
    p.add_argument('--eval', type=parse_complex, default=None, metavar='X,Y',
                   help='输出 K(z)（与 --with 同用时输出 K(z,w) 的实部与虚部） (default: 不求值)')
    p.add_argument('--with', dest='with_point', type=parse_complex, default=None, metavar='X,Y',
                   help='K(z,w) 的第二个点 w (default: 无)')
    p.add_argument('--p', type=float, default=None, help='改为输出 p-Bergman 核 K_p(z)，p ∈ (1,2] (default: 无)')
    p.add_argument('--min', action='store_true', help='输出 κ 及最小点 (default: False)')
    p.add_argument('--heatmap', default=None, metavar='OUT.svg', help='核对角线热图（对数色带） (default: 不输出)')

    p = sub.add_parser('capacity', parents=[common], help='对数容量或 Green 容量及平衡测度')
    p.add_argument('--compact', required=True, help='紧集 JSON 文件 (default: 必填)')
    p.add_argument('--samples', type=int, default=None,
                   help=f"采样点数 (default: 配置中的 capacity_samples，模板值 {TEMPLATE['capacity_samples']})")
    p.add_argument('--green-radius', type=float, default=None, help='给出时计算该圆盘内的 Green 容量 (default: 对数容量)')
    p.add_argument('--green-center', type=parse_complex, default=0j, metavar='X,Y', help='Green 圆盘中心 (default: 0,0)')
    p.add_argument('--out', default=None, metavar='OUT.json', help='平衡测度 JSON (default: 不输出)')

    p = sub.add_parser('robin', parents=[common], help='Robin 常数 c_Ω(z)')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')
    p.add_argument('--at', type=parse_complex, required=True, metavar='X,Y', help='区域内的点 (default: 必填)')
    p.add_argument('--samples', type=int, default=None,
                   help=f"边界采样点数 (default: 配置中的 boundary_samples，模板值 {TEMPLATE['boundary_samples']})")

    p = sub.add_parser('radius', parents=[common], help='容量半径 R_{L,α}')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')
    p.add_argument('--alpha', type=float, default=0.3, help='比例 α ∈ (0,1) (default: %(default)s)')
    p.add_argument('--out', default=None, metavar='OUT.json', help='结果 JSON (default: 不输出)')

    p = sub.add_parser('eigen', parents=[common], help='第一 Dirichlet 特征值')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')
    p.add_argument('--richardson', type=int, default=None, metavar='FINE',
                   help='再输出与分辨率 FINE 的 Richardson 外推值 (default: 不外推)')
    p.add_argument('--field', default=None, metavar='OUT.csv', help='特征函数 CSV (default: 不输出)')
    p.add_argument('--heatmap', default=None, metavar='OUT.svg', help='特征函数热图 (default: 不输出)')

    p = sub.add_parser('hardy', parents=[common], help='Hardy 常数（及离散束特征值 μ）')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')

    p = sub.add_parser('dbar', parents=[common], help='∂̄ 方程带权估计与 L^p 估计表')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')
    p.add_argument('--out', default=None, metavar='OUT.{csv,json,xlsx}', help='检查表 (default: 打印到标准输出)')

    p = sub.add_parser('verify', parents=[common], help='在语料上运行全部不等式检查')
    p.add_argument('--corpus', default=None,
                   help=f"default、区域 JSON 文件或目录 (default: 配置中的 corpus，模板值 {TEMPLATE['corpus']})")
    p.add_argument('--out', default=None, metavar='OUT.{csv,json,xlsx}',
                   help='报告文件 (default: output_dir/report_name，格式取 report_formats)')
    p.add_argument('--figs', default=None, metavar='DIR', help='热图目录 (default: 配置中的 figs_dir，空串不输出)')
    p.add_argument('--jobs', type=int, default=None,
                   help=f"并发任务数 (default: 配置中的 jobs，模板值 {TEMPLATE['jobs']})")

    p = sub.add_parser('sweep', parents=[common], help='挖去线段族的核差扫描')
    p.add_argument('--domain', required=True, help='区域 JSON 文件 (default: 必填)')
    p.add_argument('--z', type=parse_complex, default=complex(0.5, 0.0), metavar='X,Y', help='求值点 z (default: 0.5,0)')
    p.add_argument('--w', type=parse_complex, default=complex(0.0, 0.5), metavar='X,Y', help='求值点 w (default: 0,0.5)')
    p.add_argument('--center', type=parse_complex, default=0j, metavar='X,Y', help='线段中心 (default: 0,0)')
    p.add_argument('--levels', type=int, default=6, help='线段个数，长度 4^{1-k} (default: %(default)s)')
    p.add_argument('--out', default=None, metavar='OUT.{csv,json}', help='扫描表 (default: 不输出)')
    return parser


def _load_settings(args) -> tuple:
    config_parser = ConfigParser(args.config)
    config_parser.parse_config()
    lab_overrides = {
        'resolution': args.resolution,
        'degree': args.degree,
        'seed': args.seed,
        'jobs': getattr(args, 'jobs', None),
        'corpus': getattr(args, 'corpus', None),
    }
    settings_overrides = {
        'log_level': args.log_level,
        'figs_dir': getattr(args, 'figs', None),
    }
    return config_parser.apply_overrides(lab_overrides, settings_overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行入口

    Args:
        argv: 参数列表，缺省取 sys.argv[1:]

    Returns:
        退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.create_config:
        create_default_config(args.create_config)
        print(args.create_config)
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        lab, settings = _load_settings(args)
    except (ValueError, OSError) as e:
        setup_logger({}).error(f"配置错误: {e}")
        return 1

    logger = setup_logger(settings)
    logger.info(f"执行子命令 {args.command}（分辨率 {lab['resolution']}，次数 {lab['degree']}）")
    try:
        return COMMANDS[args.command](args, lab, settings, logger)
    except (ValueError, RuntimeError, OSError) as e:
        logger.error(f"{args.command} 失败: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
