"""
数据保存模块

负责把报告行、扫描表和格点场保存为 CSV、JSON、XLSX 以及 SVG 热图。
浮点数统一按 %.6e 格式化，相同输入写出的文件逐字节相同。
"""
import html
import json
import os
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.utils.logger import Logger

logger = Logger.get_logger(name='data_saver')

FLOAT_FORMAT = '%.6e'
SUPPORTED_FORMATS = ('csv', 'json', 'xlsx')
CELL_PX = 4


def format_float(value: float) -> str:
    return FLOAT_FORMAT % value


def _normalize(value, as_text: bool = True):
    """把 numpy 标量与浮点数转为确定的可序列化形式；as_text 为 False 时浮点数保留为数值"""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        text = format_float(float(value))
        return text if as_text else float(text)
    if isinstance(value, dict):
        return {k: _normalize(v, as_text) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v, as_text) for v in value]
    return value


def _ensure_parent(path: str) -> None:
    output_dir = os.path.dirname(path)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)


class DataSaver:
    """
    数据保存器

    报告写到 global_settings.output_dir 下，文件名为 report_name.<格式>。
    """

    def __init__(self, global_settings: Dict = None):
        """
        初始化数据保存器

        Args:
            global_settings: 全局设置字典
        """
        self.global_settings = global_settings or {}
        self.output_dir = self.global_settings.get('output_dir', 'data')
        self.report_name = self.global_settings.get('report_name', 'report')
        self.formats = self.global_settings.get('report_formats', ['csv'])

    def save_data(self, data: List[Dict], name: str = None, formats: Sequence[str] = None) -> Dict[str, str]:
        """
        按配置的格式保存数据

        Args:
            data: 字典列表
            name: 文件名前缀，缺省为 report_name
            formats: 格式列表，缺省为 report_formats

        Returns:
            格式 -> 文件路径
        """
        saved_files = {}
        for fmt in formats or self.formats:
            path = os.path.join(self.output_dir, f"{name or self.report_name}.{fmt}")
            saved_files[fmt] = self.save_report(data, fmt, path)
        return saved_files

    @staticmethod
    def save_report(data: List[Dict], fmt: str, path: str) -> str:
        """
        保存一张表

        Args:
            data: 字典列表（各行键相同）
            fmt: csv / json / xlsx
            path: 输出文件路径

        Returns:
            输出文件路径

        Raises:
            ValueError: 不支持的格式
            OSError: 路径不可写
        """
        fmt = fmt.lower()
        if fmt not in SUPPORTED_FORMATS:
            raise ValueError(f"不支持的文件格式: {fmt}，可选 {SUPPORTED_FORMATS}")
        _ensure_parent(path)
        if fmt == 'json':
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump([_normalize(row, as_text=False) for row in data], f, ensure_ascii=False, indent=2)
                f.write('\n')
        else:
            frame = pd.DataFrame([_normalize(row) for row in data])
            if fmt == 'csv':
                frame.to_csv(path, index=False, lineterminator='\n')
            else:
                frame.to_excel(path, index=False, engine='openpyxl')
        logger.info(f"数据已保存到 {fmt.upper()} 文件: {path}")
        return path

    @staticmethod
    def save_field(field, path: str) -> str:
        """格点场写成 CSV (x, y, value)；复场写 value_re / value_im 两列"""
        _ensure_parent(path)
        points = field.grid.points
        columns = {'x': points.real, 'y': points.imag}
        if np.iscomplexobj(field.values):
            columns['value_re'] = field.values.real
            columns['value_im'] = field.values.imag
        else:
            columns['value'] = field.values
        pd.DataFrame(columns).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        logger.info(f"格点场已保存到 CSV 文件: {path}")
        return path

    @staticmethod
    def save_heatmap(field, path: str, log_scale: bool = False) -> str:
        """
        格点场写成 SVG 热图

        每个被标记单元画一个方块，颜色按固定色带线性（或对数）插值。
        """
        grid = field.grid
        values = np.abs(field.values) if np.iscomplexobj(field.values) else np.asarray(field.values, dtype=float)
        if log_scale:
            values = np.log10(np.maximum(values, 1e-300))
        lo, hi = float(np.min(values)), float(np.max(values))
        span = hi - lo if hi > lo else 1.0

        width, height = grid.nx * CELL_PX, grid.ny * CELL_PX
        lines = [f'<svg viewBox="0 0 {width} {height + 24}" xmlns="http://www.w3.org/2000/svg">',
                 f'  <title>{html.escape(grid.domain.label)}</title>']
        for i, j, value in zip(grid.ix, grid.iy, values):
            y = (grid.ny - 1 - j) * CELL_PX
            color = quantile_to_color((value - lo) / span)
            lines.append(f'  <rect shape-rendering="crispEdges" x="{i * CELL_PX}" y="{y}" '
                         f'width="{CELL_PX}" height="{CELL_PX}" fill="{color}"/>')
        scale = 'log10' if log_scale else 'linear'
        lines.append(f'  <text font-family="Arial, sans-serif" font-size="12px" x="0" y="{height + 16}">'
                     f'{scale} {format_float(lo)} .. {format_float(hi)}</text>')
        lines.append('</svg>')

        _ensure_parent(path)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write('\n'.join(lines) + '\n')
        logger.info(f"热图已保存到 SVG 文件: {path}")
        return path


def quantile_to_color(quantile: float) -> str:
    """OKLab 空间中三色插值的色带，返回 #rrggbb"""
    q = min(max(float(quantile), 0.0), 1.0)
    lab0 = (0.5726441638642074, -0.18449888213835486, 0.0731887882273366)
    lab1 = (0.9377025653501474, -0.043697082175747415, 0.2011401758046535)
    lab2 = (0.5870923722305419, 0.20094823015981866, 0.10169546612356578)
    if q < 0.5:
        s, t, u, v = 1 - 2 * q, 2 * q, lab0, lab1
    else:
        s, t, u, v = 2 - 2 * q, 2 * q - 1, lab1, lab2
    lab = tuple(s * a + t * b for a, b in zip(u, v))
    lms = ((lab[0] + 0.3963377774 * lab[1] + 0.2158037573 * lab[2]) ** 3,
           (lab[0] - 0.1055613458 * lab[1] - 0.0638541728 * lab[2]) ** 3,
           (lab[0] - 0.0894841775 * lab[1] - 1.2914855480 * lab[2]) ** 3)
    rgb = (4.0767416621 * lms[0] - 3.3077115913 * lms[1] + 0.2309699292 * lms[2],
           -1.2684380046 * lms[0] + 2.6097574011 * lms[1] - 0.3413193965 * lms[2],
           -0.0041960863 * lms[0] - 0.7034186147 * lms[1] + 1.7076147010 * lms[2])
    channels = [round(3294.6 * c if c <= 0.0031308 else 269.025 * c ** (1 / 2.4) - 14.025) for c in rgb]
    channels = [min(max(c, 0), 255) for c in channels]
    return '#{:02x}{:02x}{:02x}'.format(*channels)


def save_json(data, output_path: str) -> str:
    """把结构化结果（如平衡测度）写成 JSON"""
    _ensure_parent(output_path)
    with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(_normalize(data, as_text=False), f, ensure_ascii=False, indent=2)
        f.write('\n')
    return output_path
