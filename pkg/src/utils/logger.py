"""
日志记录模块

为数值实验提供统一的日志记录功能，所有诊断信息输出到标准错误，
数据只写入文件或标准输出。
"""
import os
import logging
from datetime import datetime
from typing import Dict, Optional


# 日志级别映射
LOG_LEVELS = {
    'debug': logging.DEBUG,
    'info': logging.INFO,
    'warning': logging.WARNING,
    'error': logging.ERROR,
    'critical': logging.CRITICAL
}

LOG_FORMAT = '[%(asctime)s] [%(levelname)s] [%(name)s] - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class Logger:
    """
    日志记录器

    按名称缓存 logging.Logger 实例，同一名称只配置一次处理器。
    """

    _instances = {}  # 名称 -> 日志记录器实例

    @classmethod
    def get_logger(cls, name: str = 'bergman_lab', log_level: str = 'info',
                   log_to_file: bool = False, log_dir: str = 'logs',
                   log_file_prefix: Optional[str] = None) -> logging.Logger:
        """
        获取指定名称的日志记录器实例

        Args:
            name: 日志记录器名称
            log_level: 日志级别，可选值：debug, info, warning, error, critical
            log_to_file: 是否将日志同时记录到文件
            log_dir: 日志文件目录
            log_file_prefix: 日志文件名前缀

        Returns:
            日志记录器实例
        """
        if name in cls._instances:
            return cls._instances[name]

        logger = logging.getLogger(name)
        level = LOG_LEVELS.get(log_level.lower(), logging.INFO)
        logger.setLevel(level)
        # 由本模块负责输出，避免根记录器重复打印
        logger.propagate = False

        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        # StreamHandler 默认写标准错误
        if not logger.handlers:
            console_handler = logging.StreamHandler()
            console_handler.setLevel(level)
            console_handler.setFormatter(formatter)
            logger.addHandler(console_handler)

        if log_to_file:
            os.makedirs(log_dir, exist_ok=True)
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            file_prefix = log_file_prefix or name
            log_file = os.path.join(log_dir, f"{file_prefix}_{timestamp}.log")

            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
            logger.info(f"日志将同时记录到文件: {log_file}")

        cls._instances[name] = logger
        return logger

    @classmethod
    def set_level(cls, log_level: str) -> None:
        """
        调整所有已创建日志记录器的级别（命令行 --log-level 使用）

        Args:
            log_level: 日志级别名称
        """
        level = LOG_LEVELS.get(log_level.lower(), logging.INFO)
        for logger in cls._instances.values():
            logger.setLevel(level)
            for handler in logger.handlers:
                handler.setLevel(level)


def setup_logger(global_settings: Optional[Dict] = None) -> logging.Logger:
    """
    根据全局设置创建命令行使用的日志记录器

    Args:
        global_settings: 全局设置字典

    Returns:
        日志记录器实例
    """
    settings = global_settings or {}

    log_level = settings.get('log_level', 'info')
    logger = Logger.get_logger(
        name='bergman_lab',
        log_level=log_level,
        log_to_file=settings.get('log_to_file', False),
        log_dir=settings.get('log_dir', 'logs'),
        log_file_prefix='bergman_lab'
    )
    Logger.set_level(log_level)
    return logger
