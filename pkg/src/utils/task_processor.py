"""
任务处理模块

按注册表执行验证任务，处理并发调度、逐任务错误捕获和结果统计。
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from src.utils.logger import Logger


class TaskProcessor:
    """
    任务处理器

    每个任务是 (处理器名称, 任务对象)；处理器返回结果列表。单个任务失败
    不会中断其余任务，而是由 error_factory 生成一条错误结果。
    """

    def __init__(self, task_handlers: Dict[str, Callable[[Any], List]],
                 error_factory: Optional[Callable[[str, str, str], Any]] = None,
                 global_settings: Dict = None):
        """
        初始化任务处理器

        Args:
            task_handlers: 处理器名称 -> 处理函数
            error_factory: (处理器名称, 任务标签, 错误信息) -> 错误结果
            global_settings: 全局设置字典
        """
        self.global_settings = global_settings or {}
        self.logger = Logger.get_logger(
            name='task_processor',
            log_level=self.global_settings.get('log_level', 'info')
        )
        # 注册任务处理方法（保持注册顺序）
        self.task_handlers = dict(task_handlers)
        self.error_factory = error_factory
        self.summary = {'total_tasks': 0, 'successful_tasks': 0, 'failed_tasks': 0}

    def register_handler(self, name: str, handler: Callable[[Any], List]) -> None:
        """
        注册新的任务处理函数

        Args:
            name: 处理器名称
            handler: 处理函数
        """
        self.task_handlers[name] = handler
        self.logger.debug(f"已注册任务处理器: {name}")

    def get_registered_handlers(self) -> List[str]:
        return list(self.task_handlers.keys())

    def process_task(self, name: str, task: Any) -> List:
        """
        执行单个任务，失败时返回错误结果

        Args:
            name: 处理器名称
            task: 任务对象（需有 label 属性用于日志）

        Returns:
            结果列表
        """
        label = getattr(task, 'label', str(task))
        handler = self.task_handlers.get(name)
        if handler is None:
            message = f"不支持的任务类型: {name}"
            self.logger.error(message)
            return self._error(name, label, message)

        self.logger.info(f"执行任务: {name} / {label}")
        try:
            return list(handler(task))
        except Exception as e:
            self.logger.error(f"执行任务 {name} / {label} 失败: {str(e)}")
            return self._error(name, label, str(e))

    def _error(self, name: str, label: str, message: str) -> List:
        if self.error_factory is None:
            return [{'task': name, 'label': label, 'status': 'error', 'message': message}]
        return [self.error_factory(name, label, message)]

    def process_tasks(self, tasks: Sequence[Tuple[str, Any]], jobs: int = 1) -> List[List]:
        """
        执行一组任务

        Args:
            tasks: (处理器名称, 任务对象) 列表
            jobs: 最大并发数

        Returns:
            与输入顺序一致的结果列表
        """
        if jobs < 1:
            raise ValueError(f"并发数至少为 1，当前为 {jobs}")
        if jobs == 1:
            results = [self.process_task(name, task) for name, task in tasks]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(self.process_task, name, task) for name, task in tasks]
                results = [future.result() for future in futures]

        failed = sum(1 for result in results if self._is_error(result))
        self.summary = {
            'total_tasks': len(tasks),
            'successful_tasks': len(tasks) - failed,
            'failed_tasks': failed,
        }
        return results

    @staticmethod
    def _is_error(result: List) -> bool:
        if len(result) != 1:
            return False
        item = result[0]
        if isinstance(item, dict):
            return item.get('status') == 'error'
        return bool(getattr(item, 'error', ''))
