"""
日志管理系统

控制台处理器固定写 stderr，stdout 只留给结果记录。
计算事件带 computation_event 标记与若干结构化字段，文件处理器把这些字段追加在消息后。
"""

import logging
import logging.handlers
import os
import sys
import time
import traceback
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from .config import LoggingConfig, get_config

COMPUTATION_LOGGER = "computation_events"
ERROR_LOGGER = "errors"

# LogRecord 自带的属性，格式化结构化字段时跳过
_RESERVED = set(logging.makeLogRecord({}).__dict__) | {"message", "asctime", "computation_event"}

_SIZE_UNITS = {"KB": 1024, "MB": 1024 ** 2, "GB": 1024 ** 3}


class ColoredFormatter(logging.Formatter):
    """彩色日志格式化器"""

    COLORS = {
        'DEBUG': '\033[36m',     # 青色
        'INFO': '\033[32m',      # 绿色
        'WARNING': '\033[33m',   # 黄色
        'ERROR': '\033[31m',     # 红色
        'CRITICAL': '\033[35m',  # 紫色
        'RESET': '\033[0m'
    }

    def format(self, record):
        # 复制一份，颜色码不能泄漏到文件处理器
        record = logging.makeLogRecord(record.__dict__)
        color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        record.levelname = f"{color}{record.levelname}{self.COLORS['RESET']}"
        return super().format(record)


class ComputationFormatter(logging.Formatter):
    """在消息后追加计算事件的结构化字段：key=value，按键名排序"""

    def format(self, record):
        text = super().format(record)
        if not getattr(record, 'computation_event', False):
            return text
        fields = {k: v for k, v in record.__dict__.items() if k not in _RESERVED and v is not None}
        if not fields:
            return text
        return text + " | " + " ".join(f"{k}={fields[k]}" for k in sorted(fields))


class ComputationLogFilter(logging.Filter):
    """计算事件日志过滤器"""

    def __init__(self, computation_events_only: bool = False):
        super().__init__()
        self.computation_events_only = computation_events_only

    def filter(self, record):
        if self.computation_events_only:
            return bool(getattr(record, 'computation_event', False))
        return True


def parse_size(size: Any) -> int:
    """'10MB' → 字节数；纯数字按字节"""
    text = str(size).strip().upper()
    for unit, factor in _SIZE_UNITS.items():
        if text.endswith(unit):
            return int(text[:-len(unit)]) * factor
    return int(text)


class LogManager:
    """日志管理器"""

    def __init__(self, config: Optional[LoggingConfig] = None):
        self.config = config or get_config().logging
        self.loggers: Dict[str, logging.Logger] = {}
        self._setup_logging()

    def _level(self, name: str) -> int:
        return getattr(logging, str(name).upper(), logging.INFO)

    def _setup_logging(self):
        """设置根日志器与处理器"""
        root_logger = logging.getLogger()
        root_logger.setLevel(self._level(self.config.level))
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        if self.config.file:
            root_logger.addHandler(self._file_handler(self.config.file))

        console_handler = logging.StreamHandler(sys.stderr)
        formatter_cls = ColoredFormatter if sys.stderr.isatty() else logging.Formatter
        console_handler.setFormatter(formatter_cls(self.config.format))
        root_logger.addHandler(console_handler)

        for module_name, level in self.config.loggers.items():
            logging.getLogger(module_name).setLevel(self._level(level))

    def _file_handler(self, log_file: str) -> logging.Handler:
        """轮转文件处理器，带结构化字段"""
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=parse_size(self.config.max_size),
            backupCount=self.config.backup_count,
            encoding='utf-8'
        )
        handler.setFormatter(ComputationFormatter(self.config.format))
        handler.addFilter(ComputationLogFilter())
        return handler

    def get_logger(self, name: str) -> logging.Logger:
        """获取日志记录器"""
        if name not in self.loggers:
            self.loggers[name] = logging.getLogger(name)
        return self.loggers[name]

    def log_computation_event(self, level: str, message: str, operation: Optional[str] = None,
                              extra_data: Optional[Dict[str, Any]] = None):
        """记录计算事件"""
        logger = self.get_logger(COMPUTATION_LOGGER)
        log_level = self._level(level)
        if not logger.isEnabledFor(log_level):
            return

        fields: Dict[str, Any] = {"computation_event": True, "operation": operation}
        fields.update({k: v for k, v in (extra_data or {}).items() if k not in _RESERVED})
        logger.log(log_level, message, extra=fields)

    def log_error_with_context(self, error: Exception, context: Optional[Dict[str, Any]] = None):
        """记录带上下文的错误；traceback 只在 DEBUG 下附上"""
        logger = self.get_logger(ERROR_LOGGER)
        error_info = {
            'error_type': type(error).__name__,
            'error_context': context or {},
        }
        if logger.isEnabledFor(logging.DEBUG):
            error_info['error_traceback'] = traceback.format_exc()
        logger.error(f"错误发生: {error_info['error_type']} - {error}", extra=error_info)


# 全局日志管理器
_log_manager: Optional[LogManager] = None


def get_log_manager() -> LogManager:
    """获取全局日志管理器"""
    global _log_manager
    if _log_manager is None:
        _log_manager = LogManager()
    return _log_manager


def reset_log_manager():
    """丢弃全局日志管理器（配置重载后使用）"""
    global _log_manager
    _log_manager = None


def get_logger(name: str) -> logging.Logger:
    """获取日志记录器"""
    return get_log_manager().get_logger(name)


def log_computation_event(message: str, level: str = "INFO", operation: Optional[str] = None, **kwargs):
    """记录计算事件的便捷函数"""
    get_log_manager().log_computation_event(level, message, operation, kwargs)


def log_error(error: Exception, context: Optional[Dict[str, Any]] = None):
    """记录错误的便捷函数"""
    get_log_manager().log_error_with_context(error, context)


@contextmanager
def timed_computation(operation: str, **fields) -> Iterator[Dict[str, Any]]:
    """计时一段计算，结束时记录一条计算事件

    产出的字典可在块内补充字段；退出时写入 seconds。
    """
    info: Dict[str, Any] = dict(fields)
    start = time.perf_counter()
    try:
        yield info
    finally:
        info["seconds"] = time.perf_counter() - start
        level = info.pop("level", "INFO")
        message = info.pop("message", f"{operation} 完成")
        log_computation_event(f"{message}，耗时 {info['seconds']:.2f}s", level=level,
                              operation=operation, **info)
