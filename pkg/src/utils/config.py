"""
配置管理系统
"""

import os
import yaml
from typing import Dict, Any, Optional, List, Tuple
from pathlib import Path
from dataclasses import dataclass, field
import logging

from dotenv import load_dotenv

from .exceptions import ConfigFileNotFoundError, InvalidConfigValueError

logger = logging.getLogger(__name__)

# 环境变量（可写在项目根目录的 .env 中）
ENV_CONFIG_PATH = "HOROCAUCHY_CONFIG"
ENV_LOG_LEVEL = "HOROCAUCHY_LOG_LEVEL"
ENV_DEBUG = "HOROCAUCHY_DEBUG"


def get_project_root() -> str:
    """获取项目根目录的绝对路径"""
    current_dir = Path(__file__).resolve()
    # 从src/utils/config.py向上找到项目根目录
    for parent in current_dir.parents:
        if (parent / 'src').exists() and (parent / 'start_cli.py').exists():
            return str(parent)
    # 如果找不到，使用当前文件的上两级目录
    return str(current_dir.parent.parent.parent)


def get_fixtures_dir() -> str:
    """获取根系数据目录"""
    return os.path.join(get_project_root(), "fixtures")


@dataclass
class ToleranceConfig:
    """数值容差配置"""
    constraint: float = 1e-10
    domain: float = 1e-12
    boundary_window: float = 1e-8
    kernel_singularity: float = 1e-9
    exact_point: float = 1e-12


@dataclass
class QuadratureConfig:
    """求积配置"""
    t_max: float = 12.0
    n_t: int = 480
    n_theta: int = 256
    fiber_t_max: float = 14.0
    fiber_n: int = 600
    batch_size: int = 32


@dataclass
class OperatorConfig:
    """不变算子配置"""
    step: float = 1e-3
    calibration_lambda: int = 2
    calibration_tolerance: float = 1e-4


@dataclass
class FiberConfig:
    """纤维积分配置"""
    divergence_ratio: float = 1e-3
    min_radius: float = 1e-6


@dataclass
class SamplingConfig:
    """随机采样配置"""
    max_word_length: int = 4
    rotation_range: float = 3.141592653589793
    boost_range: float = 2.0
    horopoint_boost_range: float = 1.5
    horopoint_scale: Tuple[float, float] = (1.5, 3.0)


@dataclass
class VerificationConfig:
    """验证组配置"""
    seed: int = 20240601
    enumerate_box: int = 5
    horopoint_count: int = 50
    kernel_pairs: int = 10000
    kernel_terms: int = 40
    group_words: int = 10
    schur_pairs: int = 3
    schur_lambda_max: int = 4
    fiber_points: int = 20
    fiber_nodes: int = 200
    eigen_points: int = 5
    inversion_s: List[float] = field(default_factory=lambda: [0.3, 0.6, 0.9, 1.2, 1.5])
    inversion_lambdas: List[int] = field(default_factory=lambda: [2, 3])


@dataclass
class OutputConfig:
    """输出配置"""
    format: str = "jsonl"
    schema_version: int = 1


@dataclass
class LoggingConfig:
    """日志配置"""
    level: str = "INFO"
    file: str = ""
    max_size: str = "10MB"
    backup_count: int = 5
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    loggers: Dict[str, str] = None

    def __post_init__(self):
        if self.loggers is None:
            self.loggers = {}


@dataclass
class DevelopmentConfig:
    """开发模式配置"""
    debug: bool = False


class Config:
    """主配置类"""

    def __init__(self, config_path: Optional[str] = None):
        load_dotenv()
        explicit = config_path or os.environ.get(ENV_CONFIG_PATH)
        if explicit and not os.path.exists(explicit):
            raise ConfigFileNotFoundError(explicit)
        self.config_path = explicit or self._find_config_file()
        self.config_data = self._load_config()

        # 初始化配置对象
        self.tolerances = self._init_tolerance_config()
        self.quadrature = self._init_quadrature_config()
        self.operator = self._init_operator_config()
        self.fiber = self._init_fiber_config()
        self.sampling = self._init_sampling_config()
        self.verification = self._init_verification_config()
        self.output = self._init_output_config()
        self.logging = self._init_logging_config()
        self.development = self._init_development_config()

    def _find_config_file(self) -> str:
        """查找配置文件"""
        # 查找顺序：当前目录 -> config目录 -> 项目默认配置
        possible_paths = [
            "config.yaml",
            "config/config.yaml",
            os.path.join(get_project_root(), "config", "default_config.yaml")
        ]

        for path in possible_paths:
            abs_path = os.path.abspath(path)
            if os.path.exists(abs_path):
                logger.debug(f"使用配置文件: {abs_path}")
                return abs_path

        logger.warning("未找到配置文件，使用默认配置")
        return ""

    def _load_config(self) -> Dict[str, Any]:
        """加载配置文件"""
        if not self.config_path:
            return {}

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                config_data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise InvalidConfigValueError(self.config_path, str(e), "合法的YAML") from e

        if config_data is not None and not isinstance(config_data, dict):
            raise InvalidConfigValueError(self.config_path, type(config_data).__name__, "YAML映射")
        logger.debug(f"成功加载配置文件: {self.config_path}")
        return config_data or {}

    def _section(self, name: str) -> Dict[str, Any]:
        """取出一个配置段"""
        section = self.config_data.get(name, {}) or {}
        if not isinstance(section, dict):
            raise InvalidConfigValueError(name, section, "映射")
        return section

    @staticmethod
    def _positive(key: str, value: Any, kind=float):
        """检查正数配置"""
        try:
            converted = kind(value)
        except (TypeError, ValueError) as e:
            raise InvalidConfigValueError(key, value, f"{kind.__name__}类型") from e
        if converted <= 0:
            raise InvalidConfigValueError(key, value, "正数")
        return converted

    def _init_tolerance_config(self) -> ToleranceConfig:
        """初始化容差配置"""
        section = self._section('tolerances')
        defaults = ToleranceConfig()
        return ToleranceConfig(**{
            name: self._positive(f"tolerances.{name}", section.get(name, getattr(defaults, name)))
            for name in ("constraint", "domain", "boundary_window", "kernel_singularity", "exact_point")
        })

    def _init_quadrature_config(self) -> QuadratureConfig:
        """初始化求积配置"""
        section = self._section('quadrature')
        return QuadratureConfig(
            t_max=self._positive("quadrature.t_max", section.get('t_max', 12.0)),
            n_t=self._positive("quadrature.n_t", section.get('n_t', 480), int),
            n_theta=self._positive("quadrature.n_theta", section.get('n_theta', 256), int),
            fiber_t_max=self._positive("quadrature.fiber_t_max", section.get('fiber_t_max', 14.0)),
            fiber_n=self._positive("quadrature.fiber_n", section.get('fiber_n', 600), int),
            batch_size=self._positive("quadrature.batch_size", section.get('batch_size', 32), int)
        )

    def _init_operator_config(self) -> OperatorConfig:
        """初始化算子配置"""
        section = self._section('operator')
        return OperatorConfig(
            step=self._positive("operator.step", section.get('step', 1e-3)),
            calibration_lambda=self._positive("operator.calibration_lambda",
                                              section.get('calibration_lambda', 2), int),
            calibration_tolerance=self._positive("operator.calibration_tolerance",
                                                 section.get('calibration_tolerance', 1e-4))
        )

    def _init_fiber_config(self) -> FiberConfig:
        """初始化纤维积分配置"""
        section = self._section('fiber')
        return FiberConfig(
            divergence_ratio=self._positive("fiber.divergence_ratio", section.get('divergence_ratio', 1e-3)),
            min_radius=self._positive("fiber.min_radius", section.get('min_radius', 1e-6))
        )

    def _init_sampling_config(self) -> SamplingConfig:
        """初始化采样配置"""
        section = self._section('sampling')
        scale = section.get('horopoint_scale', [1.5, 3.0])
        if not isinstance(scale, (list, tuple)) or len(scale) != 2 or not 1.0 < float(scale[0]) <= float(scale[1]):
            raise InvalidConfigValueError("sampling.horopoint_scale", scale, "[下界, 上界] 且 1 < 下界 ≤ 上界")
        return SamplingConfig(
            max_word_length=self._positive("sampling.max_word_length", section.get('max_word_length', 4), int),
            rotation_range=self._positive("sampling.rotation_range", section.get('rotation_range', 3.141592653589793)),
            boost_range=self._positive("sampling.boost_range", section.get('boost_range', 2.0)),
            horopoint_boost_range=self._positive("sampling.horopoint_boost_range",
                                                 section.get('horopoint_boost_range', 1.5)),
            horopoint_scale=(float(scale[0]), float(scale[1]))
        )

    def _init_verification_config(self) -> VerificationConfig:
        """初始化验证配置"""
        section = self._section('verification')
        defaults = VerificationConfig()
        values: Dict[str, Any] = {}
        for name in ("seed", "enumerate_box", "horopoint_count", "kernel_pairs", "kernel_terms",
                     "group_words", "schur_pairs", "schur_lambda_max", "fiber_points",
                     "fiber_nodes", "eigen_points"):
            raw = section.get(name, getattr(defaults, name))
            if name == "seed":
                try:
                    values[name] = int(raw)
                except (TypeError, ValueError) as e:
                    raise InvalidConfigValueError("verification.seed", raw, "整数") from e
            else:
                values[name] = self._positive(f"verification.{name}", raw, int)
        values["inversion_s"] = [self._positive("verification.inversion_s", s)
                                 for s in section.get('inversion_s', defaults.inversion_s)]
        values["inversion_lambdas"] = [self._positive("verification.inversion_lambdas", lam, int)
                                       for lam in section.get('inversion_lambdas', defaults.inversion_lambdas)]
        return VerificationConfig(**values)

    def _init_output_config(self) -> OutputConfig:
        """初始化输出配置"""
        section = self._section('output')
        output_format = section.get('format', 'jsonl')
        if output_format not in ('jsonl', 'csv'):
            raise InvalidConfigValueError("output.format", output_format, "jsonl 或 csv")
        return OutputConfig(
            format=output_format,
            schema_version=self._positive("output.schema_version", section.get('schema_version', 1), int)
        )

    def _init_logging_config(self) -> LoggingConfig:
        """初始化日志配置"""
        logging_config = self._section('logging')
        return LoggingConfig(
            level=os.environ.get(ENV_LOG_LEVEL) or logging_config.get('level', 'INFO'),
            file=logging_config.get('file', '') or '',
            max_size=logging_config.get('max_size', '10MB'),
            backup_count=logging_config.get('backup_count', 5),
            format=logging_config.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s'),
            loggers=logging_config.get('loggers', {})
        )

    def _init_development_config(self) -> DevelopmentConfig:
        """初始化开发配置"""
        dev_config = self._section('development')
        debug = dev_config.get('debug', False)
        env_debug = os.environ.get(ENV_DEBUG)
        if env_debug is not None:
            debug = env_debug.strip().lower() in ("1", "true", "yes", "on")
        return DevelopmentConfig(debug=bool(debug))

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值"""
        keys = key.split('.')
        value = self.config_data

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def reload(self):
        """重新加载配置"""
        self.__init__(self.config_path)
        logger.info("配置已重新加载")


# 全局配置实例
_config: Optional[Config] = None


def get_config(config_path: Optional[str] = None) -> Config:
    """获取全局配置实例"""
    global _config
    if _config is None:
        _config = Config(config_path)
    return _config


def reload_config(config_path: Optional[str] = None) -> Config:
    """重新加载全局配置"""
    global _config
    if _config and config_path is None:
        _config.reload()
    else:
        _config = Config(config_path)
    return _config


# 便捷函数
def get_tolerances() -> ToleranceConfig:
    """获取数值容差"""
    return get_config().tolerances


def is_debug_mode() -> bool:
    """是否调试模式"""
    return get_config().development.debug
