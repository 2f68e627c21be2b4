"""
自定义异常类和错误处理
"""

from typing import Optional, Dict, Any
from datetime import datetime
import functools


class HoroCauchyError(Exception):
    """工具包基础异常"""

    # 命令行退出码: 1 领域/前置条件错误, 2 验证失败, 3 I/O或解析错误
    exit_code: int = 1

    def __init__(self, message: str, error_code: Optional[str] = None,
                 context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.context = context or {}
        self.timestamp = datetime.now()

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式"""
        return {
            'error_type': self.__class__.__name__,
            'message': self.message,
            'error_code': self.error_code,
            'context': self.context,
            'timestamp': self.timestamp.isoformat()
        }

    def __str__(self) -> str:
        if self.error_code:
            return f"[{self.error_code}] {self.message}"
        return self.message


# 根系数据相关异常
class DatumError(HoroCauchyError):
    """根系数据异常"""
    pass


class DatumParseError(DatumError):
    """根系数据文件解析异常"""

    exit_code = 3

    def __init__(self, path: str, line: int, detail: str):
        super().__init__(
            f"{path}:{line}: {detail}",
            error_code="DATUM_PARSE_ERROR",
            context={"path": path, "line": line, "detail": detail}
        )


class DatumInvariantError(DatumError):
    """根系数据不变量被破坏"""

    exit_code = 3

    def __init__(self, invariant: str, detail: str, name: Optional[str] = None):
        prefix = f"{name}: " if name else ""
        super().__init__(
            f"{prefix}不变量 '{invariant}' 不成立: {detail}",
            error_code="INVARIANT_VIOLATION",
            context={"invariant": invariant, "detail": detail, "datum": name}
        )


class DimensionMismatchError(DatumError):
    """维数不匹配异常"""

    def __init__(self, expected: int, actual: int, what: str = "向量"):
        super().__init__(
            f"{what}维数不匹配，期望{expected}，实际{actual}",
            error_code="DIMENSION_MISMATCH",
            context={"expected": expected, "actual": actual, "what": what}
        )


class InvalidRootIndexError(DatumError):
    """无效根索引异常"""

    def __init__(self, index: int, count: int):
        super().__init__(
            f"无效的根索引: {index}，有效范围是0-{count - 1}",
            error_code="INVALID_ROOT_INDEX",
            context={"index": index, "root_count": count}
        )


class SingularSystemError(DatumError):
    """奇异线性方程组异常"""

    def __init__(self, what: str):
        super().__init__(
            f"线性方程组奇异，无法求解: {what}",
            error_code="SINGULAR_SYSTEM",
            context={"system": what}
        )


class UnsupportedDatumError(DatumError):
    """根系数据不支持该操作"""

    def __init__(self, operation: str, name: str):
        super().__init__(
            f"{name} 未声明 sigma_plus（非等秩情形），不支持 {operation}",
            error_code="UNSUPPORTED",
            context={"operation": operation, "datum": name}
        )


# 几何相关异常
class GeometryError(HoroCauchyError):
    """几何模型异常"""
    pass


class ConstraintViolationError(GeometryError):
    """流形约束不满足"""

    def __init__(self, constraint: str, value: complex, tolerance: float):
        super().__init__(
            f"约束 {constraint} 不满足: 偏差 {abs(value):.3e} 超过容差 {tolerance:.1e}",
            error_code="CONSTRAINT_VIOLATION",
            context={"constraint": constraint, "deviation": abs(value), "tolerance": tolerance}
        )


class NotIsotropicError(GeometryError):
    """向量不是迷向向量"""

    def __init__(self, delta: complex, tolerance: float):
        super().__init__(
            f"向量不在迷向锥上: |Δ(ζ)| = {abs(delta):.3e} > {tolerance:.1e}",
            error_code="NOT_ISOTROPIC",
            context={"delta_abs": abs(delta), "tolerance": tolerance}
        )


class ZeroPairingError(GeometryError):
    """配对为零，幂次无定义"""

    def __init__(self, pairing: complex):
        super().__init__(
            f"配对 ⟨z,ζ⟩ = {pairing} 为零，无法取负幂",
            error_code="ZERO_PAIRING",
            context={"pairing_abs": abs(pairing)}
        )


class InvalidAxisError(GeometryError):
    """无效的推进轴"""

    def __init__(self, axis: int):
        super().__init__(
            f"无效的推进轴: {axis}，有效值为1或2",
            error_code="INVALID_AXIS",
            context={"axis": axis}
        )


class DegenerateFiberError(GeometryError):
    """纤维曲线退化"""

    def __init__(self, radius: float, minimum: float):
        super().__init__(
            f"纤维半径 {radius:.3e} 不大于 {minimum:.1e}，纤维曲线退化",
            error_code="DEGENERATE_FIBER",
            context={"radius": radius, "minimum": minimum}
        )


class NonInteriorPointError(GeometryError):
    """点不在要求的区域内部"""

    def __init__(self, what: str, detail: str):
        super().__init__(
            f"{what} 不满足区域条件: {detail}",
            error_code="NOT_INTERIOR",
            context={"what": what, "detail": detail}
        )


# 变换相关异常
class TransformError(HoroCauchyError):
    """变换计算异常"""
    pass


class KernelSingularityError(TransformError):
    """Cauchy核奇点"""

    def __init__(self, distance: float, tolerance: float):
        super().__init__(
            f"配对与1的距离 {distance:.3e} 不超过 {tolerance:.1e}，核奇异",
            error_code="KERNEL_SINGULARITY",
            context={"distance": distance, "tolerance": tolerance}
        )


class NonFiniteValueError(TransformError):
    """出现非有限数值"""

    def __init__(self, where: str):
        super().__init__(
            f"{where} 出现非有限数值",
            error_code="NON_FINITE",
            context={"where": where}
        )


class FiberDivergenceError(TransformError):
    """纤维积分不收敛"""

    def __init__(self, reason: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            f"纤维积分不收敛: {reason}",
            error_code="FIBER_DIVERGENCE",
            context=context or {}
        )


class CalibrationError(TransformError):
    """符号校准失败"""

    def __init__(self, ratio: complex, expected: float):
        super().__init__(
            f"Euler项校准失败: 比值 {ratio} 与 ±{expected} 都不吻合",
            error_code="CALIBRATION_FAILED",
            context={"ratio_re": ratio.real, "ratio_im": ratio.imag, "expected": expected}
        )


class ParameterDomainError(TransformError):
    """参数不在允许范围"""

    def __init__(self, parameter: str, value: Any, expected: str):
        super().__init__(
            f"参数 {parameter}={value} 无效，期望{expected}",
            error_code="PARAMETER_DOMAIN",
            context={"parameter": parameter, "value": str(value), "expected": expected}
        )


# 配置相关异常
class ConfigurationError(HoroCauchyError):
    """配置异常"""

    exit_code = 3


class ConfigFileNotFoundError(ConfigurationError):
    """配置文件不存在异常"""

    def __init__(self, config_path: str):
        super().__init__(
            f"配置文件不存在: {config_path}",
            error_code="CONFIG_FILE_NOT_FOUND",
            context={"config_path": config_path}
        )


class InvalidConfigValueError(ConfigurationError):
    """无效配置值异常"""

    def __init__(self, key: str, value: Any, expected: str):
        super().__init__(
            f"无效的配置值: {key}={value}，期望{expected}",
            error_code="INVALID_CONFIG_VALUE",
            context={
                "config_key": key,
                "config_value": value,
                "expected": expected
            }
        )


# 验证相关异常
class VerificationError(HoroCauchyError):
    """验证异常"""

    exit_code = 2


class BatteryFailedError(VerificationError):
    """验证组未通过"""

    def __init__(self, battery: str, failed_checks: list):
        super().__init__(
            f"验证组 {battery} 未通过: {', '.join(failed_checks)}",
            error_code="BATTERY_FAILED",
            context={"battery": battery, "failed_checks": failed_checks}
        )


class UnknownBatteryError(VerificationError):
    """未知验证组（属于参数错误）"""

    exit_code = 3

    def __init__(self, battery: str, available: list):
        super().__init__(
            f"未知验证组: {battery}，可用: {', '.join(available)}",
            error_code="UNKNOWN_BATTERY",
            context={"battery": battery, "available": available}
        )


# 输入解析相关异常
class InputParseError(HoroCauchyError):
    """命令行输入解析异常"""

    exit_code = 3

    def __init__(self, text: str, expected_format: str):
        super().__init__(
            f"输入格式错误: {text}，期望格式: {expected_format}",
            error_code="INPUT_PARSE_ERROR",
            context={
                "text": text,
                "expected_format": expected_format
            }
        )


class OutputWriteError(HoroCauchyError):
    """结果文件写入异常"""

    exit_code = 3

    def __init__(self, path: str, detail: str):
        super().__init__(
            f"无法写入结果文件 {path}: {detail}",
            error_code="OUTPUT_WRITE_ERROR",
            context={"path": path, "detail": detail}
        )


class UnhandledComputationError(HoroCauchyError):
    """计算中出现的非工具包异常"""

    def __init__(self, operation: str, error: Exception):
        super().__init__(
            f"{operation} 中出现未处理的异常: {type(error).__name__}: {error}",
            error_code="UNHANDLED_ERROR",
            context={"operation": operation, "original_error": type(error).__name__}
        )


def error_handler(operation: str, log_errors: bool = True):
    """把一次计算中的外来异常包装为 UnhandledComputationError

    工具包自身的异常原样抛出，只在 log_errors 时记录。
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except HoroCauchyError as e:
                if log_errors:
                    from .logger import log_error
                    log_error(e, context={"operation": operation, **e.context})
                raise
            except Exception as e:
                wrapped = UnhandledComputationError(operation, e)
                if log_errors:
                    from .logger import log_error
                    log_error(e, context=wrapped.context)
                raise wrapped from e

        return wrapper

    return decorator
