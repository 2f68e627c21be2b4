"""
变换流水线数据模型
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .geometry_models import HoroPoint
from ..utils.exceptions import NonFiniteValueError


@dataclass(frozen=True)
class QuadratureSpec:
    """求积参数

    t 轴截断到 [−t_max, t_max]，用复合 Gauss–Legendre 面板；θ 用周期梯形公式。
    fiber_* 为纤维积分 ∫ φ(ζ(t)) dt 的对应参数。
    """
    t_max: float = 12.0
    n_t: int = 480
    n_theta: int = 256
    fiber_t_max: float = 14.0
    fiber_n: int = 600

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError(f"t_max 必须为正: {self.t_max}")
        if not self.fiber_t_max > 0:
            raise ValueError(f"fiber_t_max 必须为正: {self.fiber_t_max}")
        if self.n_t < 32 or self.n_t % 2:
            raise ValueError(f"n_t 必须是不小于32的偶数: {self.n_t}")
        if self.n_theta < 32:
            raise ValueError(f"n_theta 不能小于32: {self.n_theta}")
        if self.fiber_n < 32 or self.fiber_n % 2:
            raise ValueError(f"fiber_n 必须是不小于32的偶数: {self.fiber_n}")

    @classmethod
    def from_config(cls) -> "QuadratureSpec":
        """从全局配置构造"""
        from ..utils.config import get_config
        q = get_config().quadrature
        return cls(q.t_max, q.n_t, q.n_theta, q.fiber_t_max, q.fiber_n)

    def doubled(self) -> "QuadratureSpec":
        """分辨率加倍（收敛性自检用）"""
        return replace(self, n_t=2 * self.n_t, n_theta=2 * self.n_theta, fiber_n=2 * self.fiber_n)

    def to_dict(self) -> Dict[str, float]:
        return {
            "t_max": self.t_max,
            "n_t": self.n_t,
            "n_theta": self.n_theta,
            "fiber_t_max": self.fiber_t_max,
            "fiber_n": self.fiber_n,
        }


class TestFunctionKind(Enum):
    """测试函数类型"""
    MATRIX_COEFFICIENT = "matrix_coefficient"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class TestFunction:
    """X 上的测试函数

    matrix_coefficient: f(x) = ⟨x, w⟩^{−λ}，w 为 Ξ₊ 内点；
    custom: 任意向量化可调用对象 f(points[..., 3]) -> values[...]。
    """
    __test__ = False

    kind: TestFunctionKind
    label: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    w: Optional[HoroPoint] = None
    lam: Optional[int] = None
    # 到 D₊ 的全纯延拓（矩阵系数有；custom 可选）
    extension: Optional[Callable[[np.ndarray], complex]] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluator(points)

    def describe(self) -> Dict[str, object]:
        info: Dict[str, object] = {"kind": self.kind.value, "label": self.label}
        if self.w is not None:
            info["w"] = [[float(v.real), float(v.imag)] for v in self.w.vector]
        if self.lam is not None:
            info["lambda"] = self.lam
        return info


@dataclass(frozen=True, eq=False)
class TransformSample:
    """(ζ, 值) 记录；lam 为 None 时是 f̂(ζ)，否则是分量 f̂_λ(ζ)"""
    zeta: HoroPoint
    value: complex
    lam: Optional[int] = None

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise NonFiniteValueError("变换样本")

    @property
    def operation(self) -> str:
        return "cauchy_transform" if self.lam is None else "fourier_component"


@dataclass(frozen=True)
class FiberIntegral:
    """纤维积分结果"""
    value: complex
    tail_bound: float
    t_nodes: Tuple[float, ...] = ()
    integrand_modulus: Tuple[float, ...] = ()


@dataclass(frozen=True)
class InversionRow:
    """反演流水线中单个点的结果"""
    z: Tuple[complex, complex, complex]
    reconstructed: complex      # R(z) = (𝓛f̂)^∨(z)
    extension: complex          # f(z) = ⟨z, w⟩^{−λ}
    ratio: Optional[complex]    # c(z) = R(z)/f(z)
    tail_bound: float
    fiber: Optional[FiberIntegral] = None


@dataclass(frozen=True)
class InversionReport:
    """反演流水线汇总"""
    function: Dict[str, object]
    lam: Optional[int]
    rows: Tuple[InversionRow, ...]
    mean_ratio: Optional[complex]
    cv: Optional[float]
    euler_sign: int
    quadrature: QuadratureSpec

    @property
    def c_norm(self) -> Optional[complex]:
        return self.mean_ratio


@dataclass
class CheckResult:
    """单项验证结果"""
    name: str
    passed: bool
    observed: float
    threshold: float
    detail: str = ""


@dataclass
class BatteryReport:
    """验证组结果"""
    battery: str
    checks: List[CheckResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, observed: float, threshold: float, detail: str = "") -> CheckResult:
        result = CheckResult(name, bool(passed), float(observed), float(threshold), detail)
        self.checks.append(result)
        return result

    def failed_checks(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]
