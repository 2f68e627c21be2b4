"""
极限球 Cauchy 变换、球面全纯 Fourier 分量、不变算子 𝓛 与纤维积分反演

流水线：f → f̂ → 𝓛f̂ → (𝓛f̂)^∨，在单侧双曲面模型上数值实现。
"""

import logging
import threading
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import special

from ..models.geometry_models import GroupElement, HoroPoint, HyperboloidPoint, J, as_cvec3
from ..models.lattice_models import WeightVector
from ..models.transform_models import (
    FiberIntegral, InversionReport, InversionRow, QuadratureSpec, TestFunction, TestFunctionKind,
    TransformSample,
)
from ..utils.config import get_config, get_tolerances, is_debug_mode
from ..utils.exceptions import (
    CalibrationError, ConstraintViolationError, DegenerateFiberError, FiberDivergenceError,
    KernelSingularityError, NonFiniteValueError, NonInteriorPointError, ParameterDomainError,
)
from ..utils.logger import log_computation_event
from .hypergeom import (
    ZETA0, act, bilinear, classify_horopoint, delta, in_D_plus, orientation, require_on_quadric,
    tube_orientation,
)
from .quadrature import fiber_nodes, panel_order, x_grid
from .rootlattice import classify, rank_one_datum

logger = logging.getLogger(__name__)

# 与 J 相乘后 ⟨ζ, x⟩ = ζ · (x ∘ SIGNATURE)
SIGNATURE = np.array([1.0, 1.0, -1.0])

# 四阶中心差分
STENCIL_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
STENCIL_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0

# Euler 项的符号，首次使用时校准后冻结
_euler_sign: Optional[int] = None
_euler_lock = threading.Lock()

HoroLike = Callable[[np.ndarray], np.ndarray]


# 测试函数
def matrix_coefficient(w: HoroPoint, lam: int) -> TestFunction:
    """广义矩阵系数 f(x) = ⟨x, w⟩^{−λ}"""
    if not isinstance(lam, (int, np.integer)) or lam < 1:
        raise ParameterDomainError("lambda", lam, "正整数")
    if not w.is_interior:
        raise NonInteriorPointError("w", f"分类为 {w.kind.value}，需要 Ξ₊ 内点")
    w_vector = w.vector.copy()
    lam = int(lam)

    def evaluator(points: np.ndarray) -> np.ndarray:
        return bilinear(points, w_vector) ** (-lam)

    def extension(z: np.ndarray) -> complex:
        return complex(bilinear(as_cvec3(z), w_vector)) ** (-lam)

    return TestFunction(TestFunctionKind.MATRIX_COEFFICIENT, f"matrix_coefficient(lambda={lam})",
                        evaluator, w=w, lam=lam, extension=extension)


def custom_function(label: str, evaluator: Callable[[np.ndarray], np.ndarray],
                    extension: Optional[Callable[[np.ndarray], complex]] = None) -> TestFunction:
    """自定义测试函数"""
    return TestFunction(TestFunctionKind.CUSTOM, label, evaluator, extension=extension)


def zero_function() -> TestFunction:
    """f ≡ 0"""
    return custom_function("zero", lambda points: np.zeros(np.shape(points)[:-1], dtype=complex),
                           extension=lambda z: 0j)


def linear_combination(a: complex, f: TestFunction, b: complex, g: TestFunction) -> TestFunction:
    """a·f + b·g"""
    return custom_function(f"({a})*{f.label} + ({b})*{g.label}",
                           lambda points: a * f(points) + b * g(points))


def translate(f: TestFunction, g: GroupElement) -> TestFunction:
    """(g·f)(x) = f(g⁻¹x)"""
    g_inverse = g.inverse()
    return custom_function(f"translate({f.label})", lambda points: f(act(g_inverse, points)))


# 核
def cauchy_kernel(zeta: HoroPoint, x: HyperboloidPoint) -> complex:
    """1/(⟨ζ, x⟩ − 1)"""
    _require_interior(zeta, "zeta")
    pairing = complex(bilinear(zeta.vector, x.vector))
    distance = abs(pairing - 1.0)
    tol = get_tolerances().kernel_singularity
    if distance <= tol:
        raise KernelSingularityError(distance, tol)
    return 1.0 / (pairing - 1.0)


def kernel_partial_sum(pairing, terms: int):
    """Σ_{λ=1}^{N} p^{−λ}"""
    inverse = 1.0 / np.asarray(pairing, dtype=complex)
    total = np.zeros_like(inverse)
    power = np.ones_like(inverse)
    for _ in range(terms):
        power = power * inverse
        total = total + power
    return total


def geometric_tail_bound(pairing, terms: int):
    """|p|^{−(N+1)}/(1 − |p|^{−1})，要求 |p| > 1"""
    q = 1.0 / np.abs(np.asarray(pairing))
    return q ** (terms + 1) / (1.0 - q)


def rounding_allowance(pairing, terms: int):
    """部分和的舍入误差上界 64·ε·(|K| + Σ|p|^{−λ})"""
    p = np.asarray(pairing, dtype=complex)
    q = 1.0 / np.abs(p)
    absolute_sum = q * (1.0 - q ** terms) / (1.0 - q)
    return 64.0 * np.finfo(float).eps * (np.abs(1.0 / (p - 1.0)) + absolute_sum)


# 二维求积
def _require_interior(zeta: HoroPoint, what: str):
    if not zeta.is_interior:
        raise NonInteriorPointError(what, f"分类为 {zeta.kind.value}，需要 Ξ₊ 内点")


def _weighted_values(f: TestFunction, spec: QuadratureSpec) -> np.ndarray:
    grid = x_grid(spec)
    values = np.asarray(f(grid.points), dtype=complex)
    if values.shape != grid.weights.shape:
        raise ParameterDomainError("f", f.label, f"返回形状 {grid.weights.shape} 的数组")
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"测试函数 {f.label}")
    return values * grid.weights


def _pairings(zetas: np.ndarray, spec: QuadratureSpec) -> np.ndarray:
    """⟨ζ_k, x_n⟩，形状 (K, N)"""
    grid = x_grid(spec)
    return zetas @ (grid.points * SIGNATURE).T


def integrate_over_X(f: TestFunction, spec: QuadratureSpec) -> complex:
    """∫_X f(x) dx"""
    return complex(np.sum(_weighted_values(f, spec)))


def transform_batch(f: TestFunction, zetas, spec: QuadratureSpec,
                    batch_size: Optional[int] = None) -> np.ndarray:
    """批量计算 f̂(ζ)，zetas 形状 (..., 3)"""
    zetas = np.asarray(zetas, dtype=complex)
    shape = zetas.shape[:-1]
    flat = zetas.reshape(-1, 3)
    batch_size = batch_size or get_config().quadrature.batch_size
    weighted = _weighted_values(f, spec)
    tol = get_tolerances().kernel_singularity

    results = np.empty(flat.shape[0], dtype=complex)
    for start in range(0, flat.shape[0], batch_size):
        block = _pairings(flat[start:start + batch_size], spec) - 1.0
        distance = float(np.min(np.abs(block))) if block.size else np.inf
        if distance <= tol:
            raise KernelSingularityError(distance, tol)
        results[start:start + batch_size] = np.reciprocal(block) @ weighted

    if not np.all(np.isfinite(results)):
        raise NonFiniteValueError("Cauchy变换")
    return results.reshape(shape)


class TransformedFunction:
    """f̂ 作为 Ξ₊ 上的（批量）可调用对象"""

    def __init__(self, f: TestFunction, spec: QuadratureSpec):
        self.f = f
        self.spec = spec

    def __call__(self, zetas) -> np.ndarray:
        return transform_batch(self.f, zetas, self.spec)

    def __repr__(self) -> str:
        return f"TransformedFunction({self.f.label})"


def cauchy_transform(f: TestFunction, zeta: HoroPoint, spec: QuadratureSpec) -> complex:
    """f̂(ζ) = ∫_X f(x)/(⟨ζ,x⟩ − 1) dx"""
    _require_interior(zeta, "zeta")
    return complex(transform_batch(f, zeta.vector[None, :], spec)[0])


def fourier_component(f: TestFunction, zeta: HoroPoint, lam: int, spec: QuadratureSpec) -> complex:
    """f̂_λ(ζ) = ∫_X f(x)·⟨x, ζ⟩^{−λ} dx"""
    _require_interior(zeta, "zeta")
    if lam < 1:
        raise ParameterDomainError("lambda", lam, "正整数")
    weighted = _weighted_values(f, spec)
    pairing = _pairings(zeta.vector[None, :], spec)[0]
    value = complex(np.sum(pairing ** (-int(lam)) * weighted))
    if not np.isfinite(value):
        raise NonFiniteValueError("Fourier分量")
    return value


def transform_samples(f: TestFunction, zetas: Sequence[HoroPoint], spec: QuadratureSpec,
                      lam: Optional[int] = None) -> List[TransformSample]:
    """在一组 Ξ₊ 内点上批量求 f̂（lam 为 None）或 f̂_λ，返回 (ζ, 值) 记录"""
    for index, zeta in enumerate(zetas):
        _require_interior(zeta, f"zeta[{index}]")
    if lam is not None and lam < 1:
        raise ParameterDomainError("lambda", lam, "正整数")
    if not zetas:
        return []
    vectors = np.stack([zeta.vector for zeta in zetas])
    if lam is None:
        values = transform_batch(f, vectors, spec)
    else:
        values = _pairings(vectors, spec) ** (-int(lam)) @ _weighted_values(f, spec)
    return [TransformSample(zeta, complex(value), lam) for zeta, value in zip(zetas, values)]


def schur_matrix(lam_max: int, zeta1: HoroPoint, zeta2: HoroPoint, spec: QuadratureSpec) -> np.ndarray:
    """M[λ−1][μ−1] = ∫_X ⟨x,ζ₁⟩^{−λ}⟨x,ζ₂⟩^{−μ} dx"""
    _require_interior(zeta1, "zeta1")
    _require_interior(zeta2, "zeta2")
    grid = x_grid(spec)
    pairings = _pairings(np.stack([zeta1.vector, zeta2.vector]), spec)
    powers = np.arange(1, lam_max + 1)[:, None]
    first = pairings[0][None, :] ** (-powers) * grid.weights
    second = pairings[1][None, :] ** (-powers)
    matrix = first @ second.T
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteValueError("Schur矩阵")
    return matrix


def matrix_coefficient_constant(lam: int) -> float:
    """c_λ = 2π·2^λ·B(λ−½, ½)"""
    return 2.0 * np.pi * 2.0 ** lam * special.beta(lam - 0.5, 0.5)


def matrix_coefficient_transform(w: HoroPoint, lam: int, zeta: HoroPoint) -> complex:
    """矩阵系数变换的闭式：ζ 与 w 分支相反时为 c_λ⟨w,ζ⟩^{−λ}，同分支时为 0"""
    if orientation(zeta.vector) == orientation(w.vector):
        return 0j
    return matrix_coefficient_constant(lam) * complex(bilinear(w.vector, zeta.vector)) ** (-lam)


# 不变算子 𝓛
def cone_retraction(v: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """P(v) = v − Δ(v)/(2⟨v, ζ̄⟩)·ζ̄，在迷向锥上为恒等"""
    anchor_bar = np.conj(anchor)
    factor = delta(v) / (2.0 * bilinear(v, anchor_bar))
    return v - factor[..., None] * anchor_bar


def _require_interior_batch(zetas: np.ndarray):
    d_xi = delta(zetas.real)
    bad = ~(d_xi > 1.0 + get_tolerances().domain)
    if np.any(bad):
        index = int(np.argmax(bad))
        raise NonInteriorPointError("zeta", f"第{index}个点 Δ(Re ζ) = {float(d_xi.flat[index]):.6g} ≤ 1")


def euler_part(phi: HoroLike, zetas, h: Optional[float] = None) -> np.ndarray:
    """Σ_j ζ_j ∂φ/∂ζ_j，四阶中心差分，步长 h·max(1, |ζ_j|)，扰动点投影回迷向锥"""
    h = get_config().operator.step if h is None else h
    zetas = np.asarray(zetas, dtype=complex)
    shape = zetas.shape[:-1]
    flat = zetas.reshape(-1, 3)
    _require_interior_batch(flat)

    steps = h * np.maximum(1.0, np.abs(flat))                                  # (M, 3)
    eye = np.eye(3)
    # (M, 3 坐标, 4 偏移, 3 分量)
    displacements = (steps[:, :, None, None] * STENCIL_OFFSETS[None, None, :, None]
                     * eye[None, :, None, :])
    stencil = cone_retraction(flat[:, None, None, :] + displacements, flat[:, None, None, :])
    values = np.asarray(phi(stencil.reshape(-1, 3)), dtype=complex).reshape(flat.shape[0], 3, 4)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError("𝓛 的差分模板")
    derivatives = (values @ STENCIL_WEIGHTS) / steps                           # (M, 3)
    return np.sum(flat * derivatives, axis=-1).reshape(shape)


def apply_L(phi: HoroLike, zetas, h: Optional[float] = None, sign: Optional[int] = None) -> np.ndarray:
    """𝓛φ = ε·Σ_j ζ_j ∂φ/∂ζ_j − ½φ"""
    sign = get_euler_sign() if sign is None else sign
    zetas = np.asarray(zetas, dtype=complex)
    center = np.asarray(phi(zetas.reshape(-1, 3)), dtype=complex).reshape(zetas.shape[:-1])
    if not np.all(np.isfinite(center)):
        raise NonFiniteValueError("𝓛 的中心值")
    return sign * euler_part(phi, zetas, h) - 0.5 * center


def calibrate_euler_sign(spec: Optional[QuadratureSpec] = None, h: Optional[float] = None) -> int:
    """在 λ 校准样例上确定 ε，使 𝓛f̂_λ = (λ−½)f̂_λ

    样例：w = 2ζ₀，ζ = 2·ζ̄₀（与 w 分支相反，f̂ 非零）。
    """
    global _euler_sign
    operator = get_config().operator
    spec = spec or QuadratureSpec.from_config()
    lam = operator.calibration_lambda
    fhat = TransformedFunction(matrix_coefficient(classify_horopoint(2.0 * ZETA0), lam), spec)
    zeta = 2.0 * np.conj(ZETA0)
    center = complex(fhat(zeta[None, :])[0])
    ratio = complex(euler_part(fhat, zeta[None, :], h)[0]) / center

    sign = 1 if abs(ratio - lam) <= abs(ratio + lam) else -1
    mismatch = abs(sign * ratio - lam) / lam
    if mismatch > operator.calibration_tolerance:
        raise CalibrationError(ratio, lam)
    with _euler_lock:
        _euler_sign = sign
    log_computation_event(f"Euler项符号校准为 {sign:+d}", operation="calibrate_euler_sign",
                          ratio=ratio, mismatch=mismatch)
    return sign


def get_euler_sign(spec: Optional[QuadratureSpec] = None) -> int:
    """已校准的 ε；未校准时先校准"""
    if _euler_sign is None:
        return calibrate_euler_sign(spec)
    return _euler_sign


def reset_euler_sign():
    """清除校准结果"""
    global _euler_sign
    with _euler_lock:
        _euler_sign = None


# 纤维曲线与反演
def _fiber_directions(z: np.ndarray):
    """ζ(t) = z + i(cosh t·u − sinh t·v) 中的 u, v，要求 z 的管定向为 +1 或 z 为实点"""
    x, y = z.real, z.imag
    if not np.any(y):
        r = np.sqrt(x[0] ** 2 + x[1] ** 2)
        return (np.array([-x[1] / r, x[0] / r, 0.0], dtype=complex),
                np.array([x[0] * x[2] / r, x[1] * x[2] / r, r]))

    sinh_s = float(np.sqrt(max(float(delta(y)), 0.0)))
    min_radius = get_config().fiber.min_radius
    if sinh_s <= min_radius:
        raise DegenerateFiberError(sinh_s, min_radius)
    cosh_s = float(np.sqrt(delta(x)))
    # 实标架 g = (e₁, e₂, e₃)，z = g·(cosh s, i sinh s, 0)
    e1 = x / cosh_s
    e2 = y / sinh_s
    normal = J @ np.cross(e1, e2)
    e3 = -normal / np.sqrt(abs(float(delta(normal))))
    return cosh_s * e2 - 1j * sinh_s * e1, e3


def fiber_curve(z, t) -> np.ndarray:
    """S_ℝ(z) 的参数化 ζ(t) = z + i(cosh t·u − sinh t·v)

    实点 z ∈ X：u = (−z₂/r, z₁/r, 0)，v = (z₁z₃/r, z₂z₃/r, r)，r = √(z₁²+z₂²)。
    z = g·(cosh s, i sinh s, 0) ∈ D₊（g 为 G_e 中的实矩阵）：u = g·(−i sinh s, cosh s, 0)，
    v = g·(0, 0, 1)，即把切片上的曲线用 g 平移。管定向为 −1 的点取 z̄ 的曲线的共轭。
    """
    z = require_on_quadric(z)
    if tube_orientation(z) < 0:
        return np.conj(fiber_curve(np.conj(z), t))
    u, v = _fiber_directions(z)
    t = np.asarray(t, dtype=float)
    zetas = z + 1j * (np.cosh(t)[..., None] * u - np.sinh(t)[..., None] * v)

    if is_debug_mode():
        tol = get_tolerances().constraint
        scale = np.maximum(1.0, np.sum(np.abs(zetas) ** 2, axis=-1))
        isotropy = np.max(np.abs(delta(zetas)) / scale)
        incidence = np.max(np.abs(bilinear(zetas, z) - 1.0) / np.sqrt(scale))
        if isotropy > tol:
            raise ConstraintViolationError("Δ(ζ(t)) = 0", isotropy, tol)
        if incidence > tol:
            raise ConstraintViolationError("⟨z, ζ(t)⟩ = 1", incidence, tol)
    return zetas


def inverse_transform(phi: HoroLike, z, spec: QuadratureSpec, trace: bool = False) -> FiberIntegral:
    """φ^∨(z) = ∫ φ(ζ(t)) dt，截断到 [−fiber_t_max, fiber_t_max]"""
    z = as_cvec3(z)
    if not in_D_plus(z):
        raise NonInteriorPointError("z", "Δ(Re z) ≤ 1，不在 D₊ 内")
    t, w = fiber_nodes(spec)
    values = np.asarray(phi(fiber_curve(z, t)), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError("纤维积分的被积函数")

    contributions = w * values
    total = complex(np.sum(contributions))
    order = panel_order(spec.fiber_n)
    tail = float(abs(np.sum(contributions[:order])) + abs(np.sum(contributions[-order:])))
    ratio = get_config().fiber.divergence_ratio
    if tail > ratio * abs(total):
        raise FiberDivergenceError(
            f"首尾面板贡献 {tail:.3e} 超过总和 {abs(total):.3e} 的 {ratio:g} 倍",
            context={"tail": tail, "total_abs": abs(total)}
        )
    if trace:
        return FiberIntegral(total, tail, tuple(float(x) for x in t), tuple(float(x) for x in np.abs(values)))
    return FiberIntegral(total, tail)


def require_large_parameter(lam: int):
    """反演要求 λ ∈ Λ_c（秩一 sl2 数据），否则纤维积分不收敛"""
    lattice = classify(_sl2_datum(), WeightVector.of(lam))
    if not lattice.large:
        reason = (f"λ = {lam} ∈ Λ₂∖Λ_c，纤维积分不收敛" if lattice.square_integrable
                  else f"λ = {lam} 不在 Λ₂ 中")
        raise FiberDivergenceError(reason, context={"lambda": lam})


_SL2 = None


def _sl2_datum():
    global _SL2
    if _SL2 is None:
        _SL2 = rank_one_datum(1, "sl2")
    return _SL2


def inversion_pipeline(f: TestFunction, z_list: Sequence, spec: QuadratureSpec,
                       h: Optional[float] = None, trace: bool = False) -> InversionReport:
    """计算 R(z) = (𝓛f̂)^∨(z) 与 f(z) 的比值 c(z)"""
    if f.lam is not None:
        require_large_parameter(f.lam)
    if f.extension is None:
        raise ParameterDomainError("f", f.label, "带全纯延拓的测试函数")

    points = [as_cvec3(z) for z in z_list]
    for index, z in enumerate(points):
        if not in_D_plus(z):
            raise NonInteriorPointError(f"z[{index}]", "Δ(Re z) ≤ 1，不在 D₊ 内")
        if f.w is not None and tube_orientation(z) != f.w.orientation:
            raise NonInteriorPointError(
                f"z[{index}]", f"管定向 {tube_orientation(z):+d} 与 w 的定向 {f.w.orientation:+d} 不同，纤维上 f̂ 恒为 0")

    sign = get_euler_sign(spec)
    fhat = TransformedFunction(f, spec)

    def l_fhat(zetas: np.ndarray) -> np.ndarray:
        return apply_L(fhat, zetas, h, sign)

    rows: List[InversionRow] = []
    for z in points:
        fiber = inverse_transform(l_fhat, z, spec, trace)
        extension = complex(f.extension(z))
        ratio = fiber.value / extension if extension != 0 else None
        rows.append(InversionRow(tuple(complex(c) for c in z), fiber.value, extension, ratio,
                                 fiber.tail_bound, fiber if trace else None))

    ratios = np.array([row.ratio for row in rows if row.ratio is not None], dtype=complex)
    mean_ratio: Optional[complex] = None
    cv: Optional[float] = None
    if ratios.size == len(rows) and ratios.size > 0:
        mean_ratio = complex(np.mean(ratios))
        cv = float(np.sqrt(np.mean(np.abs(ratios - mean_ratio) ** 2)) / abs(mean_ratio))

    log_computation_event(f"反演流水线完成: {f.label}，{len(rows)}个点", operation="inversion_pipeline",
                          mean_ratio=mean_ratio, cv=cv)
    return InversionReport(f.describe(), f.lam, tuple(rows), mean_ratio, cv, sign, spec)
