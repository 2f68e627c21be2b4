"""
单侧双曲面 X = {x₁² + x₂² − x₃² = 1} 的具体几何

X_ℂ、迷向锥 Ξ、区域 Ξ₊ 与 D₊、群 SO_e(2,1) 的作用以及 a_H 配对。
所有函数都接受任意前导维度的批量向量（最后一维为 3）。
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..models.geometry_models import GroupElement, HoroClass, HoroPoint, HyperboloidPoint, J, as_cvec3
from ..utils.config import get_config, get_tolerances
from ..utils.exceptions import (
    ConstraintViolationError, InvalidAxisError, NotIsotropicError, ZeroPairingError,
)

logger = logging.getLogger(__name__)

# 基点 x₀ 与边界迷向向量 ζ₀
X0 = np.array([1.0, 0.0, 0.0])
ZETA0 = np.array([1.0, -1.0j, 0.0])
X0.flags.writeable = False
ZETA0.flags.writeable = False


def bilinear(z, w):
    """⟨z, w⟩ = z₁w₁ + z₂w₂ − z₃w₃（双线性，非半双线性）"""
    z = np.asarray(z)
    w = np.asarray(w)
    return z[..., 0] * w[..., 0] + z[..., 1] * w[..., 1] - z[..., 2] * w[..., 2]


def delta(z):
    """Δ(z) = ⟨z, z⟩"""
    return bilinear(z, z)


def _scale(z) -> float:
    """相对容差的尺度 max(1, |z|²)"""
    return max(1.0, float(np.sum(np.abs(np.asarray(z)) ** 2)))


def require_on_quadric(z, tol: Optional[float] = None) -> np.ndarray:
    """检查 Δ(z) = 1，返回复向量"""
    tol = get_tolerances().constraint if tol is None else tol
    z = as_cvec3(z)
    deviation = delta(z) - 1.0
    if abs(deviation) > tol * _scale(z):
        raise ConstraintViolationError("Δ(z) = 1", deviation, tol)
    return z


def hyperboloid_points(t, theta) -> np.ndarray:
    """参数化 x = (cosh t cos θ, cosh t sin θ, sinh t)，支持广播"""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    cosh_t = np.cosh(t)
    return np.stack(np.broadcast_arrays(cosh_t * np.cos(theta), cosh_t * np.sin(theta), np.sinh(t)), axis=-1)


def param_X(t: float, theta: float) -> HyperboloidPoint:
    """X 的坐标卡"""
    return HyperboloidPoint(hyperboloid_points(t, theta).astype(complex))


def point_from_vector(v, tol: Optional[float] = None) -> HyperboloidPoint:
    """校验原始向量并构造 X_ℂ 上的点"""
    if tol is None:
        tol = get_tolerances().exact_point if np.all(np.imag(v) == 0) else get_tolerances().constraint
    return HyperboloidPoint(require_on_quadric(v, tol))


def invariant_density(t):
    """(t, θ) 坐标下 G 不变测度的密度 cosh t"""
    return np.cosh(t)


def in_D_plus(z, tol: Optional[float] = None) -> bool:
    """z ∈ D₊ ⇔ Δ(Re z) > 1"""
    tolerances = get_tolerances()
    z = require_on_quadric(z, tolerances.constraint if tol is None else tol)
    return bool(delta(z.real) > 1.0 + tolerances.domain)


def tube_orientation(z) -> int:
    """D₊ 两个分支的符号 sign(x₁y₂ − x₂y₁)，z = x + iy"""
    z = as_cvec3(z)
    x, y = z.real, z.imag
    return int(np.sign(x[0] * y[1] - x[1] * y[0]))


def orientation(zeta) -> int:
    """Ξ₊ 闭包两个分支的符号 −sign(ξ₁η₂ − ξ₂η₁)；ζ₀ 为 +1"""
    zeta = as_cvec3(zeta)
    xi, eta = zeta.real, zeta.imag
    if delta(xi) <= 0:
        return 0
    return -int(np.sign(xi[0] * eta[1] - xi[1] * eta[0]))


def classify_horopoint(zeta) -> HoroPoint:
    """迷向向量分类：内部 (Ξ₊) / 边界 (G·ζ₀) / 其它"""
    tolerances = get_tolerances()
    zeta = as_cvec3(zeta)
    if not np.any(zeta != 0):
        raise NotIsotropicError(0.0, tolerances.constraint)
    scale = _scale(zeta)
    d = delta(zeta)
    if abs(d) > tolerances.constraint * scale:
        raise NotIsotropicError(d, tolerances.constraint)

    xi, eta = zeta.real, zeta.imag
    d_xi = float(delta(xi))
    d_eta = float(delta(eta))
    cross = float(bilinear(xi, eta))
    if abs(cross) > tolerances.constraint * scale:
        raise NotIsotropicError(complex(0.0, 2 * cross), tolerances.constraint)

    if abs(d_xi - 1.0) <= tolerances.boundary_window and abs(d_eta - 1.0) <= tolerances.boundary_window:
        kind = HoroClass.BOUNDARY
    elif d_xi > 1.0 + tolerances.domain and d_eta > 1.0 + tolerances.domain:
        kind = HoroClass.INTERIOR
    else:
        kind = HoroClass.OTHER
    return HoroPoint(zeta, kind, orientation(zeta) if kind != HoroClass.OTHER else 0)


def on_horosphere(z, zeta: HoroPoint, tol: float) -> bool:
    """z ∈ E(ζ) ⇔ |⟨z, ζ⟩ − 1| ≤ tol"""
    z = require_on_quadric(z)
    return bool(abs(bilinear(z, zeta.vector) - 1.0) <= tol)


def a_H_power(z, zeta: HoroPoint, lam: int) -> complex:
    """a_H(ζ⁻¹z)^{λα} = ⟨z, ζ⟩^{−λ}，λ 为正整数"""
    pairing = complex(bilinear(as_cvec3(z), zeta.vector))
    if pairing == 0:
        raise ZeroPairingError(pairing)
    return pairing ** (-int(lam))


# 群作用
def rotation(theta: float) -> GroupElement:
    """K 中的旋转 a(θ)，a(θ)·x₀ = (cos θ, −sin θ, 0)"""
    c, s = np.cos(theta), np.sin(theta)
    matrix = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    return GroupElement(matrix, (("rotation", float(theta)),))


def boost(axis: int, s: float) -> GroupElement:
    """沿第 axis 轴的推进，boost(1, s)·x₀ = (cosh s, 0, sinh s)"""
    if axis not in (1, 2):
        raise InvalidAxisError(axis)
    c, sh = np.cosh(s), np.sinh(s)
    matrix = np.eye(3)
    i = axis - 1
    matrix[i, i] = c
    matrix[i, 2] = sh
    matrix[2, i] = sh
    matrix[2, 2] = c
    return GroupElement(matrix, ((f"boost{axis}", float(s)),))


def identity() -> GroupElement:
    return GroupElement(np.eye(3))


def act(g: GroupElement, v) -> np.ndarray:
    """g·v，v 可为批量向量"""
    return np.asarray(v) @ g.matrix.T


def is_form_preserving(g: GroupElement, tol: Optional[float] = None) -> bool:
    """gᵀ J g = J"""
    tol = get_tolerances().constraint if tol is None else tol
    deviation = g.matrix.T @ J @ g.matrix - J
    return bool(np.max(np.abs(deviation)) <= tol * max(1.0, float(np.max(np.abs(g.matrix))) ** 2))


def compose(elements: Sequence[GroupElement]) -> GroupElement:
    """按顺序相乘 g₁ g₂ … g_k"""
    result = identity()
    for element in elements:
        result = result @ element
    return result


# 随机采样
def sample_group_word(rng: np.random.Generator, max_length: Optional[int] = None,
                      rotation_range: Optional[float] = None,
                      boost_range: Optional[float] = None) -> GroupElement:
    """随机群字：字母取自 {rotation, boost(1,·), boost(2,·)}"""
    sampling = get_config().sampling
    max_length = sampling.max_word_length if max_length is None else max_length
    rotation_range = sampling.rotation_range if rotation_range is None else rotation_range
    boost_range = sampling.boost_range if boost_range is None else boost_range

    length = int(rng.integers(1, max_length + 1))
    letters = []
    for _ in range(length):
        letter = int(rng.integers(0, 3))
        if letter == 0:
            letters.append(rotation(float(rng.uniform(-rotation_range, rotation_range))))
        else:
            letters.append(boost(letter, float(rng.uniform(-boost_range, boost_range))))
    return compose(letters)


def sample_interior_horopoint(rng: np.random.Generator, sign: int = 1,
                              boost_range: Optional[float] = None,
                              scale_range: Optional[Tuple[float, float]] = None) -> HoroPoint:
    """ζ = s·k₁ a_b k₂·ζ₀（sign=+1）或其共轭（sign=−1）"""
    sampling = get_config().sampling
    boost_range = sampling.horopoint_boost_range if boost_range is None else boost_range
    low, high = sampling.horopoint_scale if scale_range is None else scale_range

    g = compose([
        rotation(float(rng.uniform(-np.pi, np.pi))),
        boost(1, float(rng.uniform(-boost_range, boost_range))),
        rotation(float(rng.uniform(-np.pi, np.pi))),
    ])
    s = float(rng.uniform(low, high))
    base = ZETA0 if sign > 0 else np.conj(ZETA0)
    return classify_horopoint(s * act(g, base))
