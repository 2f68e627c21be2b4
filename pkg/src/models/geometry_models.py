"""
单侧双曲面模型的几何数据类型
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from ..utils.config import get_tolerances
from ..utils.exceptions import ConstraintViolationError

# 二次型 Δ(z) = z₁² + z₂² − z₃² 的矩阵
J = np.diag([1.0, 1.0, -1.0])
J.flags.writeable = False


class HoroClass(Enum):
    """迷向向量分类"""
    INTERIOR = "interior"    # Ξ₊：Δ(Re ζ) = Δ(Im ζ) > 1
    BOUNDARY = "boundary"    # G·ζ₀ ≅ G/M
    OTHER = "other"


def as_cvec3(values) -> np.ndarray:
    """转换为复三维向量"""
    vector = np.asarray(values, dtype=complex)
    if vector.shape != (3,):
        raise ValueError(f"需要三维向量，收到形状 {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise ValueError("向量含有非有限分量")
    return vector


@dataclass(frozen=True, eq=False)
class HyperboloidPoint:
    """X 或 X_ℂ 上的点，Δ(v) = 1"""
    vector: np.ndarray

    def __post_init__(self):
        vector = as_cvec3(self.vector)
        tol = get_tolerances().constraint
        deviation = complex(vector @ J @ vector) - 1.0
        if abs(deviation) > tol * max(1.0, float(np.sum(np.abs(vector) ** 2))):
            raise ConstraintViolationError("Δ(z) = 1", deviation, tol)
        object.__setattr__(self, "vector", vector)

    @property
    def real(self) -> np.ndarray:
        return self.vector.real

    def __repr__(self) -> str:
        return f"HyperboloidPoint({np.array2string(self.vector, precision=6)})"


@dataclass(frozen=True, eq=False)
class HoroPoint:
    """迷向向量 ζ = ξ + iη 及其分类"""
    vector: np.ndarray
    kind: HoroClass
    # Ξ₊ 两个分支的符号：ζ₀ 一侧为 +1，共轭一侧为 −1；非 Ξ₊ 闭包点为 0
    orientation: int = 0

    @property
    def is_interior(self) -> bool:
        return self.kind == HoroClass.INTERIOR

    @property
    def xi(self) -> np.ndarray:
        return self.vector.real

    @property
    def eta(self) -> np.ndarray:
        return self.vector.imag

    def __repr__(self) -> str:
        return (f"HoroPoint({np.array2string(self.vector, precision=6)}, "
                f"{self.kind.value}, orientation={self.orientation:+d})")


@dataclass(frozen=True, eq=False)
class GroupElement:
    """保持 Δ 的 3×3 矩阵"""
    matrix: np.ndarray
    word: Tuple[Tuple[str, float], ...] = ()

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix, self.word + other.word)

    def inverse(self) -> "GroupElement":
        """g⁻¹ = J gᵀ J"""
        inverse_word = tuple((letter, -parameter) for letter, parameter in reversed(self.word))
        return GroupElement(J @ self.matrix.T @ J, inverse_word)

    def describe(self) -> List[str]:
        return [f"{letter}({parameter:.6g})" for letter, parameter in self.word]
