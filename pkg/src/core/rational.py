"""
精确有理数线性代数

对外使用 Fraction，矩阵运算交给 sympy.Matrix（元素为 sympy.Rational）。
"""

from fractions import Fraction
from numbers import Rational
from typing import List, Sequence, Tuple, Union

import sympy

from ..utils.exceptions import DimensionMismatchError, SingularSystemError

RationalLike = Union[int, Fraction, str]
Matrix = List[List[Fraction]]


def to_fraction(value: RationalLike) -> Fraction:
    """转换为Fraction，拒绝浮点数"""
    if isinstance(value, bool):
        raise TypeError("布尔值不是有理数")
    if isinstance(value, float):
        raise TypeError(f"根系计算只接受精确有理数，收到浮点数 {value!r}")
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, (Fraction, int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"无法转换为有理数: {value!r}")


def to_vector(values: Sequence[RationalLike]) -> Tuple[Fraction, ...]:
    """转换为有理数向量"""
    return tuple(to_fraction(v) for v in values)


def format_fraction(value: Fraction) -> str:
    """格式化为 p/q 或整数"""
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def check_length(vector: Sequence, expected: int, what: str = "向量"):
    """检查向量长度"""
    if len(vector) != expected:
        raise DimensionMismatchError(expected, len(vector), what)


def to_sympy(matrix: Sequence[Sequence[RationalLike]]) -> sympy.Matrix:
    """有理数矩阵 → sympy.Matrix"""
    rows = [[sympy.Rational(q.numerator, q.denominator) for q in map(to_fraction, row)] for row in matrix]
    if not rows:
        return sympy.zeros(0, 0)
    return sympy.Matrix(rows)


def from_sympy(vector: sympy.Matrix) -> Tuple[Fraction, ...]:
    """sympy 列向量 → Fraction 元组"""
    return tuple(to_fraction(sympy.Rational(entry)) for entry in vector)


def bilinear(gram: Sequence[Sequence[Fraction]], u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    """Gram矩阵定义的双线性型 uᵀGv"""
    n = len(gram)
    check_length(u, n)
    check_length(v, n)
    return sum((u[i] * gram[i][j] * v[j] for i in range(n) for j in range(n) if u[i] and v[j]),
               Fraction(0))


def rank(matrix: Sequence[Sequence[Fraction]]) -> int:
    """矩阵的秩"""
    return int(to_sympy(matrix).rank()) if matrix else 0


def determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """行列式"""
    return to_fraction(sympy.Rational(to_sympy(matrix).det()))


def solve(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], what: str = "Ax=b") -> Tuple[Fraction, ...]:
    """求解方阵线性方程组"""
    n = len(matrix)
    check_length(rhs, n, "右端项")
    system = to_sympy(matrix)
    if system.shape != (n, n) or system.det() == 0:
        raise SingularSystemError(what)
    return from_sympy(system.LUsolve(to_sympy([[b] for b in rhs])))


def is_positive_definite(matrix: Sequence[Sequence[Fraction]]) -> bool:
    """对称有理矩阵是否正定"""
    return bool(to_sympy(matrix).is_positive_definite)


def is_symmetric(matrix: Sequence[Sequence[Fraction]]) -> bool:
    """是否对称"""
    n = len(matrix)
    return all(len(row) == n for row in matrix) and to_sympy(matrix).is_symmetric()
