"""
根系与权格数据模型
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..core.rational import (
    RationalLike, bilinear, check_length, format_fraction, is_positive_definite,
    is_symmetric, solve, to_fraction, to_vector,
)
from ..utils.exceptions import DatumInvariantError, InvalidRootIndexError, SingularSystemError


class RootKind(Enum):
    """根的类型"""
    COMPACT = "k"        # 紧根
    NONCOMPACT = "n"     # 非紧根


@dataclass(frozen=True)
class WeightVector:
    """𝔞* 中的有理坐标向量"""
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", to_vector(self.coords))

    @classmethod
    def of(cls, *values: RationalLike) -> "WeightVector":
        return cls(tuple(values))

    @classmethod
    def zero(cls, rank: int) -> "WeightVector":
        return cls((Fraction(0),) * rank)

    @property
    def rank(self) -> int:
        return len(self.coords)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        check_length(other.coords, self.rank)
        return WeightVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        check_length(other.coords, self.rank)
        return WeightVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "WeightVector":
        return WeightVector(tuple(-a for a in self.coords))

    def scale(self, factor: RationalLike) -> "WeightVector":
        k = to_fraction(factor)
        return WeightVector(tuple(k * a for a in self.coords))

    def __rmul__(self, factor: RationalLike) -> "WeightVector":
        return self.scale(factor)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def __str__(self) -> str:
        return "(" + ", ".join(format_fraction(a) for a in self.coords) + ")"


@dataclass(frozen=True)
class Root:
    """限制根"""
    coords: Tuple[Fraction, ...]
    kind: RootKind
    multiplicity: int = 1
    positive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coords", to_vector(self.coords))
        if self.multiplicity < 1:
            raise ValueError("根的重数必须是正整数")
        if all(c == 0 for c in self.coords):
            raise ValueError("零向量不是根")

    @property
    def vector(self) -> WeightVector:
        return WeightVector(self.coords)

    @property
    def is_compact(self) -> bool:
        return self.kind == RootKind.COMPACT


@dataclass(frozen=True)
class RootDatum:
    """Hermite型限制根系数据

    roots 按文件顺序给出；simple_basis 是 Δ_n⁺ ∪ Δ_k⁻ 的单根在 roots 中的索引，
    其中恰有一个非紧根 α_m。坐标取在选定的 𝔞* 基下，内积由 gram 给出。
    """
    name: str
    rank: int
    gram: Tuple[Tuple[Fraction, ...], ...]
    roots: Tuple[Root, ...]
    simple_basis: Tuple[int, ...]
    sigma_plus: Optional[Tuple[WeightVector, ...]] = None
    source: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gram", tuple(to_vector(row) for row in self.gram))
        if self.rank < 1:
            raise ValueError("秩必须是正整数")
        if len(self.gram) != self.rank:
            raise ValueError(f"Gram矩阵应有{self.rank}行")
        for root in self.roots:
            check_length(root.coords, self.rank, "根坐标")
        if self.sigma_plus is not None:
            for vector in self.sigma_plus:
                check_length(vector.coords, self.rank, "sigma_plus向量")

    # 基本运算
    def inner(self, u: WeightVector, v: WeightVector) -> Fraction:
        """⟨u, v⟩"""
        return bilinear(self.gram, u.coords, v.coords)

    def root(self, index: int) -> Root:
        if not 0 <= index < len(self.roots):
            raise InvalidRootIndexError(index, len(self.roots))
        return self.roots[index]

    def root_vector(self, index: int) -> WeightVector:
        return self.root(index).vector

    def index_of(self, vector: WeightVector) -> Optional[int]:
        """按坐标查找根的索引"""
        return self._index_map().get(vector.coords)

    def _index_map(self) -> Dict[Tuple[Fraction, ...], int]:
        return {root.coords: i for i, root in enumerate(self.roots)}

    # 根的分类
    def positive_noncompact(self) -> List[int]:
        """Δ_n⁺"""
        return [i for i, r in enumerate(self.roots) if r.positive and not r.is_compact]

    def positive_compact(self) -> List[int]:
        """Δ_k⁺"""
        return [i for i, r in enumerate(self.roots) if r.positive and r.is_compact]

    def compact(self) -> List[int]:
        """Δ_k"""
        return [i for i, r in enumerate(self.roots) if r.is_compact]

    def positive(self) -> List[int]:
        """Δ⁺"""
        return [i for i, r in enumerate(self.roots) if r.positive]

    @property
    def noncompact_simple(self) -> int:
        """α_m 在 roots 中的索引"""
        return next(i for i in self.simple_basis if not self.roots[i].is_compact)

    @property
    def noncompact_simple_position(self) -> int:
        """α_m 在 simple_basis 中的位置"""
        return self.simple_basis.index(self.noncompact_simple)

    @property
    def equal_rank(self) -> bool:
        return self.sigma_plus is not None

    def reflect(self, root_index: int, v: WeightVector) -> WeightVector:
        """根反射 s_α(v) = v − 2⟨v,α⟩/⟨α,α⟩ α"""
        alpha = self.root_vector(root_index)
        factor = 2 * self.inner(v, alpha) / self.inner(alpha, alpha)
        return v - alpha.scale(factor)

    # 不变量
    def validate(self) -> "RootDatum":
        """检查所有结构不变量，失败时抛出 DatumInvariantError"""
        if not is_symmetric(self.gram):
            raise DatumInvariantError("gram-symmetric", "Gram矩阵不对称", self.name)
        if not is_positive_definite(self.gram):
            raise DatumInvariantError("gram-positive-definite", "Gram矩阵不正定", self.name)

        index = self._index_map()
        if len(index) != len(self.roots):
            raise DatumInvariantError("roots-distinct", "存在重复的根", self.name)
        for i, root in enumerate(self.roots):
            j = index.get((-root.vector).coords)
            if j is None:
                raise DatumInvariantError("closed-under-negation", f"根 #{i} {root.vector} 的负根缺失", self.name)
            partner = self.roots[j]
            if partner.kind != root.kind or partner.multiplicity != root.multiplicity:
                raise DatumInvariantError("closed-under-negation",
                                          f"根 #{i} 与其负根的类型或重数不一致", self.name)
            if partner.positive == root.positive:
                raise DatumInvariantError("positive-system",
                                          f"根 #{i} 与其负根恰有一个应为正根", self.name)

        if len(self.simple_basis) != self.rank or len(set(self.simple_basis)) != self.rank:
            raise DatumInvariantError("simple-basis",
                                      f"单根系应有{self.rank}个不同的根", self.name)
        for i in self.simple_basis:
            if not 0 <= i < len(self.roots):
                raise DatumInvariantError("simple-basis", f"单根索引 {i} 越界", self.name)
        noncompact = [i for i in self.simple_basis if not self.roots[i].is_compact]
        if len(noncompact) != 1:
            raise DatumInvariantError("one-noncompact-simple-root",
                                      f"单根中非紧根个数为{len(noncompact)}，应恰为1", self.name)
        for i in self.simple_basis:
            root = self.roots[i]
            expected_sign = not root.is_compact
            if root.positive != expected_sign:
                raise DatumInvariantError("simple-basis",
                                          f"单根 #{i} 不属于 Δ_n⁺ ∪ Δ_k⁻", self.name)

        # 每个根在单根基下的坐标是同号整数，且 Δ_n⁺ ∪ Δ_k⁻ 中的根坐标非负
        basis_columns = [[self.roots[j].coords[r] for j in self.simple_basis] for r in range(self.rank)]
        for i, root in enumerate(self.roots):
            try:
                coefficients = solve(basis_columns, root.coords, "单根坐标")
            except SingularSystemError:
                raise DatumInvariantError("simple-basis", "单根线性相关", self.name)
            if any(c.denominator != 1 for c in coefficients):
                raise DatumInvariantError("simple-basis", f"根 #{i} 不是单根的整系数组合", self.name)
            in_positive_system = root.positive != root.is_compact
            wanted = (lambda c: c >= 0) if in_positive_system else (lambda c: c <= 0)
            if not all(wanted(c) for c in coefficients):
                raise DatumInvariantError("simple-basis", f"根 #{i} 的单根坐标符号不一致", self.name)

        if self.sigma_plus is not None:
            for vector in self.sigma_plus:
                if vector.coords not in index:
                    raise DatumInvariantError("sigma-plus-in-roots",
                                              f"sigma_plus 向量 {vector} 不是根（等秩情形 Σ = Δ）", self.name)
                if (-vector).coords in {v.coords for v in self.sigma_plus}:
                    raise DatumInvariantError("sigma-plus-in-roots",
                                              f"sigma_plus 同时含有 {vector} 与其负根", self.name)

        for i in self.positive_noncompact():
            for k in self.compact():
                image = self.reflect(k, self.root_vector(i))
                j = index.get(image.coords)
                if j is None or not self.roots[j].positive or self.roots[j].is_compact:
                    raise DatumInvariantError("noncompact-positive-Wk-invariant",
                                              f"紧根 #{k} 的反射把 #{i} 映出 Δ_n⁺", self.name)
        return self


@dataclass(frozen=True)
class LatticeClass:
    """权的格分类结果"""
    weight: WeightVector
    omega_coords: Tuple[Fraction, ...]
    integral: bool
    dominant: bool            # Λ₀
    nonnegative: bool         # Λ_{≥0}
    positive: bool            # Λ_{>0}
    integrable: bool          # Λ₁
    square_integrable: bool   # Λ₂
    large: bool               # Λ_c
    harish_chandra: Optional[bool] = None   # Λ_sd，非等秩时为 None

    def flags(self) -> Dict[str, Optional[bool]]:
        """所有成员标志"""
        return {
            "lambda_0": self.dominant,
            "lambda_nonneg": self.nonnegative,
            "lambda_pos": self.positive,
            "lambda_1": self.integrable,
            "lambda_2": self.square_integrable,
            "lambda_sd": self.harish_chandra,
            "lambda_c": self.large,
        }

    def implication_violations(self) -> List[str]:
        """返回被破坏的包含关系"""
        checks = [
            ("Λ₁ ⊆ Λ₂", not self.integrable or self.square_integrable),
            ("Λ_c ⊆ Λ₂", not self.large or self.square_integrable),
            ("Λ₂ ⊆ Λ_{>0}", not self.square_integrable or self.positive),
            ("Λ_{>0} ⊆ Λ_{≥0}", not self.positive or self.nonnegative),
            ("Λ_{≥0} ⊆ Λ₀", not self.nonnegative or self.dominant),
        ]
        return [name for name, holds in checks if not holds]

