"""
Hermite型限制根系的精确计算：余根、极小锥、基本权、格分类与形式维数
"""

from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from ..models.lattice_models import LatticeClass, Root, RootDatum, RootKind, WeightVector
from ..utils.exceptions import DatumInvariantError, UnsupportedDatumError
from .exact_lp import ConeMembership, cone_membership
from .rational import RationalLike, check_length, solve, to_fraction

# W_k 轨道的元素个数上限（测试数据中的 W_k 都很小）
ORBIT_CAP = 10000


def coroot(datum: RootDatum, index: int) -> WeightVector:
    """余根 α̌ = 2α/⟨α,α⟩"""
    alpha = datum.root_vector(index)
    return alpha.scale(Fraction(2) / datum.inner(alpha, alpha))


def evaluate(datum: RootDatum, weight: WeightVector, vector: WeightVector) -> Fraction:
    """λ(v) = ⟨λ, v⟩"""
    check_length(weight.coords, datum.rank, "权")
    check_length(vector.coords, datum.rank, "向量")
    return datum.inner(weight, vector)


def minimal_cone_generators(datum: RootDatum) -> List[WeightVector]:
    """生成 Ω 的非紧正余根"""
    return [coroot(datum, i) for i in datum.positive_noncompact()]


def cone_certificate(datum: RootDatum, v: WeightVector, closure: bool) -> ConeMembership:
    """极小锥成员判定，附带系数证书"""
    check_length(v.coords, datum.rank, "向量")
    generators = [g.coords for g in minimal_cone_generators(datum)]
    return cone_membership(generators, v.coords, closure)


def in_minimal_cone(datum: RootDatum, v: WeightVector, closure: bool = False) -> bool:
    """v ∈ Ω（开）或 v ∈ Ω̄（闭包）"""
    return cone_certificate(datum, v, closure).member


def cartan_matrix(datum: RootDatum) -> List[List[Fraction]]:
    """单根的Cartan矩阵 ⟨α_i, α̌_j⟩"""
    coroots = [coroot(datum, j) for j in datum.simple_basis]
    return [[datum.inner(datum.root_vector(i), c) for c in coroots] for i in datum.simple_basis]


def fundamental_weights(datum: RootDatum) -> List[WeightVector]:
    """基本权 ω_i：⟨ω_i, α_j⟩/⟨α_j, α_j⟩ = δ_ij"""
    simple = [datum.root_vector(j) for j in datum.simple_basis]
    # 第 j 行：(G α_j)ᵀ / ⟨α_j, α_j⟩
    rows = []
    for alpha in simple:
        norm = datum.inner(alpha, alpha)
        rows.append([sum((datum.gram[r][c] * alpha.coords[c] for c in range(datum.rank)), Fraction(0)) / norm
                     for r in range(datum.rank)])
    weights = []
    for i in range(datum.rank):
        rhs = [Fraction(int(i == j)) for j in range(datum.rank)]
        weights.append(WeightVector(solve(rows, rhs, f"{datum.name} 的基本权")))
    return weights


def omega_coordinates(datum: RootDatum, weight: WeightVector) -> Tuple[Fraction, ...]:
    """λ = Σ k_i ω_i 中的系数 k_i = ⟨λ, α_i⟩/⟨α_i, α_i⟩"""
    check_length(weight.coords, datum.rank, "权")
    coords = []
    for j in datum.simple_basis:
        alpha = datum.root_vector(j)
        coords.append(datum.inner(weight, alpha) / datum.inner(alpha, alpha))
    return tuple(coords)


def weight_from_omega(datum: RootDatum, coefficients: Sequence[RationalLike]) -> WeightVector:
    """由 ω 坐标构造权"""
    check_length(coefficients, datum.rank, "ω坐标")
    result = WeightVector.zero(datum.rank)
    for k, omega in zip(coefficients, fundamental_weights(datum)):
        result = result + omega.scale(to_fraction(k))
    return result


def rho(datum: RootDatum) -> WeightVector:
    """ρ = ½ Σ_{α∈Δ⁺} m_α α"""
    total = WeightVector.zero(datum.rank)
    for i in datum.positive():
        root = datum.roots[i]
        total = total + root.vector.scale(root.multiplicity)
    return total.scale(Fraction(1, 2))


def rho_c(datum: RootDatum) -> WeightVector:
    """ρ(𝔠) = ½ Σ_{α∈Σ⁺} α（仅等秩情形）"""
    if datum.sigma_plus is None:
        raise UnsupportedDatumError("rho_c", datum.name)
    total = WeightVector.zero(datum.rank)
    for vector in datum.sigma_plus:
        total = total + vector
    return total.scale(Fraction(1, 2))


def sigma_plus_noncompact(datum: RootDatum) -> List[WeightVector]:
    """Σ_n⁺：sigma_plus 中的非紧根"""
    if datum.sigma_plus is None:
        raise UnsupportedDatumError("sigma_plus_noncompact", datum.name)
    result = []
    for vector in datum.sigma_plus:
        index = datum.index_of(vector)
        if index is not None and not datum.roots[index].is_compact:
            result.append(vector)
    return result


def reduced_square_integrability(datum: RootDatum, weight: WeightVector) -> bool:
    """单根判别 ⟨λ−ρ, α_m⟩ > 0"""
    return datum.inner(weight - rho(datum), datum.root_vector(datum.noncompact_simple)) > 0


def classify(datum: RootDatum, weight: WeightVector) -> LatticeClass:
    """精确计算权 λ 的全部格成员关系"""
    check_length(weight.coords, datum.rank, "权")
    k = omega_coordinates(datum, weight)
    integral = all(c.denominator == 1 for c in k)
    shift = weight - rho(datum)
    shift2 = shift - rho(datum)
    noncompact = datum.positive_noncompact()

    dominant = all(datum.inner(weight, datum.root_vector(i)) <= 0 for i in datum.positive_compact())
    nonnegative = dominant and all(evaluate(datum, weight, g) >= 0 for g in minimal_cone_generators(datum))
    positive = integral and all(c >= 0 for c in k) and k[datum.noncompact_simple_position] > 0
    square_integrable = positive and all(datum.inner(shift, datum.root_vector(i)) > 0 for i in noncompact)
    integrable = positive and all(datum.inner(shift2, datum.root_vector(i)) > 0 for i in noncompact)
    large = square_integrable and all(
        evaluate(datum, shift, coroot(datum, i)) > 2 - datum.roots[i].multiplicity for i in noncompact
    )

    harish_chandra: Optional[bool] = None
    if datum.equal_rank:
        shift_c = weight - rho_c(datum)
        harish_chandra = dominant and all(datum.inner(shift_c, a) > 0 for a in sigma_plus_noncompact(datum))

    return LatticeClass(
        weight=weight,
        omega_coords=k,
        integral=integral,
        dominant=dominant,
        nonnegative=nonnegative,
        positive=positive,
        integrable=integrable,
        square_integrable=square_integrable,
        large=large,
        harish_chandra=harish_chandra,
    )


def formal_dimension(datum: RootDatum, weight: WeightVector, c: RationalLike = 1) -> Fraction:
    """d(λ) = c · Π_{α∈Σ⁺} ⟨λ−ρ(𝔠), α⟩"""
    check_length(weight.coords, datum.rank, "权")
    shift = weight - rho_c(datum)
    value = to_fraction(c)
    for alpha in datum.sigma_plus:
        value *= datum.inner(shift, alpha)
    return value


def enumerate_weights(datum: RootDatum, box_bound: int) -> List[WeightVector]:
    """所有 Σ k_i ω_i，|k_i| ≤ box_bound，按字典序"""
    if box_bound < 0:
        raise ValueError("box_bound 必须非负")
    omegas = fundamental_weights(datum)
    weights = []
    for k in product(range(-box_bound, box_bound + 1), repeat=datum.rank):
        weight = WeightVector.zero(datum.rank)
        for coefficient, omega in zip(k, omegas):
            if coefficient:
                weight = weight + omega.scale(coefficient)
        weights.append(weight)
    return weights


def compact_weyl_orbit(datum: RootDatum, v: WeightVector, cap: int = ORBIT_CAP) -> List[WeightVector]:
    """v 在紧根反射生成的群 W_k 下的轨道"""
    seen: Dict[Tuple[Fraction, ...], WeightVector] = {v.coords: v}
    frontier = [v]
    compact = datum.compact()
    while frontier:
        next_frontier = []
        for vector in frontier:
            for k in compact:
                image = datum.reflect(k, vector)
                if image.coords not in seen:
                    seen[image.coords] = image
                    next_frontier.append(image)
                    if len(seen) > cap:
                        raise DatumInvariantError("finite-Wk-orbit", f"轨道超过{cap}个元素", datum.name)
        frontier = next_frontier
    return sorted(seen.values(), key=lambda w: w.coords)


def long_noncompact_coroot(datum: RootDatum) -> WeightVector:
    """最长非紧正根的余根（同长时取索引最小者）"""
    noncompact = datum.positive_noncompact()
    longest = max(noncompact, key=lambda i: (datum.inner(datum.root_vector(i), datum.root_vector(i)), -i))
    return coroot(datum, longest)


def minimal_cone_is_orbit_hull(datum: RootDatum) -> bool:
    """Ω̄ 与长非紧余根 W_k 轨道的锥包互相包含"""
    orbit = compact_weyl_orbit(datum, long_noncompact_coroot(datum))
    generators = minimal_cone_generators(datum)
    forward = all(in_minimal_cone(datum, o, closure=True) for o in orbit)
    backward = all(cone_membership([o.coords for o in orbit], g.coords, closure=True).member
                   for g in generators)
    return forward and backward


def rank_one_datum(multiplicity: int, name: Optional[str] = None) -> RootDatum:
    """秩一族：根 ±α，⟨α,α⟩ = 1，重数 m_α；m_α = 1 时为等秩"""
    one = Fraction(1)
    sigma_plus = (WeightVector((one,)),) if multiplicity == 1 else None
    datum = RootDatum(
        name=name or f"rank1_m{multiplicity}",
        rank=1,
        gram=((one,),),
        roots=(
            Root((one,), RootKind.NONCOMPACT, multiplicity, True),
            Root((-one,), RootKind.NONCOMPACT, multiplicity, False),
        ),
        simple_basis=(0,),
        sigma_plus=sigma_plus,
    )
    return datum.validate()
