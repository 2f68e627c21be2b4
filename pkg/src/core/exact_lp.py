"""
精确有理数单纯形法与锥成员判定

两阶段稠密表格单纯形法，Bland规则防止循环。
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .rational import check_length, rank


class LPStatus(Enum):
    """线性规划求解状态"""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    """线性规划结果"""
    status: LPStatus
    x: Tuple[Fraction, ...] = ()
    objective: Optional[Fraction] = None

    @property
    def feasible(self) -> bool:
        return self.status != LPStatus.INFEASIBLE


@dataclass(frozen=True)
class ConeMembership:
    """锥成员判定证书"""
    member: bool
    coefficients: Tuple[Fraction, ...] = ()
    # 开锥判定时所有系数的最大公共下界 ε*；闭包判定为 None
    margin: Optional[Fraction] = None


def _pivot(tableau: List[List[Fraction]], row: int, col: int):
    """以 (row, col) 为主元做行变换"""
    lead = tableau[row][col]
    tableau[row] = [x / lead for x in tableau[row]]
    pivot_row = tableau[row]
    for i, other in enumerate(tableau):
        if i != row and other[col] != 0:
            factor = other[col]
            tableau[i] = [a - factor * b for a, b in zip(other, pivot_row)]


def _reduced_costs(tableau, basis, cost, columns) -> List[Tuple[int, Fraction]]:
    """计算各列的检验数"""
    result = []
    for j in columns:
        value = cost[j] - sum((cost[basis[i]] * tableau[i][j] for i in range(len(basis))), Fraction(0))
        result.append((j, value))
    return result


def _run_simplex(tableau, basis, cost, columns) -> LPStatus:
    """在给定可行基上最大化 cost·x"""
    while True:
        entering = next((j for j, r in _reduced_costs(tableau, basis, cost, columns) if r > 0), None)
        if entering is None:
            return LPStatus.OPTIMAL

        best_row = None
        best_ratio = None
        for i, row in enumerate(tableau):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[best_row])):
                    best_row, best_ratio = i, ratio
        if best_row is None:
            return LPStatus.UNBOUNDED

        _pivot(tableau, best_row, entering)
        basis[best_row] = entering


def maximize(cost: Sequence[Fraction], a_eq: Sequence[Sequence[Fraction]],
             b_eq: Sequence[Fraction]) -> LPResult:
    """最大化 cost·x，约束 A x = b, x ≥ 0"""
    n = len(cost)
    m = len(a_eq)
    check_length(b_eq, m, "右端项")
    for row in a_eq:
        check_length(row, n, "约束行")

    rows = []
    for row, rhs in zip(a_eq, b_eq):
        row = [Fraction(v) for v in row]
        rhs = Fraction(rhs)
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        rows.append((row, rhs))

    # 第一阶段：人工变量
    tableau = [row + [Fraction(int(i == k)) for k in range(m)] + [rhs]
               for i, (row, rhs) in enumerate(rows)]
    basis = [n + i for i in range(m)]
    phase_one_cost = [Fraction(0)] * n + [Fraction(-1)] * m
    _run_simplex(tableau, basis, phase_one_cost, range(n + m))

    infeasibility = sum((tableau[i][-1] for i in range(m) if basis[i] >= n), Fraction(0))
    if infeasibility > 0:
        return LPResult(LPStatus.INFEASIBLE)

    # 把留在基中的人工变量换出；换不出的行是冗余约束
    i = 0
    while i < len(tableau):
        if basis[i] >= n:
            col = next((j for j in range(n) if tableau[i][j] != 0), None)
            if col is None:
                del tableau[i]
                del basis[i]
                continue
            _pivot(tableau, i, col)
            basis[i] = col
        i += 1
    tableau = [row[:n] + [row[-1]] for row in tableau]

    # 第二阶段
    cost = [Fraction(c) for c in cost]
    status = _run_simplex(tableau, basis, cost, range(n))
    if status == LPStatus.UNBOUNDED:
        return LPResult(LPStatus.UNBOUNDED)

    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = tableau[i][-1]
    objective = sum((c * v for c, v in zip(cost, x)), Fraction(0))
    return LPResult(LPStatus.OPTIMAL, tuple(x), objective)


def cone_membership(generators: Sequence[Sequence[Fraction]], v: Sequence[Fraction],
                    closure: bool) -> ConeMembership:
    """判定 v 是否属于 Σ ℝ_{>0} g（开）或 Σ ℝ_{≥0} g（闭）

    开锥：最大化 ε，约束 v = Σ (ε + d_g) g，d ≥ 0，ε ≤ 1；
    当且仅当 ε* > 0 且生成元张成全空间时 v 在开锥内。
    """
    dim = len(v)
    for g in generators:
        check_length(g, dim, "生成元")
    count = len(generators)
    v = [Fraction(x) for x in v]

    if count == 0:
        member = closure and all(x == 0 for x in v)
        return ConeMembership(member, (), None)

    if closure:
        a_eq = [[Fraction(generators[j][i]) for j in range(count)] for i in range(dim)]
        result = maximize([Fraction(0)] * count, a_eq, v)
        if not result.feasible:
            return ConeMembership(False)
        return ConeMembership(True, result.x, None)

    if rank([list(g) for g in generators]) < dim:
        return ConeMembership(False)

    # 变量顺序: ε, d_1..d_count, 松弛变量 s (ε + s = 1)
    a_eq = []
    for i in range(dim):
        column_sum = sum((Fraction(g[i]) for g in generators), Fraction(0))
        a_eq.append([column_sum] + [Fraction(g[i]) for g in generators] + [Fraction(0)])
    a_eq.append([Fraction(1)] + [Fraction(0)] * count + [Fraction(1)])
    cost = [Fraction(1)] + [Fraction(0)] * (count + 1)
    result = maximize(cost, a_eq, v + [Fraction(1)])
    if result.status != LPStatus.OPTIMAL:
        return ConeMembership(False)

    epsilon = result.x[0]
    coefficients = tuple(epsilon + d for d in result.x[1:count + 1])
    return ConeMembership(epsilon > 0, coefficients, epsilon)
