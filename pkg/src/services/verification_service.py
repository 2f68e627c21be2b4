"""
验证服务 - 把各模块的不变量组织成可执行的验证组
"""

from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from ..core.datum_parser import list_fixtures, load_datum
from ..core.hypergeom import (
    ZETA0, act, bilinear, boost, classify_horopoint, compose, delta, hyperboloid_points, orientation,
    rotation, sample_group_word, sample_interior_horopoint, tube_orientation,
)
from ..core.quadrature import composite_gauss_legendre, uniform_grid
from ..core.rootlattice import (
    classify, enumerate_weights, evaluate, fundamental_weights, minimal_cone_generators,
    minimal_cone_is_orbit_hull, rank_one_datum, reduced_square_integrability,
)
from ..core.transform import (
    SIGNATURE, TransformedFunction, apply_L, custom_function, euler_part, fiber_curve,
    geometric_tail_bound, get_euler_sign, integrate_over_X, inversion_pipeline,
    kernel_partial_sum, matrix_coefficient, matrix_coefficient_transform, rounding_allowance,
    schur_matrix, translate,
)
from ..models.geometry_models import HoroClass
from ..models.lattice_models import RootDatum
from ..models.transform_models import BatteryReport, QuadratureSpec
from ..utils.config import get_config, get_fixtures_dir
from ..utils.exceptions import FiberDivergenceError, UnknownBatteryError, error_handler
from ..utils.logger import get_logger, timed_computation

# 相对误差阈值
MEASURE_TOLERANCE = 1e-8
SCHUR_OFF_DIAGONAL = 1e-7
SCHUR_SYMMETRY = 1e-12
SCHUR_CLOSED_FORM = 1e-6
FIBER_IDENTITY = 1e-10
EIGENVALUE_TOLERANCE = 1e-5
EULER_TOLERANCE = 1e-6
INVERSION_CV = 1e-4
INVERSION_LAMBDA_AGREEMENT = 1e-3
INVERSION_CONSTANT = 4.0 * np.pi ** 2
INVERSION_CONSTANT_TOLERANCE = 1e-4
CONVERGENCE_TOLERANCE = 1e-8
CONVERGENCE_INVERSION = 1e-5

# no-real-points 网格
POINT_GRID = (6.0, 480, 256)
BOUNDARY_WINDOW = (1.0 - 1e-10, 1.0 + 1e-3)

EIGEN_LAMBDAS = (2, 3, 4)
FIBER_S_RANGE = (0.3, 1.5)
# 纤维验证中群字的推进范围；由 Re z, Im z 重建实标架的误差随 |g|² 增长
FIBER_BOOST_RANGE = 1.0
KERNEL_T_RANGE = 3.0
KERNEL_HOROPOINTS = 100

# 反演中离开切片的点 g·(cosh s, ±i sinh s, 0) 所用的 g：rotation, boost1, boost2 的参数
OFF_SLICE_WORD = (0.9, 0.4, -0.3)


def d_plus_point(s: float, sign: int = 1) -> np.ndarray:
    """D₊ 中的点 (cosh s, ±i sinh s, 0)，管定向为 sign"""
    return np.array([np.cosh(s), sign * 1j * np.sinh(s), 0.0])


def _relative(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(np.max(np.abs(np.asarray(b))), 1e-300))


def off_slice_point(s: float, sign: int = 1) -> np.ndarray:
    """切片外的 D₊ 点：固定群元平移后的 d_plus_point(s, sign)"""
    theta, b1, b2 = OFF_SLICE_WORD
    return act(compose([rotation(theta), boost(1, b1), boost(2, b2)]), d_plus_point(s, sign))


class VerificationService:
    """验证服务"""

    def __init__(self, spec: Optional[QuadratureSpec] = None, fixtures_dir: Optional[str] = None):
        self.config = get_config()
        self.spec = spec or QuadratureSpec.from_config()
        self.fixtures_dir = fixtures_dir or get_fixtures_dir()
        self.batteries: Dict[str, Callable[[np.random.Generator], BatteryReport]] = {}
        self.logger = get_logger(__name__)
        self._init_batteries()

    def _init_batteries(self):
        """注册验证组"""
        self.batteries.update({
            "cone-lattice": self._battery_cone_lattice,
            "no-real-points": self._battery_no_real_points,
            "kernel-series": self._battery_kernel_series,
            "schur": self._battery_schur,
            "measure-invariance": self._battery_measure_invariance,
            "fiber-identities": self._battery_fiber_identities,
            "operator-eigenvalue": self._battery_operator_eigenvalue,
            "inversion": self._battery_inversion,
            "quadrature-convergence": self._battery_quadrature_convergence,
        })

    @property
    def available(self) -> List[str]:
        return list(self.batteries) + ["all"]

    def run(self, name: str, seed: Optional[int] = None) -> List[BatteryReport]:
        """运行一个验证组（或 all）"""
        seed = self.config.verification.seed if seed is None else seed
        if name == "all":
            names = list(self.batteries)
        elif name in self.batteries:
            names = [name]
        else:
            raise UnknownBatteryError(name, self.available)
        return [self.run_one(n, seed) for n in names]

    @error_handler("verify")
    def run_one(self, name: str, seed: int) -> BatteryReport:
        """每个验证组使用独立的、仅由种子决定的随机数流"""
        self.logger.debug(f"运行验证组 {name}，种子 {seed}")
        rng = np.random.default_rng(seed)
        with timed_computation("verify", battery=name) as info:
            report = self.batteries[name](rng)
            info["checks"] = len(report.checks)
            info["message"] = f"验证组 {name}: " + ("通过" if report.passed else f"失败 {report.failed_checks()}")
            info["level"] = "INFO" if report.passed else "WARNING"
        report.seconds = info["seconds"]
        return report

    # 根格
    def lattice_data(self) -> List[RootDatum]:
        """所有测试根系数据，加上 m_α ∈ {1,2,3} 的秩一族"""
        data = [load_datum(path) for path in list_fixtures(self.fixtures_dir)]
        names = {datum.name for datum in data}
        for multiplicity in (1, 2, 3):
            datum = rank_one_datum(multiplicity)
            if datum.name not in names:
                data.append(datum)
        return data

    def _battery_cone_lattice(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("cone-lattice")
        box = self.config.verification.enumerate_box

        for datum in self.lattice_data():
            name = datum.name
            report.add(f"{name}: Ω̄ 等于长非紧余根 W_k 轨道的锥包", minimal_cone_is_orbit_hull(datum), 0, 0)

            generators = minimal_cone_generators(datum)
            bad_omega = 0
            for omega in fundamental_weights(datum):
                values = [evaluate(datum, omega, g) for g in generators]
                if not (all(v >= 0 for v in values) and any(v > 0 for v in values)):
                    bad_omega += 1
            report.add(f"{name}: 基本权在 Ω 上为正", bad_omega == 0, bad_omega, 0)

            chain = span = reduced = rank_one = equal_rank = 0
            for weight in enumerate_weights(datum, box):
                lattice = classify(datum, weight)
                k = lattice.omega_coords
                chain += bool(lattice.implication_violations())
                span += lattice.nonnegative != all(c >= 0 for c in k)
                if lattice.positive:
                    reduced += reduced_square_integrability(datum, weight) != lattice.square_integrable
                if datum.rank == 1:
                    m = datum.roots[datum.noncompact_simple].multiplicity
                    rank_one += lattice.square_integrable != (k[0] > Fraction(m, 2))
                    if datum.equal_rank and lattice.positive and not lattice.square_integrable:
                        equal_rank += 1

            report.add(f"{name}: 包含链 Λ₁, Λ_c ⊆ Λ₂ ⊆ Λ_{{>0}} ⊆ Λ_{{≥0}} ⊆ Λ₀", chain == 0, chain, 0)
            report.add(f"{name}: Λ_{{≥0}} = ω_i 的非负整系数组合", span == 0, span, 0)
            report.add(f"{name}: Λ_{{>0}} 上单根判别等价于 Λ₂", reduced == 0, reduced, 0)
            if datum.rank == 1:
                report.add(f"{name}: Λ₂ = (ℤ_{{>0}} + ⌊m/2⌋)ω", rank_one == 0, rank_one, 0)
                if datum.equal_rank:
                    report.add(f"{name}: 等秩时 Λ_{{>0}} ⊆ Λ₂", equal_rank == 0, equal_rank, 0)
        return report

    # 双曲面几何
    def _battery_no_real_points(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("no-real-points")
        grid = uniform_grid(*POINT_GRID) * SIGNATURE
        count = self.config.verification.horopoint_count

        minima = []
        interior = 0
        for k in range(count):
            zeta = sample_interior_horopoint(rng, sign=1 if k % 2 == 0 else -1)
            interior += zeta.is_interior
            minima.append(float(np.min(np.abs(grid @ zeta.vector))))
        report.add("采样点均为 Ξ₊ 内点", interior == count, interior, count)
        report.add("内点: min |⟨x,ζ⟩| > 1", min(minima) > 1.0, min(minima), 1.0)

        boundary = float(np.min(np.abs(grid @ ZETA0)))
        low, high = BOUNDARY_WINDOW
        report.add("ζ₀ 分类为边界点", classify_horopoint(ZETA0).kind == HoroClass.BOUNDARY, 0, 0)
        report.add("边界 ζ₀: min |⟨x,ζ₀⟩| ≈ 1", low <= boundary <= high, boundary, high)
        return report

    def _battery_kernel_series(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("kernel-series")
        verification = self.config.verification
        zetas = np.stack([sample_interior_horopoint(rng, sign=1 if k % 2 == 0 else -1).vector
                          for k in range(KERNEL_HOROPOINTS)])
        pairs = verification.kernel_pairs
        index = rng.integers(0, len(zetas), pairs)
        x = hyperboloid_points(rng.uniform(-KERNEL_T_RANGE, KERNEL_T_RANGE, pairs),
                               rng.uniform(0.0, 2.0 * np.pi, pairs))
        p = bilinear(x, zetas[index])
        terms = verification.kernel_terms

        kernel = 1.0 / (p - 1.0)
        partial = kernel_partial_sum(p, terms)
        bound = geometric_tail_bound(p, terms) + rounding_allowance(p, terms)
        excess = float(np.max(np.abs(kernel - partial) / bound))
        report.add("|⟨x,ζ⟩| > 1", float(np.min(np.abs(p))) > 1.0, float(np.min(np.abs(p))), 1.0)
        report.add(f"|K − Σ_{{λ≤{terms}}} p^{{−λ}}| ≤ 几何尾界", excess <= 1.0, excess, 1.0)
        return report

    def _battery_schur(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("schur")
        verification = self.config.verification
        lam_max = verification.schur_lambda_max

        for k in range(verification.schur_pairs):
            zeta1 = sample_interior_horopoint(rng, sign=1)
            zeta2 = sample_interior_horopoint(rng, sign=-1)
            matrix = schur_matrix(lam_max, zeta1, zeta2, self.spec)
            transposed = schur_matrix(lam_max, zeta2, zeta1, self.spec).T
            scale = float(np.max(np.abs(matrix)))

            off = float(np.max(np.abs(matrix - np.diag(np.diag(matrix))))) / scale
            report.add(f"第{k}对: 非对角元 < 1e−7·max|M|", off < SCHUR_OFF_DIAGONAL, off, SCHUR_OFF_DIAGONAL)

            symmetry = float(np.max(np.abs(matrix - transposed))) / scale
            report.add(f"第{k}对: M(ζ₁,ζ₂) = M(ζ₂,ζ₁)ᵀ", symmetry < SCHUR_SYMMETRY, symmetry, SCHUR_SYMMETRY)

            diagonal = np.diag(matrix)
            report.add(f"第{k}对: 对角元非零", bool(np.all(np.abs(diagonal) > 0)),
                       float(np.min(np.abs(diagonal))), 0.0)
            # λ=1 的被积函数只按 e^{−|t|} 衰减，截断误差超出闭式比较的容差
            closed = np.array([matrix_coefficient_transform(zeta1, lam, zeta2) for lam in range(2, lam_max + 1)])
            closed_error = float(np.max(np.abs(diagonal[1:] - closed) / np.abs(closed)))
            report.add(f"第{k}对: λ≥2 的对角元 = c_λ⟨ζ₁,ζ₂⟩^{{−λ}}", closed_error < SCHUR_CLOSED_FORM,
                       closed_error, SCHUR_CLOSED_FORM)
        return report

    def invariance_functions(self, rng: np.random.Generator):
        """测度不变性检查用的三个测试函数

        都按 cosh(t)^{-4} 衰减，在 θ 方向解析。
        """
        w = classify_horopoint(2.0 * ZETA0).vector
        w_generic = sample_interior_horopoint(rng, sign=1).vector
        w_plus = sample_interior_horopoint(rng, sign=1).vector
        w_minus = sample_interior_horopoint(rng, sign=-1).vector
        return [
            custom_function("|⟨x,2ζ₀⟩|^{-4}", lambda p: np.abs(bilinear(p, w)) ** -4.0),
            custom_function("|⟨x,w⟩|^{-4}", lambda p: np.abs(bilinear(p, w_generic)) ** -4.0),
            custom_function("mc_product",
                            lambda p: bilinear(p, w_plus) ** -2 * bilinear(p, w_minus) ** -2),
        ]

    def _battery_measure_invariance(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("measure-invariance")
        functions = self.invariance_functions(rng)
        baselines = [integrate_over_X(f, self.spec) for f in functions]

        for k in range(self.config.verification.group_words):
            g = sample_group_word(rng)
            worst = 0.0
            for f, baseline in zip(functions, baselines):
                moved = integrate_over_X(translate(f, g.inverse()), self.spec)
                worst = max(worst, abs(moved - baseline) / abs(baseline))
            report.add(f"群字{k} {' '.join(g.describe())}: ∫f(g·x)dx = ∫f dx", worst < MEASURE_TOLERANCE,
                       worst, MEASURE_TOLERANCE)
        return report

    def _battery_fiber_identities(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("fiber-identities")
        verification = self.config.verification
        t, _ = composite_gauss_legendre(-self.spec.fiber_t_max, self.spec.fiber_t_max, verification.fiber_nodes)

        isotropy = incidence = 0.0
        interior = oriented = 0
        for k in range(verification.fiber_points):
            s = float(rng.uniform(*FIBER_S_RANGE))
            g = sample_group_word(rng, boost_range=FIBER_BOOST_RANGE)
            z = act(g, d_plus_point(s, 1 if k % 2 == 0 else -1))
            zetas = fiber_curve(z, t)
            scale = np.maximum(1.0, np.sum(np.abs(zetas) ** 2, axis=-1))
            isotropy = max(isotropy, float(np.max(np.abs(delta(zetas)) / scale)))
            incidence = max(incidence, float(np.max(np.abs(bilinear(zetas, z) - 1.0) / np.sqrt(scale))))
            points = [classify_horopoint(zeta) for zeta in zetas]
            interior += all(p.is_interior for p in points)
            oriented += all(orientation(p.vector) == -tube_orientation(z) for p in points)

        count = verification.fiber_points
        report.add("Δ(ζ(t)) = 0", isotropy <= FIBER_IDENTITY, isotropy, FIBER_IDENTITY)
        report.add("⟨z, ζ(t)⟩ = 1", incidence <= FIBER_IDENTITY, incidence, FIBER_IDENTITY)
        report.add("ζ(t) 均为 Ξ₊ 内点", interior == count, interior, count)
        report.add("ζ(t) 的定向与 z 的管定向相反", oriented == count, oriented, count)
        return report

    # 算子与反演
    def _battery_operator_eigenvalue(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("operator-eigenvalue")
        sign = get_euler_sign(self.spec)
        report.add("Euler项符号已校准", sign in (1, -1), sign, 0)

        zetas = np.stack([sample_interior_horopoint(rng, sign=-1).vector
                          for _ in range(self.config.verification.eigen_points)])

        def constant(points):
            return np.full(np.shape(points)[:-1], 3.0 + 0j)

        euler_const = float(np.max(np.abs(euler_part(constant, zetas))))
        report.add("常函数的 Euler 部分为 0", euler_const < EULER_TOLERANCE, euler_const, EULER_TOLERANCE)

        for lam in EIGEN_LAMBDAS:
            def homogeneous(points, lam=lam):
                return bilinear(points, np.array([1.0, 0.0, 0.0])) ** (-lam)
            euler = euler_part(homogeneous, zetas)
            error = _relative(euler, -lam * homogeneous(zetas))
            report.add(f"λ={lam}: ⟨x₀,ζ⟩^{{−λ}} 的 Euler 部分 = −λ·φ", error < EULER_TOLERANCE,
                       error, EULER_TOLERANCE)

        w = classify_horopoint(2.0 * ZETA0)
        for lam in EIGEN_LAMBDAS:
            fhat = TransformedFunction(matrix_coefficient(w, lam), self.spec)
            values = fhat(zetas)
            error = float(np.max(np.abs(apply_L(fhat, zetas, sign=sign) - (lam - 0.5) * values)
                                 / np.abs(values)))
            report.add(f"λ={lam}: 𝓛f̂ = (λ−½)f̂", error < EIGENVALUE_TOLERANCE, error, EIGENVALUE_TOLERANCE)
        return report

    def _battery_inversion(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("inversion")
        verification = self.config.verification
        choices = [("w=2ζ₀", classify_horopoint(2.0 * ZETA0)),
                   ("w 随机(+)", sample_interior_horopoint(rng, sign=1)),
                   ("w 随机(−)", sample_interior_horopoint(rng, sign=-1))]

        for label, w in choices:
            # 纤维曲线落在与 w 定向相反的分支上，f̂ 在那里非零
            z_list = [d_plus_point(s, w.orientation) for s in verification.inversion_s]
            z_list.append(off_slice_point(verification.inversion_s[0], w.orientation))
            means = {}
            for lam in verification.inversion_lambdas:
                result = inversion_pipeline(matrix_coefficient(w, lam), z_list, self.spec)
                means[lam] = result.mean_ratio
                report.add(f"{label}, λ={lam}: c(z) 的变异系数", result.cv < INVERSION_CV, result.cv, INVERSION_CV)
                deviation = abs(result.mean_ratio - INVERSION_CONSTANT) / INVERSION_CONSTANT
                report.add(f"{label}, λ={lam}: c_norm = 4π²", deviation < INVERSION_CONSTANT_TOLERANCE,
                           deviation, INVERSION_CONSTANT_TOLERANCE)
            lambdas = list(means)
            for lam in lambdas[1:]:
                agreement = abs(means[lam] - means[lambdas[0]]) / abs(means[lambdas[0]])
                report.add(f"{label}: c_norm(λ={lam}) 与 c_norm(λ={lambdas[0]}) 一致",
                           agreement < INVERSION_LAMBDA_AGREEMENT, agreement, INVERSION_LAMBDA_AGREEMENT)

        try:
            inversion_pipeline(matrix_coefficient(choices[0][1], 1), [d_plus_point(1.0)], self.spec)
            diverged = False
        except FiberDivergenceError:
            diverged = True
        report.add("λ=1 报告纤维积分发散", diverged, float(diverged), 1.0)
        return report

    def _battery_quadrature_convergence(self, rng: np.random.Generator) -> BatteryReport:
        report = BatteryReport("quadrature-convergence")
        fine = self.spec.doubled()
        w = classify_horopoint(2.0 * ZETA0)
        f = matrix_coefficient(w, 2)

        zetas = np.stack([sample_interior_horopoint(rng, sign=-1).vector
                          for _ in range(self.config.verification.eigen_points)])
        change = _relative(TransformedFunction(f, self.spec)(zetas), TransformedFunction(f, fine)(zetas))
        report.add("f̂(ζ) 在分辨率加倍下稳定", change < CONVERGENCE_TOLERANCE, change, CONVERGENCE_TOLERANCE)

        zeta1 = sample_interior_horopoint(rng, sign=1)
        zeta2 = sample_interior_horopoint(rng, sign=-1)
        lam_max = self.config.verification.schur_lambda_max
        change = _relative(schur_matrix(lam_max, zeta1, zeta2, self.spec),
                           schur_matrix(lam_max, zeta1, zeta2, fine))
        report.add("Schur 矩阵在分辨率加倍下稳定", change < CONVERGENCE_TOLERANCE, change, CONVERGENCE_TOLERANCE)

        worst = 0.0
        for g_f in self.invariance_functions(rng):
            worst = max(worst, _relative(integrate_over_X(g_f, self.spec), integrate_over_X(g_f, fine)))
        report.add("∫f dx 在分辨率加倍下稳定", worst < CONVERGENCE_TOLERANCE, worst, CONVERGENCE_TOLERANCE)

        z = [d_plus_point(self.config.verification.inversion_s[len(self.config.verification.inversion_s) // 2])]
        coarse = inversion_pipeline(f, z, self.spec).mean_ratio
        refined = inversion_pipeline(f, z, fine).mean_ratio
        change = abs(coarse - refined) / abs(refined)
        report.add("反演比值在分辨率加倍下稳定", change < CONVERGENCE_INVERSION, change, CONVERGENCE_INVERSION)
        return report
