"""
命令行界面

lattice   根格分类
transform Cauchy 变换 / Fourier 分量
invert    反演流水线 (𝓛f̂)^∨
verify    验证组
"""

import io
import re
import sys
from dataclasses import replace
from fractions import Fraction
from typing import List, Literal, Optional, Sequence

import click
import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt, ValidationError

from ..core.datum_parser import load_datum
from ..core.hypergeom import X0, ZETA0, classify_horopoint
from ..core.rational import to_fraction
from ..core.rootlattice import classify, enumerate_weights, formal_dimension, weight_from_omega
from ..core.transform import (
    inversion_pipeline, matrix_coefficient, transform_samples, zero_function,
)
from ..models.lattice_models import RootDatum, WeightVector
from ..models.transform_models import QuadratureSpec
from ..services.output_writer import (
    LatticeRecord, OutputWriter, Record, ValueRecord, battery_records, inversion_records,
)
from ..services.verification_service import VerificationService, d_plus_point
from ..utils.config import get_config, reload_config
from ..utils.exceptions import (
    BatteryFailedError, HoroCauchyError, InputParseError, OutputWriteError,
)
from ..utils.logger import get_logger, log_error, reset_log_manager

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_VERIFICATION = 2
EXIT_PARSE = 3

NAMED_VECTORS = {
    "x0": X0.astype(complex),
    "z0": ZETA0,
    "zeta0": ZETA0,
    "z0bar": np.conj(ZETA0),
    "zeta0bar": np.conj(ZETA0),
}
_SCALED_NAME = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:e[+-]?\d+)?)?\*?([a-z][a-z0-9]*)$")

VECTOR_FORMAT = "2z0、z0bar、x0 或三个逗号分隔的复数（如 1,-1j,0）"


# 参数解析
def parse_vector(text: str) -> np.ndarray:
    """解析命名向量（可带实数倍数）或逗号分隔的复向量"""
    key = text.strip().lower().replace(" ", "")
    match = _SCALED_NAME.match(key)
    if match and match.group(2) in NAMED_VECTORS:
        factor = float(match.group(1)) if match.group(1) else 1.0
        return factor * NAMED_VECTORS[match.group(2)]

    parts = key.split(",")
    if len(parts) != 3:
        raise InputParseError(text, VECTOR_FORMAT)
    try:
        vector = np.array([complex(p.replace("i", "j")) for p in parts])
    except ValueError as e:
        raise InputParseError(text, VECTOR_FORMAT) from e
    if not np.all(np.isfinite(vector)):
        raise InputParseError(text, VECTOR_FORMAT)
    return vector


def parse_numbers(text: str, count: Optional[int], expected: str) -> List[float]:
    """逗号分隔的实数；count 为 None 时不限个数"""
    parts = [p.strip() for p in text.split(",")]
    if count is not None and len(parts) != count:
        raise InputParseError(text, expected)
    try:
        return [float(p) for p in parts]
    except ValueError as e:
        raise InputParseError(text, expected) from e


def parse_weight(datum: RootDatum, text: str, basis: str) -> WeightVector:
    """权坐标：ω 基（默认）或 𝔞* 中的原始坐标"""
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [to_fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise InputParseError(text, "逗号分隔的整数或分数，如 1,2 或 1/2") from e
    if len(values) != datum.rank:
        raise InputParseError(text, f"{datum.rank}个坐标")
    return weight_from_omega(datum, values) if basis == "omega" else WeightVector(tuple(values))


def parse_fraction(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise InputParseError(text, "整数或分数") from e


class QuadratureOverride(BaseModel):
    """命令行上的求积参数覆盖"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    t_max: Optional[PositiveFloat] = None
    n_t: Optional[PositiveInt] = None
    n_theta: Optional[PositiveInt] = None
    fiber_t_max: Optional[PositiveFloat] = None
    fiber_n: Optional[PositiveInt] = None


class RunConfig(BaseModel):
    """单次运行的全部设置；种子完全决定所有采样"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["lattice", "transform", "invert", "verify"]
    quadrature: QuadratureOverride = QuadratureOverride()
    fixtures: List[str] = []
    out: Optional[str] = None
    format: Literal["jsonl", "csv"] = "jsonl"
    seed: int

    def quadrature_spec(self) -> QuadratureSpec:
        overrides = self.quadrature.model_dump(exclude_none=True)
        try:
            return replace(QuadratureSpec.from_config(), **overrides)
        except ValueError as e:
            raise InputParseError(str(overrides), str(e)) from e


def build_run_config(command: str, output_format: Optional[str], out: Optional[str],
                     quad: Optional[str] = None, fiber: Optional[str] = None,
                     seed: Optional[int] = None, fixtures: Sequence[str] = ()) -> RunConfig:
    """由命令行参数构造并校验 RunConfig"""
    config = get_config()
    overrides = {}
    if quad:
        t_max, n_t, n_theta = parse_numbers(quad, 3, "t_max,n_t,n_theta")
        overrides.update(t_max=t_max, n_t=_integer(n_t, quad), n_theta=_integer(n_theta, quad))
    if fiber:
        fiber_t_max, fiber_n = parse_numbers(fiber, 2, "t_max,n")
        overrides.update(fiber_t_max=fiber_t_max, fiber_n=_integer(fiber_n, fiber))
    try:
        return RunConfig(
            command=command,
            quadrature=QuadratureOverride(**overrides),
            fixtures=list(fixtures),
            out=out,
            format=output_format or config.output.format,
            seed=config.verification.seed if seed is None else seed,
        )
    except ValidationError as e:
        raise InputParseError(command, "; ".join(err["msg"] for err in e.errors())) from e


def _integer(value: float, text: str) -> int:
    if value != int(value):
        raise InputParseError(text, "节点数必须为整数")
    return int(value)


def emit(records: Sequence[Record], run: RunConfig):
    """写出记录：--out 指定文件，否则写到 stdout"""
    buffer = io.StringIO()
    OutputWriter(buffer, run.format).write(records)
    if run.out is None:
        click.echo(buffer.getvalue(), nl=False)
        return
    try:
        with open(run.out, "w", encoding="utf-8", newline="") as f:
            f.write(buffer.getvalue())
    except OSError as e:
        raise OutputWriteError(run.out, e.strerror or str(e)) from e


# click 选项组
def output_options(func):
    func = click.option("--out", type=click.Path(dir_okay=False), default=None, help="结果文件（默认 stdout）")(func)
    func = click.option("--format", "output_format", type=click.Choice(["jsonl", "csv"]), default=None,
                        help="输出格式")(func)
    return func


def quadrature_options(func):
    func = click.option("--fiber", default=None, help="纤维积分参数 t_max,n")(func)
    func = click.option("--quad", default=None, help="X 上求积参数 t_max,n_t,n_theta")(func)
    return func


class HoroCauchyGroup(click.Group):
    """把异常统一映射为退出码：0 成功，1 定义域错误，2 验证失败，3 I/O 或解析错误"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            code = EXIT_PARSE
        except click.Abort:
            click.echo("已中止", err=True)
            code = EXIT_DOMAIN
        except HoroCauchyError as e:
            log_error(e, context=e.context)
            click.echo(f"错误: {e}", err=True)
            code = e.exit_code
        if not isinstance(code, int):
            code = EXIT_OK
        if standalone_mode:
            sys.exit(code)
        return code


@click.group(cls=HoroCauchyGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="YAML 配置文件")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="日志级别")
@click.option("--debug/--no-debug", default=None, help="开启纤维曲线断言检查")
def cli(config_path: Optional[str], log_level: Optional[str], debug: Optional[bool]):
    """极限球 Cauchy 变换工具"""
    config = reload_config(config_path)
    if log_level:
        config.logging.level = log_level.upper()
    if debug is not None:
        config.development.debug = debug
    reset_log_manager()
    get_logger(__name__).debug(f"配置文件: {config.config_path}")


@cli.command()
@click.argument("datum_path", type=click.Path(dir_okay=False))
@click.option("--lambda", "lambda_text", default=None, help="单个权，逗号分隔坐标")
@click.option("--enumerate", "box", type=click.IntRange(min=0), default=None, help="枚举 |k_i| ≤ N 的所有权")
@click.option("--basis", type=click.Choice(["omega", "root"]), default="omega", help="--lambda 的坐标基")
@click.option("--c", "constant", default="1", help="形式维数中的常数 c")
@output_options
def lattice(datum_path: str, lambda_text: Optional[str], box: Optional[int], basis: str, constant: str,
            output_format: Optional[str], out: Optional[str]):
    """根格分类：每个权一行，含全部格标志与形式维数"""
    run = build_run_config("lattice", output_format, out, fixtures=[datum_path])
    if (lambda_text is None) == (box is None):
        raise InputParseError("lattice", "--lambda 与 --enumerate 二选一")
    datum = load_datum(datum_path)
    c = parse_fraction(constant)
    weights = enumerate_weights(datum, box) if box is not None else [parse_weight(datum, lambda_text, basis)]

    records = []
    for weight in weights:
        dimension = formal_dimension(datum, weight, c) if datum.equal_rank else None
        records.append(LatticeRecord.of(datum, classify(datum, weight), dimension))
    emit(records, run)


def _test_function(function: str, w_text: str, lam: int):
    if function == "zero":
        return zero_function()
    return matrix_coefficient(classify_horopoint(parse_vector(w_text)), lam)


@cli.command()
@click.option("--f", "function", type=click.Choice(["matrix", "zero"]), default="matrix", help="测试函数")
@click.option("--w", "w_text", default="2z0", help="矩阵系数的 w（Ξ₊ 内点）")
@click.option("--lambda", "lam", type=int, default=2, help="矩阵系数的 λ")
@click.option("--zeta", "zeta_texts", multiple=True, required=True, help="求值点 ζ（Ξ₊ 内点），可重复")
@click.option("--component", type=int, default=None, help="只计算 Fourier 分量 f̂_λ")
@quadrature_options
@output_options
def transform(function: str, w_text: str, lam: int, zeta_texts: Sequence[str], component: Optional[int],
              quad: Optional[str], fiber: Optional[str], output_format: Optional[str], out: Optional[str]):
    """计算 f̂(ζ) 或 f̂_λ(ζ)，每个 ζ 一条记录"""
    run = build_run_config("transform", output_format, out, quad, fiber)
    spec = run.quadrature_spec()
    f = _test_function(function, w_text, lam)
    zetas = [classify_horopoint(parse_vector(text)) for text in zeta_texts]
    samples = transform_samples(f, zetas, spec, component)
    emit([ValueRecord.of_sample(sample, f.describe(), spec) for sample in samples], run)


@cli.command()
@click.option("--f", "function", type=click.Choice(["matrix", "zero"]), default="matrix", help="测试函数")
@click.option("--w", "w_text", default="2z0", help="矩阵系数的 w（Ξ₊ 内点）")
@click.option("--lambda", "lambdas", type=int, multiple=True, help="矩阵系数的 λ（需 λ ≥ 2），可重复；默认 2")
@click.option("--z", "z_texts", multiple=True, help="D₊ 中的点，可重复")
@click.option("--s", "s_text", default=None, help="取点 (cosh s, ±i sinh s, 0)，逗号分隔的 s；符号取 w 的定向")
@click.option("--step", type=float, default=None, help="𝓛 的差分步长 h")
@click.option("--trace", is_flag=True, help="输出纤维积分被积函数的 (t, |φ|) 轨迹")
@quadrature_options
@output_options
def invert(function: str, w_text: str, lambdas: Sequence[int], z_texts: Sequence[str], s_text: Optional[str],
           step: Optional[float], trace: bool, quad: Optional[str], fiber: Optional[str],
           output_format: Optional[str], out: Optional[str]):
    """反演流水线：R(z) = (𝓛f̂)^∨(z) 与比值 c(z) = R(z)/f(z)

    给出多个 λ 时依次运行，每个 λ 各有一条 inversion_summary（λ 对 c_norm）。
    """
    run = build_run_config("invert", output_format, out, quad, fiber)
    spec = run.quadrature_spec()
    lambdas = list(lambdas) or [2]
    if function == "zero":
        functions = [zero_function()]
    else:
        functions = [_test_function(function, w_text, lam) for lam in lambdas]

    sign = functions[0].w.orientation if functions[0].w is not None else 1
    points = [parse_vector(text) for text in z_texts]
    if s_text:
        points.extend(d_plus_point(s, sign) for s in parse_numbers(s_text, None, "逗号分隔的实数"))
    if not points:
        points = [d_plus_point(s, sign) for s in get_config().verification.inversion_s]

    records = []
    for f in functions:
        report = inversion_pipeline(f, points, spec, h=step, trace=trace)
        records.extend(inversion_records(report, trace))
    emit(records, run)


@cli.command()
@click.argument("battery")
@click.option("--seed", type=int, default=None, help="随机种子")
@quadrature_options
@output_options
def verify(battery: str, seed: Optional[int], quad: Optional[str], fiber: Optional[str],
           output_format: Optional[str], out: Optional[str]):
    """运行验证组；全部通过时退出码为 0"""
    run = build_run_config("verify", output_format, out, quad, fiber, seed)
    service = VerificationService(run.quadrature_spec())
    reports = service.run(battery, run.seed)
    emit(battery_records(reports), run)

    failed = [f"{report.battery}:{name}" for report in reports for name in report.failed_checks()]
    if failed:
        raise BatteryFailedError(battery, failed)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """入口"""
    return cli.main(args=list(argv) if argv is not None else None, prog_name="horocauchy", standalone_mode=False)
