"""
结果输出 - JSON-lines 记录与 CSV 表格

所有记录带 schema 版本号；字段顺序固定，相同输入产生逐字节相同的输出。
"""

import csv
import json
from typing import IO, Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.rational import format_fraction
from ..models.lattice_models import LatticeClass, RootDatum
from ..models.transform_models import BatteryReport, InversionReport, QuadratureSpec, TransformSample
from ..utils.config import get_config

SCHEMA_VERSION = 1


def complex_pair(value: complex) -> List[float]:
    """复数 → [re, im]"""
    return [float(np.real(value)), float(np.imag(value))]


def vector_pairs(vector: Sequence[complex]) -> List[List[float]]:
    """复向量 → [[re, im], ...]"""
    return [complex_pair(v) for v in vector]


class Record(BaseModel):
    """所有输出记录的公共部分"""
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")
    operation: str


class ValueRecord(Record):
    """数值结果：变换、Fourier 分量、反演"""
    inputs: Dict[str, Any]
    value_re: Optional[float]
    value_im: Optional[float]
    quadrature: Optional[Dict[str, Any]] = None
    tail_bound: Optional[float] = None

    @classmethod
    def of(cls, operation: str, inputs: Dict[str, Any], value: Optional[complex],
           quadrature: Optional[QuadratureSpec] = None, tail_bound: Optional[float] = None) -> "ValueRecord":
        return cls(operation=operation, inputs=inputs,
                   value_re=float(np.real(value)) if value is not None else None,
                   value_im=float(np.imag(value)) if value is not None else None,
                   quadrature=quadrature.to_dict() if quadrature is not None else None,
                   tail_bound=tail_bound)

    @classmethod
    def of_sample(cls, sample: TransformSample, function: Dict[str, Any],
                  quadrature: Optional[QuadratureSpec] = None) -> "ValueRecord":
        inputs = {
            "function": function,
            "zeta": vector_pairs(sample.zeta.vector),
            "zeta_orientation": sample.zeta.orientation,
            "component": sample.lam,
        }
        return cls.of(sample.operation, inputs, sample.value, quadrature)


class LatticeRecord(Record):
    """格分类结果的一行"""
    operation: str = "lattice"
    datum: str
    weight: List[str]
    omega: List[str]
    lambda_0: bool
    lambda_nonneg: bool
    lambda_pos: bool
    lambda_1: bool
    lambda_2: bool
    lambda_sd: Optional[bool] = None
    lambda_c: bool
    formal_dimension: Optional[str] = None

    @classmethod
    def of(cls, datum: RootDatum, lattice: LatticeClass, dimension=None) -> "LatticeRecord":
        return cls(
            datum=datum.name,
            weight=[format_fraction(c) for c in lattice.weight.coords],
            omega=[format_fraction(c) for c in lattice.omega_coords],
            formal_dimension=format_fraction(dimension) if dimension is not None else None,
            **lattice.flags(),
        )


class CheckRecord(Record):
    """验证组中单项检查"""
    operation: str = "verify"
    battery: str
    check: str
    passed: bool
    observed: float
    threshold: float
    detail: str = ""


class TraceRecord(Record):
    """纤维积分被积函数的轨迹（绘图用列数据）"""
    operation: str = "fiber_trace"
    point: int
    t: float
    modulus: float


def battery_records(reports: Iterable[BatteryReport]) -> List[CheckRecord]:
    """验证组 → 检查记录（不含耗时，保证输出可复现）"""
    return [
        CheckRecord(battery=report.battery, check=c.name, passed=c.passed,
                    observed=c.observed, threshold=c.threshold, detail=c.detail)
        for report in reports for c in report.checks
    ]


def inversion_records(report: InversionReport, trace: bool = False) -> List[Record]:
    """反演报告 → 每点一条记录 + 汇总记录（+ 可选轨迹）"""
    records: List[Record] = []
    for row in report.rows:
        inputs: Dict[str, Any] = {
            "function": report.function,
            "z": vector_pairs(row.z),
            "extension": complex_pair(row.extension),
            "ratio": complex_pair(row.ratio) if row.ratio is not None else None,
        }
        records.append(ValueRecord.of("inverse_transform", inputs, row.reconstructed,
                                      report.quadrature, row.tail_bound))

    summary_inputs: Dict[str, Any] = {
        "function": report.function,
        "lambda": report.lam,
        "points": len(report.rows),
        "cv": report.cv,
        "euler_sign": report.euler_sign,
    }
    records.append(ValueRecord.of("inversion_summary", summary_inputs, report.c_norm, report.quadrature))

    if trace:
        for index, row in enumerate(report.rows):
            if row.fiber is None:
                continue
            records.extend(TraceRecord(point=index, t=t, modulus=m)
                           for t, m in zip(row.fiber.t_nodes, row.fiber.integrand_modulus))
    return records


def _flatten(record: Record) -> Dict[str, Any]:
    row = record.model_dump(by_alias=True)
    return {key: json.dumps(value, ensure_ascii=False) if isinstance(value, (dict, list)) else value
            for key, value in row.items()}


class OutputWriter:
    """按配置格式写出记录"""

    def __init__(self, stream: IO[str], output_format: Optional[str] = None):
        self.stream = stream
        self.format = output_format or get_config().output.format
        if self.format not in ("jsonl", "csv"):
            raise ValueError(f"未知输出格式: {self.format}")

    def write(self, records: Sequence[Record]):
        if self.format == "jsonl":
            self._write_jsonl(records)
        else:
            self._write_csv(records)

    def _write_jsonl(self, records: Sequence[Record]):
        for record in records:
            self.stream.write(json.dumps(record.model_dump(by_alias=True), ensure_ascii=False) + "\n")

    def _write_csv(self, records: Sequence[Record]):
        """同类记录连续成一张表；类型变化时空一行并重新写表头"""
        writer: Optional[csv.DictWriter] = None
        current = None
        for record in records:
            if type(record) is not current:
                if current is not None:
                    self.stream.write("\n")
                current = type(record)
                writer = csv.DictWriter(self.stream, fieldnames=list(_flatten(record)), lineterminator="\n")
                writer.writeheader()
            writer.writerow(_flatten(record))
