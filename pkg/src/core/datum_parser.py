"""
根系数据文件 (.rd) 解析器

文法见 docs/DATUM_FORMAT.md。
"""

import logging
import os
from fractions import Fraction
from typing import Dict, List, NoReturn, Optional, Tuple

from ..models.lattice_models import Root, RootDatum, RootKind, WeightVector
from ..utils.exceptions import DatumInvariantError, DatumParseError

logger = logging.getLogger(__name__)

SECTIONS = ("meta", "gram", "roots", "simple", "sigma_plus")
REQUIRED_SECTIONS = ("meta", "gram", "roots", "simple")
META_KEYS = ("name", "rank")
SIGNS = {"+": True, "-": False, "−": False}


class _DatumReader:
    """逐行读取并记录出错位置"""

    def __init__(self, path: str, text: str):
        self.path = path
        self.text = text
        self.sections: Dict[str, List[Tuple[int, str]]] = {}
        self.section_lines: Dict[str, int] = {}

    def fail(self, line: int, detail: str) -> NoReturn:
        raise DatumParseError(self.path, line, detail)

    def split_sections(self):
        current: Optional[str] = None
        for number, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    self.fail(number, f"段标题格式错误: {line}")
                name = line[1:-1].strip()
                if name not in SECTIONS:
                    self.fail(number, f"未知段: [{name}]，可用: {', '.join(SECTIONS)}")
                if name in self.sections:
                    self.fail(number, f"段 [{name}] 重复")
                self.sections[name] = []
                self.section_lines[name] = number
                current = name
                continue
            if current is None:
                self.fail(number, "内容出现在任何段之前")
            self.sections[current].append((number, line))

        for name in REQUIRED_SECTIONS:
            if name not in self.sections:
                self.fail(0, f"缺少必需的段 [{name}]")

    def rational(self, number: int, token: str) -> Fraction:
        try:
            return Fraction(token)
        except (ValueError, ZeroDivisionError):
            self.fail(number, f"无法解析为有理数: {token}")

    def integer(self, number: int, token: str, what: str) -> int:
        try:
            return int(token)
        except ValueError:
            self.fail(number, f"{what} 应为整数: {token}")

    def parse_meta(self) -> Tuple[str, int]:
        values: Dict[str, Tuple[int, str]] = {}
        for number, line in self.sections["meta"]:
            if "=" not in line:
                self.fail(number, f"[meta] 行应为 key = value: {line}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in META_KEYS:
                self.fail(number, f"未知键: {key}，可用: {', '.join(META_KEYS)}")
            if key in values:
                self.fail(number, f"键 {key} 重复")
            values[key] = (number, value)
        for key in META_KEYS:
            if key not in values:
                self.fail(self.section_lines["meta"], f"[meta] 缺少键 {key}")
        rank_line, rank_text = values["rank"]
        rank = self.integer(rank_line, rank_text, "rank")
        if rank < 1:
            self.fail(rank_line, f"rank 必须是正整数: {rank}")
        return values["name"][1], rank

    def parse_gram(self, rank: int) -> Tuple[Tuple[Fraction, ...], ...]:
        rows = self.sections["gram"]
        if len(rows) != rank:
            self.fail(self.section_lines["gram"], f"[gram] 应有{rank}行，实际{len(rows)}行")
        gram = []
        for number, line in rows:
            tokens = line.split()
            if len(tokens) != rank:
                self.fail(number, f"[gram] 每行应有{rank}个数，实际{len(tokens)}个")
            gram.append(tuple(self.rational(number, t) for t in tokens))
        return tuple(gram)

    def parse_roots(self, rank: int) -> Tuple[Root, ...]:
        roots = []
        for number, line in self.sections["roots"]:
            tokens = line.split()
            if len(tokens) != rank + 3:
                self.fail(number, f"根行应为 {rank}个坐标 + 类型 + 重数 + 符号，实际{len(tokens)}个字段")
            coords = tuple(self.rational(number, t) for t in tokens[:rank])
            kind_token, multiplicity_token, sign_token = tokens[rank:]
            try:
                kind = RootKind(kind_token)
            except ValueError:
                self.fail(number, f"根类型应为 k 或 n: {kind_token}")
            multiplicity = self.integer(number, multiplicity_token, "重数")
            if sign_token not in SIGNS:
                self.fail(number, f"符号应为 + 或 -: {sign_token}")
            try:
                roots.append(Root(coords, kind, multiplicity, SIGNS[sign_token]))
            except ValueError as e:
                self.fail(number, str(e))
        if not roots:
            self.fail(self.section_lines["roots"], "[roots] 为空")
        return tuple(roots)

    def parse_simple(self) -> Tuple[int, ...]:
        indices: List[int] = []
        for number, line in self.sections["simple"]:
            indices.extend(self.integer(number, t, "单根索引") for t in line.split())
        return tuple(indices)

    def parse_sigma_plus(self, rank: int) -> Optional[Tuple[WeightVector, ...]]:
        if "sigma_plus" not in self.sections:
            return None
        vectors = []
        for number, line in self.sections["sigma_plus"]:
            tokens = line.split()
            if len(tokens) != rank:
                self.fail(number, f"sigma_plus 向量应有{rank}个坐标")
            vectors.append(WeightVector(tuple(self.rational(number, t) for t in tokens)))
        return tuple(vectors)


def parse_datum(text: str, path: str = "<string>") -> RootDatum:
    """解析根系数据文本并校验不变量"""
    reader = _DatumReader(path, text)
    reader.split_sections()
    name, rank = reader.parse_meta()
    datum = RootDatum(
        name=name,
        rank=rank,
        gram=reader.parse_gram(rank),
        roots=reader.parse_roots(rank),
        simple_basis=reader.parse_simple(),
        sigma_plus=reader.parse_sigma_plus(rank),
        source=path,
    )
    try:
        return datum.validate()
    except DatumInvariantError as e:
        e.context["path"] = path
        e.message = f"{path}: {e.message}"
        raise


def load_datum(path: str) -> RootDatum:
    """从文件加载根系数据"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise DatumParseError(path, 0, f"无法读取文件: {e.strerror or e}") from e
    datum = parse_datum(text, path)
    logger.debug(f"加载根系数据 {datum.name}: 秩{datum.rank}，{len(datum.roots)}个根")
    return datum


def list_fixtures(directory: str) -> List[str]:
    """列出目录下的 .rd 文件（排序）"""
    return sorted(os.path.join(directory, f) for f in os.listdir(directory) if f.endswith(".rd"))
