"""集合ファイルと幾何 CSV の読み書き"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from ..core.exceptions import PreconditionError
from ..core.field import GroundField
from ..core.finite_set import FiniteSet
from ..interfaces.geometry import LineFamily, PlaneFamily, PointSet

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

HEADER_PREFIX = "# field="
VERTICAL = "vertical"


def parse_field_header(line: str) -> GroundField:
    """'# field=prime p=101' または '# field=char0'"""
    tokens = dict(token.split("=", 1) for token in line.lstrip("#").split() if "=" in token)
    kind = tokens.get("field")
    if kind == "char0":
        return GroundField.rationals()
    if kind == "prime" and "p" in tokens:
        return GroundField.prime(int(tokens["p"]))
    raise PreconditionError(f"unrecognised field header: {line.strip()!r}")


def parse_set_text(text: str, field: Optional[GroundField] = None) -> FiniteSet:
    """
    一行一要素のテキストを集合に変換

    先頭行が '# field=...' ならその体を使う（省略時は標数0）。空行は読み飛ばす。

    Raises:
        PreconditionError: 書式不正、値が解釈できない
    """
    lines = text.splitlines()
    if lines and lines[0].startswith(HEADER_PREFIX):
        header_field = parse_field_header(lines[0])
        if field is not None and field != header_field:
            raise PreconditionError(f"file declares {header_field.describe()}, expected {field.describe()}")
        field, lines = header_field, lines[1:]
    field = field or GroundField.rationals()

    values: List = []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(field.normalize(line))
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise PreconditionError(f"line {number}: cannot read {line!r} ({e})") from None

    result = FiniteSet.of(field, values)
    if len(result) != len(values):
        logger.warning(f"dropped {len(values) - len(result)} duplicate elements while reading a set")
    return result


def serialize_set(A: FiniteSet) -> str:
    """正準順序で一行一要素（素体ならヘッダ付き）"""
    lines = [f"{HEADER_PREFIX}prime p={A.field.p}"] if A.field.is_prime else []
    lines.extend(A.formatted())
    return "\n".join(lines) + "\n"


def read_set_file(path: PathLike, field: Optional[GroundField] = None) -> FiniteSet:
    return parse_set_text(Path(path).read_text(encoding="utf-8"), field)


def write_set_file(A: FiniteSet, path: PathLike):
    Path(path).write_text(serialize_set(A), encoding="utf-8")
    logger.info(f"集合を保存しました: {path} (|A|={len(A)})")


# ──────────────────────────────────────────────
# 幾何 CSV（一行一対象）
# ──────────────────────────────────────────────

def _read_table(path: PathLike, columns: List[str]) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, comment="#")
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise PreconditionError(f"{path}: missing columns {', '.join(missing)}")
    return frame


def read_points_csv(path: PathLike, field: GroundField) -> PointSet:
    """列 x, y（3次元なら z も）"""
    frame = _read_table(path, ["x", "y"])
    dim = 3 if "z" in frame.columns else 2
    columns = ["x", "y", "z"][:dim]
    return PointSet.of(field, dim, frame[columns].itertuples(index=False, name=None))


def read_lines_csv(path: PathLike, field: GroundField) -> LineFamily:
    """列 slope, intercept（slope が 'vertical' なら x = intercept）"""
    frame = _read_table(path, ["slope", "intercept"])
    return LineFamily.of(field, (
        (None if slope.strip() == VERTICAL else slope, intercept)
        for slope, intercept in frame[["slope", "intercept"]].itertuples(index=False, name=None)
    ))


def read_planes_csv(path: PathLike, field: GroundField) -> PlaneFamily:
    """列 a, b, c, d（ax + by + cz + d = 0）"""
    frame = _read_table(path, ["a", "b", "c", "d"])
    return PlaneFamily.of(field, frame[["a", "b", "c", "d"]].itertuples(index=False, name=None))
