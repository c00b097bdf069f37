"""レポートの組み立てと JSON / CSV 出力"""

import dataclasses
import json
import logging
import sys
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from mpmath import mpf

from ..core.config import get_config, get_report_schema
from ..core.field import GroundField
from ..core.finite_set import FiniteSet
from ..interfaces.results import ExtractionCertificate
from .precision import rational_text, significant

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _set_payload(A: FiniteSet) -> Dict[str, Any]:
    return {"field": A.field.describe(), "size": len(A), "elements": A.formatted()}


def _certificate_payload(cert: ExtractionCertificate) -> Dict[str, Any]:
    """S は大きいので点数だけ残す"""
    return {
        "law": cert.law.value,
        "A1": _set_payload(cert.A1),
        "P": _set_payload(cert.P),
        "t": cert.t,
        "S_size": len(cert.S),
        "q": cert.q,
        "axis": cert.axis.value,
        "d_star": rational_text(cert.d_star),
        "energy": cert.energy,
        "source_size": cert.source_size,
        "q_capped": cert.q_capped,
        "class_count": cert.class_count,
        "nominal_bounds_hold": cert.nominal_bounds_hold,
    }


def _key(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, Fraction):
        return rational_text(value)
    return str(value)


def to_jsonable(value: Any) -> Any:
    """
    結果オブジェクトを JSON に載せられる形へ変換

    有理数は "num/den"、高精度値は有効桁で丸めた文字列、集合は要素の文字列リスト。
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return rational_text(value)
    if isinstance(value, mpf):
        return significant(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, FiniteSet):
        return _set_payload(value)
    if isinstance(value, GroundField):
        return value.describe()
    if isinstance(value, ExtractionCertificate):
        return _certificate_payload(value)
    if isinstance(value, Path):
        return str(value)
    if dataclasses.is_dataclass(value):
        payload = {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
        for name in ("passed", "total", "support_size"):
            if hasattr(type(value), name) and isinstance(getattr(type(value), name), property):
                payload[name] = to_jsonable(getattr(value, name))
        return payload
    if isinstance(value, Mapping):
        return {_key(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    raise TypeError(f"cannot serialise {type(value).__name__}")


def build_report(command: str, config_echo: Mapping[str, Any], results: Any,
                 warnings: Optional[Iterable[str]] = None, timing: Optional[float] = None) -> Dict[str, Any]:
    """
    スキーマ ID・設定エコー・結果・警告をまとめたレポート

    timing は report.include_timing が有効なときだけ載せる。
    """
    report = {
        "schema": get_report_schema(),
        "command": command,
        "config": to_jsonable(dict(config_echo)),
        "results": to_jsonable(results),
        "warnings": list(dict.fromkeys(warnings or [])),
    }
    if timing is not None and get_config().get("report.include_timing", False):
        report["timing"] = {"seconds": round(timing, 3)}
    return report


def dumps_report(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_report(report: Mapping[str, Any], path: Optional[PathLike] = None):
    """path が None なら標準出力へ"""
    text = dumps_report(report)
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"レポートを保存しました: {path}")


def rows_frame(rows: Sequence[Mapping[str, Any]], columns: List[str]) -> pd.DataFrame:
    """行の値を JSON と同じ表記に揃えた DataFrame（空なら列名のみ）"""
    return pd.DataFrame([{c: to_jsonable(row.get(c)) for c in columns} for row in rows], columns=columns)


def write_csv(rows: Sequence[Mapping[str, Any]], columns: List[str], path: Optional[PathLike] = None):
    frame = rows_frame(rows, columns)
    if path is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
        return
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"CSV を保存しました: {path} ({len(frame)} 行)")
