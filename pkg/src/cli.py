"""energylab のコマンドライン：引数検証・各モジュールの呼び出し・レポート出力"""

import argparse
import logging
import math
import sys
import time
from fractions import Fraction
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator
from sympy import isprime

from .core.bsg import bsg_extract, certificate_summary, sp_energy_pipeline, verify_bsg
from .core.config import get_config, reload_config
from .core.decompose import (
    balanced_decompose, bw_decompose, few_sums_decompose, product_energy_pipeline, r_set_decompose,
    translate_decompose,
)
from .core.energy import energy, energy_bruteforce, rep_function
from .core.exceptions import EnergyLabError, InvariantViolation, PreconditionError
from .core.extraction import extract_structured_subset, recheck_certificate, verify_extraction_bound
from .core.families import FamilySpec, generate_family, parse_family_spec, spawn_seeds, with_seed
from .core.field import BinaryLaw, GroundField
from .core.finite_set import FiniteSet
from .core.fpgrowth import (
    dilate_ladder, energy_over_dilates, had_pipeline, moment_sum, partial_energy_sum, range_set,
    rich_dilate_count,
)
from .core.incidence import count_line_incidences, count_plane_incidences, energy_plane_crosscheck
from .interfaces.results import (
    BoundTarget, DecompositionVariant, DilateLaw, ExtractionLaw, HadSigns,
)
from .suite import run_suite
from .utils.precision import ceil_root
from .utils.report_io import build_report, to_jsonable, write_csv, write_report
from .utils.set_io import read_lines_csv, read_planes_csv, read_points_csv, read_set_file, write_set_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2

DECOMPOSE_VARIANTS = ["bw", "balanced", "product", "few-sums", "translate", "reciprocal", "rset", "extract"]
FP_OPS = ["had", "range", "dilates", "moments", "rich", "partial", "ladder"]
SWEEP_KINDS = ["bw", "balanced", "product", "fp"]
LADDER_FAMILIES = ["bw_union", "bw_intertwined", "ap", "gp", "sidon"]


# ──────────────────────────────────────────────
# ログ設定
# ──────────────────────────────────────────────

def setup_logging(log_level: str = "INFO") -> logging.Logger:
    """
    ファイル（ローテーション）と標準エラー出力へのログ設定

    標準出力は JSON / CSV 専用。繰り返し呼んでもハンドラは重複しない。
    """
    numeric_level = getattr(logging, log_level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f'Invalid log level: {log_level}')

    settings = get_config().get_logging_settings()
    formatter = logging.Formatter(settings["format"])

    root_logger = logging.getLogger()
    for handler in [h for h in root_logger.handlers if getattr(h, "_energylab", False)]:
        root_logger.removeHandler(handler)
        handler.close()

    handlers: List[logging.Handler] = []
    if settings.get("file"):
        file_handler = RotatingFileHandler(
            settings["file"],
            maxBytes=int(settings["max_bytes"]),
            backupCount=int(settings["backup_count"]),
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)  # ファイルには全レベル記録
        handlers.append(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    handlers.append(console_handler)

    for handler in handlers:
        handler.setFormatter(formatter)
        handler._energylab = True
        root_logger.addHandler(handler)
    root_logger.setLevel(logging.DEBUG)
    return logging.getLogger(__name__)


class _WarningCollector(logging.Handler):
    """実行中の WARNING をレポートの warnings に写す"""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: List[str] = []

    def emit(self, record: logging.LogRecord):
        if record.levelno == logging.WARNING:
            self.messages.append(record.getMessage())


# ──────────────────────────────────────────────
# 実行設定
# ──────────────────────────────────────────────

class RunConfig(BaseModel):
    """
    一回の実行の全パラメータ

    計算前にすべて検証し、レポートにそのまま echo する（同じ設定で同じ出力を再現できる）。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    input: Optional[str] = None
    gen: Optional[str] = None
    family: Optional[str] = None
    p: Optional[int] = None
    seed: Optional[int] = None
    law: Optional[str] = None
    variant: Optional[str] = None
    extraction_law: Optional[str] = None
    M: Optional[Fraction] = None
    alpha: Optional[Fraction] = None
    k: Optional[int] = None
    K: Optional[Fraction] = None
    s: Optional[Fraction] = None
    verify: Optional[str] = None
    sp_energy: bool = False
    op: Optional[str] = None
    signs: Optional[str] = None
    x_input: Optional[str] = None
    points: Optional[str] = None
    lines: Optional[str] = None
    planes: Optional[str] = None
    crosscheck: bool = False
    kind: Optional[str] = None
    ladder: Optional[List[int]] = None
    primes: Optional[List[int]] = None
    brute: bool = False
    quick: bool = False
    out: Optional[str] = None
    csv_out: Optional[str] = None
    json_out: Optional[str] = None
    config_file: Optional[str] = None

    @field_validator("M", "alpha", "K", "s", mode="before")
    @classmethod
    def _exact_rational(cls, value: Any) -> Optional[Fraction]:
        if value is None or isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            raise ValueError("use an exact rational such as 3/2 instead of a float")
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational number: {value!r}") from None

    @model_validator(mode="after")
    def _check_parameters(self) -> "RunConfig":
        if self.p is not None and not isprime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        for p in self.primes or []:
            if not isprime(p):
                raise ValueError(f"sweep prime {p} is not prime")
        if self.k is not None and self.k < 2:
            raise ValueError("k must be at least 2")
        if self.s is not None and not 0 < self.s < 3:
            raise ValueError("s must lie in (0, 3)")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be at least 1")
        if any(n < 1 for n in self.ladder or []):
            raise ValueError("ladder sizes must be positive")

        # random 族の文字列は seed= を必須にしている
        if self.gen is not None:
            parse_family_spec(self.gen)
        if self.command == "gen":
            parse_family_spec(self.family)
        if self.verify is not None and self.verify != "exhaustive" and self.seed is None:
            raise ValueError(f"--verify {self.verify} samples tuples and needs --seed")
        if self.command == "sweep" and self.kind == "fp" and self.seed is None:
            raise ValueError("the fp sweep draws random sets and needs --seed")

        if self.command == "decompose" and self.variant == "translate" and self.alpha is None:
            raise ValueError("--variant translate needs --alpha")
        if self.command == "fp":
            if self.op == "rich" and self.K is None:
                raise ValueError("--op rich needs --K")
            if self.op == "partial" and self.x_input is None:
                raise ValueError("--op partial needs --x-input")
        if self.command == "incidence" and not self.crosscheck:
            if self.points is None or (self.lines is None) == (self.planes is None):
                raise ValueError("incidence needs --points with exactly one of --lines / --planes, or --crosscheck")
        if self.command in ("energy", "decompose", "bsg") or (self.command == "incidence" and self.crosscheck):
            if self.input is None:
                raise ValueError(f"{self.command} needs --input")
        if self.command == "fp" and (self.input is None) == (self.gen is None):
            raise ValueError("fp needs exactly one of --input / --gen")
        return self

    def echo(self) -> Dict[str, Any]:
        return {key: value for key, value in self.model_dump().items() if value is not None}


# ──────────────────────────────────────────────
# 引数
# ──────────────────────────────────────────────

def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--json-out", help="JSON レポートの出力先（省略時は標準出力）")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        default="INFO", help="ログレベル (デフォルト: INFO)")
    parser.add_argument("--config", dest="config_file", help="設定ファイル（YAML）")


def _add_set_input(parser: argparse.ArgumentParser, required: bool = False):
    parser.add_argument("--input", required=required, help="集合ファイル（一行一要素）")
    parser.add_argument("--p", type=int, help="ヘッダの無い集合ファイルを 𝔽p 上で読む")


def build_parser() -> argparse.ArgumentParser:
    """サブコマンド付きの引数パーサ"""
    parser = argparse.ArgumentParser(prog="energylab", description="加法的組合せ論エネルギー計算ツール")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="生成族から集合ファイルを作る")
    gen.add_argument("--family", required=True, help="族の指定（例: ap:1,1,16、random:size=17,seed=7,of=field_units:101）")
    gen.add_argument("--seed", type=int, help="random 族の seed を上書き")
    gen.add_argument("--out", required=True, help="出力する集合ファイル")
    _add_common(gen)

    energy_cmd = commands.add_parser("energy", help="加法・乗法エネルギー")
    _add_set_input(energy_cmd)
    energy_cmd.add_argument("--law", choices=["add", "mul"], default="add", help="演算 (デフォルト: add)")
    energy_cmd.add_argument("--brute", action="store_true", help="総当たりオラクルと照合")
    energy_cmd.add_argument("--csv-out", help="表現関数 (value, count) の CSV 出力先")
    _add_common(energy_cmd)

    decompose = commands.add_parser("decompose", help="和積分解")
    _add_set_input(decompose)
    decompose.add_argument("--variant", choices=DECOMPOSE_VARIANTS, default="bw", help="分解の種類 (デフォルト: bw)")
    decompose.add_argument("--M", help="しきい値パラメータ M（有理数）")
    decompose.add_argument("--alpha", help="translate の α（有理数）")
    decompose.add_argument("--extraction-law", choices=[law.value for law in ExtractionLaw],
                           default=ExtractionLaw.MUL_SLOPES.value, help="extract で使う直線族")
    _add_common(decompose)

    bsg = commands.add_parser("bsg", help="構成的 Balog–Szemerédi–Gowers")
    _add_set_input(bsg)
    bsg.add_argument("--k", type=int, default=2, help="交差させる元の個数 (デフォルト: 2)")
    bsg.add_argument("--law", choices=["add", "mul"], default="add", help="演算 (デフォルト: add)")
    bsg.add_argument("--verify", default="exhaustive", help="exhaustive、sampled:N、auto")
    bsg.add_argument("--seed", type=int, help="サンプリング検証の seed")
    bsg.add_argument("--sp-energy", action="store_true", help="乗法 BSG から E⁺(A1)^2 E^×(A)^9 も報告")
    _add_common(bsg)

    fp = commands.add_parser("fp", help="𝔽p 上の成長パイプライン")
    _add_set_input(fp)
    fp.add_argument("--gen", help="集合ファイルの代わりに族の指定から生成")
    fp.add_argument("--op", choices=FP_OPS, default="had", help="操作 (デフォルト: had)")
    fp.add_argument("--law", choices=[law.value for law in DilateLaw], default=DilateLaw.ADD_DILATE.value,
                    help="拡大エネルギーの種類")
    fp.add_argument("--signs", choices=[s.value for s in HadSigns], default=HadSigns.MINUS.value,
                    help="(ab ∓ c)/(a ∓ d) の符号")
    fp.add_argument("--s", help="モーメント和の指数（省略時は設定の既定値）")
    fp.add_argument("--K", help="rich の K")
    fp.add_argument("--x-input", help="partial の X（集合ファイル）")
    fp.add_argument("--seed", type=int, help="random 族の seed を上書き")
    fp.add_argument("--csv-out", help="dilates の x ごとの表の出力先")
    _add_common(fp)

    incidence = commands.add_parser("incidence", help="点と直線・平面の接続数")
    incidence.add_argument("--points", help="点の CSV（x, y[, z]）")
    incidence.add_argument("--lines", help="直線の CSV（slope, intercept）")
    incidence.add_argument("--planes", help="平面の CSV（a, b, c, d）")
    incidence.add_argument("--crosscheck", action="store_true", help="エネルギー方程式と平面接続の照合")
    _add_set_input(incidence)
    _add_common(incidence)

    sweep_cmd = commands.add_parser("sweep", help="サイズ・素数の梯子で比率を CSV に出す")
    sweep_cmd.add_argument("--kind", choices=SWEEP_KINDS, required=True, help="スイープの種類")
    sweep_cmd.add_argument("--ladder", type=int, nargs="*", help="サイズの梯子（空なら列名のみ）")
    sweep_cmd.add_argument("--primes", type=int, nargs="*", help="fp の素数")
    sweep_cmd.add_argument("--family", choices=LADDER_FAMILIES, default="bw_union", help="梯子で使う族")
    sweep_cmd.add_argument("--seed", type=int, help="fp のランダム集合の seed")
    sweep_cmd.add_argument("--csv-out", help="CSV の出力先（省略時は標準出力）")
    _add_common(sweep_cmd)

    verify = commands.add_parser("verify-all", help="厳密な不変量の一括チェック")
    verify.add_argument("--seed", type=int, default=0, help="乱数 seed (デフォルト: 0)")
    verify.add_argument("--quick", action="store_true", help="縮小版")
    _add_common(verify)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {key: value for key, value in vars(args).items() if key != "log_level"}
    return RunConfig(**values)


# ──────────────────────────────────────────────
# 入力
# ──────────────────────────────────────────────

def _input_field(config: RunConfig) -> Optional[GroundField]:
    return GroundField.prime(config.p) if config.p is not None else None


def load_input_set(config: RunConfig) -> FiniteSet:
    """--gen か --input から集合を得る"""
    if config.gen is not None:
        spec = parse_family_spec(config.gen)
        if config.seed is not None:
            spec = with_seed(spec, config.seed)
        A = generate_family(spec)
        if config.p is not None:
            A.field.require_same(GroundField.prime(config.p))
        return A
    return read_set_file(config.input, _input_field(config))


def _geometry_field(config: RunConfig) -> GroundField:
    return _input_field(config) or GroundField.rationals()


# ──────────────────────────────────────────────
# サブコマンド
# ──────────────────────────────────────────────

def cmd_gen(config: RunConfig) -> Dict[str, Any]:
    spec = parse_family_spec(config.family)
    if config.seed is not None:
        spec = with_seed(spec, config.seed)
    A = generate_family(spec)
    write_set_file(A, config.out)
    return {"family": spec.describe(), "field": A.field, "size": len(A), "out": config.out}


def cmd_energy(config: RunConfig) -> Dict[str, Any]:
    A = load_input_set(config)
    law = BinaryLaw(config.law)
    value = energy(A, A, law)
    if config.brute:
        oracle = energy_bruteforce(A, A, law)
        if oracle != value:
            raise InvariantViolation(f"energy {value} differs from brute force {oracle}",
                                     counterexample={"A": A.formatted(), "law": law.value})
    if config.csv_out:
        rep_function(A, A, law).to_csv(config.csv_out)
    return {"set_file": config.input, "field": A.field, "size": len(A), "law": law.value,
            "energy": value, "brute_checked": config.brute}


def _extraction_results(A: FiniteSet, law: ExtractionLaw) -> Dict[str, Any]:
    cert = extract_structured_subset(A, law)
    ok, reason = recheck_certificate(cert, A)
    if not ok:
        raise InvariantViolation(f"extraction certificate failed its recheck: {reason}",
                                 counterexample={"A": A.formatted(), "law": law.value})
    bounds = {}
    for target in BoundTarget:
        try:
            bounds[target.value] = verify_extraction_bound(cert, A, target)
        except PreconditionError:
            continue
    return {"certificate": cert, "bounds": bounds}


def cmd_decompose(config: RunConfig) -> Any:
    A = load_input_set(config)
    variant = config.variant
    if variant == "bw":
        return bw_decompose(A, config.M)
    if variant == "balanced":
        return balanced_decompose(A)
    if variant == "product":
        return product_energy_pipeline(A)
    if variant == "few-sums":
        return few_sums_decompose(A)
    if variant == "translate":
        return translate_decompose(A, config.alpha, DecompositionVariant.MULT_TRANSLATE, config.M)
    if variant == "reciprocal":
        return translate_decompose(A, None, DecompositionVariant.RECIPROCAL, config.M)
    if variant == "rset":
        return r_set_decompose(A)
    return _extraction_results(A, ExtractionLaw(config.extraction_law))


def cmd_bsg(config: RunConfig) -> Tuple[Dict[str, Any], bool]:
    A = load_input_set(config)
    law = BinaryLaw(config.law)
    cert = bsg_extract(A, config.k, law)
    verification = verify_bsg(cert, A, mode=config.verify, seed=config.seed or 0)
    results: Dict[str, Any] = {"certificate": certificate_summary(cert), "verification": verification}
    if config.sp_energy:
        results["sp_energy"] = sp_energy_pipeline(A)
    return results, verification.passed


def cmd_fp(config: RunConfig) -> Any:
    A = load_input_set(config)
    law = DilateLaw(config.law)
    op = config.op
    if op == "had":
        return had_pipeline(A, HadSigns(config.signs))
    if op == "range":
        return range_set(A, HadSigns(config.signs))
    if op == "dilates":
        dilates = energy_over_dilates(A, law)
        if config.csv_out:
            rows = [{"x": x, "energy": value} for x, value in sorted(dilates.per_x.items())]
            write_csv(rows, ["x", "energy"], config.csv_out)
        return dilates
    if op == "moments":
        dilates = energy_over_dilates(A, law)
        exponents = [config.s] if config.s is not None else get_config().get_moment_exponents()
        return [moment_sum(A, s, law, dilates=dilates) for s in exponents]
    if op == "rich":
        return rich_dilate_count(A, config.K, law)
    if op == "partial":
        X = read_set_file(config.x_input, A.field)
        return partial_energy_sum(A, X, law)
    return dilate_ladder(A, law)


def cmd_incidence(config: RunConfig) -> Any:
    if config.crosscheck:
        A = load_input_set(config)
        cert = extract_structured_subset(A, ExtractionLaw.MUL_SLOPES)
        return {"A1_size": len(cert.A1), "P_size": len(cert.P), "A_size": len(A),
                "crosscheck": energy_plane_crosscheck(cert.A1, cert.P, A)}
    field = _geometry_field(config)
    points = read_points_csv(config.points, field)
    if config.lines is not None:
        return count_line_incidences(points, read_lines_csv(config.lines, field))
    return count_plane_incidences(points, read_planes_csv(config.planes, field))


# ──────────────────────────────────────────────
# スイープ
# ──────────────────────────────────────────────

SWEEP_COLUMNS = {
    "bw": ["n", "size", "M", "steps", "energy_add_B", "energy_mul_C", "predicted_bound", "ratio", "log_scaled_ratio"],
    "balanced": ["n", "size", "B_size", "C_size", "branch", "energy_add_B", "energy_mul_C",
                 "balanced_ratio", "char0_ratio", "log_scaled_ratio"],
    "product": ["n", "size", "B_size", "C_size", "branch", "product_ratio", "log_scaled_ratio"],
    "fp": ["p", "size", "Q", "Q_over_p", "E_cal", "E_cal_normalized"],
}
RATIO_COLUMNS = {
    "bw": ["ratio", "log_scaled_ratio"],
    "balanced": ["balanced_ratio", "char0_ratio", "log_scaled_ratio"],
    "product": ["product_ratio", "log_scaled_ratio"],
    "fp": ["Q_over_p", "E_cal_normalized"],
}


def ladder_family(name: str, n: int) -> FamilySpec:
    if name == "bw_union":
        return FamilySpec.bw_union(n)
    if name == "bw_intertwined":
        return FamilySpec.bw_intertwined(n)
    if name == "ap":
        return FamilySpec.ap(1, 1, n)
    if name == "gp":
        return FamilySpec.gp(1, 2, n)
    return FamilySpec.sidon(n)


def _log_scaled(ratio: Any, size: int) -> Optional[float]:
    if ratio is None or size < 2:
        return None
    power = int(get_config().get("sweep.log_power", 3))
    return float(ratio) / math.log2(size) ** power


def trend(values: Sequence[Optional[float]]) -> str:
    """列の単調性：increasing / decreasing / constant / mixed"""
    numbers = [float(v) for v in values if v is not None]
    pairs = list(zip(numbers, numbers[1:]))
    if not pairs:
        return "constant"
    rising = all(b >= a for a, b in pairs)
    falling = all(b <= a for a, b in pairs)
    if rising and falling:
        return "constant"
    if rising:
        return "increasing"
    return "decreasing" if falling else "mixed"


def _sweep_row(kind: str, family: str, n: int) -> Dict[str, Any]:
    A = generate_family(ladder_family(family, n))
    size = len(A)
    if kind == "bw":
        trace = bw_decompose(A)
        return {"n": n, "size": size, "M": trace.M, "steps": len(trace.steps),
                "energy_add_B": trace.metrics["energy_add_B"], "energy_mul_C": trace.metrics["energy_mul_C"],
                "predicted_bound": trace.metrics["predicted_bound"], "ratio": trace.metrics["max_energy_ratio"],
                "log_scaled_ratio": _log_scaled(trace.metrics["max_energy_ratio"], size)}
    if kind == "balanced":
        result = balanced_decompose(A)
        return {"n": n, "size": size, "B_size": len(result.B), "C_size": len(result.C), "branch": result.branch,
                "energy_add_B": result.energies["add_B"], "energy_mul_C": result.energies["mul_C"],
                "balanced_ratio": result.balanced_ratio, "char0_ratio": result.metrics.get("char0_ratio"),
                "log_scaled_ratio": _log_scaled(result.balanced_ratio, size)}
    result = product_energy_pipeline(A)
    return {"n": n, "size": size, "B_size": len(result.B), "C_size": len(result.C), "branch": result.branch,
            "product_ratio": result.product_ratio, "log_scaled_ratio": _log_scaled(result.product_ratio, size)}


def _fp_rows(primes: List[int], seed: int) -> List[Dict[str, Any]]:
    exponent = get_config().get_fraction("fpgrowth.growth_exponent", "0.61")
    rows = []
    for p, child in zip(primes, spawn_seeds(seed, len(primes))):
        size = ceil_root(p, exponent.numerator, exponent.denominator)
        A = generate_family(FamilySpec.random_subset(FamilySpec.field_units(p), child, size=size))
        Q = range_set(A).Q
        report = had_pipeline(A)
        used = len(report.A)
        rows.append({"p": p, "size": len(A), "Q": Q, "Q_over_p": Fraction(Q, p),
                     "E_cal": report.solution_count.E_cal,
                     "E_cal_normalized": Fraction(report.solution_count.E_cal * p, used ** 8)})
    return rows


def sweep(config: RunConfig) -> Dict[str, Any]:
    """
    梯子の各インスタンスを一行にした CSV を出し、比率列の単調性を返す

    --ladder を空で与えると列名だけの CSV になる。
    """
    kind = config.kind
    if kind == "fp":
        primes = config.primes if config.primes is not None else get_config().get_sweep_primes()
        rows = _fp_rows(primes, config.seed)
    else:
        ladder = config.ladder
        if ladder is None:
            ladder = [int(n) for n in get_config().get("sweep.bw_ladder", [16, 32, 64, 128])]
        rows = []
        for n in ladder:
            rows.append(_sweep_row(kind, config.family, n))
            logger.info(f"sweep {kind}: n={n} 完了")

    columns = SWEEP_COLUMNS[kind]
    write_csv(rows, columns, config.csv_out)
    trends = {column: trend([row.get(column) for row in rows]) for column in RATIO_COLUMNS[kind]}
    logger.info(f"比率列の単調性: {trends}")
    return {"kind": kind, "rows": len(rows), "trends": trends}


# ──────────────────────────────────────────────
# 実行
# ──────────────────────────────────────────────

def _dispatch(config: RunConfig) -> Tuple[Any, bool]:
    """(results, passed)"""
    command = config.command
    if command == "gen":
        return cmd_gen(config), True
    if command == "energy":
        return cmd_energy(config), True
    if command == "decompose":
        return cmd_decompose(config), True
    if command == "bsg":
        return cmd_bsg(config)
    if command == "fp":
        return cmd_fp(config), True
    if command == "incidence":
        return cmd_incidence(config), True
    if command == "sweep":
        return sweep(config), True
    checks = run_suite(seed=config.seed, quick=config.quick)
    passed = all(check.passed for check in checks)
    return {"passed": passed, "checks": checks}, passed


def _emit(config: RunConfig, results: Any, warnings: List[str], started: float):
    report = build_report(config.command, config.echo(), results, warnings, time.perf_counter() - started)
    if config.command == "sweep" and config.csv_out is None and config.json_out is None:
        return
    write_report(report, config.json_out)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    コマンドラインを実行して終了コードを返す

    Returns:
        0: 成功、1: 不変量違反・検証失敗、2: 使い方・前提条件・入出力のエラー
    """
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if args.config_file:
        reload_config(args.config_file)
    try:
        setup_logging(args.log_level)
    except (ValueError, OSError) as e:
        print(f"ログ設定エラー: {e}", file=sys.stderr)
        return EXIT_USAGE

    collector = _WarningCollector()
    logging.getLogger().addHandler(collector)
    started = time.perf_counter()
    try:
        config = config_from_args(args)
        results, passed = _dispatch(config)
        _emit(config, results, collector.messages, started)
        return EXIT_OK if passed else EXIT_ASSERTION
    except InvariantViolation as e:
        logger.error(f"不変量違反: {e}")
        failure = {"error": str(e), "counterexample": to_jsonable(e.counterexample)}
        _emit(config, failure, collector.messages, started)
        return EXIT_ASSERTION
    except ValidationError as e:
        logger.error(f"引数エラー: {e}")
        return EXIT_USAGE
    except (EnergyLabError, ValueError, OSError) as e:
        logger.error(f"実行できません: {e}")
        return EXIT_USAGE
    finally:
        logging.getLogger().removeHandler(collector)


def main():
    sys.exit(run())
