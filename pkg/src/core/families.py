"""生成族（等差・等比・Balog–Wooley 型・ランダム部分集合・乗法部分群など）"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
from sympy import primitive_root

from .exceptions import PreconditionError
from .field import GroundField
from .finite_set import FiniteSet

logger = logging.getLogger(__name__)


class FamilyKind(Enum):
    """生成族の種類"""
    AP = "ap"
    GP = "gp"
    BW_UNION = "bw_union"
    BW_INTERTWINED = "bw_intertwined"
    RANDOM_SUBSET = "random"
    MULT_SUBGROUP = "mult_subgroup"
    SIDON = "sidon"
    FIELD_UNITS = "field_units"


@dataclass(frozen=True)
class FamilySpec:
    """
    生成族の指定

    p を与えると素体 𝔽p 上で生成する（mult_subgroup / field_units では必須）。
    random は parent の族から seed 付きで部分集合を選ぶ。
    """
    kind: FamilyKind
    n: Optional[int] = None
    start: Any = 1
    step: Any = 1
    ratio: Any = 2
    gp_start: Optional[Any] = None
    p: Optional[int] = None
    order: Optional[int] = None
    density: Optional[Fraction] = None
    size: Optional[int] = None
    seed: Optional[int] = None
    parent: Optional["FamilySpec"] = None

    @classmethod
    def ap(cls, start, step, n: int, p: Optional[int] = None) -> "FamilySpec":
        return cls(FamilyKind.AP, n=n, start=start, step=step, p=p)

    @classmethod
    def gp(cls, start, ratio, n: int, p: Optional[int] = None) -> "FamilySpec":
        return cls(FamilyKind.GP, n=n, start=start, ratio=ratio, p=p)

    @classmethod
    def bw_union(cls, n: int, start=1, step=1, gp_start=None, ratio=2) -> "FamilySpec":
        return cls(FamilyKind.BW_UNION, n=n, start=start, step=step, gp_start=gp_start, ratio=ratio)

    @classmethod
    def bw_intertwined(cls, n: int) -> "FamilySpec":
        return cls(FamilyKind.BW_INTERTWINED, n=n)

    @classmethod
    def random_subset(cls, parent: "FamilySpec", seed: int, density: Optional[Fraction] = None,
                      size: Optional[int] = None) -> "FamilySpec":
        return cls(FamilyKind.RANDOM_SUBSET, parent=parent, seed=seed,
                   density=None if density is None else Fraction(density), size=size)

    @classmethod
    def mult_subgroup(cls, p: int, order: int) -> "FamilySpec":
        return cls(FamilyKind.MULT_SUBGROUP, p=p, order=order)

    @classmethod
    def sidon(cls, n: int) -> "FamilySpec":
        return cls(FamilyKind.SIDON, n=n)

    @classmethod
    def field_units(cls, p: int) -> "FamilySpec":
        return cls(FamilyKind.FIELD_UNITS, p=p)

    def is_randomized(self) -> bool:
        if self.kind == FamilyKind.RANDOM_SUBSET:
            return True
        return self.parent is not None and self.parent.is_randomized()

    def describe(self) -> str:
        """parse_family_spec で読み戻せる文字列表現"""
        suffix = f"@{self.p}" if self.p is not None and self.kind in (
            FamilyKind.AP, FamilyKind.GP) else ""
        if self.kind == FamilyKind.AP:
            return f"ap:{self.start},{self.step},{self.n}{suffix}"
        if self.kind == FamilyKind.GP:
            return f"gp:{self.start},{self.ratio},{self.n}{suffix}"
        if self.kind == FamilyKind.BW_UNION:
            gp_start = "" if self.gp_start is None else f",gp_start={self.gp_start}"
            return f"bw_union:{self.n},start={self.start},step={self.step},ratio={self.ratio}{gp_start}"
        if self.kind == FamilyKind.BW_INTERTWINED:
            return f"bw_intertwined:{self.n}"
        if self.kind == FamilyKind.MULT_SUBGROUP:
            return f"mult_subgroup:{self.p},{self.order}"
        if self.kind == FamilyKind.SIDON:
            return f"sidon:{self.n}"
        if self.kind == FamilyKind.FIELD_UNITS:
            return f"field_units:{self.p}"
        amount = f"size={self.size}" if self.size is not None else f"density={self.density}"
        return f"random:{amount},seed={self.seed},of={self.parent.describe()}"


# ──────────────────────────────────────────────
# 文字列表現のパース
# ──────────────────────────────────────────────

def _split_options(text: str) -> tuple[List[str], Dict[str, str]]:
    positional, options = [], {}
    for token in filter(None, (t.strip() for t in text.split(","))):
        if "=" in token:
            key, value = token.split("=", 1)
            options[key.strip()] = value.strip()
        else:
            positional.append(token)
    return positional, options


def parse_family_spec(text: str) -> FamilySpec:
    """
    "ap:1,1,16", "gp:1,2,16@101", "bw_union:32", "mult_subgroup:101,20",
    "random:size=17,seed=7,of=field_units:101" などを FamilySpec に変換

    Raises:
        PreconditionError: 書式が不正
    """
    text = text.strip()
    if ":" not in text:
        raise PreconditionError(f"family spec must look like kind:args, got {text!r}")
    kind_text, args = text.split(":", 1)
    try:
        kind = FamilyKind(kind_text.strip())
    except ValueError:
        raise PreconditionError(f"unknown family {kind_text!r}") from None

    try:
        if kind == FamilyKind.RANDOM_SUBSET:
            if ",of=" not in args and not args.startswith("of="):
                raise PreconditionError("random family needs of=<parent spec>")
            head, parent_text = (args.split(",of=", 1) if ",of=" in args else ("", args[3:]))
            _, options = _split_options(head)
            if "seed" not in options:
                raise PreconditionError("random family needs seed=<int>")
            density = Fraction(options["density"]) if "density" in options else None
            size = int(options["size"]) if "size" in options else None
            return FamilySpec.random_subset(parse_family_spec(parent_text), int(options["seed"]),
                                            density=density, size=size)

        p = None
        if "@" in args:
            args, modulus = args.rsplit("@", 1)
            p = int(modulus)
        positional, options = _split_options(args)

        if kind == FamilyKind.AP:
            start, step, n = positional
            return FamilySpec.ap(Fraction(start), Fraction(step), int(n), p=p)
        if kind == FamilyKind.GP:
            start, ratio, n = positional
            return FamilySpec.gp(Fraction(start), Fraction(ratio), int(n), p=p)
        if kind == FamilyKind.BW_UNION:
            gp_start = options.get("gp_start")
            return FamilySpec.bw_union(
                int(positional[0]),
                start=Fraction(options.get("start", "1")),
                step=Fraction(options.get("step", "1")),
                gp_start=None if gp_start is None else Fraction(gp_start),
                ratio=Fraction(options.get("ratio", "2")),
            )
        if kind == FamilyKind.BW_INTERTWINED:
            return FamilySpec.bw_intertwined(int(positional[0]))
        if kind == FamilyKind.MULT_SUBGROUP:
            modulus, order = positional
            return FamilySpec.mult_subgroup(int(modulus), int(order))
        if kind == FamilyKind.SIDON:
            return FamilySpec.sidon(int(positional[0]))
        return FamilySpec.field_units(int(positional[0]))
    except (ValueError, ZeroDivisionError) as e:
        if isinstance(e, PreconditionError):
            raise
        raise PreconditionError(f"malformed family spec {text!r}: {e}") from None


# ──────────────────────────────────────────────
# 乱数
# ──────────────────────────────────────────────

def seeded_generator(seed: int) -> np.random.Generator:
    """記録可能な seed から決定的な乱数生成器を作る"""
    return np.random.default_rng(np.random.SeedSequence(seed))


def spawn_seeds(seed: int, count: int) -> List[int]:
    """親 seed から count 個の子 seed を分岐させる（スイープ・試行用）"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


# ──────────────────────────────────────────────
# 生成
# ──────────────────────────────────────────────

def _field_for(spec: FamilySpec) -> GroundField:
    return GroundField.prime(spec.p) if spec.p is not None else GroundField.rationals()


def _require_distinct(field: GroundField, values: List[Any], what: str) -> FiniteSet:
    result = FiniteSet.of(field, values)
    if len(result) != len(values):
        raise PreconditionError(f"{what}: parameters produce repeated elements")
    return result


def _progression(field: GroundField, start, step, n: int, geometric: bool) -> List[Any]:
    current = field.normalize(start)
    step = field.normalize(step)
    values = []
    for _ in range(n):
        values.append(current)
        current = field.mul(current, step) if geometric else field.add(current, step)
    return values


def _greedy_sidon(n: int) -> List[int]:
    # 貪欲法（Mian–Chowla 列）
    elements: List[int] = []
    sums = set()
    candidate = 1
    while len(elements) < n:
        new_sums = {candidate + a for a in elements} | {2 * candidate}
        if sums.isdisjoint(new_sums) and len(new_sums) == len(elements) + 1:
            elements.append(candidate)
            sums |= new_sums
        candidate += 1
    return elements


def generate_family(spec: FamilySpec) -> FiniteSet:
    """
    FamilySpec から集合を生成（seed を含めて決定的）

    Raises:
        PreconditionError: 重複・衝突・不正な部分群位数など
    """
    kind = spec.kind

    if kind in (FamilyKind.AP, FamilyKind.GP, FamilyKind.SIDON, FamilyKind.BW_INTERTWINED,
                FamilyKind.BW_UNION) and (spec.n is None or spec.n < 1):
        raise PreconditionError(f"{kind.value} needs n >= 1")

    if kind == FamilyKind.AP:
        field = _field_for(spec)
        if field.normalize(spec.step) == 0:
            raise PreconditionError("ap step must be nonzero")
        return _require_distinct(field, _progression(field, spec.start, spec.step, spec.n, False), "ap")

    if kind == FamilyKind.GP:
        field = _field_for(spec)
        if field.normalize(spec.start) == 0 or field.normalize(spec.ratio) == 0:
            raise PreconditionError("gp start and ratio must be nonzero")
        return _require_distinct(field, _progression(field, spec.start, spec.ratio, spec.n, True), "gp")

    if kind == FamilyKind.BW_UNION:
        field = GroundField.rationals()
        progression = generate_family(FamilySpec.ap(spec.start, spec.step, spec.n))
        gp_start = spec.gp_start if spec.gp_start is not None else progression.values[-1] + 1
        geometric = generate_family(FamilySpec.gp(gp_start, spec.ratio, spec.n))
        if not progression.isdisjoint(geometric):
            raise PreconditionError("bw_union: arithmetic and geometric parts collide")
        union = progression.union(geometric)
        if union.contains_zero():
            raise PreconditionError("bw_union must avoid 0")
        return union.with_zero_excluded()

    if kind == FamilyKind.BW_INTERTWINED:
        n = spec.n
        values = [(2 ** i) * m for i in range(n) for m in range(n * n, 2 * n * n)]
        return _require_distinct(GroundField.rationals(), values, "bw_intertwined").with_zero_excluded()

    if kind == FamilyKind.SIDON:
        return FiniteSet.of(GroundField.rationals(), _greedy_sidon(spec.n), excludes_zero=True)

    if kind == FamilyKind.FIELD_UNITS:
        field = GroundField.prime(spec.p)
        return FiniteSet(field, tuple(range(1, spec.p)), excludes_zero=True)

    if kind == FamilyKind.MULT_SUBGROUP:
        field = GroundField.prime(spec.p)
        d = spec.order
        if d is None or d < 1 or (spec.p - 1) % d != 0:
            raise PreconditionError(f"subgroup order {d} does not divide p-1={spec.p - 1}")
        generator = pow(int(primitive_root(spec.p)), (spec.p - 1) // d, spec.p)
        values = [pow(generator, i, spec.p) for i in range(d)]
        return _require_distinct(field, values, "mult_subgroup").with_zero_excluded()

    # RANDOM_SUBSET
    if spec.parent is None or spec.seed is None:
        raise PreconditionError("random subset needs a parent family and a seed")
    parent = generate_family(spec.parent)
    if spec.size is not None:
        size = spec.size
    elif spec.density is not None:
        if not 0 < spec.density <= 1:
            raise PreconditionError(f"density must lie in (0, 1], got {spec.density}")
        size = math.ceil(spec.density * len(parent))
    else:
        raise PreconditionError("random subset needs size or density")
    if not 0 <= size <= len(parent):
        raise PreconditionError(f"cannot draw {size} elements from a parent of size {len(parent)}")

    rng = seeded_generator(spec.seed)
    chosen = sorted(rng.choice(len(parent), size=size, replace=False).tolist())
    logger.debug(f"random subset of {spec.parent.describe()}: size={size}, seed={spec.seed}")
    return FiniteSet(parent.field, tuple(parent.values[i] for i in chosen), parent.excludes_zero)


def with_seed(spec: FamilySpec, seed: int) -> FamilySpec:
    """random 族の seed を差し替える（スイープの子 seed 用）"""
    if spec.kind == FamilyKind.RANDOM_SUBSET:
        return replace(spec, seed=seed)
    return spec
