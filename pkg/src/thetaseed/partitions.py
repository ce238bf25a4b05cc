"""Integer combinatorics: partitions, gap profiles, a-sequences and signs.

Everything here is exact and immutable.  A :class:`GapProfile` records the
gaps ``b`` of the flat bundle attached to a point ``e`` of the theta divisor
and the Weierstrass gaps ``w`` of the base point; the partition, the
multiplicities ``m_k``, the a-sequences ``A_k`` and the signs ``c_k`` are all
derived from it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class InvalidPartition(ValueError):
    pass


class InvalidGapProfile(ValueError):
    """Raised with the name of the violated invariant in the message."""


@dataclass(frozen=True, order=True)
class Partition:
    """Weakly decreasing tuple of nonnegative integers; trailing zeros dropped."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise InvalidPartition(f"negative part in {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise InvalidPartition(f"parts not weakly decreasing: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        return cls(tuple(parts))

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __repr__(self) -> str:
        return f"Partition{self.parts}"

    def part(self, i: int) -> int:
        """1-based part access, zero beyond the length."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def padded(self, n: int) -> tuple[int, ...]:
        if n < len(self.parts):
            raise InvalidPartition(f"cannot pad {self} to length {n}")
        return self.parts + (0,) * (n - len(self.parts))

    def conjugate(self) -> "Partition":
        if not self.parts:
            return Partition()
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def contains(self, other: "Partition") -> bool:
        """``self >= other`` in the componentwise order."""
        n = max(len(self.parts), len(other.parts))
        return all(self.part(i) >= other.part(i) for i in range(1, n + 1))

    def tail_weight(self, k: int) -> int:
        """N_{mu,k} = sum of the parts after the k-th."""
        return sum(self.parts[k:])

    def truncate(self, k: int) -> "Partition":
        return Partition(self.parts[:k])

    def to_json(self) -> list[int]:
        return list(self.parts)


def conjugate(mu: Partition) -> Partition:
    return mu.conjugate()


def partitions_of(n: int, max_part: int | None = None, max_length: int | None = None) -> Iterator[Partition]:
    """All partitions of ``n`` in reverse lexicographic order."""
    if max_part is None:
        max_part = n
    if max_length is None:
        max_length = n

    def rec(rest: int, cap: int, slots: int) -> Iterator[tuple[int, ...]]:
        if rest == 0:
            yield ()
            return
        if slots == 0:
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in rec(rest - first, first, slots - 1):
                yield (first,) + tail

    for parts in rec(n, max_part, max_length):
        yield Partition(parts)


def partitions_up_to(n: int, **kw) -> Iterator[Partition]:
    for m in range(n + 1):
        yield from partitions_of(m, **kw)


# ----------------------------------------------------------------- permutation sign


def _count_inversions(seq: list[int]) -> int:
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    i = j = 0
    merged = []
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return count


def inversions(seq: Sequence[int]) -> int:
    return _count_inversions(list(seq))


def two_row_sign(top: Sequence[int], bottom: Sequence[int]) -> int:
    """Sign of the permutation sending ``top[i]`` to ``bottom[i]``."""
    if sorted(top) != sorted(bottom) or len(set(top)) != len(top):
        raise ValueError(f"rows are not permutations of each other: {tuple(top)} vs {tuple(bottom)}")
    return -1 if (inversions(top) + inversions(bottom)) % 2 else 1


# ------------------------------------------------------------------- gap profiles


def _complement_prefix(gaps: Sequence[int], genus: int) -> tuple[int, ...]:
    gs = set(gaps)
    return tuple(n for n in range(2 * genus) if n not in gs)


@dataclass(frozen=True)
class GapProfile:
    """Gaps of L_{e+delta} (``b``) and of the trivial bundle (``w``) at the base point.

    Non-gaps are stored as the finite list below ``2g``; beyond that every
    integer is a non-gap, so ``b*_i = i + g - 1`` for ``i > g``.
    """

    genus: int
    b: tuple[int, ...]
    w: tuple[int, ...]
    b_star_prefix: tuple[int, ...] = field(default=(), compare=False)
    w_star_prefix: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        g = int(self.genus)
        object.__setattr__(self, "genus", g)
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        if g < 1:
            raise InvalidGapProfile(f"genus must be positive, got {g}")
        for name, gaps in (("b", self.b), ("w", self.w)):
            if len(gaps) != g:
                raise InvalidGapProfile(f"|{name}| = g violated: {len(gaps)} gaps for genus {g}")
            if any(gaps[i] >= gaps[i + 1] for i in range(g - 1)):
                raise InvalidGapProfile(f"{name} strictly increasing violated: {gaps}")
            if gaps[0] < 0 or gaps[-1] > 2 * g - 1:
                raise InvalidGapProfile(f"{name} within [0, 2g-1] violated: {gaps}")
        if self.w[0] != 1:
            raise InvalidGapProfile(f"w_1 = 1 violated: {self.w}")
        b_star = _complement_prefix(self.b, g)
        w_star = _complement_prefix(self.w, g)
        for name, given, derived in (("b_star", self.b_star_prefix, b_star), ("w_star", self.w_star_prefix, w_star)):
            given = tuple(int(x) for x in given)
            if given and not _prefix_consistent(given, derived, g):
                raise InvalidGapProfile(f"{name} complement of gaps violated: {given} vs {derived}")
        object.__setattr__(self, "b_star_prefix", b_star)
        object.__setattr__(self, "w_star_prefix", w_star)
        # semigroup action of non-gaps of O on non-gaps of L_{e+delta}
        horizon = 4 * g + 2
        for i in range(1, horizon):
            for j in range(1, horizon):
                s = self.w_star(i) + self.b_star(j)
                if s in self.b:
                    raise InvalidGapProfile(
                        f"closure w*_i + b*_j non-gap violated: w*_{i}={self.w_star(i)}, b*_{j}={self.b_star(j)}"
                    )
                if self.w_star(i) + self.w_star(j) in self.w:
                    raise InvalidGapProfile("closure of Weierstrass semigroup violated")

    # non-gaps, 1-based
    def b_star(self, i: int) -> int:
        if i < 1:
            raise IndexError(i)
        return self.b_star_prefix[i - 1] if i <= self.genus else i + self.genus - 1

    def w_star(self, i: int) -> int:
        if i < 1:
            raise IndexError(i)
        return self.w_star_prefix[i - 1] if i <= self.genus else i + self.genus - 1

    def b_gap(self, i: int) -> int:
        """1-based gap b_i."""
        return self.b[i - 1]

    @property
    def partition(self) -> Partition:
        return partition_from_gaps(self.b, self.genus)

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "b": list(self.b),
            "b_star_prefix": list(self.b_star_prefix),
            "w": list(self.w),
            "w_star_prefix": list(self.w_star_prefix),
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "GapProfile":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(
                genus=data["genus"],
                b=tuple(data["b"]),
                w=tuple(data.get("w") or range(1, data["genus"] + 1)),
                b_star_prefix=tuple(data.get("b_star_prefix", ())),
                w_star_prefix=tuple(data.get("w_star_prefix", ())),
            )
        except KeyError as exc:
            raise InvalidGapProfile(f"missing field {exc}") from None


def semigroup_gaps(generators: Sequence[int]) -> tuple[int, ...]:
    """Gaps of the numerical semigroup generated by ``generators`` (gcd must be 1)."""
    gens = sorted({int(a) for a in generators if int(a) > 0})
    if not gens or math.gcd(*gens) != 1:
        raise InvalidGapProfile(f"generators {tuple(generators)} do not span a numerical semigroup")
    reach = [True]
    n = 0
    run = 0
    while run < gens[0]:
        n += 1
        ok = any(n >= a and reach[n - a] for a in gens)
        reach.append(ok)
        run = run + 1 if ok else 0
    return tuple(k for k, ok in enumerate(reach) if not ok)


def profile_from_weierstrass_gaps(gaps: Sequence[int]) -> GapProfile:
    """Profile with b = w, the e = -delta configuration."""
    gaps = tuple(gaps)
    return GapProfile(genus=len(gaps), b=gaps, w=gaps)


def _prefix_consistent(given: tuple[int, ...], derived: tuple[int, ...], g: int) -> bool:
    for i, v in enumerate(given, start=1):
        expected = derived[i - 1] if i <= g else i + g - 1
        if v != expected:
            return False
    return True


def partition_from_gaps(b: Sequence[int], g: int) -> Partition:
    b = tuple(b)
    if len(b) != g:
        raise InvalidGapProfile(f"|b| = g violated: {b} for genus {g}")
    if any(b[i] >= b[i + 1] for i in range(g - 1)):
        raise InvalidGapProfile(f"b strictly increasing violated: {b}")
    if b and (b[0] < 0 or b[-1] > 2 * g - 1):
        raise InvalidGapProfile(f"b within [0, 2g-1] violated: {b}")
    parts = tuple(b[g - 1 - i] - (g - 1 - i) for i in range(g))
    if any(p < 0 for p in parts) or any(parts[i] < parts[i + 1] for i in range(g - 1)):
        raise InvalidGapProfile(f"gap list {b} does not give a partition")
    return Partition(parts)


def mk(profile: GapProfile, k: int) -> int:
    g = profile.genus
    if not 0 <= k <= g - 1:
        raise ValueError(f"k={k} outside [0, g-1]")
    first = sum(1 for i in range(1, g + 1) if profile.b_star(i) < g - k)
    second = g - k - sum(1 for x in profile.b if x < g - k)
    assert first == second, "gap/non-gap count mismatch"
    return first


@dataclass(frozen=True)
class ASequence:
    k: int
    m: int
    entries: tuple[int, ...]
    sign: int


def sign_ck(profile: GapProfile, k: int) -> int:
    g = profile.genus
    m = mk(profile, k)
    if m == 0:
        raise ValueError(f"m_{k} = 0: sign undefined")
    top = [profile.b_star(i) for i in range(1, m + 1)] + [profile.b_gap(i) for i in range(g - k - m, 0, -1)]
    bottom = list(range(g - k - 1, -1, -1))
    return two_row_sign(top, bottom)


def a_sequence(profile: GapProfile, k: int) -> ASequence:
    g = profile.genus
    m = mk(profile, k)
    if m == 0:
        raise ValueError(f"m_{k} = 0: a-sequence undefined")
    entries = tuple(profile.b_gap(g - k + 1 - i) - profile.b_star(i) for i in range(1, m + 1))
    lam = profile.partition
    if any(entries[i] <= entries[i + 1] for i in range(m - 1)):
        raise AssertionError(f"a-sequence not strictly decreasing: {entries}")
    if not set(entries) <= set(profile.w):
        raise AssertionError(f"a-sequence {entries} leaves the Weierstrass gaps {profile.w}")
    if sum(entries) != lam.tail_weight(k):
        raise AssertionError(f"a-sequence sum {sum(entries)} != N_(lambda,{k}) = {lam.tail_weight(k)}")
    return ASequence(k=k, m=m, entries=entries, sign=sign_ck(profile, k))


def extended_a_sequence(profile: GapProfile, k: int) -> ASequence:
    """A_k and c_k, allowing k = g where A_g is empty and c_g = +1."""
    if k == profile.genus:
        return ASequence(k=k, m=0, entries=(), sign=1)
    return a_sequence(profile, k)


# ---------------------------------------------------------- hyperelliptic strata

ODD = "odd_stratum"
EVEN = "even_stratum"


@dataclass(frozen=True)
class HyperellipticStratumSpec:
    g: int
    m0: int
    parity: str

    def __post_init__(self):
        if self.parity not in (ODD, EVEN):
            raise ValueError(f"parity must be {ODD!r} or {EVEN!r}")
        if self.g < 1 or self.m0 < 1:
            raise ValueError("genus and m0 must be positive")
        free = self.g + 1 - 2 * self.m0 if self.parity == ODD else self.g - 2 * self.m0
        if free < 0:
            raise ValueError(f"no {self.parity} stratum with m0={self.m0} in genus {self.g}")


def hyperelliptic_weierstrass_gaps(g: int) -> tuple[int, ...]:
    return tuple(range(1, 2 * g, 2))


def hyperelliptic_gaps(spec: HyperellipticStratumSpec) -> GapProfile:
    g, m0 = spec.g, spec.m0
    if spec.parity == ODD:
        base = g - 2 * m0
        gaps = list(range(0, base + 1)) + [base + 2 * i for i in range(1, 2 * m0)]
    else:
        base = g - 1 - 2 * m0
        gaps = list(range(0, base + 1)) + [base + 2 * i for i in range(1, 2 * m0 + 1)]
    return GapProfile(genus=g, b=tuple(gaps), w=hyperelliptic_weierstrass_gaps(g))


def hyperelliptic_strata(g: int) -> list[HyperellipticStratumSpec]:
    out = []
    for parity in (ODD, EVEN):
        m0 = 1
        while True:
            try:
                out.append(HyperellipticStratumSpec(g, m0, parity))
            except ValueError:
                break
            m0 += 1
    return out


def minus_delta_spec(g: int) -> HyperellipticStratumSpec:
    """Stratum containing e = -delta (all q_i at infinity)."""
    if g % 2:
        return HyperellipticStratumSpec(g, (g + 1) // 2, ODD)
    return HyperellipticStratumSpec(g, g // 2, EVEN)


# ------------------------------------------------------------------ rho sequences


@dataclass(frozen=True)
class RhoSequence:
    """Strictly decreasing rho(-1) > rho(-2) > ... with rho(j) = j below the prefix."""

    prefix: tuple[int, ...]

    def __post_init__(self):
        pre = tuple(int(x) for x in self.prefix)
        if any(pre[i] <= pre[i + 1] for i in range(len(pre) - 1)):
            raise ValueError(f"rho not strictly decreasing: {pre}")
        if pre and pre[-1] < -len(pre):
            raise ValueError(f"rho prefix {pre} cannot continue with rho(j) = j")
        object.__setattr__(self, "prefix", pre)

    def __call__(self, j: int) -> int:
        if j >= 0:
            raise IndexError(j)
        i = -j
        return self.prefix[i - 1] if i <= len(self.prefix) else j

    def values(self, n: int) -> list[int]:
        return [self(-i) for i in range(1, n + 1)]


def rho_from_partition(mu: Partition) -> RhoSequence:
    return RhoSequence(tuple(p - i for i, p in enumerate(mu.parts, start=1)))


def partition_from_rho(rho: RhoSequence | Iterable[int]) -> Partition:
    if not isinstance(rho, RhoSequence):
        rho = RhoSequence(tuple(rho))
    return Partition(tuple(r + i for i, r in enumerate(rho.prefix, start=1)))
