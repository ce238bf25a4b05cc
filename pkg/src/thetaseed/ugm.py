"""Truncated Sato theory: band-limited frames, Plücker coordinates and tau series.

Vectors are indexed by integers; ``e_i`` is the i-th unit vector.  A frame in
the cell of ``lambda`` has columns ``j = -1, -2, ...`` with pivot
``rho(j) = lambda_{-j} + j``; only the first ``n_cols`` columns are perturbed,
deeper columns are the unit vectors ``e_j``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial, prod
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

from .partitions import GapProfile, Partition, a_sequence, extended_a_sequence, mk, rho_from_partition
from .schur import p_poly, schur
from .series import ZERO, ExactSeries, as_q, eval_miwa, t_weights


class FrameError(ValueError):
    pass


def det_q(rows: list[list[mpq]]) -> mpq:
    """Exact determinant by Gaussian elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    result = mpq(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return mpq(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        p = a[c][c]
        result *= p
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] / p
                for k in range(c + 1, n):
                    if a[c][k]:
                        a[r][k] -= f * a[c][k]
    return result * sign


# ------------------------------------------------------------------ frames


@dataclass(frozen=True)
class UGMFrame:
    lam: Partition
    band: int = 8
    n_cols: int | None = None
    coeffs: Mapping[tuple[int, int], mpq] = field(default_factory=dict)

    def __post_init__(self):
        n_cols = self.n_cols if self.n_cols is not None else max(self.lam.length, 1)
        if n_cols < self.lam.length:
            raise FrameError("n_cols must be at least l(lambda)")
        object.__setattr__(self, "n_cols", n_cols)
        clean = {}
        for (i, j), v in dict(self.coeffs).items():
            v = as_q(v)
            if not v:
                continue
            if not self.allowed(i, j):
                raise FrameError(f"entry ({i},{j}) violates the normalization or band limit")
            clean[(int(i), int(j))] = v
        object.__setattr__(self, "coeffs", clean)

    @property
    def rho(self):
        return rho_from_partition(self.lam)

    def pivot(self, j: int) -> int:
        return self.rho(j)

    def allowed(self, i: int, j: int) -> bool:
        if not -self.n_cols <= j <= -1:
            return False
        r = self.pivot(j)
        if not r < i <= r + self.band:
            return False
        return i not in {self.pivot(jj) for jj in range(j + 1, 0)}

    def allowed_positions(self) -> list[tuple[int, int]]:
        out = []
        for j in range(-1, -self.n_cols - 1, -1):
            r = self.pivot(j)
            out.extend((i, j) for i in range(r + 1, r + self.band + 1) if self.allowed(i, j))
        return out

    def entry(self, i: int, j: int) -> mpq:
        if i == self.pivot(j):
            return mpq(1)
        return self.coeffs.get((i, j), ZERO)

    def column(self, j: int) -> dict[int, mpq]:
        col = {self.pivot(j): mpq(1)}
        for (i, jj), v in self.coeffs.items():
            if jj == j:
                col[i] = v
        return col

    @property
    def max_row(self) -> int:
        return self.pivot(-1) + self.band

    @classmethod
    def random(cls, lam: Partition, band: int = 3, n_cols: int | None = None, rng: random.Random | None = None,
               density: float = 0.5, max_int: int = 3, rational: bool = False) -> "UGMFrame":
        rng = rng or random.Random(0)
        base = cls(lam, band, n_cols)
        coeffs = {}
        for pos in base.allowed_positions():
            if rng.random() < density:
                v = rng.randint(-max_int, max_int)
                if rational and v:
                    v = mpq(v, rng.randint(1, max_int))
                coeffs[pos] = v
        return cls(lam, band, base.n_cols, coeffs)

    def with_entry(self, i: int, j: int, value) -> "UGMFrame":
        c = dict(self.coeffs)
        c[(i, j)] = as_q(value)
        return UGMFrame(self.lam, self.band, self.n_cols, c)

    def to_json(self) -> dict:
        return {
            "lambda": list(self.lam.parts),
            "band": self.band,
            "n_cols": self.n_cols,
            "coeffs": [{"i": i, "j": j, "value": str(v)} for (i, j), v in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "UGMFrame":
        coeffs = {(int(c["i"]), int(c["j"])): mpq(str(c["value"])) for c in data.get("coeffs", [])}
        return cls(Partition(tuple(data["lambda"])), int(data.get("band", 8)), data.get("n_cols"), coeffs)


def plucker(frame: UGMFrame, mu: Partition) -> mpq:
    """xi_mu = det(xi_{rho_mu(-i), -j}) over a window covering every perturbed column."""
    N = max(frame.n_cols, mu.length)
    rows = [mu.part(i) - i for i in range(1, N + 1)]
    return det_q([[frame.entry(r, -j) for j in range(1, N + 1)] for r in rows])


def box_partitions(max_weight: int, max_length: int, max_part: int) -> Iterator[Partition]:
    """Partitions with weight <= max_weight inside an l x p box."""

    def rec(prefix: tuple[int, ...], rest: int, cap: int):
        yield prefix
        if len(prefix) == max_length:
            return
        for p in range(min(cap, rest), 0, -1):
            yield from rec(prefix + (p,), rest - p, p)

    for parts in rec((), max_weight, max_part):
        yield Partition(parts)


# ------------------------------------------------------------------ tau series


class TauSeries:
    """Sum of xi_mu s_mu over recorded Plücker data, truncated at weight ``W``."""

    def __init__(self, lam: Partition, provenance: Mapping[Partition, object], W: int, M: int | None = None,
                 schur_method: str = "mn"):
        self.lam = lam
        self.W = int(W)
        self.M = self.W if M is None else M
        self.provenance = {mu: as_q(v) for mu, v in provenance.items() if as_q(v) and mu.weight <= self.W}
        self.schur_method = schur_method
        self._series: ExactSeries | None = None

    @property
    def series(self) -> ExactSeries:
        if self._series is None:
            acc: dict = {}
            for mu, xi in self.provenance.items():
                for m, c in schur(mu, self.W, M=self.M, method=self.schur_method).terms.items():
                    acc[m] = acc.get(m, ZERO) + xi * c
            self._series = ExactSeries({m: c for m, c in acc.items() if c}, t_weights(self.M), self.W)
        return self._series

    @property
    def min_weight(self) -> int:
        return min((mu.weight for mu in self.provenance), default=0)

    def __repr__(self):
        return f"TauSeries(lambda={self.lam.parts}, W={self.W}, terms={len(self.provenance)})"

    def bivariate(self, x_order: int, z_order: int) -> dict[tuple[int, int], mpq]:
        """Coefficients of tau(x e_1 + [z]) as {(a, b): c} for x^a z^b with a + b <= W."""
        out: dict[tuple[int, int], mpq] = {}
        for mu, xi in self.provenance.items():
            for nu, strip in horizontal_strips(mu):
                a = nu.weight
                if a > x_order or strip > z_order:
                    continue
                out[(a, strip)] = out.get((a, strip), ZERO) + xi / hook_product(nu)
        return {k: v for k, v in out.items() if v}


def tau_from_frame(frame: UGMFrame, W: int, schur_method: str = "mn") -> TauSeries:
    prov = {}
    bound_part = frame.max_row + 1
    for mu in box_partitions(W, frame.n_cols, max(bound_part, 0)):
        xi = plucker(frame, mu)
        if xi:
            prov[mu] = xi
    if prov.get(frame.lam) != 1:
        raise FrameError("xi_lambda != 1: frame is not normalized")
    return TauSeries(frame.lam, prov, W, schur_method=schur_method)


def tau_from_coefficients(coeffs: Mapping[Partition, object], W: int) -> TauSeries:
    """Ad hoc linear combination of Schur functions (not necessarily a tau function)."""
    coeffs = {mu: as_q(v) for mu, v in coeffs.items()}
    lam = min((mu for mu, v in coeffs.items() if v), key=lambda m: (m.weight, m.parts), default=Partition())
    return TauSeries(lam, coeffs, W)


@lru_cache(maxsize=None)
def hook_product(nu: Partition) -> int:
    conj = nu.conjugate()
    return prod(nu.part(i) - j + conj.part(j) - i + 1 for i in range(1, nu.length + 1) for j in range(1, nu.part(i) + 1))


@lru_cache(maxsize=None)
def horizontal_strips(mu: Partition) -> tuple[tuple[Partition, int], ...]:
    """All nu with mu/nu a horizontal strip, paired with |mu/nu|."""
    ranges = [range(mu.part(i + 1), mu.part(i) + 1) for i in range(1, mu.length + 1)]
    out = []

    def rec(i: int, acc: tuple[int, ...]):
        if i == len(ranges):
            nu = Partition(acc)
            out.append((nu, mu.weight - nu.weight))
            return
        for v in ranges[i]:
            rec(i + 1, acc + (v,))

    rec(0, ())
    return tuple(out)


# ------------------------------------------------------------------ bilinear identity


def _shift_expand(series: ExactSeries, sign: int) -> dict[int, dict[tuple[int, ...], mpq]]:
    """tau(v + sign*[k^-1]) as {m: {monomial: coeff}} for the power k^m (m <= 0)."""
    out: dict[int, dict] = {}
    W = series.cutoff
    for mono, c in series.terms.items():
        # per-variable binomial choices
        choices = []
        for idx, e in enumerate(mono):
            i = idx + 1
            if not e:
                continue
            opts = []
            for r in range(e + 1):
                coeff = comb(e, r) * mpq(sign, i) ** r
                opts.append((idx, e - r, i * r, coeff))
            choices.append(opts)
        states = [((), 0, c)]
        for opts in choices:
            new_states = []
            for part, kdeg, cc in states:
                for idx, rem, kd, coeff in opts:
                    new_states.append((part + ((idx, rem),), kdeg + kd, cc * coeff))
            states = new_states
        n = len(mono)
        for part, kdeg, cc in states:
            m = [0] * n
            for idx, rem in part:
                m[idx] = rem
            bucket = out.setdefault(-kdeg, {})
            key = tuple(m)
            bucket[key] = bucket.get(key, ZERO) + cc
    return out


def _laurent_times_exp(shifted: dict[int, dict], sign: int, W: int, M: int) -> dict[int, dict]:
    """Multiply by exp(sign * sum v_i k^i), keeping monomial weight <= W."""
    weights = t_weights(M)
    exps = []
    for n in range(W + 1):
        p = p_poly(n, W, M)
        if sign < 0:
            p = p.negate_variables()
        exps.append(list((m, c, sum(w * e for w, e in zip(weights, m))) for m, c in p.terms.items()))
    out: dict[int, dict] = {}
    for mk_, bucket in shifted.items():
        items = [(m, c, sum(w * e for w, e in zip(weights, m))) for m, c in bucket.items()]
        items = [x for x in items if x[2] <= W]
        for n in range(W + 1):
            target = out.setdefault(mk_ + n, {})
            for m1, c1, w1 in items:
                room = W - w1
                if n > room:
                    continue
                for m2, c2, w2 in exps[n]:
                    key = tuple(a + b for a, b in zip(m1, m2))
                    target[key] = target.get(key, ZERO) + c1 * c2
    return {k: {m: c for m, c in v.items() if c} for k, v in out.items()}


@dataclass
class HirotaResidue:
    """Residue coefficient in the separated variables a = t + s, b = t - s."""

    series_ab: ExactSeries
    W: int
    M: int

    def is_zero(self) -> bool:
        return self.series_ab.is_zero()

    def to_ts(self) -> ExactSeries:
        """Re-express in (t, s) with a = t + s, b = t - s."""
        M = self.M
        weights = t_weights(M) + t_weights(M)
        images = []
        for sgn in (1, -1):
            for i in range(1, M + 1):
                t = ExactSeries.variable(i, weights, self.W)
                s = ExactSeries.variable(M + i, weights, self.W)
                images.append(t + s if sgn > 0 else t - s)
        return self.series_ab.substitute(images)


def hirota_residue(tau: TauSeries | ExactSeries, W: int, lowest_weight: int | None = None) -> HirotaResidue:
    """Coefficient of k^-1 in tau(t-s-[k^-1]) tau(t+s+[k^-1]) exp(-2 sum s_i k^i), joint weight <= W."""
    if isinstance(tau, TauSeries):
        series = tau.series
        lo = tau.min_weight if lowest_weight is None else lowest_weight
    else:
        series = tau
        lo = series.min_weight() or 0 if lowest_weight is None else lowest_weight
    need = W + 1 - lo
    if series.cutoff < need:
        raise ValueError(f"tau cutoff {series.cutoff} too small; need >= {need} for joint weight {W}")
    M = W
    weights = t_weights(M)
    pad = (0,) * max(M - series.nvars, 0)
    trimmed = {m[:M] + pad: c for m, c in series.terms.items() if not any(m[M:]) and
               sum(w * e for w, e in zip(weights, m[:M])) <= need}
    base = ExactSeries._raw(trimmed, weights, need)
    F = _laurent_times_exp(_shift_expand(base, -1), +1, W, M)
    G = _laurent_times_exp(_shift_expand(base, +1), -1, W, M)

    def wt(m):
        return sum(w * e for w, e in zip(weights, m))

    acc: dict[tuple[int, ...], mpq] = {}
    for n, Fn in F.items():
        Gn = G.get(-1 - n)
        if not Gn:
            continue
        g_items = sorted(((m, c, wt(m)) for m, c in Gn.items()), key=lambda x: x[2])
        for mb, cb in Fn.items():
            room = W - wt(mb)
            for ma, ca, wa in g_items:
                if wa > room:
                    break
                key = ma + mb
                acc[key] = acc.get(key, ZERO) + ca * cb
    res = ExactSeries({k: v for k, v in acc.items() if v}, weights + weights, W)
    return HirotaResidue(res, W, M)


def hirota_derivative(series: ExactSeries, gamma: Mapping[int, int], cutoff: int) -> ExactSeries:
    """D^gamma tau . tau = gamma! sum_{alpha+beta=gamma} (-1)^|beta| d^alpha tau d^beta tau / (alpha! beta!)."""
    idx = sorted(gamma)
    ranges = [range(gamma[i] + 1) for i in idx]
    s = series.with_cutoff(series.cutoff)
    total = ExactSeries.zero(series.weights, cutoff)
    gfact = prod(factorial(gamma[i]) for i in idx)

    def rec(pos: int, alpha: list[int]):
        nonlocal total
        if pos == len(idx):
            beta = [gamma[i] - a for i, a in zip(idx, alpha)]
            da = s.derive([i for i, a in zip(idx, alpha) for _ in range(a)])
            db = s.derive([i for i, b in zip(idx, beta) for _ in range(b)])
            coeff = mpq(gfact, prod(factorial(a) for a in alpha) * prod(factorial(b) for b in beta))
            if sum(beta) % 2:
                coeff = -coeff
            total = total + (da.with_cutoff(cutoff) * db.with_cutoff(cutoff)).scale(coeff)
            return
        for a in ranges[pos]:
            rec(pos + 1, alpha + [a])

    rec(0, [])
    return total


def kp_expression(tau: TauSeries | ExactSeries, lowest_weight: int | None = None) -> ExactSeries:
    """(D1^4 + 3 D2^2 - 4 D1 D3) tau . tau, exact up to its returned cutoff."""
    series = tau.series if isinstance(tau, TauSeries) else tau
    lo = (tau.min_weight if isinstance(tau, TauSeries) else (series.min_weight() or 0)) if lowest_weight is None else lowest_weight
    cutoff = series.cutoff + lo - 4
    if cutoff < 0:
        raise ValueError("tau cutoff too small for the KP check")
    return (hirota_derivative(series, {1: 4}, cutoff)
            + hirota_derivative(series, {2: 2}, cutoff).scale(3)
            - hirota_derivative(series, {1: 1, 3: 1}, cutoff).scale(4))


def kp_equation_check(tau: TauSeries | ExactSeries) -> bool:
    series = tau.series if isinstance(tau, TauSeries) else tau
    if series.cutoff < 8:
        raise ValueError("KP check needs cutoff >= 8")
    return kp_expression(tau).is_zero()


# ------------------------------------------------------------------ tau^{(k)} and the theorems


def tau_k(tau: TauSeries, k: int, genus: int | None = None) -> ExactSeries:
    g = max(tau.lam.length, k) if genus is None else genus
    if not 0 <= k <= g:
        raise ValueError(f"k={k} outside [0, {g}]")
    if not tau.provenance:
        raise ValueError("tau_k needs Plücker provenance")
    weights = t_weights(tau.M)
    if k == 0:
        return ExactSeries.constant(1, weights, tau.W)
    acc: dict = {}
    lam = tau.lam
    for mu, xi in tau.provenance.items():
        if mu.length > g or any(mu.part(i) != lam.part(i) for i in range(k + 1, g + 1)):
            continue
        for m, c in schur(mu.truncate(k), tau.W, M=tau.M, method=tau.schur_method).terms.items():
            acc[m] = acc.get(m, ZERO) + xi * c
    return ExactSeries({m: c for m, c in acc.items() if c}, weights, tau.W)


def _x_truncate(p: ExactSeries, deg: int) -> dict:
    return {m: c for m, c in p.terms.items() if sum(m) <= deg}


def _leading_in_last(p: ExactSeries, power: int) -> tuple[bool, dict]:
    """Check no term has x_k-degree below ``power``; return the x_k^power coefficient."""
    low_ok = all(m[-1] >= power for m in p.terms)
    coeff = {m[:-1]: c for m, c in p.terms.items() if m[-1] == power}
    return low_ok, coeff


@dataclass
class TauReport:
    name: str
    passed: bool
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def theorem_tauAJ_check(tau: TauSeries, profile: GapProfile, k: int, sign: int | None = None,
                        a_entries: Sequence[int] | None = None) -> TauReport:
    """Derivatives of tau along A_k on Miwa points, and the leading-order chain in x_k."""
    g = profile.genus
    lam = profile.partition
    if lam != tau.lam:
        raise ValueError("tau lives in a different cell")
    if mk(profile, k) == 0:
        raise ValueError(f"m_{k} = 0")
    seq = a_sequence(profile, k)
    A = tuple(a_entries) if a_entries is not None else seq.entries
    c = seq.sign if sign is None else sign
    N = lam.tail_weight(k)
    deg = tau.W - N
    lhs = eval_miwa(tau.series.derive(A), k)
    tk = tau_k(tau, k, g)
    rhs = eval_miwa(tk, k).scale(c)
    ok_i = _x_truncate(lhs, deg) == _x_truncate(rhs, deg)
    checks = {"derivative_equals_tau_k": ok_i}
    if k >= 1:
        deg_prev = tau.W - lam.tail_weight(k - 1)
        low_ok, lead = _leading_in_last(eval_miwa(tk, k), lam.part(k))
        prev = eval_miwa(tau_k(tau, k - 1, g), k - 1)
        ok_ii = low_ok and _x_truncate_dict(lead, deg_prev) == _x_truncate(prev, deg_prev)
        checks["tau_k_leading_order"] = ok_ii
        prev_seq = a_sequence(profile, k - 1)
        low_ok3, lead3 = _leading_in_last(lhs, lam.part(k))
        prev_lhs = eval_miwa(tau.series.derive(prev_seq.entries), k - 1)
        ratio = mpq(c, prev_seq.sign)
        target = {m: v * ratio for m, v in _x_truncate(prev_lhs, deg_prev).items()}
        ok_iii = low_ok3 and _x_truncate_dict(lead3, deg_prev) == target
        checks["chain_ratio_c_k_over_c_k_minus_1"] = ok_iii
    return TauReport("tau_abel_jacobi_expansion", all(checks.values()), checks,
                     {"k": k, "A_k": list(A), "c_k": c, "compared_degree": deg})


def _x_truncate_dict(d: dict, deg: int) -> dict:
    return {m: c for m, c in d.items() if sum(m) <= deg and c}


def tau_vanishing_check(tau: TauSeries, profile: GapProfile, sign: int | None = None,
                        a_entries: Sequence[int] | None = None) -> TauReport:
    lam = profile.partition
    m0 = mk(profile, 0)
    seq = a_sequence(profile, 0)
    A0 = tuple(a_entries) if a_entries is not None else seq.entries
    c0 = seq.sign if sign is None else sign
    s = tau.series
    Wscan = min(tau.W, s.nvars)
    ok_i = ok_ii = True
    scanned = 0
    for size in range(m0 + 3):
        for I in combinations_with_replacement(range(1, Wscan + 1), size):
            scanned += 1
            v = s.at_zero_derivative(I)
            if sum(I) < lam.weight and v:
                ok_i = False
            if size < m0 and v:
                ok_ii = False
    ok_iii = s.at_zero_derivative(A0) == c0
    checks = {"below_weight_vanishes": ok_i, "low_degree_vanishes": ok_ii, "a0_derivative_is_c0": ok_iii}
    return TauReport("tau_vanishing_at_origin", all(checks.values()), checks,
                     {"slice": f"index multisets with entries <= {Wscan} and size <= {m0 + 2}", "scanned": scanned})


# ------------------------------------------------------------------ wave functions


@dataclass
class AdjointWave:
    """x^{m0} Psi(x, 0, ...; z) as {(a, p): c} for x^a z^p.

    ``order`` is the weight to which tau was resolved.
    """

    m0: int
    coeffs: dict[tuple[int, int], mpq]
    order: int

    def exact(self, a: int, p: int) -> bool:
        return a <= self.order - self.m0 and a + p <= self.order

    def psi_i(self, i: int) -> dict[int, mpq]:
        """Psi_i(z) = i! [x^i] as {power of z: coefficient}."""
        f = factorial(i)
        return {p: c * f for (a, p), c in self.coeffs.items() if a == i}


def _series_div(num: dict[tuple[int, int], mpq], den: list[mpq], amax: int, bmax_total: int) -> dict:
    """num(x, z) / den(x) as a power series in x, truncated at x^amax and a + b <= bmax_total."""
    inv = [mpq(0)] * (amax + 1)
    inv[0] = 1 / den[0]
    for n in range(1, amax + 1):
        acc = mpq(0)
        for j in range(1, min(n, len(den) - 1) + 1):
            acc += den[j] * inv[n - j]
        inv[n] = -acc / den[0]
    out: dict = {}
    for (a, b), c in num.items():
        for d in range(0, amax - a + 1):
            if a + d + b > bmax_total or not inv[d]:
                continue
            key = (a + d, b)
            out[key] = out.get(key, ZERO) + c * inv[d]
    return {k: v for k, v in out.items() if v}


def adjoint_wave(tau: TauSeries, order: int | None = None) -> AdjointWave:
    """Expansion of x^{m0} tau(x e_1 + [z]) / tau(x e_1) * exp(-x/z)."""
    order = tau.W if order is None else order
    if order > tau.W:
        raise ValueError("order exceeds tau cutoff")
    biv = tau.bivariate(order, order)
    biv = {k: v for k, v in biv.items() if k[0] + k[1] <= order}
    D = [biv.get((a, 0), ZERO) for a in range(order + 1)]
    m0 = next((a for a, v in enumerate(D) if v), None)
    if m0 is None:
        raise ValueError("tau(x, 0, ...) vanishes to the resolved order; increase the order")
    T = D[m0:]
    amax = order - m0
    ratio = _series_div(biv, T, amax, order)
    coeffs: dict = {}
    for (a, b), c in ratio.items():
        for cexp in range(0, amax - a + 1):
            key = (a + cexp, b - cexp)
            v = c * mpq((-1) ** cexp, factorial(cexp))
            coeffs[key] = coeffs.get(key, ZERO) + v
    coeffs = {k: v for k, v in coeffs.items() if v}
    return AdjointWave(m0, coeffs, order)


@dataclass
class RecoveredFrame:
    """Normalized columns recovered from the wave function, with row ceilings."""

    columns: list[dict[int, mpq]]
    pivots: list[int]
    ceilings: list[int]

    @property
    def lam(self) -> Partition:
        return Partition(tuple(max(p + i, 0) for i, p in enumerate(self.pivots, start=1)))

    def entry(self, i: int, j: int) -> mpq:
        idx = -j - 1
        if idx >= len(self.columns):
            return mpq(1) if i == j else ZERO
        if i > self.ceilings[idx]:
            raise FrameError(f"row {i} of column {j} lies above the recovered depth {self.ceilings[idx]}")
        return self.columns[idx].get(i, ZERO)


def frame_from_wave(tau: TauSeries, depth: int, order: int | None = None) -> RecoveredFrame:
    """Span of Psi_i(z) for i < depth, with z^p read as e_{p-1}, brought to normalized form."""
    wave = adjoint_wave(tau, order)
    top = wave.order - wave.m0
    vecs: list[tuple[dict[int, mpq], int]] = []
    for i in range(depth):
        psi = wave.psi_i(i)
        ceiling = top - i - 1
        v = {p - 1: c for p, c in psi.items() if p - 1 <= ceiling}
        vecs.append((v, ceiling))
    # echelon form on the lowest nonzero row
    basis: dict[int, tuple[dict[int, mpq], int]] = {}
    for v, ceil in vecs:
        v = dict(v)
        while v:
            low = min(v)
            if low not in basis:
                break
            b, bceil = basis[low]
            f = v[low] / b[low]
            for r, c in b.items():
                nv = v.get(r, ZERO) - f * c
                if nv:
                    v[r] = nv
                else:
                    v.pop(r, None)
            ceil = min(ceil, bceil)
            v = {r: c for r, c in v.items() if r <= ceil}
        if v:
            low = min(v)
            pv = v[low]
            basis[low] = ({r: c / pv for r, c in v.items()}, ceil)
    pivots = sorted(basis, reverse=True)
    # clear entries sitting on higher pivots
    for p in sorted(pivots):
        v, ceil = basis[p]
        for q in sorted(x for x in pivots if x > p):
            if q > ceil:
                break
            c = v.get(q)
            if not c:
                continue
            b, bceil = basis[q]
            for r, cc in b.items():
                nv = v.get(r, ZERO) - c * cc
                if nv:
                    v[r] = nv
                else:
                    v.pop(r, None)
            ceil = min(ceil, bceil)
            v = {r: c2 for r, c2 in v.items() if r <= ceil}
        basis[p] = (v, ceil)
    cols = [basis[p][0] for p in pivots]
    ceilings = [basis[p][1] for p in pivots]
    return RecoveredFrame(cols, pivots, ceilings)


def recovered_plucker(rec: RecoveredFrame, mu: Partition) -> mpq:
    N = max(len(rec.columns), mu.length)
    rows = [mu.part(i) - i for i in range(1, N + 1)]
    return det_q([[rec.entry(r, -j) for j in range(1, N + 1)] for r in rows])


def projective_match(source: Mapping[Partition, mpq], recovered: Mapping[Partition, mpq]) -> tuple[bool, mpq | None]:
    """True if the recovered coordinates are one fixed multiple of the source ones."""
    keys = set(source) | set(recovered)
    ref = next((k for k in sorted(keys, key=lambda m: (m.weight, m.parts)) if source.get(k)), None)
    if ref is None:
        return all(not recovered.get(k) for k in keys), None
    scale = recovered.get(ref, ZERO) / source[ref]
    if not scale:
        return False, scale
    ok = all(recovered.get(k, ZERO) == scale * source.get(k, ZERO) for k in keys)
    return ok, scale
