"""Sparse weighted polynomials over the rationals with weight truncation."""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Callable, Iterable, Mapping, Sequence

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)

Monomial = tuple[int, ...]


def as_q(x) -> mpq:
    if isinstance(x, str):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def t_weights(M: int) -> tuple[int, ...]:
    """Weights of t_1..t_M."""
    return tuple(range(1, M + 1))


class ExactSeries:
    """Polynomial in variables with positive integer weights, truncated at ``cutoff``.

    Terms are stored as ``{exponent tuple: mpq}``; zero coefficients and
    monomials heavier than the cutoff are never kept.
    """

    __slots__ = ("weights", "cutoff", "terms")

    def __init__(self, terms: Mapping[Monomial, object] | None, weights: Sequence[int], cutoff: int):
        self.weights = tuple(weights)
        self.cutoff = int(cutoff)
        clean: dict[Monomial, mpq] = {}
        if terms:
            n = len(self.weights)
            for mono, c in terms.items():
                if len(mono) != n:
                    raise ValueError(f"monomial {mono} has wrong arity for {n} variables")
                c = as_q(c)
                if c and self._wt(mono) <= self.cutoff:
                    clean[mono] = c
        self.terms = clean

    # construction -----------------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict, weights: tuple[int, ...], cutoff: int) -> "ExactSeries":
        s = cls.__new__(cls)
        s.weights, s.cutoff, s.terms = weights, cutoff, terms
        return s

    @classmethod
    def zero(cls, weights: Sequence[int], cutoff: int) -> "ExactSeries":
        return cls._raw({}, tuple(weights), int(cutoff))

    @classmethod
    def constant(cls, c, weights: Sequence[int], cutoff: int) -> "ExactSeries":
        c = as_q(c)
        w = tuple(weights)
        return cls._raw({(0,) * len(w): c} if c else {}, w, int(cutoff))

    @classmethod
    def variable(cls, index: int, weights: Sequence[int], cutoff: int) -> "ExactSeries":
        """The 1-based variable ``index``."""
        w = tuple(weights)
        mono = tuple(1 if k == index - 1 else 0 for k in range(len(w)))
        return cls({mono: 1}, w, cutoff)

    @classmethod
    def t(cls, i: int, W: int, M: int | None = None) -> "ExactSeries":
        return cls.variable(i, t_weights(M or W), W)

    def like(self, terms: dict) -> "ExactSeries":
        return ExactSeries._raw(terms, self.weights, self.cutoff)

    def _wt(self, mono: Monomial) -> int:
        return sum(w * e for w, e in zip(self.weights, mono))

    def monomial_weight(self, mono: Monomial) -> int:
        return self._wt(mono)

    @property
    def nvars(self) -> int:
        return len(self.weights)

    # inspection -------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "ExactSeries(0)"
        return f"ExactSeries({self.pretty()})"

    def pretty(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"t{w}" for w in self.weights] if len(set(self.weights)) == len(self.weights) else [
                f"x{k + 1}" for k in range(self.nvars)
            ]
        parts = []
        for mono in sorted(self.terms, key=self._order_key):
            c = self.terms[mono]
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
            parts.append(f"{c}" + ("*" + "*".join(factors) if factors else ""))
        return " + ".join(parts) if parts else "0"

    def _order_key(self, mono: Monomial):
        return (self._wt(mono), tuple(-e for e in mono))

    def coefficient(self, mono: Monomial | Mapping[int, int]) -> mpq:
        if isinstance(mono, Mapping):
            m = [0] * self.nvars
            for i, e in mono.items():
                m[i - 1] = e
            mono = tuple(m)
        return self.terms.get(tuple(mono), ZERO)

    def constant_term(self) -> mpq:
        return self.terms.get((0,) * self.nvars, ZERO)

    def support_variables(self) -> set[int]:
        """1-based indices of variables that occur."""
        out = set()
        for mono in self.terms:
            out.update(k + 1 for k, e in enumerate(mono) if e)
        return out

    def weights_present(self) -> set[int]:
        return {self._wt(m) for m in self.terms}

    def min_weight(self) -> int | None:
        return min(self.weights_present(), default=None)

    # graded pieces ------------------------------------------------------------
    def homogeneous(self, w: int) -> "ExactSeries":
        return self.like({m: c for m, c in self.terms.items() if self._wt(m) == w})

    def degree_part(self, d: int) -> "ExactSeries":
        return self.like({m: c for m, c in self.terms.items() if sum(m) == d})

    def min_degree(self) -> int | None:
        return min((sum(m) for m in self.terms), default=None)

    def lowest_degree_part(self) -> "ExactSeries":
        d = self.min_degree()
        return self.like({}) if d is None else self.degree_part(d)

    def truncate(self, cutoff: int) -> "ExactSeries":
        cutoff = min(cutoff, self.cutoff)
        return ExactSeries._raw({m: c for m, c in self.terms.items() if self._wt(m) <= cutoff}, self.weights, cutoff)

    def with_cutoff(self, cutoff: int) -> "ExactSeries":
        """Relabel the cutoff (terms heavier than it are dropped)."""
        return ExactSeries._raw({m: c for m, c in self.terms.items() if self._wt(m) <= cutoff}, self.weights, cutoff)

    def extend_vars(self, weights: Sequence[int]) -> "ExactSeries":
        """Embed into a ring whose variable list extends this one."""
        weights = tuple(weights)
        if weights[: self.nvars] != self.weights:
            raise ValueError("new variable list must extend the old one")
        pad = (0,) * (len(weights) - self.nvars)
        return ExactSeries._raw({m + pad: c for m, c in self.terms.items()}, weights, self.cutoff)

    # ring structure ---------------------------------------------------------
    def _check(self, other: "ExactSeries"):
        if other.weights != self.weights:
            raise ValueError("series live in different rings")

    def _coerce(self, other) -> "ExactSeries":
        if isinstance(other, ExactSeries):
            self._check(other)
            return other
        return ExactSeries.constant(other, self.weights, self.cutoff)

    def __add__(self, other) -> "ExactSeries":
        other = self._coerce(other)
        cutoff = min(self.cutoff, other.cutoff)
        out = {m: c for m, c in self.terms.items() if self._wt(m) <= cutoff} if other.cutoff < self.cutoff else dict(self.terms)
        for m, c in other.terms.items():
            if other.cutoff > cutoff and self._wt(m) > cutoff:
                continue
            v = out.get(m, ZERO) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return ExactSeries._raw(out, self.weights, cutoff)

    __radd__ = __add__

    def __neg__(self) -> "ExactSeries":
        return self.like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "ExactSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactSeries":
        return self._coerce(other) - self

    def scale(self, c) -> "ExactSeries":
        c = as_q(c)
        if not c:
            return self.like({})
        return self.like({m: c * v for m, v in self.terms.items()})

    def __mul__(self, other) -> "ExactSeries":
        if not isinstance(other, ExactSeries):
            return self.scale(other)
        self._check(other)
        cutoff = min(self.cutoff, other.cutoff)
        wt = self._wt
        a = [(m, c, wt(m)) for m, c in self.terms.items()]
        b = sorted(((m, c, wt(m)) for m, c in other.terms.items()), key=lambda x: x[2])
        out: dict[Monomial, mpq] = {}
        for ma, ca, wa in a:
            room = cutoff - wa
            if room < 0:
                continue
            for mb, cb, wb in b:
                if wb > room:
                    break
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, ZERO) + ca * cb
        return ExactSeries._raw({m: c for m, c in out.items() if c}, self.weights, cutoff)

    def __rmul__(self, other) -> "ExactSeries":
        return self.scale(other)

    def __truediv__(self, c) -> "ExactSeries":
        return self.scale(ONE / as_q(c))

    def __pow__(self, n: int) -> "ExactSeries":
        if n < 0:
            raise ValueError("negative power")
        result = ExactSeries.constant(1, self.weights, self.cutoff)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactSeries):
            return self.weights == other.weights and self.terms == other.terms
        return self.terms == ExactSeries.constant(other, self.weights, self.cutoff).terms

    def __hash__(self):
        return hash((self.weights, frozenset(self.terms.items())))

    # calculus ----------------------------------------------------------------
    def derive(self, I: Iterable[int]) -> "ExactSeries":
        """Iterated partial derivative in the 1-based variables listed in ``I``."""
        counts: dict[int, int] = {}
        for i in I:
            if i < 1 or i > self.nvars:
                if i < 1:
                    raise ValueError(f"derivative index {i} must be >= 1")
                return self.like({})
            counts[i - 1] = counts.get(i - 1, 0) + 1
        if not counts:
            return self
        out: dict[Monomial, mpq] = {}
        for m, c in self.terms.items():
            factor = 1
            new = list(m)
            for k, r in counts.items():
                if m[k] < r:
                    factor = 0
                    break
                factor *= factorial(m[k]) // factorial(m[k] - r)
                new[k] -= r
            if factor:
                out[tuple(new)] = c * factor
        return self.like(out)

    def at_zero_derivative(self, I: Iterable[int]) -> mpq:
        """``d_I f(0)``: multiplicity factorials times the coefficient of t^I."""
        mono = [0] * self.nvars
        for i in I:
            if i > self.nvars:
                return ZERO
            mono[i - 1] += 1
        f = 1
        for e in mono:
            f *= factorial(e)
        return self.terms.get(tuple(mono), ZERO) * f

    def map_coefficients(self, fn: Callable[[Monomial, mpq], mpq]) -> "ExactSeries":
        return self.like({m: v for m, c in self.terms.items() if (v := as_q(fn(m, c)))})

    def scale_variables(self, factors: Sequence) -> "ExactSeries":
        """Substitute t_i -> factors[i] * t_i."""
        fq = [as_q(f) for f in factors]

        def fn(m, c):
            for f, e in zip(fq, m):
                if e:
                    c = c * f**e
            return c

        return self.map_coefficients(fn)

    def negate_variables(self) -> "ExactSeries":
        """f(-t)."""
        return self.like({m: (-c if sum(m) % 2 else c) for m, c in self.terms.items()})

    def substitute(self, images: Sequence["ExactSeries"]) -> "ExactSeries":
        """Ring homomorphism sending variable k to ``images[k]``.

        All images must live in one target ring; the result carries the
        target cutoff.
        """
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0]
        powers: list[list[ExactSeries]] = [[ExactSeries.constant(1, target.weights, target.cutoff)] for _ in images]

        def power(k: int, e: int) -> ExactSeries:
            lst = powers[k]
            while len(lst) <= e:
                lst.append(lst[-1] * images[k])
            return lst[e]

        out = ExactSeries.zero(target.weights, target.cutoff)
        acc: dict[Monomial, mpq] = {}
        for m, c in self.terms.items():
            term = None
            for k, e in enumerate(m):
                if e:
                    p = power(k, e)
                    term = p if term is None else term * p
                    if not term.terms:
                        break
            if term is None:
                term = ExactSeries.constant(1, target.weights, target.cutoff)
            for mm, cc in term.terms.items():
                acc[mm] = acc.get(mm, ZERO) + c * cc
        out.terms = {m: c for m, c in acc.items() if c}
        return out

    def evaluate(self, values: Sequence) -> object:
        """Evaluate at a point (exact if the values are rationals, else numeric)."""
        total = 0
        for m, c in self.terms.items():
            term = c
            for v, e in zip(values, m):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def evaluate_float(self, values: Sequence[complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            term = complex(float(c))
            for v, e in zip(values, m):
                if e:
                    term *= v**e
            total += term
        return total

    # serialization ------------------------------------------------------------
    def to_records(self) -> list[dict]:
        """Records ``{exponents: {i: e}, coeff: "p/q"}`` in graded-lex order."""
        out = []
        for m in sorted(self.terms, key=self._order_key):
            out.append(
                {
                    "exponents": {str(k + 1): e for k, e in enumerate(m) if e},
                    "coeff": str(self.terms[m]),
                }
            )
        return out

    @classmethod
    def from_records(cls, records: list[dict], weights: Sequence[int], cutoff: int) -> "ExactSeries":
        n = len(weights)
        terms: dict[Monomial, mpq] = {}
        for rec in records:
            m = [0] * n
            for k, e in rec["exponents"].items():
                m[int(k) - 1] = int(e)
            terms[tuple(m)] = terms.get(tuple(m), ZERO) + mpq(rec["coeff"])
        return cls(terms, weights, cutoff)


def exp_series(f: ExactSeries) -> ExactSeries:
    """exp(f) for f without constant term, via f' recursion on degree."""
    if f.constant_term():
        raise ValueError("exp needs zero constant term")
    result = ExactSeries.constant(1, f.weights, f.cutoff)
    term = result
    n = 1
    while True:
        term = (term * f) / n
        if not term.terms:
            break
        result = result + term
        n += 1
    return result


def miwa_images(k: int, W: int, M: int | None = None) -> list[ExactSeries]:
    """Images of t_n under t -> [x_1] + ... + [x_k], in a degree-graded ring in x."""
    M = M or W
    xw = (1,) * k
    images = []
    for n in range(1, M + 1):
        terms = {}
        if k:
            for i in range(k):
                mono = tuple(n if j == i else 0 for j in range(k))
                terms[mono] = mpq(1, n)
        images.append(ExactSeries(terms, xw, W))
    return images


def eval_miwa(series: ExactSeries, k: int) -> ExactSeries:
    """s(sum_{i<=k} [x_i]) as an exact polynomial in x_1..x_k.

    For k = 0 this is the constant term, as a series in zero variables.
    """
    if k == 0:
        return ExactSeries.constant(series.constant_term(), (), series.cutoff)
    return series.substitute(miwa_images(k, series.cutoff, series.nvars))
