"""Hyperelliptic curves y^2 = prod (x - e_j): periods, Abel-Jacobi map, Riemann constant.

Conventions
-----------
* Branch points are sorted by (real, imag).  ``alpha_i`` encircles the cut
  ``[e_{2i-1}, e_{2i}]``; ``beta_i`` runs from cut i to the last cut.
* ``du_i = -x^{g-i} dx / (2y)`` for ``i = 1..g``, so that near infinity, with
  ``x = z^-2`` and ``y = z^-(2g+1) sqrt(h(z))``, ``h(z) = prod(1 - e_j z^2)``,
  one has ``du_i = z^{2i-2} dz / sqrt(h(z))``.
* On the x-plane ``y`` is ``prod sqrt_down(x - e_j)`` where ``sqrt_down`` has
  its cut pointing down; along z-paths from infinity ``sqrt(h)`` is continued
  analytically from ``sqrt(h(0)) = 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss


class CurveError(ValueError):
    pass


def sqrt_down(w):
    """Square root with arg in (-pi/2, 3pi/2]: the cut runs down the negative imaginary axis."""
    w = np.asarray(w, dtype=complex)
    r = np.sqrt(np.abs(w))
    a = np.angle(w)
    a = np.where(a <= -np.pi / 2, a + 2 * np.pi, a)
    return r * np.exp(0.5j * a)


@dataclass(frozen=True)
class HyperellipticCurve:
    branch_points: tuple[complex, ...]
    min_separation: float = 1e-6

    def __post_init__(self):
        pts = tuple(sorted((complex(e) for e in self.branch_points), key=lambda c: (c.real, c.imag)))
        if len(pts) < 3 or len(pts) % 2 == 0:
            raise CurveError("need 2g+1 finite branch points")
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                if abs(pts[a] - pts[b]) <= self.min_separation:
                    raise CurveError(f"branch points {pts[a]} and {pts[b]} are not distinct")
        object.__setattr__(self, "branch_points", pts)

    @property
    def genus(self) -> int:
        return (len(self.branch_points) - 1) // 2

    @property
    def weierstrass_gaps(self) -> tuple[int, ...]:
        return tuple(range(1, 2 * self.genus, 2))

    def f(self, x):
        return np.prod([x - e for e in self.branch_points], axis=0)

    def Y(self, x):
        """The x-plane branch of y."""
        x = np.asarray(x, dtype=complex)
        out = np.ones_like(x)
        for e in self.branch_points:
            out = out * sqrt_down(x - e)
        return out

    def point(self, x: complex, sheet: int = 1) -> "CurvePoint":
        x = complex(x)
        return CurvePoint(x, sheet * complex(self.Y(x)))

    def involution(self, p: "CurvePoint") -> "CurvePoint":
        return p if p.is_infinity else CurvePoint(p.x, -p.y)

    def is_branch_point(self, x: complex, tol: float = 1e-12) -> bool:
        return any(abs(x - e) <= tol for e in self.branch_points)

    def to_json(self) -> dict:
        return {"genus": self.genus, "branch_points": [[e.real, e.imag] for e in self.branch_points]}

    @classmethod
    def from_json(cls, data: dict | str | Path) -> "HyperellipticCurve":
        if isinstance(data, Path) or (isinstance(data, str) and not data.lstrip().startswith("{")):
            data = json.loads(Path(data).read_text())
        elif isinstance(data, str):
            data = json.loads(data)
        pts = [complex(p[0], p[1]) if isinstance(p, (list, tuple)) else complex(p) for p in data["branch_points"]]
        curve = cls(tuple(pts))
        if "genus" in data and int(data["genus"]) != curve.genus:
            raise CurveError(f"genus {data['genus']} does not match {len(pts)} branch points")
        return curve


@dataclass(frozen=True)
class CurvePoint:
    x: complex
    y: complex
    is_infinity: bool = False

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls(complex("inf"), complex("inf"), True)


# ------------------------------------------------------------ differentials


def inverse_sqrt_h_coefficients(branch_points: Sequence, n: int) -> list:
    """Coefficients c_m of prod (1 - e_j u)^{-1/2} = sum c_m u^m, m < n.

    Exact if the branch points are Fractions or ints.
    """
    exact = all(isinstance(e, (int, Fraction)) for e in branch_points)
    # power sums P_k = sum e_j^k; log = (1/2) sum_k P_k u^k / k
    # c' = c * L'  with L' = (1/2) sum_k P_k u^{k-1}
    P = [sum((Fraction(e) if exact else complex(e)) ** k for e in branch_points) for k in range(n + 1)]
    one = Fraction(1) if exact else 1.0 + 0j
    c = [one] + [0 * one] * (n - 1)
    for m in range(1, n):
        acc = 0 * one
        for k in range(1, m + 1):
            acc += P[k] * c[m - k]
        c[m] = acc / (2 * m)
    return c


@dataclass
class DifferentialBasis:
    genus: int
    weights: tuple[int, ...]
    B: np.ndarray  # g x J, du_i = sum_j B[i, j-1] z^{j-1} dz
    B_exact: list | None = None

    def triangular_ok(self) -> bool:
        for i, w in enumerate(self.weights):
            if np.any(np.abs(self.B[i, : w - 1]) > 0) or abs(self.B[i, w - 1] - 1) > 1e-14:
                return False
        return True


def du_basis(curve: HyperellipticCurve, J: int | None = None, exact_points: Sequence | None = None) -> DifferentialBasis:
    """Local expansion of du_i = z^{2i-2} h(z)^{-1/2} dz at infinity."""
    g = curve.genus
    J = 2 * g + 2 if J is None else J
    pts = exact_points if exact_points is not None else curve.branch_points
    c = inverse_sqrt_h_coefficients(pts, J // 2 + 2)
    B = np.zeros((g, J), dtype=complex)
    B_exact = [[0] * J for _ in range(g)] if exact_points is not None else None
    for i in range(1, g + 1):
        for m in range(len(c)):
            col = 2 * i - 2 + 2 * m  # power of z
            if col < J:
                B[i - 1, col] = complex(c[m])
                if B_exact is not None:
                    B_exact[i - 1][col] = c[m]
    basis = DifferentialBasis(g, curve.weierstrass_gaps, B, B_exact)
    if not basis.triangular_ok():
        raise CurveError("differential expansion fails the triangular normalization")
    return basis


# ------------------------------------------------------------ periods


def _segment_integral(curve: HyperellipticCurve, k: int, n: int) -> np.ndarray:
    """Integral of (du_1..du_g) from e_k to e_{k+1} (0-based k) by Gauss-Chebyshev."""
    e = curve.branch_points
    a, b = e[k], e[k + 1]
    g = curve.genus
    nodes = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))[::-1]
    x = (a + b) / 2 + (b - a) / 2 * nodes
    others = [ej for j, ej in enumerate(e) if j not in (k, k + 1)]
    R = np.ones(n, dtype=complex)
    for ej in others:
        R = R * sqrt_down(x - ej)
    R = _continue_signs(R)
    mid = (a + b) / 2
    s = complex(sqrt_down(mid - a) * sqrt_down(mid - b)) / ((b - a) / 2)
    R0 = np.prod([complex(sqrt_down(mid - ej)) for ej in others]) if others else 1.0
    # match the continued R to the x-plane branch at the midpoint
    idx = np.argmin(np.abs(x - mid))
    if abs(R[idx] + R0) < abs(R[idx] - R0):
        R = -R
    out = np.empty(g, dtype=complex)
    for i in range(1, g + 1):
        vals = -(x ** (g - i)) / (2 * s * R)
        out[i - 1] = np.pi / n * vals.sum()
    return out


def _continue_signs(vals: np.ndarray) -> np.ndarray:
    """Flip signs of square-root samples so that consecutive values vary continuously."""
    vals = vals.copy()
    for t in range(1, len(vals)):
        if abs(vals[t] + vals[t - 1]) < abs(vals[t] - vals[t - 1]):
            vals[t] = -vals[t]
    return vals


@dataclass
class CurvePeriods:
    curve: HyperellipticCurve
    omega1: np.ndarray
    omega2: np.ndarray
    Omega: np.ndarray
    quadrature_error: np.ndarray
    segments: np.ndarray  # g x 2g segment integrals
    nodes: int

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def L(self) -> np.ndarray:
        """(2 omega_1)^{-1}, the map from u to theta coordinates."""
        return np.linalg.inv(2 * self.omega1)

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.Omega - self.Omega.T)))

    def min_imag_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh((self.Omega.imag + self.Omega.imag.T) / 2)))

    def to_json(self) -> dict:
        def enc(m):
            return [[[complex(v).real, complex(v).imag] for v in row] for row in np.atleast_2d(m)]

        return {
            "curve": self.curve.to_json(),
            "omega1": enc(self.omega1),
            "omega2": enc(self.omega2),
            "Omega": enc(self.Omega),
            "quadrature_error": np.atleast_2d(self.quadrature_error).tolist(),
            "nodes": self.nodes,
        }


def period_matrices(curve: HyperellipticCurve, tol: float = 1e-13, n0: int = 64, n_max: int = 1 << 14,
                    basis: DifferentialBasis | None = None) -> CurvePeriods:
    g = curve.genus
    n = n0
    prev = np.array([_segment_integral(curve, k, n) for k in range(2 * g)]).T
    while True:
        n *= 2
        cur = np.array([_segment_integral(curve, k, n) for k in range(2 * g)]).T
        err = np.abs(cur - prev)
        if np.max(err) <= tol * max(1.0, np.max(np.abs(cur))) or n >= n_max:
            break
        prev = cur
    I = cur
    omega1 = np.empty((g, g), dtype=complex)
    omega2 = np.empty((g, g), dtype=complex)
    err1 = np.empty((g, g))
    err2 = np.empty((g, g))
    for j in range(1, g + 1):
        omega1[:, j - 1] = I[:, 2 * j - 2]
        err1[:, j - 1] = err[:, 2 * j - 2]
        omega2[:, j - 1] = sum(I[:, 2 * l - 1] for l in range(j, g + 1))
        err2[:, j - 1] = sum(err[:, 2 * l - 1] for l in range(j, g + 1))
    if np.linalg.cond(omega1) > 1e12:
        raise CurveError("omega_1 is ill-conditioned (near-degenerate curve)")
    Omega = np.linalg.solve(omega1, omega2)
    eig = np.linalg.eigvalsh((Omega.imag + Omega.imag.T) / 2)
    if np.all(eig < 0):
        omega2 = -omega2
        Omega = -Omega
    elif not np.all(eig > 0):
        raise CurveError("Im Omega is indefinite: homology orientation error")
    qerr = np.maximum(err1, err2)
    return CurvePeriods(curve, omega1, omega2, Omega, qerr, I, n)


def agm(a: float, b: float, tol: float = 1e-16) -> float:
    while abs(a - b) > tol * abs(a):
        a, b = (a + b) / 2, np.sqrt(a * b)
    return a


# ------------------------------------------------------------ Abel-Jacobi


@dataclass
class AJPath:
    waypoints: list[complex]
    nodes: int

    def to_json(self) -> dict:
        return {"waypoints": [[w.real, w.imag] for w in self.waypoints], "nodes": self.nodes}


class AbelJacobi:
    """Abel-Jacobi map based at infinity, integrated in the local coordinate z."""

    def __init__(self, curve: HyperellipticCurve, periods: CurvePeriods, nodes: int = 40):
        self.curve = curve
        self.periods = periods
        self.nodes = nodes
        self.g = curve.genus
        self._zeros = np.array(
            [s / np.sqrt(complex(e)) for e in curve.branch_points if abs(e) > 0 for s in (1, -1)], dtype=complex
        )
        self._gl = leggauss(nodes)
        self.last_path: AJPath | None = None

    def h(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for e in self.curve.branch_points:
            out = out * (1 - e * z * z)
        return out

    def _dist_to_zeros(self, z: complex) -> float:
        return float(np.min(np.abs(self._zeros - z))) if len(self._zeros) else np.inf

    def _plan(self, z_end: complex) -> list[complex]:
        """Waypoints from 0 to z_end whose segments stay away from zeros of h."""
        way = [0j, z_end]
        for _ in range(8):
            fixed = [way[0]]
            changed = False
            for a, b in zip(way[:-1], way[1:]):
                bad = None
                for zz in self._zeros:
                    if abs(zz - b) < 1e-12:
                        continue
                    d = b - a
                    t = np.clip(((zz - a) * np.conj(d)).real / max(abs(d) ** 2, 1e-300), 0, 1)
                    if abs(a + t * d - zz) < 0.05 * max(abs(zz), 1e-3) and 0 < t < 1:
                        bad = (zz, d)
                        break
                if bad is not None:
                    zz, d = bad
                    normal = 1j * d / abs(d)
                    fixed.append(zz + 0.15 * abs(zz) * normal)
                    changed = True
                fixed.append(b)
            way = fixed
            if not changed:
                break
        return way

    def _integrate(self, z_end: complex) -> np.ndarray:
        """Integral of (z^{2i-2}/sqrt(h)) dz from 0 to z_end with continued sqrt."""
        way = self._plan(z_end)
        self.last_path = AJPath(way, self.nodes)
        x, w = self._gl
        total = np.zeros(self.g, dtype=complex)
        current = 1.0 + 0j  # sqrt(h) at the running point
        end_singular = abs(complex(self.h(z_end))) < 1e-10
        for si, (a, b) in enumerate(zip(way[:-1], way[1:])):
            last = si == len(way) - 2
            # subdivide so that sqrt continuation is safe
            pieces = max(1, int(np.ceil(abs(b - a) / max(0.2 * min(self._dist_to_zeros(a), self._dist_to_zeros((a + b) / 2), 1.0), 1e-3))))
            if last and end_singular:
                pieces = max(pieces, 1)
            for p in range(pieces):
                za = a + (b - a) * p / pieces
                zb = a + (b - a) * (p + 1) / pieces
                if last and end_singular and p == pieces - 1:
                    # z = za + (zb - za)(1 - s^2), s in [0,1]
                    s = (x + 1) / 2
                    ws = w / 2
                    zs = za + (zb - za) * (1 - s**2)
                    order = np.argsort(-s)
                    hv = self.h(zs[order])
                    roots = np.sqrt(hv)
                    prev = current
                    for t in range(len(roots)):
                        if abs(roots[t] + prev) < abs(roots[t] - prev):
                            roots[t] = -roots[t]
                        prev = roots[t]
                    sq = np.empty_like(roots)
                    sq[order] = roots
                    jac = (zb - za) * 2 * s
                    for i in range(1, self.g + 1):
                        total[i - 1] += np.sum(ws * zs ** (2 * i - 2) / sq * jac)
                    current = 0j
                else:
                    zs = (za + zb) / 2 + (zb - za) / 2 * x
                    hv = self.h(zs)
                    roots = np.sqrt(hv)
                    prev = current
                    for t in range(len(roots)):
                        if abs(roots[t] + prev) < abs(roots[t] - prev):
                            roots[t] = -roots[t]
                        prev = roots[t]
                    hb = complex(np.sqrt(self.h(zb)))
                    current = hb if abs(hb - prev) < abs(hb + prev) else -hb
                    for i in range(1, self.g + 1):
                        total[i - 1] += np.sum(w * zs ** (2 * i - 2) / roots) * (zb - za) / 2
        self._end_sqrt_h = current
        return total

    def integral_u(self, z_end: complex) -> np.ndarray:
        """u-coordinates: integral of du from infinity to the point with local coordinate z_end."""
        return self._integrate(complex(z_end))

    def __call__(self, p: CurvePoint) -> np.ndarray:
        return self.periods.L @ self.u_of_point(p)

    def u_of_point(self, p: CurvePoint) -> np.ndarray:
        if p.is_infinity:
            return np.zeros(self.g, dtype=complex)
        if abs(p.x) < 1e-14:
            raise CurveError("x = 0 has no finite local coordinate z = x^{-1/2}")
        z = 1 / np.sqrt(complex(p.x))
        u = self._integrate(z)
        y_cand = z ** (-(2 * self.g + 1)) * self._end_sqrt_h
        if self.curve.is_branch_point(p.x, 1e-12):
            return u
        if abs(y_cand - p.y) > abs(y_cand + p.y):
            u = -u  # the point with local coordinate -z, by evenness of the integrand
        return u

    def of_z(self, z: complex) -> np.ndarray:
        return self.periods.L @ self._integrate(complex(z))


def a_matrix(aj: AbelJacobi, J: int | None = None, radius: float | None = None, samples: int = 64) -> np.ndarray:
    """Expansion dv_i = sum_j A[i, j-1] z^{j-1} dz, read off from the Abel-Jacobi map on a circle."""
    g = aj.g
    J = 2 * g + 2 if J is None else J
    if radius is None:
        rz = np.min(np.abs(aj._zeros)) if len(aj._zeros) else 1.0
        radius = 0.5 * rz
    zs = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = np.array([aj.of_z(z) for z in zs])  # samples x g
    coeffs = np.fft.fft(vals, axis=0) / samples  # c_n r^n
    A = np.zeros((g, J), dtype=complex)
    for j in range(1, J + 1):
        A[:, j - 1] = coeffs[j] / radius**j * j
    return A


def expansion_matrix_residual(periods: CurvePeriods, basis: DifferentialBasis, A: np.ndarray) -> float:
    return float(np.max(np.abs(basis.B - 2 * periods.omega1 @ A)))


# ------------------------------------------------------------ lattice helpers


def char_vector(Omega: np.ndarray, eps1, eps2) -> np.ndarray:
    return Omega @ np.asarray(eps1, dtype=float) + np.asarray(eps2, dtype=float)


def characteristic_of(Omega: np.ndarray, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real (eps', eps'') with e = Omega eps' + eps''."""
    eps1 = np.linalg.solve(Omega.imag, np.asarray(e).imag)
    eps2 = np.asarray(e).real - Omega.real @ eps1
    return eps1, eps2


def half_characteristics(g: int) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for bits in product((0.0, 0.5), repeat=2 * g):
        out.append((np.array(bits[:g]), np.array(bits[g:])))
    return out


def is_even(eps1, eps2) -> bool:
    return int(round(4 * float(np.dot(eps1, eps2)))) % 2 == 0


@dataclass
class RiemannConstant:
    eps1: np.ndarray
    eps2: np.ndarray
    vector: np.ndarray
    residuals: dict = field(default_factory=dict)


def riemann_constant(aj: AbelJacobi, theta_reduced: Callable[[np.ndarray], complex], rng: np.random.Generator | None = None,
                     tol: float = 1e-7, sample_sets: int = 2) -> RiemannConstant:
    """Half characteristic delta with theta(I(p_j) - sum I(p_i) + delta) = 0 for generic p_1..p_g."""
    g = aj.g
    rng = rng or np.random.default_rng(12345)
    Omega = aj.periods.Omega
    cands = half_characteristics(g)
    passing = None
    scores: dict = {}
    for _ in range(sample_sets):
        pts = []
        while len(pts) < g:
            x = complex(rng.uniform(-2.5, 2.5), rng.uniform(0.3, 1.5))
            pts.append(aj.curve.point(x, sheet=int(rng.choice([-1, 1]))))
        I = [aj(p) for p in pts]
        S = sum(I)
        vals = []
        for eps1, eps2 in cands:
            d = char_vector(Omega, eps1, eps2)
            vals.append(max(abs(theta_reduced(I[j] - S + d)) for j in range(g)))
        scale = max(vals)
        ok = {k for k, v in enumerate(vals) if v < tol * scale}
        for k, v in enumerate(vals):
            scores.setdefault(k, []).append(v / scale)
        passing = ok if passing is None else passing & ok
    if not passing or len(passing) != 1:
        raise CurveError(f"Riemann constant search found {0 if not passing else len(passing)} candidates")
    k = passing.pop()
    eps1, eps2 = cands[k]
    return RiemannConstant(eps1, eps2, char_vector(Omega, eps1, eps2),
                           {"normalized_residual": max(scores[k]), "runner_up": min(min(v) for kk, v in scores.items() if kk != k)})


def theta_divisor_point(aj: AbelJacobi, delta: RiemannConstant, q: Sequence[CurvePoint]) -> np.ndarray:
    """e = sum I(q_i) - delta."""
    e = -delta.vector.astype(complex)
    for p in q:
        e = e + aj(p)
    return e
