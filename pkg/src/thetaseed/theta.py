"""Riemann theta with characteristics, derivatives, theta constants and Sp(2g, Z).

theta[e](z | Omega) = sum_n exp(pi i (n+e')^T Omega (n+e') + 2 pi i (n+e')^T (z+e''))
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import factorial
from typing import Sequence

import numpy as np

from .curves import half_characteristics, is_even


class ThetaError(ValueError):
    pass


def _as_char(eps) -> tuple[np.ndarray, np.ndarray]:
    if eps is None:
        return None, None
    e1, e2 = eps
    return np.asarray(e1, dtype=float), np.asarray(e2, dtype=float)


@dataclass
class ThetaEvaluator:
    """Lattice-sum evaluator for a fixed Omega with a certified truncation radius."""

    Omega: np.ndarray
    tol: float = 1e-14
    ball: float = 1.0
    max_order: int = 6
    min_radius: int = 6
    max_radius: int = 60
    deriv_scale: float = 1.0
    radius: int = field(init=False)

    def __post_init__(self):
        Om = np.asarray(self.Omega, dtype=complex)
        if Om.ndim != 2 or Om.shape[0] != Om.shape[1]:
            raise ThetaError("Omega must be square")
        if np.max(np.abs(Om - Om.T)) > 1e-8 * max(1.0, np.max(np.abs(Om))):
            raise ThetaError("Omega is not symmetric")
        Om = (Om + Om.T) / 2
        self.Omega = Om
        self.g = Om.shape[0]
        eig = np.linalg.eigvalsh(Om.imag)
        if np.min(eig) <= 0:
            raise ThetaError("Im Omega is not positive definite")
        self.lam_min = float(np.min(eig))
        self.radius = self._choose_radius()
        rng = np.arange(-self.radius, self.radius + 1)
        self.lattice = np.array(list(product(rng, repeat=self.g)), dtype=float)

    def _tail(self, R: int) -> float:
        g = self.g
        total = 0.0
        for r in range(R + 1, R + 400):
            shell = (2 * r + 1) ** g - (2 * r - 1) ** g
            v = max(r - 1, 0)  # ||n + e'||_2 lower bound
            poly = (1 + 2 * np.pi * self.deriv_scale * (v + 1) * np.sqrt(g)) ** self.max_order
            expo = -np.pi * self.lam_min * v * v + 2 * np.pi * v * np.sqrt(g) * self.ball
            term = shell * poly * np.exp(expo)
            total += term
            if term < 1e-30 * max(total, 1e-300) and r > R + 5:
                break
        return total

    def _choose_radius(self) -> int:
        R = self.min_radius
        while self._tail(R) > self.tol:
            R += 1
            if R > self.max_radius:
                raise ThetaError("truncation radius exceeds the configured maximum")
        return R

    @property
    def tail_bound(self) -> float:
        return self._tail(self.radius)

    # core sum ----------------------------------------------------------
    def _terms(self, z: np.ndarray, eps) -> tuple[np.ndarray, np.ndarray]:
        e1, e2 = _as_char(eps)
        if e1 is None:
            e1 = np.zeros(self.g)
            e2 = np.zeros(self.g)
        e1 = e1 - np.floor(e1)
        v = self.lattice + e1
        quad = np.einsum("ni,ij,nj->n", v, self.Omega, v)
        lin = v @ (np.asarray(z, dtype=complex) + e2)
        return v, np.exp(1j * np.pi * quad + 2j * np.pi * lin)

    def _check_ball(self, z):
        if np.max(np.abs(np.asarray(z).imag)) > self.ball * (1 + 1e-12):
            raise ThetaError(f"|Im z| exceeds the declared ball {self.ball}")

    def theta(self, z, eps=None) -> complex:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check_ball(z)
        _, t = self._terms(z, eps)
        return complex(t.sum())

    def theta_z(self, alpha: Sequence[int], z, eps=None) -> complex:
        """Derivative in the theta coordinates z; ``alpha`` lists 0-based slots."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check_ball(z)
        v, t = self._terms(z, eps)
        f = np.ones(len(t), dtype=complex)
        for k in alpha:
            f = f * (2j * np.pi * v[:, k])
        return complex((f * t).sum())

    def theta_dir(self, directions: Sequence[np.ndarray], z, eps=None) -> complex:
        """Derivative along the given z-directions (each a g-vector)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check_ball(z)
        v, t = self._terms(z, eps)
        f = np.ones(len(t), dtype=complex)
        for d in directions:
            f = f * (2j * np.pi * (v @ np.asarray(d, dtype=complex)))
        return complex((f * t).sum())

    def theta_many(self, zs: np.ndarray, eps=None) -> np.ndarray:
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        self._check_ball(zs)
        e1, e2 = _as_char(eps)
        if e1 is None:
            e1, e2 = np.zeros(self.g), np.zeros(self.g)
        e1 = e1 - np.floor(e1)
        v = self.lattice + e1
        quad = np.exp(1j * np.pi * np.einsum("ni,ij,nj->n", v, self.Omega, v))
        lin = np.exp(2j * np.pi * ((zs + e2) @ v.T))
        return lin @ quad

    def theta_reduced(self, z, eps=None) -> complex:
        """theta(w) for w = z - Omega m in the fundamental cell; zero iff theta(z) is."""
        z = np.asarray(z, dtype=complex)
        a = np.linalg.solve(self.Omega.imag, z.imag)
        m = np.round(a)
        w = z - self.Omega @ m
        w = w - np.round(w.real)
        return self.theta(w, eps) if np.max(np.abs(w.imag)) <= self.ball else self._wide(w, eps)

    def _wide(self, w, eps) -> complex:
        wide = ThetaEvaluator(self.Omega, self.tol, float(np.max(np.abs(w.imag))) + 0.5, self.max_order, self.min_radius,
                              self.max_radius)
        return wide.theta(w, eps)

    def quasi_periodicity_residual(self, z, m, n, eps=None) -> float:
        """|theta(z + Omega m + n) / factor - theta(z)|, relative to max(|theta(z)|, 1)."""
        z = np.asarray(z, dtype=complex)
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        e1, e2 = _as_char(eps) if eps is not None else (np.zeros(self.g), np.zeros(self.g))
        lhs = self._wide(z + self.Omega @ m + n, eps)
        factor = np.exp(-1j * np.pi * m @ self.Omega @ m - 2j * np.pi * m @ z + 2j * np.pi * (e1 @ n - m @ e2))
        rhs = self.theta(z, eps)
        return float(abs(lhs / factor - rhs) / max(abs(rhs), 1.0))

    def finite_difference(self, directions: Sequence[np.ndarray], z, eps=None, h: float = 1e-3) -> complex:
        """Richardson-extrapolated central difference of the last direction applied to the term-wise rest."""
        z = np.asarray(z, dtype=complex)
        *rest, last = directions
        last = np.asarray(last, dtype=complex)

        def D(step):
            return (self.theta_dir(rest, z + step * last, eps) - self.theta_dir(rest, z - step * last, eps)) / (2 * step)

        return (4 * D(h / 2) - D(h)) / 3


class UEvaluator:
    """Theta derivatives in the u-coordinates with u = 2 omega_1 z, slots labelled by gaps."""

    def __init__(self, ev: ThetaEvaluator, L: np.ndarray, gaps: Sequence[int]):
        self.ev = ev
        self.L = np.asarray(L, dtype=complex)
        self.gaps = tuple(gaps)

    def slot(self, w: int) -> int:
        try:
            return self.gaps.index(w)
        except ValueError:
            raise ThetaError(f"{w} is not a gap label") from None

    def direction(self, w: int) -> np.ndarray:
        return self.L[:, self.slot(w)]

    def derivative(self, I: Sequence[int], z, eps=None) -> complex:
        """d/du_{I_1} ... d/du_{I_r} theta[eps] at theta coordinate z."""
        return self.ev.theta_dir([self.direction(w) for w in I], z, eps)

    def theta_at_u(self, u, eps=None, shift=None) -> complex:
        z = self.L @ np.asarray(u, dtype=complex)
        if shift is not None:
            z = z + shift
        return self.ev.theta(z, eps)


# ---------------------------------------------------------------- constants


@dataclass
class ThetaConstants:
    chars: list[tuple[np.ndarray, np.ndarray]]
    values: list[complex]
    count: int
    borderline: list[int]
    threshold: float


def even_theta_constants(ev: ThetaEvaluator, rel_threshold: float = 1e-8) -> ThetaConstants:
    g = ev.g
    evens = [(e1, e2) for e1, e2 in half_characteristics(g) if is_even(e1, e2)]
    vals = [ev.theta(np.zeros(g), c) for c in evens]
    top = max(abs(v) for v in vals)
    thr = rel_threshold * top
    keep = [k for k, v in enumerate(vals) if abs(v) > thr]
    border = [k for k, v in enumerate(vals) if thr < abs(v) <= 10 * thr or thr / 10 < abs(v) <= thr]
    return ThetaConstants([evens[k] for k in keep], [vals[k] for k in keep], len(keep), border, thr)


def klein_lambda(ev: ThetaEvaluator, consts: ThetaConstants | None = None) -> np.ndarray:
    """Lambda_ij = -(1/4N) sum_S theta_ij[e](0) / theta[e](0) in theta coordinates."""
    consts = consts or even_theta_constants(ev)
    if consts.borderline:
        raise ThetaError("an even theta constant is near the vanishing threshold")
    g = ev.g
    Lam = np.zeros((g, g), dtype=complex)
    zero = np.zeros(g)
    for c, val in zip(consts.chars, consts.values):
        for i in range(g):
            for j in range(i, g):
                d = ev.theta_z([i, j], zero, c) / val
                Lam[i, j] += d
                if i != j:
                    Lam[j, i] += d
    return -Lam / (4 * consts.count)


# ---------------------------------------------------------------- symplectic


def J_matrix(g: int) -> np.ndarray:
    I = np.eye(g, dtype=int)
    Z = np.zeros((g, g), dtype=int)
    return np.block([[Z, I], [-I, Z]])


def is_symplectic(M: np.ndarray) -> bool:
    M = np.asarray(M)
    if M.shape[0] != M.shape[1] or M.shape[0] % 2:
        return False
    if not np.all(np.equal(np.mod(M, 1), 0)):
        return False
    M = M.astype(int)
    J = J_matrix(M.shape[0] // 2)
    return bool(np.array_equal(M.T @ J @ M, J))


def blocks(M: np.ndarray):
    g = M.shape[0] // 2
    return M[:g, :g], M[:g, g:], M[g:, :g], M[g:, g:]


def symplectic_transform(Omega: np.ndarray, eps, M: np.ndarray):
    M = np.asarray(M)
    if not is_symplectic(M):
        raise ThetaError("M is not in Sp(2g, Z)")
    A, B, C, D = blocks(M.astype(float))
    Om_t = (A @ Omega + B) @ np.linalg.inv(C @ Omega + D)
    Om_t = (Om_t + Om_t.T) / 2
    e1, e2 = _as_char(eps)
    new1 = D @ e1 - C @ e2 + 0.5 * np.diag(C @ D.T)
    new2 = -B @ e1 + A @ e2 + 0.5 * np.diag(A @ B.T)
    return Om_t, (new1, new2)


def sp_generators(g: int) -> dict[str, np.ndarray]:
    """A generating set of Sp(2g, Z) for g = 1, 2."""
    I = np.eye(g, dtype=int)
    Z = np.zeros((g, g), dtype=int)

    def trans(S):
        return np.block([[I, S], [Z, I]])

    def rot(A):
        Ainv_t = np.round(np.linalg.inv(A).T).astype(int)
        return np.block([[A, Z], [Z, Ainv_t]])

    gens = {"J": np.block([[Z, I], [-I, Z]])}
    if g == 1:
        gens = {"S": np.array([[0, -1], [1, 0]]), "T": np.array([[1, 1], [0, 1]])}
        return gens
    for a in range(g):
        E = np.zeros((g, g), dtype=int)
        E[a, a] = 1
        gens[f"T_{a + 1}{a + 1}"] = trans(E)
    if g >= 2:
        E = np.zeros((g, g), dtype=int)
        E[0, 1] = E[1, 0] = 1
        gens["T_12"] = trans(E)
        A = np.eye(g, dtype=int)
        A[0, 1] = 1
        gens["R_shear"] = rot(A)
        P = np.eye(g, dtype=int)
        P[[0, 1]] = P[[1, 0]]
        gens["R_swap"] = rot(P)
    return gens
