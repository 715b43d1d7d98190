"""Eigenvalue machinery for consensus weight matrices.

Covers the SLEM objective max(lam_2, -lam_N), the branch-permutation
block diagonalization of symmetric stars into one (m+1)x(m+1) block W0
and n-1 copies of an m x m block W1, the characteristic equations whose
smallest root in (0, pi) gives the optimal SLEM, the k_max threshold for
k-cored stars, and Cauchy-interlacing consistency checks.

Dense symmetric and tridiagonal eigenproblems are delegated to LAPACK
(numpy.linalg.eigvalsh / scipy.linalg.eigh_tridiagonal); both are
deterministic for identical input bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import bisect

from .topology import CcsStar, KcsStar, SymmetricStar, Topology
from .weights import WeightAssignment

__all__ = [
    "SpectralError",
    "StratifiedBlocks",
    "InterlacingReport",
    "eig_symmetric",
    "slem",
    "stratify",
    "theta_root_symmetric",
    "theta_root_kcs",
    "slem_closed_form",
    "k_max",
    "interlacing_check",
    "char_symmetric",
    "char_kcs",
    "spectrum_to_csv",
    "char_residual_csv",
]

SYMMETRY_TOL = 1e-12
STOCHASTIC_TOL = 1e-9
ROOT_SCAN_STEPS = 10_000
ROOT_TOL = 1e-12


class SpectralError(ValueError):
    """Raised on contract violations or numerical failure."""


def eig_symmetric(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a symmetric real matrix, sorted decreasingly.

    A tridiagonal input takes the specialized LAPACK path.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SpectralError("input must be a square matrix")
    if not np.allclose(A, A.T, atol=SYMMETRY_TOL, rtol=0):
        raise SpectralError("input must be symmetric within 1e-12")
    n = A.shape[0]
    if n == 1:
        return A[0, :1].copy()
    off_tri = A - np.diag(np.diag(A)) - np.diag(np.diag(A, 1), 1) - np.diag(np.diag(A, -1), -1)
    if not off_tri.any():
        vals = eigvalsh_tridiagonal(np.diag(A).copy(), np.diag(A, 1).copy())
    else:
        vals = np.linalg.eigvalsh(A)
    return np.sort(vals)[::-1]


def slem(W: np.ndarray) -> float:
    """Second largest eigenvalue modulus, max(lam_2, -lam_N)."""
    W = np.asarray(W, dtype=float)
    if np.max(np.abs(W.sum(axis=1) - 1.0)) > STOCHASTIC_TOL:
        raise SpectralError("matrix rows must sum to one (within 1e-9)")
    lam = eig_symmetric(W)
    return float(max(lam[1], -lam[-1]))


@dataclass(frozen=True)
class StratifiedBlocks:
    """Blocks of the branch-permutation diagonalization of a symmetric star.

    The full matrix is unitarily similar to diag(W0, W1, ..., W1) with
    n-1 copies of W1.
    """

    w0_block: np.ndarray
    w1_block: np.ndarray
    w1_multiplicity: int

    def combined_spectrum(self) -> np.ndarray:
        vals = [eig_symmetric(self.w0_block)]
        vals += [eig_symmetric(self.w1_block)] * self.w1_multiplicity
        return np.sort(np.concatenate(vals))[::-1]


def stratify(topology: Topology, assignment: WeightAssignment) -> StratifiedBlocks:
    """Block-diagonalize a symmetric star's weight matrix.

    W0 is (m+1)x(m+1) tridiagonal with corner 1 - n*w1 and coupling
    sqrt(n)*w1; W1 is the m x m tail block, repeated n-1 times.
    Only symmetric stars are supported; the complete- and k-cored
    families are checked by dense eigensolve instead.
    """
    if not isinstance(topology, SymmetricStar):
        raise SpectralError("stratification is implemented for symmetric stars only")
    if assignment.per_stratum is None:
        raise SpectralError("stratification needs per-stratum weights")
    m, n = topology.m, topology.n
    w = [assignment.per_stratum[j] for j in range(1, m + 1)]

    diag0 = np.empty(m + 1)
    diag0[0] = 1.0 - n * w[0]
    for j in range(1, m):
        diag0[j] = 1.0 - w[j - 1] - w[j]
    diag0[m] = 1.0 - w[m - 1]
    off0 = np.empty(m)
    off0[0] = math.sqrt(n) * w[0]
    off0[1:] = w[1:]
    W0 = np.diag(diag0) + np.diag(off0, 1) + np.diag(off0, -1)

    diag1 = np.empty(m)
    for j in range(m - 1):
        diag1[j] = 1.0 - w[j] - w[j + 1]
    diag1[m - 1] = 1.0 - w[m - 1]
    off1 = np.asarray(w[1:], dtype=float)
    W1 = np.diag(diag1) + np.diag(off1, 1) + np.diag(off1, -1)

    return StratifiedBlocks(W0, W1, n - 1)


def char_symmetric(theta, m: int, n: int):
    """Characteristic function of the symmetric-star SLEM angle:
    (n-2)cos((m-1/2)t) - (n+2)cos((m+1/2)t)."""
    t = np.asarray(theta, dtype=float)
    return (n - 2) * np.cos((m - 0.5) * t) - (n + 2) * np.cos((m + 0.5) * t)


def char_kcs(theta, m: int, n: int, k: int):
    """Characteristic function of the k-cored SLEM angle:
    (n-2k)cos((m-1/2)t) - (n+2k)cos((m+1/2)t).

    Derived from the tail block of the branch-permutation decomposition
    (innermost tail diagonal 1 - k*w1 - w2 with w1 = 2/(n+2k)); reduces
    to the single-center equation at k = 1 and reproduces the published
    k-cored SLEM values, which the commonly circulated sin-form of the
    equation does not.
    """
    t = np.asarray(theta, dtype=float)
    return (n - 2 * k) * np.cos((m - 0.5) * t) - (n + 2 * k) * np.cos((m + 0.5) * t)


def _smallest_root(f, args) -> float:
    """First sign change of f on (0, pi), refined by bisection to 1e-12.

    The scan step pi/1e4 is fine enough to separate the closely spaced
    roots that appear at large m.
    """
    grid = np.linspace(0.0, math.pi, ROOT_SCAN_STEPS + 1)[1:]
    vals = f(grid, *args)
    sign = np.sign(vals)
    flips = np.nonzero((sign[:-1] * sign[1:]) < 0)[0]
    exact = np.nonzero(sign == 0)[0]
    first_flip = flips[0] if flips.size else None
    first_exact = exact[0] if exact.size else None
    if first_exact is not None and (first_flip is None or first_exact <= first_flip):
        return float(grid[first_exact])
    if first_flip is None:
        raise SpectralError("no sign change of the characteristic function in (0, pi)")
    a, b = grid[first_flip], grid[first_flip + 1]
    return float(bisect(lambda t: float(f(t, *args)), a, b, xtol=ROOT_TOL))


def theta_root_symmetric(m: int, n: int) -> float:
    """Smallest root in (0, pi) of the symmetric-star characteristic equation."""
    if m < 1 or n < 1:
        raise SpectralError("m, n must be >= 1")
    return _smallest_root(char_symmetric, (m, n))


def theta_root_kcs(m: int, n: int, k: int) -> float:
    """Smallest root in (0, pi) of the k-cored characteristic equation."""
    if m < 1 or n < 1 or k < 1:
        raise SpectralError("m, n, k must be >= 1")
    return _smallest_root(char_kcs, (m, n, k))


def slem_closed_form(topology: Topology) -> float:
    """Optimal-weight SLEM of a star family via its characteristic equation.

    Symmetric: cos of the smallest root of the symmetric equation;
    CCS: cos(pi/(2(m+1))), independent of n; KCS: cos of the smallest
    root of the k-cored equation.
    """
    if isinstance(topology, SymmetricStar):
        return math.cos(theta_root_symmetric(topology.m, topology.n))
    if isinstance(topology, CcsStar):
        return math.cos(math.pi / (2 * (topology.m + 1)))
    if isinstance(topology, KcsStar):
        return math.cos(theta_root_kcs(topology.m, topology.n, topology.k))
    raise SpectralError("closed-form SLEM is defined only for the star families")


def k_max(m: int, n: int) -> int:
    """Largest k for which the closed-form k-cored weights stay optimal.

    The threshold is (2k-n)/(2k+n) <= cos(theta(m, n, k)); k is increased
    from 1 until the inequality first fails.
    """
    if m < 1 or n < 1:
        raise SpectralError("m, n must be >= 1")
    k = 1
    while True:
        s = math.cos(theta_root_kcs(m, n, k + 1))
        if (2 * (k + 1) - n) / (2 * (k + 1) + n) > s:
            return k
        k += 1


@dataclass(frozen=True)
class InterlacingReport:
    holds: bool
    max_violation: float
    lambda2_matches_w1_top: bool
    lambda_min_matches_w1_bottom: bool


def interlacing_check(blocks: StratifiedBlocks, W: np.ndarray | None = None,
                      tol: float = 1e-10) -> InterlacingReport:
    """Verify Cauchy interlacing of the tail block inside the center block.

    With both spectra ascending, lam_j(W0) <= lam_j(W1) <= lam_{j+1}(W0)
    must hold for every j.  When the full matrix is supplied, also check
    that its second largest eigenvalue is the top of W1 (a consequence
    of interlacing), and report whether its smallest eigenvalue equals
    the bottom of W1.  The latter identity is *not* implied by
    interlacing (which only gives lam_min(W0) <= lam_min(W1)), and at
    the optimal weights the smallest eigenvalue of W belongs to the W0
    block instead, so that field is informational and excluded from
    ``holds``.
    """
    lam0 = np.sort(eig_symmetric(blocks.w0_block))  # ascending
    lam1 = np.sort(eig_symmetric(blocks.w1_block))
    m = lam1.size
    viol = 0.0
    for j in range(m):
        viol = max(viol, lam0[j] - lam1[j], lam1[j] - lam0[j + 1])
    top_ok = bottom_ok = True
    if W is not None:
        lam = eig_symmetric(W)
        top_ok = abs(lam[1] - lam1[-1]) <= tol
        bottom_ok = abs(lam[-1] - lam1[0]) <= tol
    return InterlacingReport(
        holds=viol <= tol and top_ok,
        max_violation=float(max(viol, 0.0)),
        lambda2_matches_w1_top=top_ok,
        lambda_min_matches_w1_bottom=bottom_ok,
    )


def spectrum_to_csv(values: np.ndarray) -> str:
    return "\n".join(f"{v:.17g}" for v in values) + "\n"


def char_residual_csv(char_fn, thetas, *args) -> str:
    """Plot-ready CSV of a characteristic function over a theta grid."""
    thetas = np.asarray(thetas, dtype=float)
    vals = char_fn(thetas, *args)
    out = ["theta,residual"]
    out += [f"{t:.17g},{v:.17g}" for t, v in zip(thetas, np.atleast_1d(vals))]
    return "\n".join(out) + "\n"
