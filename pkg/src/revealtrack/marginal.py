"""Marginal (position-by-element) belief tracking on the Birkhoff polytope.

The marginal state is an n-by-n nonnegative matrix H with H[i, j] the
probability that position i holds element j; a distribution over
arrangements yields a doubly stochastic H (every row and column sums to 1).
Two linear updates move the state:

- mixing: H <- P_s @ H with P_s a convex combination of permutation
  matrices acting on positions (rows); doubly stochastic H stays doubly
  stochastic.
- reveal of "position i holds element j": H <- D_l @ H @ D_r + B with
  D_l = I - e_i e_i^T, D_r = I - e_j e_j^T, B = e_i e_j^T. Entry (i, j)
  becomes 1 and the rest of the cross is zeroed; everything else is
  untouched. The result can leave the Birkhoff polytope, so a Sinkhorn
  projection is applied at decode time, keeping the recursion itself
  linear.

Both updates are instances of the bilinear step A_l @ H @ A_r + B, which
vectorizes to (A_r^T kron A_l) vec(H) + vec(B) under column-major vec;
``vectorized_step`` exists to verify that identity against the direct
product, not for speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .perm import Permutation, symmetric_group, to_matrix


class NoSupportError(ValueError):
    """Sinkhorn input has an all-zero row or column; no doubly stochastic
    scaling exists."""


@dataclass(frozen=True)
class MixSpec:
    """A probabilistic shuffle: permutations of positions with weights."""

    components: tuple[tuple[Permutation, float], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for _, w in self.components], dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights {weights} are not a distribution")
        sizes = {p.n for p, _ in self.components}
        if len(sizes) != 1:
            raise ValueError("mixture components act on different sizes")

    @property
    def n(self) -> int:
        return self.components[0][0].n

    def realized(self) -> np.ndarray:
        """The doubly stochastic matrix P_s = sum_i c_i P_i."""
        out = np.zeros((self.n, self.n))
        for p, w in self.components:
            out += w * to_matrix(p)
        return out


@dataclass(frozen=True)
class RevealSpec:
    """The observation "position holds element"."""

    position: int
    element: int

    def validated(self, n: int) -> "RevealSpec":
        if not (0 <= self.position < n and 0 <= self.element < n):
            raise ValueError(f"reveal ({self.position}, {self.element}) out of range for n={n}")
        return self


def marginal_init(n: int) -> np.ndarray:
    """Start state: every element known to sit at its own position."""
    return np.eye(n)


def marginal_mix(state: np.ndarray, mix: MixSpec) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.shape != (mix.n, mix.n):
        raise ValueError(f"state shape {state.shape} under mixture of size {mix.n}")
    return mix.realized() @ state


def reveal_operators(n: int, r: RevealSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The (D_l, D_r, B) triple implementing the reveal as a bilinear step."""
    r.validated(n)
    d_l = np.eye(n)
    d_l[r.position, r.position] = 0.0
    d_r = np.eye(n)
    d_r[r.element, r.element] = 0.0
    inject = np.zeros((n, n))
    inject[r.position, r.element] = 1.0
    return d_l, d_r, inject


def marginal_reveal(state: np.ndarray, r: RevealSpec) -> np.ndarray:
    """Pin entry (position, element) to 1 and zero the rest of its cross.

    Equal to D_l @ H @ D_r + B but computed by masking, so entries outside
    the cross are preserved bit-for-bit.
    """
    state = np.asarray(state, dtype=float)
    r.validated(state.shape[0])
    out = state.copy()
    out[r.position, :] = 0.0
    out[:, r.element] = 0.0
    out[r.position, r.element] = 1.0
    return out


def bilinear_step(
    state: np.ndarray, a_left: np.ndarray, a_right: np.ndarray, inject: np.ndarray
) -> np.ndarray:
    """Direct evaluation A_l @ H @ A_r + B."""
    return a_left @ np.asarray(state, dtype=float) @ a_right + inject


def vectorized_step(
    state: np.ndarray, a_left: np.ndarray, a_right: np.ndarray, inject: np.ndarray
) -> np.ndarray:
    """Same bilinear step through vec(H') = (A_r^T kron A_l) vec(H) + vec(B).

    Uses column-major vectorization. Exists to check the Kronecker identity
    against ``bilinear_step``; both sides must agree to 1e-12.
    """
    state = np.asarray(state, dtype=float)
    n_rows, n_cols = state.shape
    if a_left.shape[1] != n_rows or a_right.shape[0] != n_cols:
        raise ValueError(
            f"dimension mismatch: H {state.shape}, A_l {a_left.shape}, A_r {a_right.shape}"
        )
    vec = state.reshape(-1, order="F")
    out = np.kron(a_right.T, a_left) @ vec + inject.reshape(-1, order="F")
    return out.reshape((a_left.shape[0], a_right.shape[1]), order="F")


def birkhoff_residual(state: np.ndarray) -> float:
    """Largest deviation of any row or column sum from 1."""
    state = np.asarray(state, dtype=float)
    return float(
        max(
            np.abs(state.sum(axis=1) - 1.0).max(),
            np.abs(state.sum(axis=0) - 1.0).max(),
        )
    )


@dataclass(frozen=True)
class SinkhornResult:
    matrix: np.ndarray
    iterations: int
    residual: float
    converged: bool


def sinkhorn_project(
    state: np.ndarray, max_iters: int = 1000, tol: float = 1e-9
) -> SinkhornResult:
    """Alternate row/column normalization toward a doubly stochastic matrix.

    Requires every row and column to have a nonzero entry (raises
    NoSupportError otherwise). Stops once the worst row/column sum deviates
    from 1 by at most ``tol``; if ``max_iters`` passes are exhausted first,
    the best iterate is returned with ``converged=False`` rather than
    raising, since matrices produced by reveals can sit on the polytope
    boundary where convergence is slow.
    """
    h = np.asarray(state, dtype=float).copy()
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got {h.shape}")
    if np.any(h < 0):
        raise ValueError("Sinkhorn input must be nonnegative")
    if np.any(h.sum(axis=1) == 0) or np.any(h.sum(axis=0) == 0):
        raise NoSupportError("input has an all-zero row or column")

    residual = birkhoff_residual(h)
    if residual <= tol:
        return SinkhornResult(h, 0, residual, True)
    for iteration in range(1, max_iters + 1):
        h /= h.sum(axis=1, keepdims=True)
        h /= h.sum(axis=0, keepdims=True)
        residual = birkhoff_residual(h)
        if residual <= tol:
            return SinkhornResult(h, iteration, residual, True)
    return SinkhornResult(h, max_iters, residual, False)


def joint_to_marginal(b: np.ndarray, n: int) -> np.ndarray:
    """Collapse a belief over all n! arrangements to its n-by-n marginal.

    Arrangements are indexed lexicographically with c(element) = position
    (see ``joint``), so H[i, j] sums the belief of every arrangement placing
    element j at position i. A point belief at arrangement c maps to
    ``to_matrix(c)``; a distribution maps into the Birkhoff polytope.
    """
    b = np.asarray(b, dtype=float)
    states = symmetric_group(n)
    if b.shape != (len(states),):
        raise ValueError(f"belief of shape {b.shape} is not over {len(states)} arrangements")
    out = np.zeros((n, n))
    for index, c in enumerate(states):
        for element in range(n):
            out[c(element), element] += b[index]
    return out
