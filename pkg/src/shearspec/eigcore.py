"""Block eigensolver core: operators, preconditioners, LOBPCG, counting.

Everything downstream reduces to the generalized pencil (A, M) with A
symmetric and M symmetric positive definite, both given as matrix-free
operators (usually sums of Kronecker products of 1-D factor matrices).
The solver is a locally optimal block preconditioned CG iteration with a
[X, W, P] Rayleigh-Ritz space; preconditioning inverts the separable
part of A exactly through per-factor eigenbases, which for uniform grids
are plain sine/cosine transforms.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.fft import dct, dst
from scipy.sparse.linalg import splu

__all__ = [
    "LinOp",
    "IdentityOp",
    "DenseOp",
    "SparseOp",
    "KronOp",
    "MassKron",
    "FactorSpectral",
    "TensorPrecond",
    "JacobiPrecond",
    "SpluPrecond",
    "SolverError",
    "EigOptions",
    "EigResult",
    "CountResult",
    "as_operator",
    "materialize",
    "smallest_eigenpairs",
    "count_below",
]


class LinOp:
    """Symmetric operator interface: a size ``n`` and a block apply."""

    n: int

    def matmat(self, X: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


class IdentityOp(LinOp):
    def __init__(self, n: int):
        self.n = n

    def matmat(self, X):
        return np.array(X, dtype=float, copy=True)

    def diagonal(self):
        return np.ones(self.n)


class DenseOp(LinOp):
    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        self.a = a
        self.n = a.shape[0]

    def matmat(self, X):
        return self.a @ X

    def diagonal(self):
        return np.diag(self.a).copy()


class SparseOp(LinOp):
    def __init__(self, a):
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        self.a = a.tocsr()
        self.n = a.shape[0]

    def matmat(self, X):
        return self.a @ X

    def diagonal(self):
        return self.a.diagonal()


def as_operator(obj) -> LinOp:
    if isinstance(obj, LinOp):
        return obj
    if sp.issparse(obj):
        return SparseOp(obj)
    if isinstance(obj, np.ndarray):
        return DenseOp(obj)
    raise TypeError(f"cannot wrap {type(obj).__name__} as an operator")


class KronOp(LinOp):
    """Sum of Kronecker-product terms over a tensor grid.

    ``terms`` is a list of ``(coeff, mats)`` where ``mats`` holds one
    square factor per tensor slot (row index runs over slot 0 slowest).
    A block vector of shape (prod(shape), b) is reshaped to
    ``(*shape, b)`` and each factor acts along its own axis.
    """

    def __init__(self, terms, shape):
        self.shape = tuple(int(s) for s in shape)
        self.n = int(np.prod(self.shape))
        self.terms = []
        for coeff, mats in terms:
            mats = tuple(sp.csr_matrix(m) for m in mats)
            if len(mats) != len(self.shape):
                raise ValueError("one factor per tensor slot required")
            for m, s in zip(mats, self.shape):
                if m.shape != (s, s):
                    raise ValueError(f"factor shape {m.shape} != slot size {s}")
            self.terms.append((float(coeff), mats))

    @staticmethod
    def _apply_axis(T: np.ndarray, mat, axis: int) -> np.ndarray:
        T = np.moveaxis(T, axis, 0)
        lead = T.shape[0]
        out = (mat @ T.reshape(lead, -1)).reshape(T.shape)
        return np.moveaxis(out, 0, axis)

    def matmat(self, X):
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        if squeeze:
            X = X[:, None]
        b = X.shape[1]
        out = np.zeros_like(X)
        for coeff, mats in self.terms:
            T = X.reshape(*self.shape, b)
            for axis, m in enumerate(mats):
                T = self._apply_axis(T, m, axis)
            out += coeff * T.reshape(self.n, b)
        return out[:, 0] if squeeze else out

    def diagonal(self):
        d = np.zeros(self.shape)
        for coeff, mats in self.terms:
            part = np.ones((1,) * len(self.shape))
            for axis, m in enumerate(mats):
                part = part * _expand(m.diagonal(), len(self.shape), axis)
            d = d + coeff * part
        return d.reshape(self.n)


class MassKron(KronOp):
    """Single Kronecker product of mass factors, with an exact solve.

    Each factor is factorized once (sparse LU); the solve applies the
    inverses slot by slot, giving ||r||_{M^-1} residual norms cheaply.
    """

    def __init__(self, mats, shape):
        super().__init__([(1.0, mats)], shape)
        self._lu = [splu(sp.csc_matrix(m)) for _, ms in self.terms for m in ms]

    def solve(self, X):
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        if squeeze:
            X = X[:, None]
        b = X.shape[1]
        T = X.reshape(*self.shape, b)
        for axis, lu in enumerate(self._lu):
            T = np.moveaxis(T, axis, 0)
            lead = T.shape[0]
            T = lu.solve(T.reshape(lead, -1)).reshape(T.shape)
            T = np.moveaxis(T, 0, axis)
        out = T.reshape(self.n, b)
        return out[:, 0] if squeeze else out


@dataclass(frozen=True)
class FactorSpectral:
    """Generalized eigenpairs of one 1-D factor pencil (K_f, M_f).

    ``lam`` are the eigenvalues; the M-orthonormal eigenvector matrix V
    is either stored densely or realized as a fast transform:

    * ``kind='dst'``: interior sine modes of a Dirichlet-Dirichlet chain,
      V[i, j] = sin(pi (i+1)(j+1) / n) / nrm_j  (symmetric up to scaling);
    * ``kind='dct'``: half-shift cosine modes of a Neumann-Dirichlet
      chain, V[i, j] = cos(pi (j+1/2) i / n) / nrm_j;
    * ``kind='dense'``: explicit V with V^T M V = I.
    """

    lam: np.ndarray
    kind: str
    nrm: np.ndarray | None = None
    V: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("dst", "dct", "dense"):
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.kind == "dense" and self.V is None:
            raise ValueError("dense factor needs its eigenvector matrix")
        if self.kind in ("dst", "dct") and self.nrm is None:
            raise ValueError("transform factor needs M-norm scalings")

    @property
    def m(self) -> int:
        return self.lam.shape[0]

    def apply_adjoint(self, T: np.ndarray, axis: int) -> np.ndarray:
        """V^T along ``axis`` (coefficient extraction)."""
        if self.kind == "dst":
            out = dst(T, type=1, axis=axis) * 0.5
        elif self.kind == "dct":
            first = np.take(T, [0], axis=axis)
            out = (dct(T, type=3, axis=axis) + first) * 0.5
        else:
            out = self._dense(self.V.T, T, axis)
            return out
        return out / _expand(self.nrm, T.ndim, axis)

    def apply(self, T: np.ndarray, axis: int) -> np.ndarray:
        """V along ``axis`` (synthesis from coefficients)."""
        if self.kind == "dense":
            return self._dense(self.V, T, axis)
        T = T / _expand(self.nrm, T.ndim, axis)
        if self.kind == "dst":
            return dst(T, type=1, axis=axis) * 0.5
        return dct(T, type=2, axis=axis) * 0.5

    @staticmethod
    def _dense(mat, T, axis):
        T = np.moveaxis(T, axis, 0)
        out = (mat @ T.reshape(T.shape[0], -1)).reshape(T.shape)
        return np.moveaxis(out, 0, axis)


def _expand(v: np.ndarray, ndim: int, axis: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = v.shape[0]
    return v.reshape(shape)


class TensorPrecond:
    """Exact inverse of the separable part sum_f c_f (I x K_f x I) - sigma M.

    ``factors`` pairs a coefficient with the FactorSpectral of each slot;
    the grid of separable eigenvalues is sum_f c_f lam_f broadcast over
    the tensor grid.  The shift is clamped strictly below the smallest
    separable eigenvalue so the inverse stays positive definite (shear
    binding always pulls the target below that minimum).
    """

    def __init__(self, factors):
        self.factors = [(float(c), f) for c, f in factors]
        self.shape = tuple(f.m for _, f in self.factors)
        lam = np.zeros(self.shape)
        for axis, (c, f) in enumerate(self.factors):
            lam = lam + c * _expand(f.lam, len(self.shape), axis)
        self.lam_grid = lam
        self.lam_min = float(lam.min())

    def __call__(self, R: np.ndarray, sigma: float) -> np.ndarray:
        b = R.shape[1]
        T = R.reshape(*self.shape, b)
        for axis, (_, f) in enumerate(self.factors):
            T = f.apply_adjoint(T, axis)
        sig = min(sigma, self.lam_min - max(1e-3 * abs(self.lam_min), 1e-12))
        T = T / (self.lam_grid[..., None] - sig)
        for axis, (_, f) in enumerate(self.factors):
            T = f.apply(T, axis)
        return T.reshape(R.shape)


class JacobiPrecond:
    """Shifted diagonal scaling; the fallback when no structure is known."""

    def __init__(self, diag: np.ndarray):
        self.diag = np.asarray(diag, dtype=float)
        if np.all(self.diag == 0.0):
            raise ValueError("zero diagonal cannot precondition")

    def __call__(self, R: np.ndarray, sigma: float) -> np.ndarray:
        d = self.diag - sigma
        floor = 1e-6 * np.abs(self.diag).max() + 1e-300
        d = np.where(d > floor, d, floor)
        return R / d[:, None]


class SpluPrecond:
    """Sparse LU of (A - shift M), for masks and other unstructured forms."""

    def __init__(self, A, M=None, shift: float = 0.0):
        A = sp.csc_matrix(A)
        if shift != 0.0:
            if M is None:
                M = sp.identity(A.shape[0], format="csc")
            A = (A - shift * sp.csc_matrix(M)).tocsc()
        self._lu = splu(A)

    def __call__(self, R: np.ndarray, sigma: float) -> np.ndarray:
        return self._lu.solve(R)


def materialize(op: LinOp, chunk: int = 256) -> np.ndarray:
    """Dense matrix of an operator; for tests and small direct solves."""
    n = op.n
    out = np.empty((n, n))
    for j0 in range(0, n, chunk):
        j1 = min(j0 + chunk, n)
        E = np.zeros((n, j1 - j0))
        E[np.arange(j0, j1), np.arange(j1 - j0)] = 1.0
        out[:, j0:j1] = op.matmat(E)
    return out


@dataclass(frozen=True)
class EigOptions:
    k: int = 1
    block: int | None = None  # default k + 3
    tol: float = 1e-8
    maxit: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")


@dataclass
class EigResult:
    theta: np.ndarray          # k requested Ritz values, ascending
    vectors: np.ndarray        # (n, k), M-orthonormal
    converged: np.ndarray      # per-pair flags for the requested k
    iterations: int
    matmats: int
    residuals: np.ndarray      # ||A x - theta M x||_2 per requested pair
    block_theta: np.ndarray    # full block of Ritz values (upper bounds)

    @property
    def ok(self) -> bool:
        return bool(self.converged.all())


class SolverError(RuntimeError):
    pass


def _m_orthonormalize(S: np.ndarray, M: LinOp):
    """Return S with S^T M S = I, dropping near-dependent columns."""
    MS = M.matmat(S)
    G = S.T @ MS
    G = 0.5 * (G + G.T)
    if np.any(np.diag(G) <= 0.0):
        raise SolverError("mass operator is not positive definite on the block")
    try:
        L = np.linalg.cholesky(G)
        return sla.solve_triangular(L, S.T, lower=True).T
    except np.linalg.LinAlgError:
        w, Q = np.linalg.eigh(G)
        if w.max() <= 0.0 or w.min() < -1e-10 * w.max():
            # genuinely negative directions, not just dependent columns
            raise SolverError(
                "mass operator is not positive definite on the block")
        keep = w > w.max() * 1e-12
        if not keep.any():
            raise SolverError("search block collapsed to the zero subspace")
        return S @ (Q[:, keep] / np.sqrt(w[keep]))


def smallest_eigenpairs(A, M=None, opts: EigOptions | None = None,
                        precond=None) -> EigResult:
    """Lowest-k generalized eigenpairs of (A, M) by preconditioned block CG.

    Deterministic for a fixed seed.  Ritz values are always upper bounds
    for the corresponding exact eigenvalues (min-max over the current
    subspace), converged or not; `converged` reports which pairs met the
    relative residual tolerance.
    """
    A = as_operator(A)
    opts = opts or EigOptions()
    n = A.n
    M = IdentityOp(n) if M is None else as_operator(M)
    if M.n != n:
        raise ValueError(f"operator sizes differ: A is {n}, M is {M.n}")
    k = opts.k
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    bs = min(opts.block or k + 3, n)
    if bs < k:
        raise ValueError(f"block size {bs} smaller than k={k}")
    if precond is None:
        try:
            precond = JacobiPrecond(A.diagonal())
        except (AttributeError, ValueError):
            precond = lambda R, sigma: R

    rng = np.random.default_rng(opts.seed)
    X = _m_orthonormalize(rng.standard_normal((n, bs)), M)
    P = None
    nmat = 0
    theta = np.zeros(bs)
    rn = np.full(bs, np.inf)
    for it in range(opts.maxit):
        AX = A.matmat(X)
        nmat += 1
        H = X.T @ AX
        H = 0.5 * (H + H.T)
        theta, Y = np.linalg.eigh(H)
        X = X @ Y
        AX = AX @ Y
        MX = M.matmat(X)
        R = AX - MX * theta
        rn = np.linalg.norm(R, axis=0)
        scale = np.maximum(np.abs(theta), 1e-300)
        # converge the whole cluster: pairs beyond k that are nearly
        # degenerate with theta[k-1] must settle too, or the requested
        # values can still drift
        need = k
        while need < bs - 1 and theta[need] - theta[k - 1] <= \
                1e-6 * max(1.0, abs(theta[k - 1])):
            need += 1
        if np.all(rn[:need] <= opts.tol * scale[:need]):
            return EigResult(theta[:k].copy(), X[:, :k].copy(),
                             np.ones(k, dtype=bool), it, nmat,
                             rn[:k].copy(), theta.copy())
        W = precond(R, float(theta[0]))
        S = np.hstack([X, W] if P is None else [X, W, P])
        S = _m_orthonormalize(S, M)
        AS = A.matmat(S)
        nmat += 1
        Hs = S.T @ AS
        Hs = 0.5 * (Hs + Hs.T)
        ths, Ys = np.linalg.eigh(Hs)
        Xn = S @ Ys[:, :bs]
        Cp = Ys[:, :bs].copy()
        Cp[:X.shape[1], :] = 0.0   # new directions only
        P = S @ Cp
        try:
            P = _m_orthonormalize(P, M)
        except SolverError:
            P = None
        if P is not None and P.shape[1] == 0:
            P = None
        X = _m_orthonormalize(Xn, M)
        if X.shape[1] < bs:
            # dropped a column: pad with fresh random directions
            pad = rng.standard_normal((n, bs - X.shape[1]))
            X = _m_orthonormalize(np.hstack([X, pad]), M)
    conv = rn[:k] <= opts.tol * np.maximum(np.abs(theta[:k]), 1e-300)
    return EigResult(theta[:k].copy(), X[:, :k].copy(), conv,
                     opts.maxit, nmat, rn[:k].copy(), theta.copy())


def _dense_result(A: LinOp, M, k: int) -> EigResult:
    Ad = materialize(A)
    Md = materialize(as_operator(M)) if M is not None else None
    w, V = sla.eigh(Ad, Md)
    return EigResult(w[:k].copy(), V[:, :k].copy(), np.ones(k, dtype=bool),
                     0, 0, np.zeros(k), w.copy())


@dataclass
class CountResult:
    count: int
    boundary: bool             # some Ritz value inside the safety band
    clearance: float           # smallest converged value above T, minus T
    threshold: float
    safety: float
    result: EigResult

    @property
    def reliable(self) -> bool:
        return (not self.boundary) and self.result.ok and self.clearance > 0


def count_below(A, M, threshold: float, safety: float,
                opts: EigOptions | None = None, precond=None,
                kmax: int = 48) -> CountResult:
    """Count eigenvalues certified below ``threshold - safety``.

    Ritz values bound eigenvalues from above, so a converged value under
    the band certifies one eigenvalue there.  The block grows until at
    least one converged value clears ``threshold + safety``, so the
    count cannot be truncated by a too-small search space.  Problems
    whose block would rival the dimension fall back to a dense solve.
    """
    A = as_operator(A)
    if safety < 0:
        raise ValueError(f"safety band must be nonnegative, got {safety}")
    base = opts or EigOptions()
    k = max(base.k, 4)
    while True:
        k = min(k, A.n)
        if 3 * (k + 3) > A.n:
            res = _dense_result(A, M, k)
        else:
            res = smallest_eigenpairs(A, M, dataclasses.replace(base, k=k),
                                      precond)
        th = res.theta[res.converged]
        above = th[th >= threshold + safety]
        if above.size or k >= min(kmax, A.n):
            break
        k = min(2 * k, kmax, A.n)
    count = int(np.count_nonzero(th < threshold - safety))
    boundary = bool(np.any(np.abs(res.theta - threshold) <= safety)
                    or not res.ok)
    clearance = float(above.min() - threshold) if above.size else -np.inf
    return CountResult(count, boundary, clearance, threshold, safety, res)
