"""Discrete quadratic forms for the transformed waveguide problems.

All operators are built from 1-D piecewise-linear element factors
(stiffness K, mass M, skew D = integral of phi' psi) combined in
Kronecker products, so the half-guide form

    Q_beta(psi) = int |psi' - beta d(psi)/dy2|^2 + |grad_y psi|^2

becomes  A = Kx(x)M1(x)M2 - beta (Dx(x)M1(x)D2' + Dx'(x)M1(x)D2)
           + beta^2 Mx(x)M1(x)K2 + Mx(x)K1(x)M2 + Mx(x)M1(x)K2

against the mass Mx(x)M1(x)M2.  Consistent mass everywhere: discrete
eigenvalues are variational upper bounds, which the ladder logic and the
counting rely on.  The x interval is capped at L with a Dirichlet end
(upper bounds again, decreasing in L); x = 0 is natural Neumann.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .eigcore import FactorSpectral, KronOp, LinOp, MassKron, TensorPrecond
from .geometry import MaskSection, Rect, Section, beta_value, section_diameter

__all__ = [
    "Fem1D",
    "ShearForm",
    "fem1d",
    "signed_skew",
    "section_fem",
    "assemble_waveguide",
    "assemble_reduced2d",
    "assemble_prism",
    "triangle_matrices",
]

_BC = ("dirichlet", "neumann")


@dataclass(frozen=True)
class Fem1D:
    """Uniform P1 element factor on an interval with per-end conditions.

    K, M, D live on the kept degrees of freedom: Dirichlet ends drop
    their node, Neumann ends keep it (natural).  D is antisymmetric on
    interior rows; kept end rows carry the by-parts boundary terms
    -1/2 and +1/2 on the diagonal.
    """

    n: int
    length: float
    start: float
    bc: tuple[str, str]
    K: sp.csr_matrix = field(repr=False)
    M: sp.csr_matrix = field(repr=False)
    D: sp.csr_matrix = field(repr=False)
    nodes: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def dim(self) -> int:
        return self.K.shape[0]

    def spectral(self) -> FactorSpectral:
        """M-orthonormal eigenbasis of (K, M); fast-transform closed
        forms for the two grid-aligned cases, dense otherwise."""
        h = self.h
        if self.bc == ("dirichlet", "dirichlet"):
            j = np.arange(1, self.n)
            c = np.cos(np.pi * j / self.n)
            kind = "dst"
        elif self.bc == ("neumann", "dirichlet"):
            j = np.arange(self.n)
            c = np.cos(np.pi * (j + 0.5) / self.n)
            kind = "dct"
        else:
            lam, V = sla.eigh(self.K.toarray(), self.M.toarray())
            return FactorSpectral(lam=lam, kind="dense", V=V)
        lam = (6.0 / h**2) * (1.0 - c) / (2.0 + c)
        nrm = np.sqrt((self.length / 6.0) * (2.0 + c))
        return FactorSpectral(lam=lam, kind=kind, nrm=nrm)


def fem1d(n: int, length: float, bc_left: str = "dirichlet",
          bc_right: str = "dirichlet", start: float = 0.0) -> Fem1D:
    if n < 2:
        raise ValueError(f"need at least 2 elements, got {n}")
    if length <= 0 or not math.isfinite(length):
        raise ValueError(f"bad interval length {length}")
    for bc in (bc_left, bc_right):
        if bc not in _BC:
            raise ValueError(f"unknown boundary condition {bc!r}")
    h = length / n
    m = n + 1
    K = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m)).tolil() / h
    M = sp.diags([1.0, 4.0, 1.0], [-1, 0, 1], shape=(m, m)).tolil() * (h / 6)
    D = sp.diags([0.5, 0.0, -0.5], [-1, 0, 1], shape=(m, m)).tolil()
    K[0, 0] = K[-1, -1] = 1.0 / h
    M[0, 0] = M[-1, -1] = 2 * h / 6
    D[0, 0] = -0.5
    D[-1, -1] = 0.5
    keep = np.ones(m, dtype=bool)
    if bc_left == "dirichlet":
        keep[0] = False
    if bc_right == "dirichlet":
        keep[-1] = False
    idx = np.flatnonzero(keep)
    nodes = start + idx * h
    return Fem1D(n=n, length=length, start=start, bc=(bc_left, bc_right),
                 K=K.tocsr()[idx][:, idx].tocsr(),
                 M=M.tocsr()[idx][:, idx].tocsr(),
                 D=D.tocsr()[idx][:, idx].tocsr(),
                 nodes=nodes)


def signed_skew(fem: Fem1D) -> sp.csr_matrix:
    """Skew factor with the per-element weight sign(x).

    The kink at x = 0 must be a grid node, so the element count is even
    and the interval symmetric.  Used by the full-domain mode, where the
    shear coefficient flips sign across the kink.
    """
    if fem.n % 2 or abs(fem.start + fem.length / 2) > 1e-12 * fem.length:
        raise ValueError("signed skew needs a symmetric interval with "
                         "a node at x = 0")
    h = fem.h
    m = fem.n + 1
    rows, cols, vals = [], [], []
    dl = 0.5 * np.array([[-1.0, -1.0], [1.0, 1.0]])
    for e in range(fem.n):
        s = math.copysign(1.0, fem.start + (e + 0.5) * h)
        for a in range(2):
            for b in range(2):
                rows.append(e + a)
                cols.append(e + b)
                vals.append(s * dl[a, b])
    D = sp.csr_matrix((vals, (rows, cols)), shape=(m, m))
    keep = np.ones(m, dtype=bool)
    keep[0] = fem.bc[0] != "dirichlet"
    keep[-1] = fem.bc[1] != "dirichlet"
    idx = np.flatnonzero(keep)
    return D[idx][:, idx].tocsr()


def section_fem(section: MaskSection):
    """Q1 element matrices on the union of inside cells.

    Degrees of freedom are cell vertices whose four surrounding cells
    are all inside (Dirichlet on the union boundary).  Returns sparse
    (K1, K2, D2, M) on those vertices.
    """
    inside = section.inside
    h = section.cell
    n1, n2 = inside.shape
    pad = np.zeros((n1 + 2, n2 + 2), dtype=bool)
    pad[1:-1, 1:-1] = inside
    # vertex (i, j), i in 0..n1, j in 0..n2: interior iff all 4 cells in
    interior = (pad[:-1, :-1] & pad[1:, :-1] & pad[:-1, 1:] & pad[1:, 1:])
    idx = -np.ones(interior.shape, dtype=int)
    verts = np.argwhere(interior)
    if len(verts) == 0:
        raise ValueError("mask has no interior vertices; refine it")
    idx[interior] = np.arange(len(verts))
    k1e = (1.0 / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    m1e = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    d1e = 0.5 * np.array([[-1.0, -1.0], [1.0, 1.0]])
    # local order (d1, d2) with d2 fastest
    K1l = np.kron(k1e, m1e)
    K2l = np.kron(m1e, k1e)
    D2l = np.kron(m1e, d1e)
    Ml = np.kron(m1e, m1e)
    cells = np.argwhere(inside)
    offs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    glob = np.stack([idx[cells[:, 0] + a, cells[:, 1] + b] for a, b in offs],
                    axis=1)
    rows = np.repeat(glob, 4, axis=1).ravel()
    cols = np.tile(glob, (1, 4)).ravel()
    ok = (rows >= 0) & (cols >= 0)
    nv = len(verts)

    def asm(local):
        vals = np.tile(local.reshape(1, 16), (len(cells), 1)).ravel()
        return sp.csr_matrix((vals[ok], (rows[ok], cols[ok])), shape=(nv, nv))

    return asm(K1l), asm(K2l), asm(D2l), asm(Ml)


@dataclass
class ShearForm:
    """An assembled pencil (A, M) with its provenance.

    ``factors`` keeps the 1-D (or section) matrices for dumps and for
    the separable preconditioner; ``warnings`` records advisory issues
    such as a truncation length that is short relative to the section.
    """

    mode: str
    beta: float
    A: LinOp
    M: MassKron
    shape: tuple[int, ...]
    factors: dict
    section: Section | None = None
    L: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.A.n

    def preconditioner(self) -> TensorPrecond | None:
        """Exact inverse of the separable part; None when a section
        factor is too large to diagonalize densely."""
        pairs = []
        for coeff, fac in self.factors["separable"]:
            if isinstance(fac, Fem1D):
                pairs.append((coeff, fac.spectral()))
            else:
                K, Msec = fac
                if K.shape[0] > 3000:
                    return None
                lam, V = sla.eigh(K.toarray(), Msec.toarray())
                pairs.append((coeff, FactorSpectral(lam=lam, kind="dense",
                                                    V=V)))
        return TensorPrecond(pairs)

    def dump_factors(self, path) -> None:
        """Plain-text sparse triplets: one 'row col value' line each."""
        with open(path, "w") as f:
            for name, mat in self.factors["matrices"].items():
                coo = sp.coo_matrix(mat)
                f.write(f"# {name} {coo.shape[0]} {coo.shape[1]}\n")
                for i, j, v in zip(coo.row, coo.col, coo.data):
                    f.write(f"{i} {j} {v:.17g}\n")


def _x_factor(L: float, nx: int, mode: str):
    if mode == "full_sign":
        fem = fem1d(2 * nx, 2 * L, "dirichlet", "dirichlet", start=-L)
        return fem, signed_skew(fem)
    fem = fem1d(nx, L, "neumann", "dirichlet")
    return fem, fem.D


def _check_truncation(L: float, section: Section, warnings: list[str]):
    diam = section_diameter(section)
    if L <= diam:
        warnings.append(f"truncation L={L:g} does not exceed the section "
                        f"diameter {diam:g}; expect strong confinement bias")


def assemble_waveguide(beta, section: Section, L: float, grid,
                       mode: str = "half_DN") -> ShearForm:
    """3-D half-guide (half_DN), full-domain (full_sign) or beta = 0
    (straight) form.

    ``grid`` is (nx, n1, n2) for rectangle sections, nx for masks; nx
    counts x elements on (0, L) (doubled internally for full_sign).
    """
    if mode not in ("half_DN", "full_sign", "straight"):
        raise ValueError(f"unknown mode {mode!r}")
    b = beta_value(beta, allow_zero=mode == "straight")
    if mode == "straight":
        b = 0.0
    if L <= 0 or not math.isfinite(L):
        raise ValueError(f"bad truncation length {L}")
    warnings: list[str] = []
    _check_truncation(L, section, warnings)
    xmode = "full_sign" if mode == "full_sign" else "half_DN"
    if isinstance(section, Rect):
        nx, n1, n2 = (grid, grid, grid) if isinstance(grid, int) else grid
        fx, Dx = _x_factor(L, nx, xmode)
        f1 = fem1d(n1, section.width1)
        f2 = fem1d(n2, section.width2)
        shape = (fx.dim, f1.dim, f2.dim)
        terms = [
            (1.0, (fx.K, f1.M, f2.M)),
            (1.0, (fx.M, f1.K, f2.M)),
            (1.0 + b * b, (fx.M, f1.M, f2.K)),
        ]
        if b:
            terms += [(-b, (Dx, f1.M, f2.D.T.tocsr())),
                      (-b, (Dx.T.tocsr(), f1.M, f2.D))]
        A = KronOp(terms, shape)
        M = MassKron((fx.M, f1.M, f2.M), shape)
        factors = {
            "separable": [(1.0, fx), (1.0, f1), (1.0 + b * b, f2)],
            "matrices": {"x_K": fx.K, "x_M": fx.M, "x_D": Dx,
                         "y1_K": f1.K, "y1_M": f1.M,
                         "y2_K": f2.K, "y2_M": f2.M, "y2_D": f2.D},
        }
    else:
        nx = grid if isinstance(grid, int) else grid[0]
        fx, Dx = _x_factor(L, nx, xmode)
        K1, K2, D2, Msec = section_fem(section)
        shape = (fx.dim, Msec.shape[0])
        Ksec = (K1 + (1.0 + b * b) * K2).tocsr()
        terms = [(1.0, (fx.K, Msec)), (1.0, (fx.M, Ksec))]
        if b:
            terms += [(-b, (Dx, D2.T.tocsr())), (-b, (Dx.T.tocsr(), D2))]
        A = KronOp(terms, shape)
        M = MassKron((fx.M, Msec), shape)
        factors = {
            "separable": [(1.0, fx), (1.0, (Ksec, Msec))],
            "matrices": {"x_K": fx.K, "x_M": fx.M, "x_D": Dx,
                         "sec_K": Ksec, "sec_M": Msec, "sec_D2": D2},
        }
    return ShearForm(mode=mode, beta=b, A=A, M=M, shape=shape,
                     factors=factors, section=section, L=L,
                     warnings=warnings)


def assemble_reduced2d(beta, rect: Rect, L: float, grid) -> ShearForm:
    """Planar factor of the rectangle problem on (0, L) x (c, d).

    Full 3-D eigenvalues are these plus the y1 channel values
    pi^2 k^2 / (b-a)^2; solving in 2-D is how the fine ladders stay
    affordable.
    """
    if not isinstance(rect, Rect):
        raise ValueError("reduced mode needs a rectangle section")
    b = beta_value(beta, allow_zero=True)
    if L <= 0 or not math.isfinite(L):
        raise ValueError(f"bad truncation length {L}")
    nx, n2 = (grid, grid) if isinstance(grid, int) else grid
    fx = fem1d(nx, L, "neumann", "dirichlet")
    f2 = fem1d(n2, rect.width2)
    shape = (fx.dim, f2.dim)
    terms = [(1.0, (fx.K, f2.M)), (1.0 + b * b, (fx.M, f2.K))]
    if b:
        terms += [(-b, (fx.D, f2.D.T.tocsr())), (-b, (fx.D.T.tocsr(), f2.D))]
    warnings: list[str] = []
    if L <= rect.width2:
        warnings.append(f"truncation L={L:g} below strip width")
    return ShearForm(mode="reduced2d", beta=b, A=KronOp(terms, shape),
                     M=MassKron((fx.M, f2.M), shape), shape=shape,
                     factors={"separable": [(1.0, fx), (1.0 + b * b, f2)],
                              "matrices": {"x_K": fx.K, "x_M": fx.M,
                                           "x_D": fx.D, "y2_K": f2.K,
                                           "y2_M": f2.M, "y2_D": f2.D}},
                     section=rect, L=L, warnings=warnings)


def triangle_matrices(n: int, A_len: float):
    """P1/Q1 matrices on the triangle -A < x < 0, 0 < y2 < x + A.

    The tensor grid is cut along the diagonal y2 = x + A: cells below it
    are standard Q1, diagonal cells keep their lower-right triangle with
    element integrals from 3-point edge-midpoint quadrature (exact for
    the gradient products).  Dirichlet on y2 = 0 only; x = 0 and the
    slant are natural.  Returns (Sxx, Syy, Mass, kept vertex list).
    """
    if n < 4:
        raise ValueError(f"grid too coarse for the diagonal cut: n={n}")
    h = A_len / n
    # vertex (i, k): x = -A + i h, y2 = k h; keep k >= 1 and k <= i + 1
    idx = -np.ones((n + 1, n + 1), dtype=int)
    kept = [(i, k) for i in range(n + 1) for k in range(1, min(i + 1, n) + 1)]
    for p, (i, k) in enumerate(kept):
        idx[i, k] = p
    nv = len(kept)
    k1e = (1.0 / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    m1e = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    Sxx_f = np.kron(k1e, m1e)
    Syy_f = np.kron(m1e, k1e)
    M_f = np.kron(m1e, m1e)

    # edge midpoints of the unit lower-right triangle (0,0)-(1,0)-(1,1)
    qp = np.array([[0.5, 0.0], [1.0, 0.5], [0.5, 0.5]])
    wq = np.full(3, 0.5 / 3.0)  # triangle area in cell coords over 3

    def q1(xi, eta):
        return np.array([(1 - xi) * (1 - eta), (1 - xi) * eta,
                         xi * (1 - eta), xi * eta])

    def q1_dxi(xi, eta):
        return np.array([-(1 - eta), -eta, (1 - eta), eta])

    def q1_deta(xi, eta):
        return np.array([-(1 - xi), (1 - xi), -xi, xi])

    Sxx_c = np.zeros((4, 4))
    Syy_c = np.zeros((4, 4))
    M_c = np.zeros((4, 4))
    # (1/h)^2 from each gradient cancels the h^2 area scale, so the
    # stiffness blocks are h-free; the mass keeps its h^2
    for (xi, eta), w in zip(qp, wq):
        p = q1(xi, eta)
        dx = q1_dxi(xi, eta)
        de = q1_deta(xi, eta)
        Sxx_c += w * np.outer(dx, dx)
        Syy_c += w * np.outer(de, de)
        M_c += w * h * h * np.outer(p, p)

    rows, cols = [], []
    vx, vy, vm = [], [], []
    offs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for ci in range(n):
        for ck in range(ci + 1):
            loc_x, loc_y, loc_m = ((Sxx_f, Syy_f, M_f) if ck < ci
                                   else (Sxx_c, Syy_c, M_c))
            dofs = [idx[ci + a, ck + b] for a, b in offs]
            for a in range(4):
                if dofs[a] < 0:
                    continue
                for bq in range(4):
                    if dofs[bq] < 0:
                        continue
                    rows.append(dofs[a])
                    cols.append(dofs[bq])
                    vx.append(loc_x[a, bq])
                    vy.append(loc_y[a, bq])
                    vm.append(loc_m[a, bq])
    shape = (nv, nv)
    Sxx = sp.csr_matrix((vx, (rows, cols)), shape=shape)
    Syy = sp.csr_matrix((vy, (rows, cols)), shape=shape)
    Mass = sp.csr_matrix((vm, (rows, cols)), shape=shape)
    return Sxx, Syy, Mass, kept


def assemble_prism(beta, rect: Rect, grid) -> ShearForm:
    """Comparison prism form J(beta) with its anisotropic coefficients.

    ``grid`` is (n, n1): n cells along x and y2 (equal, so the diagonal
    cut runs through cell corners), n1 elements across y1.  The x/y2
    triangle factor and the y1 factor separate exactly; the ShearForm
    carries both so eigenvalues can be synthesized per channel.
    """
    b = beta_value(beta)
    if not isinstance(rect, Rect):
        raise ValueError("prism comparison needs a rectangle section")
    n, n1 = (grid, grid) if isinstance(grid, int) else grid
    A_len = rect.width2 / math.sqrt(2.0)
    cx = (1.0 + b * b) / (2.0 * b * b)
    cy = (1.0 + b * b) / 2.0
    Sxx, Syy, Mass, kept = triangle_matrices(n, A_len)
    Atri = (cx * Sxx + cy * Syy).tocsr()
    f1 = fem1d(n1, rect.width1)
    shape = (Mass.shape[0], f1.dim)
    A = KronOp([(1.0, (Atri, f1.M)), (1.0, (Mass, f1.K))], shape)
    M = MassKron((Mass, f1.M), shape)
    return ShearForm(mode="prism", beta=b, A=A, M=M, shape=shape,
                     factors={"separable": [(1.0, (Atri, Mass)), (1.0, f1)],
                              "matrices": {"tri_A": Atri, "tri_M": Mass,
                                           "y1_K": f1.K, "y1_M": f1.M},
                              "triangle": (Atri, Mass, kept),
                              "y1": f1},
                     section=rect, L=None)
