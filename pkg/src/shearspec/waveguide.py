"""End-to-end spectral runs: ladders, counts, and reports.

A run walks a two-axis ladder.  Mesh rungs double every 1-D grid size at
the longest box; box steps double the truncation length L at the finest
mesh (nx doubles with L, so h_x stays put and the coarse box's space is
nested in the long one).  Conforming P1 spaces make the Ritz values
upper bounds that fall monotonically along both axes, so the ladder is
also a self-test: any increase is flagged.

Counting is done on Richardson-extrapolated values (the h^2 model) with
a safety band widened by the observed extrapolation scatter and the
residual box-length drift, never on raw rung values: conforming FEM
biases eigenvalues up, and near-threshold states would otherwise be
missed.  A value inside the band gives a boundary flag and the report is
marked inconclusive rather than rounded either way.

The reduced2d mode solves the planar factor only and synthesizes full
eigenvalues by adding the exact transverse channel offsets
(pi k / w1)^2; the y1 direction is never discretized there, which is how
the weakly bound benchmark stays affordable at grid 256 and L in the
hundreds.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import ShearForm, assemble_reduced2d, assemble_waveguide, fem1d
from .cross_section import refine_mask
from .eigcore import EigOptions, count_below, materialize, smallest_eigenpairs
from .geometry import MaskSection, Rect, Section, WaveguideSpec, beta_value
from .thresholds import ess_threshold

__all__ = [
    "MODES",
    "DiscretizationSpec",
    "RungGrid",
    "RungResult",
    "SpectrumReport",
    "CountCertificate",
    "SymmetryReport",
    "SeparationReport",
    "SweepResult",
    "compute_spectrum",
    "count_discrete",
    "symmetry_check",
    "separation_check",
    "sweep_beta",
    "benchmark_disc",
]

MODES = ("half_DN", "full_sign", "reduced2d")

# below this pencil size a dense solve is cheaper than iterating
DENSE_N = 700

CSV_COLUMNS = ("beta", "mode", "rung", "L", "nx", "n1", "n2", "j",
               "lambda", "residual", "below_threshold", "flags")


@dataclass(frozen=True)
class DiscretizationSpec:
    """Coarsest-rung grid sizes plus the ladder layout.

    ``refine`` mesh rungs run at the longest box and ``l_steps`` box
    lengths at the finest mesh; rung (r, s) uses grid sizes
    (nx 2^(r+s), n1 2^r, n2 2^r) and box length L 2^s.
    """

    nx: int
    n1: int
    n2: int
    L: float
    mode: str = "half_DN"
    refine: int = 3
    l_steps: int = 2

    def __post_init__(self) -> None:
        for name in ("nx", "n1", "n2"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 8:
                raise ValueError(f"{name} must be an integer >= 8, got {v!r}")
        if not (self.L > 0.0 and math.isfinite(self.L)):
            raise ValueError(f"box length must be positive, got {self.L}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; pick one of {MODES}")
        if self.refine < 1 or self.l_steps < 1:
            raise ValueError("ladder needs at least one rung and one box step")

    def rung(self, r: int, s: int) -> "RungGrid":
        if not (0 <= r < self.refine and 0 <= s < self.l_steps):
            raise ValueError(f"rung ({r}, {s}) outside the ladder")
        f = 2 ** r
        return RungGrid(r, s, self.nx * f * 2 ** s, self.n1 * f,
                        self.n2 * f, self.L * 2 ** s)

    def ladder(self) -> list[tuple[int, int]]:
        """The (r, s) pairs actually run: all mesh rungs at the longest
        box plus all box steps at the finest mesh."""
        tr, ts = self.refine - 1, self.l_steps - 1
        pairs = {(r, ts) for r in range(self.refine)}
        pairs.update((tr, s) for s in range(self.l_steps))
        return sorted(pairs)


@dataclass(frozen=True)
class RungGrid:
    r: int
    s: int
    nx: int
    n1: int
    n2: int
    L: float


@dataclass
class RungResult:
    """One ladder point: its grid, discrete threshold, and Ritz data.

    ``eigenvalues`` are always on the full-guide scale; in reduced mode
    they are channel sums and ``planar`` keeps the raw planar values
    they came from.
    """

    grid: RungGrid
    threshold: float
    eigenvalues: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    seconds: float
    warnings: list[str] = field(default_factory=list)
    planar: np.ndarray | None = None
    iterations: int = 0
    # raw below-band count; kept separately because in reduced mode the
    # displayed value list is truncated while the count is not
    below: int = 0


@dataclass
class SpectrumReport:
    beta: float
    mode: str
    section: Section
    threshold: float
    order: int
    rungs: list[RungResult]
    eigenvalues: np.ndarray
    est: np.ndarray
    safety: np.ndarray
    count: int
    boundary: list[int]
    counts_by_rung: dict[tuple[int, int], int]
    stable: bool
    flags: list[str]
    seconds: float
    planar: np.ndarray | None = None
    channels: list[tuple[int, int]] | None = None

    @property
    def gap(self) -> float:
        """Threshold clearance of the lowest extrapolated value."""
        return float(self.threshold - self.eigenvalues[0])

    def as_dict(self) -> dict:
        d = {
            "beta": self.beta,
            "mode": self.mode,
            "section": _section_dict(self.section),
            "threshold": self.threshold,
            "order": self.order,
            "eigenvalues": self.eigenvalues.tolist(),
            "est": self.est.tolist(),
            "safety": self.safety.tolist(),
            "count": self.count,
            "boundary": list(self.boundary),
            "counts_by_rung": {f"r{r}s{s}": c
                               for (r, s), c in sorted(self.counts_by_rung.items())},
            "stable": self.stable,
            "flags": list(self.flags),
            "seconds": self.seconds,
            "planar": None if self.planar is None else self.planar.tolist(),
            "channels": None if self.channels is None
                        else [list(p) for p in self.channels],
            "rungs": [],
        }
        for rr in self.rungs:
            g = rr.grid
            d["rungs"].append({
                "r": g.r, "s": g.s, "nx": g.nx, "n1": g.n1, "n2": g.n2,
                "L": g.L, "threshold": rr.threshold,
                "eigenvalues": rr.eigenvalues.tolist(),
                "residuals": rr.residuals.tolist(),
                "converged": rr.converged.astype(bool).tolist(),
                "warnings": list(rr.warnings),
                "seconds": rr.seconds,
                "iterations": rr.iterations,
            })
        return d

    def to_json(self, path=None) -> str:
        text = json.dumps(self.as_dict(), indent=2)
        if path is not None:
            with open(path, "w") as f:
                f.write(text + "\n")
        return text

    def rows(self) -> list[dict]:
        """Flat table rows, one per (rung, j) plus extrapolated rows."""
        out = []
        for rr in self.rungs:
            g = rr.grid
            for j, lam in enumerate(rr.eigenvalues):
                out.append({
                    "beta": self.beta, "mode": self.mode,
                    "rung": f"r{g.r}s{g.s}", "L": g.L,
                    "nx": g.nx, "n1": g.n1, "n2": g.n2, "j": j,
                    "lambda": float(lam),
                    "residual": float(rr.residuals[j]),
                    "below_threshold": int(lam < rr.threshold),
                    "flags": ";".join(rr.warnings),
                })
        g = self.rungs[-1].grid
        for j, lam in enumerate(self.eigenvalues):
            out.append({
                "beta": self.beta, "mode": self.mode, "rung": "ext",
                "L": g.L, "nx": g.nx, "n1": g.n1, "n2": g.n2, "j": j,
                "lambda": float(lam), "residual": float(self.est[j]),
                "below_threshold": int(lam < self.threshold - self.safety[j]),
                "flags": ";".join(self.flags),
            })
        return out


@dataclass
class CountCertificate:
    """A count plus the evidence it rests on."""

    count: int
    stable: bool
    counts_by_rung: dict[tuple[int, int], int]
    flags: list[str]
    report: SpectrumReport


def _section_dict(section: Section) -> dict:
    if isinstance(section, Rect):
        return {"kind": "rect", "a": section.a, "b": section.b,
                "c": section.c, "d": section.d}
    return {"kind": "mask", "shape": list(section.inside.shape),
            "cells": int(section.inside.sum()), "cell": section.cell,
            "origin": list(section.origin)}


@dataclass
class _Solve:
    theta: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    iterations: int


def _solve(form: ShearForm, k: int, opts: EigOptions,
           dense_n: int = DENSE_N) -> _Solve:
    k = min(k, form.n)
    if form.n <= dense_n:
        A = materialize(form.A)
        M = materialize(form.M)
        w, V = sla.eigh(A, M, subset_by_index=[0, k - 1])
        res = np.linalg.norm(A @ V - (M @ V) * w, axis=0)
        return _Solve(w, V, res, np.ones(k, dtype=bool), 0)
    r = smallest_eigenpairs(form.A, form.M,
                            dataclasses.replace(opts, k=k),
                            form.preconditioner())
    return _Solve(r.theta, r.vectors, r.residuals, r.converged, r.iterations)


def _build(beta: float, section: Section, disc: DiscretizationSpec,
           g: RungGrid, straight: bool) -> ShearForm:
    if disc.mode == "reduced2d":
        return assemble_reduced2d(beta, section, g.L, (g.nx, g.n2))
    sec = section
    if isinstance(section, MaskSection):
        if g.r > 0:
            sec = refine_mask(section, 2 ** g.r)
        grid = g.nx
    else:
        grid = (g.nx, g.n1, g.n2)
    mode = "straight" if straight else disc.mode
    return assemble_waveguide(beta, sec, g.L, grid, mode)


def _rung_threshold(beta: float, form: ShearForm, mode: str) -> float:
    """Full-guide threshold consistent with this rung's discretization.

    Rectangles get the closed form.  Masks get the ground value of the
    assembled section pencil: the channel band of the discrete operator
    starts there, not at the continuum value, and mixing the two would
    corrupt near-threshold counts at coarse rungs.
    """
    if isinstance(form.section, Rect):
        return ess_threshold(beta, form.section)
    Ks = form.factors["matrices"]["sec_K"]
    Ms = form.factors["matrices"]["sec_M"]
    if Ks.shape[0] <= 3000:
        w = sla.eigh(Ks.toarray(), Ms.toarray(), subset_by_index=[0, 0],
                     eigvals_only=True)
        return float(w[0])
    import scipy.sparse.linalg as spla
    w = spla.eigsh(Ks.tocsc(), k=1, M=Ms.tocsc(), sigma=0.0, which="LM",
                   return_eigenvectors=False)
    return float(w[0])


def _channel_sums(planar: np.ndarray, rect: Rect, e1: float,
                  band: float) -> tuple[list[tuple[float, int, int]], int]:
    """All (value, m, k) channel sums that could sit near or below e1,
    and the count of those certified below e1 - band.

    Planar values at or above the planar threshold only produce sums at
    or above e1, so a planar list with clearance above its own threshold
    makes the sum list complete below e1.
    """
    w1 = rect.width1
    kmax = max(1, int(math.floor(w1 * math.sqrt(max(e1, 0.0)) / math.pi)) + 1)
    entries = []
    count = 0
    for k in range(1, kmax + 1):
        off = (math.pi * k / w1) ** 2
        if off > e1 + band and k > 1:
            break
        for m, p in enumerate(planar):
            v = p + off
            entries.append((v, m, k))
            if v < e1 - band:
                count += 1
    entries.sort()
    return entries, count


def _grid_for(disc: DiscretizationSpec, section: Section, r: int,
              s: int) -> RungGrid:
    """Ladder grid with labels matching what is actually discretized:
    reduced mode has no y1 grid, masks carry their own cell counts."""
    g = disc.rung(r, s)
    if disc.mode == "reduced2d":
        return dataclasses.replace(g, n1=0)
    if isinstance(section, MaskSection):
        s1, s2 = section.inside.shape
        return dataclasses.replace(g, n1=s1 * 2 ** r, n2=s2 * 2 ** r)
    return g


def compute_spectrum(spec: WaveguideSpec, disc: DiscretizationSpec,
                     opts: EigOptions | None = None) -> SpectrumReport:
    """Run the full ladder and report extrapolated eigenvalues, the
    below-threshold count with its safety band, and stability flags.

    The finest rung runs first with an adaptive block that keeps growing
    until a converged value clears the threshold; the block size it
    settles on fixes how many pairs every other rung resolves, so values
    stay index-aligned across the ladder.
    """
    t_start = time.perf_counter()
    base = opts or EigOptions(k=4, tol=1e-9)
    beta = spec.beta
    section = spec.section
    reduced = disc.mode == "reduced2d"
    if disc.refine < 2:
        raise ValueError("extrapolation needs at least two mesh rungs")
    if reduced and not isinstance(section, Rect):
        raise ValueError("reduced2d mode needs a rectangle section")
    flags: list[str] = []
    if disc.l_steps < 2:
        flags.append("single_box")

    pairs = disc.ladder()
    top = pairs[-1]
    results: dict[tuple[int, int], RungResult] = {}

    # finest rung: adaptive counting pass
    g = _grid_for(disc, section, *top)
    t0 = time.perf_counter()
    form = _build(beta, section, disc, g, spec.straight)
    e1_top = _rung_threshold(beta, form, disc.mode)
    if reduced:
        solver_thr = e1_top - (math.pi / section.width1) ** 2
    else:
        solver_thr = e1_top
    band0 = 1e-6 * abs(e1_top)
    pre = form.preconditioner()
    cres = count_below(form.A, form.M, solver_thr, band0, opts=base,
                       precond=pre)
    k_solve = max(base.k, 4, cres.count + 2)
    sol = _Solve(cres.result.theta, cres.result.vectors,
                 cres.result.residuals, cres.result.converged,
                 cres.result.iterations)
    if len(sol.theta) < k_solve:
        sol = _solve(form, k_solve, base)
    results[top] = _make_rung(g, e1_top, sol, k_solve, reduced, section,
                              form.warnings, time.perf_counter() - t0)

    for p in pairs[:-1]:
        g = _grid_for(disc, section, *p)
        t0 = time.perf_counter()
        form = _build(beta, section, disc, g, spec.straight)
        e1_r = _rung_threshold(beta, form, disc.mode)
        sol = _solve(form, k_solve, base)
        results[p] = _make_rung(g, e1_r, sol, k_solve, reduced, section,
                                form.warnings, time.perf_counter() - t0)

    tr, ts = top
    for (r, s), rr in sorted(results.items()):
        if not rr.converged.all():
            flags.append(f"nonconverged:r{r}s{s}")
        for w in rr.warnings:
            if w not in flags and not w.startswith("nonconverged"):
                flags.append(w)

    # two-point Richardson on the mesh series at the longest box; the
    # scatter between the last two extrapolants is the error estimate
    def _series(rr: RungResult) -> np.ndarray:
        return rr.planar if reduced else rr.eigenvalues

    arr = np.vstack([_series(results[(r, ts)]) for r in range(disc.refine)])
    ext = (4.0 * arr[-1] - arr[-2]) / 3.0
    if disc.refine >= 3:
        prev_ext = (4.0 * arr[-2] - arr[-3]) / 3.0
        est = np.abs(ext - prev_ext)
    else:
        est = np.abs(ext - arr[-1])
    # box-length error is handled by the stability demand across the
    # last two L steps, not by the band: continuum-edge values approach
    # the threshold from above as L grows and would flag every run
    est = np.maximum(est, 1e-14 * max(1.0, abs(e1_top)))

    _flag_monotone(results, disc, reduced, e1_top, flags)

    if isinstance(section, Rect):
        e1_ext = e1_top
        thr_est = 0.0
    else:
        e1_prev = results[(tr - 1, ts)].threshold
        e1_ext = (4.0 * e1_top - e1_prev) / 3.0
        thr_est = abs(e1_ext - e1_top)

    if reduced:
        safety_planar = np.maximum(1e-6 * abs(e1_ext), est + thr_est)
        entries, _ = _channel_sums(ext, section, e1_ext, 0.0)
        count = sum(1 for v, m, _ in entries
                    if v < e1_ext - safety_planar[m])
        take = entries[:k_solve]
        values = np.array([v for v, _, _ in take])
        channels = [(m, k) for _, m, k in take]
        safety = np.array([safety_planar[m] for _, m, _ in take])
        est_out = np.array([est[m] for _, m, _ in take])
        planar_out = ext
    else:
        safety = np.maximum(1e-6 * abs(e1_ext), est + thr_est)
        values = ext
        est_out = est
        count = int(np.sum(values < e1_ext - safety))
        channels = None
        planar_out = None

    boundary = [int(j) for j in np.nonzero(
        np.abs(values - e1_ext) <= safety)[0]]
    if reduced and len(entries) > k_solve:
        # a sum past the displayed list could still sit in the band
        for v, m, _ in entries[k_solve:]:
            if abs(v - e1_ext) <= safety_planar[m]:
                flags.append("boundary_beyond_list")
                break

    counts_by_rung = {p: results[p].below for p in pairs}
    if disc.l_steps >= 2:
        stable = (counts_by_rung[(tr, ts)] == counts_by_rung[(tr - 1, ts)]
                  == counts_by_rung[(tr, ts - 1)] == count)
    else:
        stable = False
    if boundary or not stable:
        flags.append("inconclusive")

    return SpectrumReport(
        beta=float(beta), mode=disc.mode, section=section,
        threshold=float(e1_ext), order=2,
        rungs=[results[p] for p in pairs],
        eigenvalues=values, est=est_out, safety=safety,
        count=count, boundary=boundary, counts_by_rung=counts_by_rung,
        stable=stable, flags=flags,
        seconds=time.perf_counter() - t_start,
        planar=planar_out, channels=channels)


def _make_rung(g: RungGrid, e1: float, sol: _Solve, k: int, reduced: bool,
               section: Section, warnings: list[str],
               seconds: float) -> RungResult:
    theta = sol.theta[:k]
    res = sol.residuals[:k]
    conv = sol.converged[:k]
    warn = list(warnings)
    if not conv.all():
        warn.append("nonconverged")
    band = 1e-6 * abs(e1)
    if reduced:
        entries, below = _channel_sums(theta, section, e1, band)
        take = entries[:k]
        vals = np.array([v for v, _, _ in take])
        rr = np.array([res[m] for _, m, _ in take])
        cc = np.array([conv[m] for _, m, _ in take])
        return RungResult(g, e1, vals, rr, cc, seconds, warn,
                          planar=theta.copy(), iterations=sol.iterations,
                          below=below)
    below = int(np.sum(theta < e1 - band))
    return RungResult(g, e1, theta.copy(), res.copy(), conv.copy(),
                      seconds, warn, iterations=sol.iterations, below=below)


def _flag_monotone(results, disc: DiscretizationSpec, reduced: bool,
                   scale: float, flags: list[str]) -> None:
    """Nested spaces force Ritz values down along both ladder axes; an
    increase beyond solver slack means something is wrong and is worth a
    flag even though counting would survive it."""
    tr, ts = disc.refine - 1, disc.l_steps - 1

    def vals(p):
        rr = results[p]
        return (rr.planar if reduced else rr.eigenvalues), rr.residuals

    for r in range(1, disc.refine):
        va, ra = vals((r - 1, ts))
        vb, rb = vals((r, ts))
        tol = 1e-7 * abs(scale) + 10.0 * (ra + rb)
        for j in np.nonzero(vb > va + tol)[0]:
            flags.append(f"monotone_refine:j{j}")
    for s in range(1, disc.l_steps):
        va, ra = vals((tr, s - 1))
        vb, rb = vals((tr, s))
        tol = 1e-7 * abs(scale) + 10.0 * (ra + rb)
        for j in np.nonzero(vb > va + tol)[0]:
            flags.append(f"monotone_L:j{j}")


def count_discrete(spec: WaveguideSpec, disc: DiscretizationSpec,
                   opts: EigOptions | None = None) -> CountCertificate:
    """Below-threshold count with its stability certificate.

    ``stable`` demands the identical raw count on the last two mesh
    rungs and the last two box lengths, and agreement with the count
    from the extrapolated values.
    """
    rep = compute_spectrum(spec, disc, opts)
    return CountCertificate(rep.count, rep.stable,
                            dict(rep.counts_by_rung), list(rep.flags), rep)


@dataclass
class SymmetryReport:
    beta: float
    grid: RungGrid
    half_values: np.ndarray
    full_values: np.ndarray
    gaps: np.ndarray
    matches: list[int]
    odd_fraction: np.ndarray
    seconds: float

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max())


def symmetry_check(spec: WaveguideSpec, disc: DiscretizationSpec,
                   opts: EigOptions | None = None) -> SymmetryReport:
    """Half-guide (Neumann at the bend) versus full broken guide at
    matched resolution.

    The full run reuses the half grid sizes mirrored through x = 0, so
    every half mesh node is a full mesh node and the even part of the
    full spectrum must reproduce the half spectrum.  Reports the nearest
    relative gap for each half value and the odd-part mass fraction of
    every full eigenvector.
    """
    t0 = time.perf_counter()
    beta = beta_value(spec.beta)
    section = spec.section
    base = opts or EigOptions(k=3, tol=1e-9)
    k = max(base.k, 3)
    g = disc.rung(0, 0)
    grid = g.nx if isinstance(section, MaskSection) else (g.nx, g.n1, g.n2)
    half = assemble_waveguide(beta, section, g.L, grid, "half_DN")
    full = assemble_waveguide(beta, section, g.L, grid, "full_sign")
    sh = _solve(half, k, base)
    kf = min(2 * k + 2, full.n)
    sf = _solve(full, kf, base)

    gaps = np.empty(k)
    matches = []
    for j in range(k):
        i = int(np.argmin(np.abs(sf.theta - sh.theta[j])))
        matches.append(i)
        gaps[j] = abs(sf.theta[i] - sh.theta[j]) / abs(sh.theta[j])

    # odd-part fraction in the mass norm; axis 0 of the full tensor grid
    # is x and its node row is symmetric about the bend
    V = sf.vectors
    shp = full.shape + (V.shape[1],)
    flipped = V.reshape(shp)[::-1].reshape(V.shape)
    odd = 0.5 * (V - flipped)
    m_odd = np.einsum("ij,ij->j", odd, full.M.matmat(odd))
    m_all = np.einsum("ij,ij->j", V, full.M.matmat(V))
    return SymmetryReport(beta, g, sh.theta.copy(), sf.theta.copy(), gaps,
                          matches, m_odd / m_all,
                          time.perf_counter() - t0)


@dataclass
class SeparationReport:
    beta: float
    grid: RungGrid
    values3d: np.ndarray
    pairs: list[tuple[int, int]]
    synthesized: np.ndarray
    rel: np.ndarray
    seconds: float

    @property
    def max_rel(self) -> float:
        return float(self.rel.max())


def separation_check(spec: WaveguideSpec, disc: DiscretizationSpec,
                     opts: EigOptions | None = None) -> SeparationReport:
    """Discrete tensor identity for rectangle sections.

    Every assembled term carries the y1 mass factor except the y1
    stiffness one, so each 3-D eigenvalue is exactly a planar eigenvalue
    plus a discrete y1 level; this check pairs them and reports the
    relative defect, which is solver noise only.
    """
    if not isinstance(spec.section, Rect):
        raise ValueError("separation holds for rectangle sections only")
    t0 = time.perf_counter()
    beta = beta_value(spec.beta)
    rect = spec.section
    base = opts or EigOptions(k=4)
    tight = dataclasses.replace(base, tol=1e-12)
    k = base.k
    g = disc.rung(0, 0)
    form3 = assemble_waveguide(beta, rect, g.L, (g.nx, g.n1, g.n2), "half_DN")
    form2 = assemble_reduced2d(beta, rect, g.L, (g.nx, g.n2))
    s3 = _solve(form3, k, tight, dense_n=4000)
    s2 = _solve(form2, min(k + 4, form2.n), tight, dense_n=4000)
    mu = fem1d(g.n1, rect.width1).spectral().lam

    grid_sums = s2.theta[:, None] + mu[None, :]
    pairs = []
    synth = np.empty(k)
    for j in range(k):
        m, i = np.unravel_index(np.argmin(np.abs(grid_sums - s3.theta[j])),
                                grid_sums.shape)
        pairs.append((int(m), int(i + 1)))
        synth[j] = grid_sums[m, i]
    rel = np.abs(s3.theta[:k] - synth) / np.abs(s3.theta[:k])
    return SeparationReport(beta, g, s3.theta[:k].copy(), pairs, synth, rel,
                            time.perf_counter() - t0)


@dataclass
class SweepResult:
    reports: list[SpectrumReport]

    def rows(self) -> list[dict]:
        out = []
        for rep in self.reports:
            out.extend(rep.rows())
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({c: _cell(row[c]) for c in CSV_COLUMNS})
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as f:
                f.write(text)
        return text

    def to_json(self, path=None) -> str:
        text = json.dumps([rep.as_dict() for rep in self.reports], indent=2)
        if path is not None:
            with open(path, "w") as f:
                f.write(text + "\n")
        return text


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def sweep_beta(section: Section, betas, disc: DiscretizationSpec,
               opts: EigOptions | None = None) -> SweepResult:
    """One SpectrumReport per shear value, rows sorted by beta."""
    bs = sorted(beta_value(b) for b in betas)
    if not bs:
        raise ValueError("sweep needs at least one beta")
    reports = [compute_spectrum(WaveguideSpec(b, section), disc, opts)
               for b in bs]
    return SweepResult(reports)


def benchmark_disc(rect: Rect) -> DiscretizationSpec:
    """Ladder profile for the weakly bound broken-strip benchmark.

    The bound state clears the threshold by about 7 percent of it, so
    its tail decays slowly: the top box step reaches L = 60 w2 / pi and
    the finest rung has 256 cells across the section.  h_x is kept near
    2 h_y; the x profile is smooth and does not need more.
    """
    if not isinstance(rect, Rect):
        raise ValueError("the benchmark profile is for rectangle sections")
    w2 = rect.width2
    L0 = 30.0 * w2 / math.pi
    hy = w2 / 64.0
    nx0 = max(8, int(round(L0 / (2.0 * hy))))
    return DiscretizationSpec(nx=nx0, n1=8, n2=64, L=L0, mode="reduced2d",
                              refine=3, l_steps=2)
