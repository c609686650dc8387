"""Small dense conic programs: PSD blocks, nonnegative scalars and free scalars.

A :class:`ConicProgram` is built block by block with linear objective and
equality constraints. Complex Hermitian blocks are solved through the real
embedding ``H -> [[Re H, -Im H], [Im H, Re H]]`` with every trace inner
product halved, so values and multipliers are reported in the complex
formulation.

The solver is an infeasible primal-dual path-following method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector step. All linear
algebra is dense; programs in this package have at most a few hundred
blocks of side <= 8 and a few hundred equality constraints.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .linalg import as_hermitian

log = logging.getLogger(__name__)

BlockKind = Literal["psd", "herm", "nonneg", "free"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max-iterations"


class NumericalFailure(RuntimeError):
    """The Newton system became singular or non-finite."""


def embed_hermitian(H) -> np.ndarray:
    A = as_hermitian(H)
    re, im = A.real, A.imag
    return np.block([[re, -im], [im, re]])


def extract_hermitian(S: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_hermitian`, projecting a general symmetric matrix."""
    n = S.shape[0] // 2
    s11, s12, s21, s22 = S[:n, :n], S[:n, n:], S[n:, :n], S[n:, n:]
    H = (s11 + s22) / 2 + 1j * (s21 - s12) / 2
    return (H + H.conj().T) / 2


@dataclass(frozen=True)
class Block:
    kind: BlockKind
    size: int


@dataclass
class ConicProgram:
    """Linear objective and equalities over a product of cones.

    Coefficients are given per block: a square matrix for ``psd``/``herm``
    blocks (paired with the variable by the trace inner product) and a
    length-``size`` vector for ``nonneg``/``free`` blocks.
    """

    sense: Literal["max", "min"] = "max"
    blocks: list[Block] = field(default_factory=list)
    objective: dict[int, np.ndarray] = field(default_factory=dict)
    constraints: list[tuple[dict[int, np.ndarray], float]] = field(default_factory=list)
    offset: float = 0.0

    def add_block(self, kind: BlockKind, size: int) -> int:
        if kind not in ("psd", "herm", "nonneg", "free"):
            raise ValueError(f"unknown block kind {kind!r}")
        if size < 1:
            raise ValueError("block size must be positive")
        self.blocks.append(Block(kind, int(size)))
        return len(self.blocks) - 1

    def _coef(self, j: int, coef) -> np.ndarray:
        if not 0 <= j < len(self.blocks):
            raise IndexError(f"block {j} not declared")
        blk = self.blocks[j]
        if blk.kind in ("psd", "herm"):
            C = np.asarray(coef, dtype=complex if blk.kind == "herm" else float)
            if C.shape != (blk.size, blk.size):
                raise ValueError(f"block {j} expects a {blk.size}x{blk.size} coefficient")
            if blk.kind == "herm":
                return as_hermitian(C, tol=1e-10)
            if np.max(np.abs(C - C.T), initial=0.0) > 1e-10:
                raise ValueError(f"coefficient for psd block {j} is not symmetric")
            return (C + C.T) / 2
        v = np.asarray(coef, dtype=float).reshape(-1)
        if v.size == 1 and blk.size > 1:
            v = np.full(blk.size, float(v[0]))
        if v.shape != (blk.size,):
            raise ValueError(f"block {j} expects {blk.size} coefficients")
        return v

    def set_objective(self, j: int, coef) -> None:
        self.objective[j] = self._coef(j, coef)

    def add_constraint(self, coefs: dict[int, object], rhs: float) -> int:
        self.constraints.append(({j: self._coef(j, c) for j, c in coefs.items()}, float(rhs)))
        return len(self.constraints) - 1

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def inner(self, j: int, coef: np.ndarray, value: np.ndarray) -> float:
        blk = self.blocks[j]
        if blk.kind in ("psd", "herm"):
            return float(np.real(np.trace(coef @ value)))
        return float(coef @ value)

    def objective_value(self, primal: list[np.ndarray]) -> float:
        return self.offset + sum(self.inner(j, c, primal[j]) for j, c in self.objective.items())

    def constraint_values(self, primal: list[np.ndarray]) -> np.ndarray:
        return np.array(
            [sum(self.inner(j, c, primal[j]) for j, c in coefs.items()) for coefs, _ in self.constraints]
        )

    @property
    def rhs(self) -> np.ndarray:
        return np.array([r for _, r in self.constraints], dtype=float)


@dataclass
class ConicSolution:
    status: str
    value: float
    primal: list[np.ndarray]
    dual: np.ndarray
    slack: list[np.ndarray]
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    ray: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


# ---------------------------------------------------------------------------
# internal standard form


class _Standard:
    """Real standard form ``min <c,x> s.t. A x = b`` grouped by cone type."""

    def __init__(self, prog: ConicProgram):
        if not prog.blocks:
            raise ValueError("program has no blocks")
        self.prog = prog
        self.sign = -1.0 if prog.sense == "max" else 1.0
        k = prog.n_constraints
        self.k = k
        self.b = prog.rhs

        # psd groups keyed by real side length
        self.groups: dict[int, list[int]] = {}
        self.lp_index: dict[int, slice] = {}
        self.free_index: dict[int, slice] = {}
        nl = nf = 0
        for j, blk in enumerate(prog.blocks):
            if blk.kind == "psd":
                self.groups.setdefault(blk.size, []).append(j)
            elif blk.kind == "herm":
                self.groups.setdefault(2 * blk.size, []).append(j)
            elif blk.kind == "nonneg":
                self.lp_index[j] = slice(nl, nl + blk.size)
                nl += blk.size
            else:
                self.free_index[j] = slice(nf, nf + blk.size)
                nf += blk.size
        self.nl, self.nf = nl, nf
        self.pos: dict[int, tuple[int, int]] = {}
        self.C: dict[int, np.ndarray] = {}
        self.A: dict[int, np.ndarray] = {}
        for s, js in self.groups.items():
            self.C[s] = np.zeros((len(js), s, s))
            self.A[s] = np.zeros((k, len(js), s, s))
            for p, j in enumerate(js):
                self.pos[j] = (s, p)
        self.cl = np.zeros(nl)
        self.Al = np.zeros((k, nl))
        self.cf = np.zeros(nf)
        self.Af = np.zeros((k, nf))

        for j, coef in prog.objective.items():
            self._place(j, coef, None, self.sign)
        for i, (coefs, _) in enumerate(prog.constraints):
            for j, coef in coefs.items():
                self._place(j, coef, i, 1.0)
        self.degree = sum(s * len(js) for s, js in self.groups.items()) + nl

    def _real(self, j: int, coef: np.ndarray) -> np.ndarray:
        if self.prog.blocks[j].kind == "herm":
            return embed_hermitian(coef) / 2
        return coef

    def _place(self, j: int, coef: np.ndarray, row: int | None, scale: float) -> None:
        kind = self.prog.blocks[j].kind
        if kind in ("psd", "herm"):
            s, p = self.pos[j]
            R = scale * self._real(j, coef)
            if row is None:
                self.C[s][p] += R
            else:
                self.A[s][row, p] += R
        elif kind == "nonneg":
            sl = self.lp_index[j]
            if row is None:
                self.cl[sl] += scale * coef
            else:
                self.Al[row, sl] += scale * coef
        else:
            sl = self.free_index[j]
            if row is None:
                self.cf[sl] += scale * coef
            else:
                self.Af[row, sl] += scale * coef

    # linear maps -----------------------------------------------------------
    def apply_A(self, X: dict[int, np.ndarray], xl: np.ndarray, xf: np.ndarray) -> np.ndarray:
        out = self.Al @ xl + self.Af @ xf
        for s in self.groups:
            out = out + np.einsum("ibkl,bkl->i", self.A[s], X[s])
        return out

    def apply_At(self, y: np.ndarray):
        S = {s: np.einsum("i,ibkl->bkl", y, self.A[s]) for s in self.groups}
        return S, self.Al.T @ y, self.Af.T @ y

    def inner_c(self, X, xl, xf) -> float:
        v = float(self.cl @ xl + self.cf @ xf)
        for s in self.groups:
            v += float(np.einsum("bkl,bkl->", self.C[s], X[s]))
        return v

    def norm_c(self) -> float:
        parts = [np.max(np.abs(self.cl), initial=0.0), np.max(np.abs(self.cf), initial=0.0)]
        parts += [np.max(np.abs(self.C[s]), initial=0.0) for s in self.groups]
        return float(max(parts))


def _sym(M: np.ndarray) -> np.ndarray:
    return (M + np.swapaxes(M, -1, -2)) / 2


def _max_step(L: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Largest alpha with L L^T + alpha D >= 0, per block (inf when unbounded)."""
    Linv = np.linalg.inv(L)
    T = _sym(Linv @ D @ np.swapaxes(Linv, -1, -2))
    lam = np.linalg.eigvalsh(T)[..., 0]
    with np.errstate(divide="ignore"):
        return np.where(lam < 0, -1.0 / lam, np.inf)


def _chol(M: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        pass
    # near the boundary: lift the smallest eigenvalues just enough to factor
    n = M.shape[-1]
    scale = np.maximum(np.abs(M).max(axis=(-1, -2)), 1.0)
    for eps in (1e-14, 1e-12, 1e-10):
        w, V = np.linalg.eigh(M)
        w = np.maximum(w, eps * scale[..., None])
        try:
            return np.linalg.cholesky(_sym((V * w[..., None, :]) @ np.swapaxes(V, -1, -2)))
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("iterate left the cone")


def solve(
    prog: ConicProgram,
    tol: float = 1e-9,
    max_iters: int = 200,
    step: float = 0.98,
) -> ConicSolution:
    """Solve ``prog``; see :class:`ConicSolution` for the reported fields.

    ``tol`` bounds the relative primal residual, relative dual residual and
    relative duality gap at termination.
    """
    std = _Standard(prog)
    k = std.k
    b = std.b
    groups = list(std.groups)
    normb = float(np.max(np.abs(b), initial=0.0))
    normc = std.norm_c()

    # starting point: scaled identities (SDPT3-style heuristics)
    X, Z = {}, {}
    for s in groups:
        Anorm = np.sqrt(np.einsum("ibkl,ibkl->ib", std.A[s], std.A[s]))  # (k, nb)
        Cnorm = np.sqrt(np.einsum("bkl,bkl->b", std.C[s], std.C[s]))
        xi = np.maximum(
            np.sqrt(s), s * np.max((1 + np.abs(b))[:, None] / (1 + Anorm), axis=0, initial=0.0)
        )
        zeta = np.maximum(np.sqrt(s), np.maximum(Cnorm, np.max(Anorm, axis=0, initial=0.0)))
        zeta = (1 + zeta) / 2
        X[s] = xi[:, None, None] * np.eye(s)
        Z[s] = zeta[:, None, None] * np.eye(s)
    if std.nl:
        Anl = np.sqrt(np.sum(std.Al**2, axis=0))
        rows = np.sqrt(np.sum(std.Al**2, axis=1))
        xi = max(1.0, float(np.max((1 + np.abs(b)) / (1 + rows), initial=1.0)))
        xl = np.full(std.nl, xi)
        zl = np.maximum(1.0, np.maximum(np.abs(std.cl), Anl))
    else:
        xl = np.zeros(0)
        zl = np.zeros(0)
    xf = np.zeros(std.nf)
    y = np.zeros(k)
    N = max(std.degree, 1)

    status = MAX_ITERATIONS
    it = 0
    ray = None
    for it in range(1, max_iters + 1):
        AX = std.apply_A(X, xl, xf)
        rp = b - AX
        ATy, ATyl, ATyf = std.apply_At(y)
        Rd = {s: std.C[s] - ATy[s] - Z[s] for s in groups}
        rdl = std.cl - ATyl - zl
        rdf = std.cf - ATyf
        pobj = std.inner_c(X, xl, xf)
        dobj = float(b @ y)
        mu = (sum(float(np.einsum("bkl,bkl->", X[s], Z[s])) for s in groups) + float(xl @ zl)) / N
        pinf = float(np.max(np.abs(rp), initial=0.0))
        dinf = max(
            [float(np.max(np.abs(Rd[s]), initial=0.0)) for s in groups]
            + [float(np.max(np.abs(rdl), initial=0.0)), float(np.max(np.abs(rdf), initial=0.0))]
        )
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        log.debug("it %3d pobj %.10g dobj %.10g pinf %.2e dinf %.2e gap %.2e", it, pobj, dobj, pinf, dinf, relgap)
        compl = N * mu / (1 + abs(pobj) + abs(dobj))
        if pinf / (1 + normb) <= tol and dinf / (1 + normc) <= tol and relgap <= tol and compl <= tol:
            status = OPTIMAL
            break

        # infeasibility certificates ---------------------------------------
        if dobj > 0 and dobj > 1e6 * (1 + normc) and pinf > 1e-6 * (1 + normb):
            yh = y / dobj
            Sh, Shl, Shf = std.apply_At(-yh)
            viol = max(
                [max(0.0, -float(np.linalg.eigvalsh(Sh[s]).min())) for s in groups]
                + [max(0.0, -float(np.min(Shl, initial=0.0))), float(np.max(np.abs(Shf), initial=0.0))]
            )
            if viol <= 1e-6:
                status = INFEASIBLE
                ray = yh
                break
        if pobj < 0 and -pobj > 1e6 * (1 + normb) and dinf > 1e-6 * (1 + normc):
            scale = -pobj
            viol = float(np.max(np.abs(AX / scale), initial=0.0))
            if viol <= 1e-6:
                status = UNBOUNDED
                break

        # NT scaling --------------------------------------------------------
        G, Ginv, V, W = {}, {}, {}, {}
        LX, LZ = {}, {}
        for s in groups:
            L = _chol(X[s])
            R = _chol(Z[s])
            U, sv, Qt = np.linalg.svd(np.swapaxes(R, -1, -2) @ L)
            Q = np.swapaxes(Qt, -1, -2)
            isq = 1 / np.sqrt(sv)
            G[s] = (L @ Q) * isq[:, None, :]
            # G^{-1} = Sigma^{-1/2} U^T R^T
            Ginv[s] = (np.sqrt(sv)[:, :, None] * np.swapaxes(U, -1, -2) @ np.swapaxes(R, -1, -2)) / sv[:, :, None]
            V[s] = sv
            W[s] = G[s] @ np.swapaxes(G[s], -1, -2)
            LX[s], LZ[s] = L, R
        wl = xl / zl if std.nl else xl

        # Schur complement -------------------------------------------------
        M = (std.Al * wl) @ std.Al.T
        WAW = {}
        for s in groups:
            WAW[s] = W[s][None] @ std.A[s] @ W[s][None]
            M = M + np.einsum("ibkl,jbkl->ij", std.A[s], WAW[s])
        M = (M + M.T) / 2
        nf = std.nf
        if nf:
            K = np.block([[M, std.Af], [std.Af.T, np.zeros((nf, nf))]])
        else:
            K = M
        try:
            lu = _factor(K)
        except np.linalg.LinAlgError:
            lu = None
        if lu is None:
            # near-degenerate rows late in the run: retry with a small relative diagonal shift
            base = np.maximum(np.max(np.abs(K), axis=1), 1e-300)
            for eps in (1e-12, 1e-10, 1e-8):
                shift = eps * np.concatenate([base[:k], -base[k:]])
                try:
                    lu = _factor(K + np.diag(shift), exact=K)
                    log.debug("it %3d regularised Newton system, eps %.0e", it, eps)
                    break
                except np.linalg.LinAlgError:
                    continue
            else:
                raise NumericalFailure(f"singular Newton system at iteration {it}")

        def direction(Rm: dict[int, np.ndarray], rcl: np.ndarray):
            # Rc: target for dX + W dZ W in unscaled space
            Rc = {}
            for s in groups:
                v = V[s]
                D = 2 * Rm[s] / (v[:, :, None] + v[:, None, :])
                Rc[s] = G[s] @ D @ np.swapaxes(G[s], -1, -2)
            h = rp - std.apply_A(
                {s: Rc[s] - W[s] @ Rd[s] @ W[s] for s in groups},
                (rcl - wl * rdl) if std.nl else xl * 0,
                np.zeros(nf),
            )
            rhs = np.concatenate([h, rdf]) if nf else h
            sol = lu(rhs)
            dy = sol[:k]
            dxf = sol[k:]
            dATy, dATyl, _ = std.apply_At(dy)
            dZ = {s: Rd[s] - dATy[s] for s in groups}
            dX = {s: _sym(Rc[s] - W[s] @ dZ[s] @ W[s]) for s in groups}
            dzl = rdl - dATyl
            dxl = rcl - wl * dzl
            return dX, dZ, dxl, dzl, dy, dxf

        def steps(dX, dZ, dxl, dzl):
            ap = ad = np.inf
            for s in groups:
                ap = min(ap, float(np.min(_max_step(LX[s], dX[s]))))
                ad = min(ad, float(np.min(_max_step(LZ[s], dZ[s]))))
            if std.nl:
                neg = dxl < 0
                if np.any(neg):
                    ap = min(ap, float(np.min(-xl[neg] / dxl[neg])))
                neg = dzl < 0
                if np.any(neg):
                    ad = min(ad, float(np.min(-zl[neg] / dzl[neg])))
            return ap, ad

        # predictor
        Rm = {s: -np.eye(s)[None] * (V[s] ** 2)[:, :, None] for s in groups}
        rcl = -xl if std.nl else xl
        dX, dZ, dxl, dzl, dy, dxf = direction(Rm, rcl)
        ap, ad = steps(dX, dZ, dxl, dzl)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (
            sum(float(np.einsum("bkl,bkl->", X[s] + ap * dX[s], Z[s] + ad * dZ[s])) for s in groups)
            + float((xl + ap * dxl) @ (zl + ad * dzl))
        ) / N
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

        # corrector
        Rm = {}
        for s in groups:
            Gt = np.swapaxes(G[s], -1, -2)
            Gi = Ginv[s]
            dXs = Gi @ dX[s] @ np.swapaxes(Gi, -1, -2)
            dZs = Gt @ dZ[s] @ G[s]
            corr = _sym(dXs @ dZs)
            Rm[s] = sigma * mu * np.eye(s)[None] - np.eye(s)[None] * (V[s] ** 2)[:, :, None] - corr
        rcl = (sigma * mu - xl * zl - dxl * dzl) / zl if std.nl else xl
        dX, dZ, dxl, dzl, dy, dxf = direction(Rm, rcl)
        ap, ad = steps(dX, dZ, dxl, dzl)
        ap = min(1.0, step * ap)
        ad = min(1.0, step * ad)

        for s in groups:
            X[s] = _sym(X[s] + ap * dX[s])
            Z[s] = _sym(Z[s] + ad * dZ[s])
        if std.nl:
            xl = xl + ap * dxl
            zl = zl + ad * dzl
        xf = xf + ap * dxf
        y = y + ad * dy
        if not all(np.all(np.isfinite(X[s])) for s in groups) or not np.all(np.isfinite(y)):
            raise NumericalFailure(f"non-finite iterate at iteration {it}")

    return _package(prog, std, X, Z, xl, zl, xf, y, status, it, ray)


def _factor(K: np.ndarray, exact: np.ndarray | None = None):
    """LU solver for ``K`` after symmetric diagonal equilibration.

    Refinement residuals are taken against ``exact`` when given, so a
    regularised factorisation still converges to the unregularised solution.
    """
    import scipy.linalg as sla

    if not np.all(np.isfinite(K)):
        raise np.linalg.LinAlgError("non-finite Newton matrix")
    target = K if exact is None else exact
    rows = np.max(np.abs(K), axis=1)
    sc = 1 / np.sqrt(np.where(rows > 0, rows, 1.0))
    Ks = sc[:, None] * K * sc[None, :]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(Ks, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min(initial=np.inf) <= 1e-14 * max(d.max(initial=0.0), 1.0):
        raise np.linalg.LinAlgError("singular Newton matrix")

    def solve1(r):
        return sc * sla.lu_solve((lu, piv), sc * r, check_finite=False)

    def apply(r):
        x = solve1(r)
        # iterative refinement recovers accuracy lost to ill-conditioning
        for _ in range(2):
            x = x + solve1(r - target @ x)
        return x

    return apply


def _package(prog, std, X, Z, xl, zl, xf, y, status, it, ray) -> ConicSolution:
    primal: list[np.ndarray] = []
    slack: list[np.ndarray] = []
    for j, blk in enumerate(prog.blocks):
        if blk.kind in ("psd", "herm"):
            s, p = std.pos[j]
            Xj, Zj = X[s][p], Z[s][p]
            if blk.kind == "herm":
                primal.append(extract_hermitian(Xj))
                slack.append(2 * extract_hermitian(Zj))
            else:
                primal.append(Xj.copy())
                slack.append(Zj.copy())
        elif blk.kind == "nonneg":
            sl = std.lp_index[j]
            primal.append(xl[sl].copy())
            slack.append(zl[sl].copy())
        else:
            sl = std.free_index[j]
            primal.append(xf[sl].copy())
            slack.append(np.zeros(blk.size))
    # user-facing multipliers: value = b^T y at optimality for either sense
    ydual = std.sign * y
    value = prog.objective_value(primal)
    dual_value = prog.offset + float(std.b @ ydual)
    rp = prog.constraint_values(primal) - std.b
    ATy, ATyl, ATyf = std.apply_At(y)
    dres = [float(np.max(np.abs(std.C[s] - ATy[s] - Z[s]), initial=0.0)) for s in std.groups]
    dres += [
        float(np.max(np.abs(std.cl - ATyl - zl), initial=0.0)),
        float(np.max(np.abs(std.cf - ATyf), initial=0.0)),
    ]
    return ConicSolution(
        status=status,
        value=value,
        primal=primal,
        dual=ydual,
        slack=slack,
        dual_value=dual_value,
        gap=(dual_value - value) if prog.sense == "max" else (value - dual_value),
        primal_residual=float(np.max(np.abs(rp), initial=0.0)),
        dual_residual=max(dres),
        iterations=it,
        ray=ray,
    )


# ---------------------------------------------------------------------------
# certificate check, independent of the embedding and solver state


@dataclass
class CertificateReport:
    primal_residual: float
    primal_cone_violation: float
    dual_cone_violation: float
    free_dual_residual: float
    gap: float
    complementarity: float
    ok: bool
    tol: float

    def summary(self) -> str:
        return (
            f"primal residual {self.primal_residual:.2e}, primal cone {self.primal_cone_violation:.2e}, "
            f"dual cone {self.dual_cone_violation:.2e}, free {self.free_dual_residual:.2e}, "
            f"gap {self.gap:.2e}, compl {self.complementarity:.2e} -> {'ok' if self.ok else 'FAIL'}"
        )


def verify_certificate(
    prog: ConicProgram,
    sol: ConicSolution,
    residual_tol: float = 1e-8,
    gap_tol: float = 1e-7,
) -> CertificateReport:
    """Recompute feasibility and optimality measures from ``sol`` alone.

    The dual slack is rebuilt from the multipliers in the original (complex)
    formulation rather than read from the solver.
    """
    y = np.asarray(sol.dual, dtype=float)
    primal = sol.primal
    rp = prog.constraint_values(primal) - prog.rhs
    pres = float(np.max(np.abs(rp), initial=0.0))
    sgn = 1.0 if prog.sense == "min" else -1.0

    pcone = dcone = free = 0.0
    compl = 0.0
    for j, blk in enumerate(prog.blocks):
        if blk.kind in ("psd", "herm"):
            n = blk.size
            S = np.zeros((n, n), dtype=complex)
        else:
            S = np.zeros(blk.size)
        if j in prog.objective:
            S = S + prog.objective[j]
        for i, (coefs, _) in enumerate(prog.constraints):
            if j in coefs:
                S = S - y[i] * coefs[j]
        S = sgn * S  # dual slack: C - A^T y (min) or A^T y - C (max)
        Xj = primal[j]
        if blk.kind in ("psd", "herm"):
            H = (Xj + Xj.conj().T) / 2
            pcone = max(pcone, -float(np.linalg.eigvalsh(H)[0]))
            Sh = (S + S.conj().T) / 2
            dcone = max(dcone, -float(np.linalg.eigvalsh(Sh)[0]))
            compl += float(np.real(np.trace(H @ Sh)))
        elif blk.kind == "nonneg":
            pcone = max(pcone, -float(np.min(Xj, initial=0.0)))
            dcone = max(dcone, -float(np.min(S, initial=0.0)))
            compl += float(np.real(S) @ Xj)
        else:
            free = max(free, float(np.max(np.abs(S), initial=0.0)))
    value = prog.objective_value(primal)
    dual_value = prog.offset + float(prog.rhs @ y)
    gap = (dual_value - value) if prog.sense == "max" else (value - dual_value)
    ok = (
        pres <= residual_tol
        and max(pcone, dcone, free) <= residual_tol
        and abs(gap) <= gap_tol
    )
    return CertificateReport(pres, max(pcone, 0.0), max(dcone, 0.0), free, gap, compl, ok, residual_tol)
