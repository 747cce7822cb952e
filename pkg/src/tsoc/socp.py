"""Per-slot energy-balancing / beamforming problem as a second-order cone program.

Variable layout of one slot block (all real), offsets relative to the block start::

    [ w (2*N*K) | P_b (I) | s (I) | p (I) ]

``w`` stacks the users' beamformers, user-major, with every complex entry stored
as an interleaved (re, im) pair: w_k[j] -> (2*(k*N + j), 2*(k*N + j) + 1).
``s_i`` is the epigraph of the real-time cost of BS i and ``p_i`` upper-bounds its
transmit power through a rotated cone. The real-time trade P_i is eliminated with
the balance equation and recovered after the solve.

Constraints are assembled in Clarabel's form ``A x + s = b, s in K`` with cones
ordered zero, nonnegative, then second-order cones.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import clarabel
import numpy as np
import scipy.sparse as sp

from .config import SystemConfig
from .model import FastState, bs_power, cost_rt, sinr_all


class SolverError(RuntimeError):
    def __init__(self, message: str, report: Optional["SolveReport"] = None):
        super().__init__(message)
        self.report = report


class InfeasibleError(SolverError):
    """The SINR targets cannot be met within the power caps.

    ``certificate`` holds the solver's dual ray when one is available.
    """

    def __init__(self, message, report=None, certificate=None):
        super().__init__(message, report)
        self.certificate = certificate


class DegenerateChannelError(InfeasibleError):
    pass


class MaxIterError(SolverError):
    pass


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | max-iter
    objective: float
    primal_residual: float
    cone_residual: float
    duality_gap: float
    iterations: int
    solver_status: str = ""


@dataclass
class Layout:
    I: int
    K: int
    M: int

    @property
    def N(self) -> int:
        return self.I * self.M

    @property
    def n_w(self) -> int:
        return 2 * self.N * self.K

    @property
    def pb(self) -> int:
        return self.n_w

    @property
    def s(self) -> int:
        return self.n_w + self.I

    @property
    def p(self) -> int:
        return self.n_w + 2 * self.I

    @property
    def size(self) -> int:
        return self.n_w + 3 * self.I

    def w_re(self, k, j):
        return 2 * (k * self.N + np.asarray(j))

    def unpack_w(self, x: np.ndarray, col0: int = 0) -> np.ndarray:
        v = x[col0:col0 + self.n_w].reshape(self.K, self.N, 2)
        return (v[..., 0] + 1j * v[..., 1]).T


# --- assembly ---------------------------------------------------------------

class ConeAssembler:
    """Collects constraint blocks and emits (A, b, cones) in zero/nonneg/soc order."""

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self._blocks = {"zero": [], "nonneg": [], "soc": []}

    def add(self, kind: str, rows, cols, vals, b) -> int:
        """Append a block; returns its index within ``kind``."""
        b = np.asarray(b, dtype=float)
        blocks = self._blocks[kind]
        blocks.append((np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
                       np.asarray(vals, dtype=float), b))
        return len(blocks) - 1

    def row_offsets(self, kind: str) -> list[int]:
        start = 0
        for k in ("zero", "nonneg", "soc"):
            if k == kind:
                break
            start += sum(len(blk[3]) for blk in self._blocks[k])
        offs = []
        for blk in self._blocks[kind]:
            offs.append(start)
            start += len(blk[3])
        return offs

    def build(self):
        rows, cols, vals, bs, cones = [], [], [], [], []
        r0 = 0
        for kind in ("zero", "nonneg", "soc"):
            blocks = self._blocks[kind]
            n_kind = 0
            for r, c, v, b in blocks:
                rows.append(r + r0)
                cols.append(c)
                vals.append(v)
                bs.append(b)
                r0 += len(b)
                n_kind += len(b)
                if kind == "soc":
                    cones.append(("soc", len(b)))
            if kind != "soc" and n_kind:
                cones.append((kind, n_kind))
        A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(r0, self.n_cols))
        A.sum_duplicates()
        A.sort_indices()
        return A, np.concatenate(bs), cones


@dataclass
class SlotBlock:
    """Where one slot's pieces landed inside an assembled problem."""

    col0: int
    nonneg_block: int
    zero_block: int


def add_slot_block(asm: ConeAssembler, col0: int, lay: Layout, fast: FastState, cfg: SystemConfig,
                   e_const: Optional[np.ndarray] = None, e_cols: Optional[np.ndarray] = None,
                   e_scale: float = 1.0) -> SlotBlock:
    """Add the constraints of one slot whose variables start at ``col0``.

    The planned per-slot supply enters either as constants ``e_const`` (E_i/T) or as
    columns ``e_cols`` holding E_i, scaled by ``e_scale`` (= 1/T).
    """
    I, K, M, N = lay.I, lay.K, lay.M, lay.N
    H = np.asarray(fast.H)
    if H.shape != (N, K):
        raise ValueError(f"channel shape {H.shape} does not match (M*I, K) = {(N, K)}")
    hr, hi = H.real, H.imag
    gam = cfg.gamma_vec
    sig = np.sqrt(cfg.sigma2_vec)
    a, bt = fast.alpha_rt, fast.beta_rt
    pb = col0 + lay.pb + np.arange(I)
    s = col0 + lay.s + np.arange(I)
    p = col0 + lay.p + np.arange(I)
    jN = np.arange(N)

    def wre(k):
        return col0 + 2 * (k * N + jN)

    # Im{h_k^H w_k} = 0
    zr, zc, zv = [], [], []
    for k in range(K):
        zr.append(np.full(2 * N, k))
        zc.append(np.concatenate([wre(k), wre(k) + 1]))
        zv.append(np.concatenate([-hi[:, k], hr[:, k]]))
    zb = asm.add("zero", np.concatenate(zr), np.concatenate(zc), np.concatenate(zv), np.zeros(K))

    # box on P_b, power cap, epigraph pair of the real-time cost
    ar = np.arange(I)
    rows = [ar, I + ar, 2 * I + ar]
    cols = [pb, pb, p]
    vals = [-np.ones(I), np.ones(I), np.ones(I)]
    b = np.concatenate([np.full(I, -cfg.p_b_min), np.full(I, cfg.p_b_max), np.full(I, cfg.p_g_max - cfg.p_c)])
    b_epi = []
    for r_off, price in ((3 * I, a), (4 * I, bt)):
        rows += [r_off + ar] * 3
        cols += [s, p, pb]
        vals += [-np.ones(I), np.full(I, price), np.full(I, price)]
        if e_cols is not None:
            rows.append(r_off + ar)
            cols.append(np.asarray(e_cols))
            vals.append(np.full(I, -price * e_scale))
            b_epi.append(np.full(I, -price * cfg.p_c))
        else:
            b_epi.append(price * (np.asarray(e_const, dtype=float) - cfg.p_c))
    nb = asm.add("nonneg", np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
                 np.concatenate([b] + b_epi))

    # SINR cones: [Re(h_k^H w_k)/sqrt(gamma_k); Re/Im(h_k^H w_l), l != k; sigma_k]
    for k in range(K):
        d = 2 * K
        r = [np.zeros(2 * N, dtype=int)]
        c = [np.concatenate([wre(k), wre(k) + 1])]
        v = [np.concatenate([-hr[:, k], -hi[:, k]]) / np.sqrt(gam[k])]
        row = 1
        for l in range(K):
            if l == k:
                continue
            r.append(np.full(2 * N, row))
            c.append(np.concatenate([wre(l), wre(l) + 1]))
            v.append(np.concatenate([-hr[:, k], -hi[:, k]]))
            r.append(np.full(2 * N, row + 1))
            c.append(np.concatenate([wre(l), wre(l) + 1]))
            v.append(np.concatenate([hi[:, k], -hr[:, k]]))
            row += 2
        bb = np.zeros(d)
        bb[d - 1] = sig[k]
        asm.add("soc", np.concatenate(r), np.concatenate(c), np.concatenate(v), bb)

    # rotated cone sum_k ||B_i w_k||^2 <= p_i as ||(2 B_i w, p_i - 1)|| <= p_i + 1
    for i in range(I):
        ants = np.arange(i * M, (i + 1) * M)
        wcols = np.concatenate([[col0 + 2 * (k * N + j), col0 + 2 * (k * N + j) + 1] for k in range(K) for j in ants])
        d = 2 + len(wcols)
        r = np.concatenate([[0, 1], 2 + np.arange(len(wcols))])
        c = np.concatenate([[p[i], p[i]], wcols])
        v = np.concatenate([[-1.0, -1.0], np.full(len(wcols), -2.0)])
        bb = np.zeros(d)
        bb[0], bb[1] = 1.0, -1.0
        asm.add("soc", r, c, v, bb)
    return SlotBlock(col0=col0, nonneg_block=nb, zero_block=zb)


# --- single-slot problem ----------------------------------------------------

@dataclass
class ConicProblem:
    """min q'x  s.t.  A x + s = b, s in cones; see module docstring for the layout."""

    A: sp.csc_matrix
    b: np.ndarray
    q: np.ndarray
    cones: list
    layout: Layout
    fast: FastState
    e: np.ndarray  # planned supply per slot, E_i / T
    Q: np.ndarray
    V: float
    cfg: SystemConfig
    epi_rows: tuple = field(default=())  # (alpha rows, beta rows) of the epigraph pair

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    def cone_dims(self, kind: str) -> list[int]:
        return [d for k, d in self.cones if k == kind]


def resolved_V(cfg: SystemConfig) -> float:
    if cfg.V is None:
        raise ValueError("cfg.V is unset; resolve (Gamma, V) with controller.select_parameters first")
    return float(cfg.V)


def build_realtime_problem(fast: FastState, E, Q_frozen, cfg: SystemConfig,
                           V: Optional[float] = None) -> ConicProblem:
    """Slot problem for planned interval energies ``E`` (per BS) and frozen queues ``Q_frozen``."""
    V = resolved_V(cfg) if V is None else float(V)
    E = np.asarray(E, dtype=float).reshape(-1)
    Q = np.asarray(Q_frozen, dtype=float).reshape(-1)
    if E.shape != (cfg.I,) or Q.shape != (cfg.I,):
        raise ValueError(f"E and Q must have length I={cfg.I}")
    for k in range(cfg.K):
        if not np.any(fast.H[:, k]):
            raise DegenerateChannelError(f"user {k} has an all-zero channel; its SINR target is unreachable")
    lay = Layout(cfg.I, cfg.K, cfg.M)
    e = E / cfg.T
    asm = ConeAssembler(lay.size)
    blk = add_slot_block(asm, 0, lay, fast, cfg, e_const=e)
    A, b, cones = asm.build()
    q = np.zeros(lay.size)
    q[lay.s:lay.s + cfg.I] = V
    q[lay.pb:lay.pb + cfg.I] = Q
    off = asm.row_offsets("nonneg")[blk.nonneg_block]
    I = cfg.I
    epi = (off + 3 * I + np.arange(I), off + 4 * I + np.arange(I))
    return ConicProblem(A=A, b=b, q=q, cones=cones, layout=lay, fast=fast, e=e, Q=Q, V=V, cfg=cfg,
                        epi_rows=epi)


class RealtimeTemplate:
    """Repeated slot problems for one configuration, rebuilt from a cached pattern.

    A's nonzeros are affine in (Re H, Im H, alpha_rt, beta_rt) and b is affine in
    (alpha_rt, beta_rt, alpha_rt*e, beta_rt*e), so both maps are recovered once by
    probing the reference builder with unit parameters. Results are identical to
    ``build_realtime_problem`` up to rounding.
    """

    def __init__(self, cfg: SystemConfig, V: Optional[float] = None):
        self.cfg = cfg
        self.V = resolved_V(cfg) if V is None else float(V)
        self.layout = lay = Layout(cfg.I, cfg.K, cfg.M)
        N, K, I = lay.N, lay.K, lay.I
        self._nh = N * K

        def probe(hr, hi, a, b, e):
            asm = ConeAssembler(lay.size)
            blk = add_slot_block(asm, 0, lay, FastState(a, b, hr + 1j * hi), cfg, e_const=e)
            rows, cols, vals, bs = [], [], [], []
            for kind in ("zero", "nonneg", "soc"):
                for off, (r, c, v, bb) in zip(asm.row_offsets(kind), asm._blocks[kind]):
                    rows.append(r + off)
                    cols.append(c)
                    vals.append(v)
                    bs.append(bb)
            return asm, blk, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), np.concatenate(bs)

        Z = np.zeros((N, K))
        e0 = np.zeros(I)
        asm, blk, rows, cols, v0, b0 = probe(Z, Z, 0.0, 0.0, e0)
        self.cones = asm.build()[2]
        jac = []
        for m in range(self._nh):
            unit = np.zeros(self._nh)
            unit[m] = 1.0
            jac.append(probe(unit.reshape(N, K), Z, 0.0, 0.0, e0)[4] - v0)
        for m in range(self._nh):
            unit = np.zeros(self._nh)
            unit[m] = 1.0
            jac.append(probe(Z, unit.reshape(N, K), 0.0, 0.0, e0)[4] - v0)
        jac.append(probe(Z, Z, 1.0, 0.0, e0)[4] - v0)
        jac.append(probe(Z, Z, 0.0, 1.0, e0)[4] - v0)
        self._v0 = v0
        self._jv = sp.csr_matrix(np.column_stack(jac))
        bjac = [probe(Z, Z, 1.0, 0.0, e0)[5] - b0, probe(Z, Z, 0.0, 1.0, e0)[5] - b0]
        for price in ((1.0, 0.0), (0.0, 1.0)):
            for i in range(I):
                ei = np.zeros(I)
                ei[i] = 1.0
                bjac.append(probe(Z, Z, price[0], price[1], ei)[5] - probe(Z, Z, price[0], price[1], e0)[5])
        self._b0 = b0
        self._jb = sp.csr_matrix(np.column_stack(bjac))
        pattern = sp.csc_matrix((np.arange(1, len(rows) + 1, dtype=float), (rows, cols)),
                                shape=(len(b0), lay.size))
        if pattern.nnz != len(rows):
            raise AssertionError("slot pattern has duplicate entries")
        pattern.sort_indices()
        self._perm = pattern.data.astype(np.int64) - 1
        self._indices = pattern.indices.copy()
        self._indptr = pattern.indptr.copy()
        self._shape = pattern.shape
        off = asm.row_offsets("nonneg")[blk.nonneg_block]
        self.epi_rows = (off + 3 * I + np.arange(I), off + 4 * I + np.arange(I))

    def build(self, fast: FastState, E, Q_frozen) -> ConicProblem:
        cfg, lay = self.cfg, self.layout
        E = np.asarray(E, dtype=float).reshape(-1)
        Q = np.asarray(Q_frozen, dtype=float).reshape(-1)
        if E.shape != (cfg.I,) or Q.shape != (cfg.I,):
            raise ValueError(f"E and Q must have length I={cfg.I}")
        H = np.asarray(fast.H)
        if H.shape != (lay.N, lay.K):
            raise ValueError(f"channel shape {H.shape} does not match (M*I, K) = {(lay.N, lay.K)}")
        if not np.all(np.any(H != 0, axis=0)):
            raise DegenerateChannelError("a user has an all-zero channel; its SINR target is unreachable")
        e = E / cfg.T
        a, bt = fast.alpha_rt, fast.beta_rt
        theta = np.concatenate([H.real.ravel(), H.imag.ravel(), [a, bt]])
        vals = self._v0 + self._jv @ theta
        A = sp.csc_matrix((vals[self._perm], self._indices, self._indptr), shape=self._shape)
        phi = np.concatenate([[a, bt], a * e, bt * e])
        b = self._b0 + self._jb @ phi
        q = np.zeros(lay.size)
        q[lay.s:lay.s + cfg.I] = self.V
        q[lay.pb:lay.pb + cfg.I] = Q
        return ConicProblem(A=A, b=b, q=q, cones=self.cones, layout=lay, fast=fast, e=e, Q=Q, V=self.V,
                            cfg=cfg, epi_rows=self.epi_rows)

    def solve(self, fast: FastState, E, Q_frozen, tol: float = 1e-9) -> tuple[RealtimeDecision, SolveReport]:
        return solve_realtime(self.build(fast, E, Q_frozen), tol=tol)


# --- solving ----------------------------------------------------------------

_CLARABEL_CONES = {
    "zero": clarabel.ZeroConeT,
    "nonneg": clarabel.NonnegativeConeT,
    "soc": clarabel.SecondOrderConeT,
}


def _settings(tol: float, equilibrate: bool, max_iter: int) -> clarabel.DefaultSettings:
    st = clarabel.DefaultSettings()
    st.verbose = False
    st.max_threads = 1
    st.tol_gap_abs = tol
    st.tol_gap_rel = tol
    st.tol_feas = tol
    st.tol_ktratio = 1e-7
    st.equilibrate_enable = equilibrate
    st.max_iter = max_iter
    return st


def cone_violation(r: np.ndarray, cones: list) -> float:
    """Largest violation of ``r`` in the cone product (0 when r is inside)."""
    worst = 0.0
    i = 0
    for kind, d in cones:
        seg = r[i:i + d]
        if kind == "zero":
            worst = max(worst, float(np.max(np.abs(seg), initial=0.0)))
        elif kind == "nonneg":
            worst = max(worst, float(np.max(-seg, initial=0.0)))
        else:
            worst = max(worst, float(np.linalg.norm(seg[1:]) - seg[0]))
        i += d
    return max(worst, 0.0)


@dataclass
class ConicSolution:
    x: np.ndarray
    z: np.ndarray
    report: SolveReport


@functools.lru_cache(maxsize=16)
def _attempts(tol: float, max_iter: int) -> tuple:
    st = clarabel.DefaultSettings()  # library defaults, looser but steadier
    st.verbose = False
    st.max_threads = 1
    st.max_iter = max_iter
    return _settings(tol, False, max_iter), st, _settings(tol, True, max_iter)


@functools.lru_cache(maxsize=64)
def _zero_P(n: int):
    return sp.csc_matrix((n, n))


@functools.lru_cache(maxsize=64)
def _clarabel_cones(cones: tuple) -> list:
    return [_CLARABEL_CONES[k](d) for k, d in cones]


def solve_conic(A, b, q, cones, tol: float = 1e-9, max_iter: int = 200) -> ConicSolution:
    """Solve ``min q'x, A x + s = b, s in cones`` with Clarabel; raise typed errors.

    Tight tolerances first; on numerical trouble fall back to the library defaults,
    then to equilibrated tight settings. An ``AlmostSolved`` exit is accepted only
    if its own certificate (gap and cone residual <= 1e-7) checks out.
    """
    P = _zero_P(A.shape[1])
    cl_cones = _clarabel_cones(tuple(tuple(c) for c in cones))
    best = None
    for st in _attempts(tol, max_iter):
        sol = clarabel.DefaultSolver(P, q, A, b, cl_cones, st).solve()
        status = str(sol.status)
        if status in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
            rep = SolveReport("infeasible", np.inf, np.nan, np.nan, np.nan, sol.iterations, status)
            raise InfeasibleError("conic problem is primal infeasible", rep, certificate=np.asarray(sol.z))
        if status == "MaxIterations":
            rep = SolveReport("max-iter", float(sol.obj_val), float(sol.r_prim), np.nan, np.nan,
                              sol.iterations, status)
            raise MaxIterError(f"solver hit the iteration limit ({max_iter})", rep)
        if status not in ("Solved", "AlmostSolved"):
            best = best or (sol, status)
            continue
        x, z, s = np.asarray(sol.x), np.asarray(sol.z), np.asarray(sol.s)
        pobj = float(q @ x)
        dobj = float(-b @ z)
        gap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
        r_prim = float(np.max(np.abs(A @ x + s - b), initial=0.0))
        r_cone = cone_violation(b - A @ x, cones)
        rep = SolveReport("optimal", pobj, r_prim, r_cone, gap, sol.iterations, status)
        if status == "Solved" or (gap <= 1e-7 and r_cone <= 1e-7):
            return ConicSolution(x, z, rep)
        best = (sol, status)
    sol, status = best
    rep = SolveReport("failed", float(sol.obj_val), float(sol.r_prim), np.nan, np.nan, sol.iterations, status)
    raise SolverError(f"solver stopped with status {status}", rep)


def best_battery_action(p_tx, e, Q, V: float, alpha: float, beta: float, cfg: SystemConfig) -> np.ndarray:
    """Exact minimiser over the (dis)charge box of V*G_rt(P_c + p + P_b - e) + Q*P_b, per BS.

    Both slopes of the objective are positive when V*beta + Q > 0 (discharge fully),
    both negative when V*alpha + Q < 0 (charge fully); otherwise the minimum sits at
    zero real-time trade, clipped to the box.
    """
    base = cfg.p_c + np.asarray(p_tx) - np.asarray(e)
    Q = np.asarray(Q, dtype=float)
    out = np.clip(-base, cfg.p_b_min, cfg.p_b_max)
    out = np.where(V * beta + Q > 0, cfg.p_b_min, out)
    out = np.where(V * alpha + Q < 0, cfg.p_b_max, out)
    return out


@dataclass
class RealtimeDecision:
    W: np.ndarray  # (M*I, K) complex beamformers
    P_b: np.ndarray
    P: np.ndarray
    p_tx: np.ndarray  # transmit power per BS
    objective_value: float
    solver_status: str
    price: np.ndarray  # marginal real-time price per BS, in [beta_rt, alpha_rt]
    sinr: np.ndarray


def decision_from_x(x: np.ndarray, z: Optional[np.ndarray], lay: Layout, col0: int, fast: FastState,
                    e, Q, V: float, cfg: SystemConfig, epi_rows=None, status: str = "optimal") -> RealtimeDecision:
    W = lay.unpack_w(x, col0)
    p_tx = bs_power(W, lay.I, lay.M)
    P_b = best_battery_action(p_tx, e, Q, V, fast.alpha_rt, fast.beta_rt, cfg)
    P = cfg.p_c + p_tx + P_b - np.asarray(e)
    obj = float(np.sum(V * cost_rt(P, fast.alpha_rt, fast.beta_rt) + np.asarray(Q) * P_b))
    if z is not None and epi_rows is not None:
        za, zb = z[epi_rows[0]], z[epi_rows[1]]
        price = (za * fast.alpha_rt + zb * fast.beta_rt) / V
        price = np.clip(price, fast.beta_rt, fast.alpha_rt)
    else:
        price = np.where(P > 0, fast.alpha_rt, fast.beta_rt)
    return RealtimeDecision(W=W, P_b=P_b, P=P, p_tx=p_tx, objective_value=obj, solver_status=status,
                            price=price, sinr=sinr_all(fast.H, W, cfg.sigma2_vec))


def solve_realtime(problem: ConicProblem, tol: float = 1e-9) -> tuple[RealtimeDecision, SolveReport]:
    sol = solve_conic(problem.A, problem.b, problem.q, problem.cones, tol=tol)
    dec = decision_from_x(sol.x, sol.z, problem.layout, 0, problem.fast, problem.e, problem.Q, problem.V,
                          problem.cfg, epi_rows=problem.epi_rows, status=sol.report.status)
    return dec, sol.report


@dataclass
class PlanningSample:
    P_b: np.ndarray
    W: np.ndarray
    delta: np.ndarray  # P_c + p_tx + P_b per BS
    price: np.ndarray
    value: float  # sum_i V*G_rt + Q_i*P_b,i at the inner optimum
    decision: RealtimeDecision


def solve_planning_sample(fast: FastState, E_iterate, Q_frozen, cfg: SystemConfig,
                          V: Optional[float] = None) -> PlanningSample:
    """Inner problem of the ahead-of-time objective for one sampled fast state."""
    E = np.asarray(E_iterate, dtype=float)
    if np.any(E < 0):
        raise ValueError("planning iterate must be nonnegative")
    prob = build_realtime_problem(fast, E, Q_frozen, cfg, V=V)
    dec, _ = solve_realtime(prob)
    delta = cfg.p_c + dec.p_tx + dec.P_b
    return PlanningSample(P_b=dec.P_b, W=dec.W, delta=delta, price=dec.price, value=dec.objective_value,
                          decision=dec)


def dump_problem(problem: ConicProblem, path: str | Path) -> None:
    """Write problem data as plain text for cross-checking with other solvers.

    Format: a header ``n m``, then ``cones`` lines ``kind dim`` (in row order), then
    ``q`` with n values, ``b`` with m values, and ``A`` as ``row col value`` triplets
    (0-based). The problem is ``min q'x s.t. b - A x in cones``.
    """
    A = problem.A.tocoo()
    lines = [f"{A.shape[1]} {A.shape[0]}", f"cones {len(problem.cones)}"]
    lines += [f"{kind} {d}" for kind, d in problem.cones]
    lines.append("q")
    lines += [repr(float(v)) for v in problem.q]
    lines.append("b")
    lines += [repr(float(v)) for v in problem.b]
    lines.append(f"A {A.nnz}")
    order = np.lexsort((A.col, A.row))
    lines += [f"{A.row[i]} {A.col[i]} {float(A.data[i])!r}" for i in order]
    Path(path).write_text("\n".join(lines) + "\n")
