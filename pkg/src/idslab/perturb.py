"""Quantitative block perturbation lemma and the eigenvalue-approximation
maps f and g.

The abstract statement: for H = H0 + V with commuting projection chains P^l_j
whose V-couplings are block-tridiagonal, every eigenvalue of H inside the
working interval J is tracked by an eigenvalue of
H~ = sum_l P^l H P^l + Q H0 Q with error at most
    max_l (6v)^(2 j_l + 1) prod_{j>=1} (a_j^l - 6v)^(-2),
a_j^l being the distance from spec(P^l_j H0 P^l_j) to J.

f(xi) is the eigenvalue of the full fiber matrix carrying the global label
p(xi); g(xi) is the eigenvalue of the Upsilon-class block carrying the local
crystallographic label t(xi).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bloch, zones
from .errors import HypothesisViolated, LabelAmbiguity, SmallDenominator
from .lattice import fractional_parts, split
from .potential import stats

# ---------------------------------------------------------------------------
# abstract block lemma


@dataclass
class BlockModel:
    h0_diag: np.ndarray
    blocks: list              # blocks[l][j] = index array; j = 0.. j_l
    q_indices: np.ndarray
    V: np.ndarray
    interval: tuple
    v: float


def _structural_zero_failures(model, tol=1e-14):
    fails = []
    V = model.V
    scale = max(np.abs(V).max(), 1.0)
    fams = [np.concatenate(fam) if len(fam) else np.array([], int)
            for fam in model.blocks]
    for l1 in range(len(fams)):
        for l2 in range(l1 + 1, len(fams)):
            if np.abs(V[np.ix_(fams[l1], fams[l2])]).max(initial=0.0) > tol * scale:
                fails.append(f"P^{l1} V P^{l2} != 0")
    for l, fam in enumerate(model.blocks):
        for j1 in range(len(fam)):
            for j2 in range(j1 + 2, len(fam)):
                if np.abs(V[np.ix_(fam[j1], fam[j2])]).max(initial=0.0) > tol * scale:
                    fails.append(f"P^{l}_{j1} V P^{l}_{j2} != 0 (|j-t|>1)")
            if j1 < len(fam) - 1 and len(model.q_indices):
                if np.abs(V[np.ix_(fam[j1], model.q_indices)]).max(initial=0.0) \
                        > tol * scale:
                    fails.append(f"P^{l}_{j1} V Q != 0 (j < j_l)")
    return fails


def _gap_failures(model):
    fails = []
    lam1, lam2 = model.interval
    v = model.v

    def dist(diag):
        return float(np.minimum(np.abs(diag - lam1), np.abs(diag - lam2)).min()) \
            if len(diag) else math.inf

    def outside(diag):
        return bool(np.all((diag < lam1) | (diag > lam2))) if len(diag) else True

    if len(model.q_indices):
        dq = model.h0_diag[model.q_indices]
        if not outside(dq) or dist(dq) <= 4.0 * v:
            fails.append("dist(spec(Q H0 Q), J) <= 4v")
    for l, fam in enumerate(model.blocks):
        for j in range(1, len(fam)):
            dj = model.h0_diag[fam[j]]
            if len(dj) and (not outside(dj) or dist(dj) <= 12.0 * v):
                fails.append(f"a_{j}^{l} <= 12v")
    return fails


def lemma_bound(model):
    """max_l (6v)^(2 j_l + 1) prod_{j>=1}(a_j^l - 6v)^(-2)."""
    lam1, lam2 = model.interval
    v = model.v
    best = 0.0
    for fam in model.blocks:
        j_l = len(fam) - 1
        val = (6.0 * v) ** (2 * j_l + 1)
        for j in range(1, j_l + 1):
            dj = model.h0_diag[fam[j]]
            a_j = float(np.minimum(np.abs(dj - lam1), np.abs(dj - lam2)).min()) \
                if len(dj) else math.inf
            val /= (a_j - 6.0 * v) ** 2
        best = max(best, val)
    return best


def tilde_matrix(model):
    """H~ = sum_l P^l H P^l + Q H0 Q."""
    n = len(model.h0_diag)
    Ht = np.zeros_like(model.V)
    for fam in model.blocks:
        idx = np.concatenate(fam) if len(fam) else np.array([], int)
        if len(idx):
            Ht[np.ix_(idx, idx)] = model.V[np.ix_(idx, idx)]
    Ht[np.arange(n), np.arange(n)] += model.h0_diag
    if len(model.q_indices):
        q = model.q_indices
        Ht[np.ix_(q, q)] = np.diag(model.h0_diag[q])
    return Ht


def verify_block_lemma(model):
    """Check every assertion of the block lemma on one admissible instance."""
    fails = _structural_zero_failures(model) + _gap_failures(model)
    if fails:
        raise HypothesisViolated(fails)
    lam1, lam2 = model.interval
    H = model.V.copy()
    n = len(model.h0_diag)
    H[np.arange(n), np.arange(n)] += model.h0_diag
    Ht = tilde_matrix(model)
    w = np.linalg.eigvalsh(H)
    wt = np.linalg.eigvalsh(Ht)
    bound = lemma_bound(model)
    inside = (w >= lam1) & (w <= lam2)
    violations = []
    errs = np.abs(wt[inside] - w[inside])
    for r in np.flatnonzero(inside):
        if abs(wt[r] - w[r]) > bound * (1 + 1e-9) + 1e-13:
            violations.append({"check": "tracking", "index": int(r),
                               "mu": float(w[r]), "mu_tilde": float(wt[r]),
                               "bound": bound})
    for r in np.flatnonzero(~inside):
        if lam1 + model.v < wt[r] < lam2 - model.v:
            violations.append({"check": "spill", "index": int(r),
                               "mu_tilde": float(wt[r])})
    gap_norm = float(np.linalg.norm(H - Ht, 2))
    if gap_norm > 2.0 * model.v * (1 + 1e-9):
        violations.append({"check": "norm", "norm": gap_norm})
    return {
        "violations": violations,
        "bound": bound,
        "n_inside": int(inside.sum()),
        "max_err": float(errs.max()) if len(errs) else 0.0,
        "max_ratio_to_bound": float(errs.max() / bound) if len(errs) else 0.0,
        "tilde_norm_gap": gap_norm,
    }


def random_block_model(rng, dim_cap=40, interval=(-5.0, 5.0)):
    """Random instance satisfying the lemma hypotheses by construction:
    block sizes <= 8, gaps a_j = 12 v (1.5 + u) with u ~ U[0, 1]."""
    lam1, lam2 = interval
    v = float(rng.uniform(0.4, 1.5))
    sizes, fams = [], []
    total = 0
    n_fam = int(rng.integers(1, 4))
    for _ in range(n_fam):
        depth = int(rng.integers(1, 4))
        fam = []
        for _ in range(depth):
            s = int(rng.integers(1, 9))
            if total + s > dim_cap - 1:
                break
            fam.append(np.arange(total, total + s))
            total += s
        if fam:
            fams.append(fam)
    q_size = int(rng.integers(0, min(8, dim_cap - total) + 1))
    q = np.arange(total, total + q_size)
    total += q_size
    h0 = np.zeros(total)
    mid = 0.5 * (lam1 + lam2)
    half = 0.5 * (lam2 - lam1)
    for fam in fams:
        h0[fam[0]] = mid + rng.uniform(-half - v, half + v, size=len(fam[0]))
        for j in range(1, len(fam)):
            a_j = 12.0 * v * (1.5 + rng.uniform())
            side = 1.0 if rng.uniform() < 0.5 else -1.0
            edge = lam2 if side > 0 else lam1
            h0[fam[j]] = edge + side * (a_j + rng.uniform(0, 4 * v, len(fam[j])))
    if q_size:
        dq = 4.0 * v * (1.5 + rng.uniform(size=q_size))
        signs = np.where(rng.uniform(size=q_size) < 0.5, -1.0, 1.0)
        h0[q] = np.where(signs > 0, lam2, lam1) + signs * dq
    V = np.zeros((total, total))

    def fill(idx_a, idx_b):
        blockv = rng.standard_normal((len(idx_a), len(idx_b)))
        V[np.ix_(idx_a, idx_b)] = blockv
        V[np.ix_(idx_b, idx_a)] = blockv.T

    for fam in fams:
        for j, idx in enumerate(fam):
            diag_block = rng.standard_normal((len(idx), len(idx)))
            V[np.ix_(idx, idx)] = 0.5 * (diag_block + diag_block.T)
            if j + 1 < len(fam):
                fill(idx, fam[j + 1])
        if q_size:
            fill(fam[-1], q)
    if q_size:
        qq = rng.standard_normal((q_size, q_size))
        V[np.ix_(q, q)] = 0.5 * (qq + qq.T)
    norm = np.linalg.norm(V, 2)
    if norm > 0:
        V *= v / norm
    return BlockModel(h0_diag=h0, blocks=fams, q_indices=q, V=V,
                      interval=interval, v=v)


def run_block_lemma_suite(n_instances, seed=0, dim_cap=40):
    """The randomized admissible-instance suite; returns a summary report."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = []
    for i in range(n_instances):
        model = random_block_model(rng, dim_cap=dim_cap)
        rep = verify_block_lemma(model)
        worst = max(worst, rep["max_ratio_to_bound"])
        for vio in rep["violations"]:
            violations.append({"instance": i, **vio})
    return {"instances": n_instances, "violations": violations,
            "max_ratio_to_bound": worst}


# ---------------------------------------------------------------------------
# fiber context: classes, labels, f and g


@dataclass(frozen=True)
class ApproxPair:
    xi: np.ndarray
    f_val: float
    g_val: float
    t: int
    tau: int
    p: int


def _lex_rank(values, coords, value0, coord0):
    """Rank (0-based) of (value0, coord0) under (value, x, y) ordering."""
    extra = 0
    for i in np.flatnonzero(values == value0):
        c = coords[i]
        if c[0] == coord0[0] and c[1] == coord0[1]:
            raise LabelAmbiguity("coincident universal coordinates")
        if (c[0], c[1]) < (coord0[0], coord0[1]):
            extra += 1
    return int((values < value0).sum()) + extra


class FiberContext:
    """All per-fiber machinery for one (potential, zone params, rho, k)."""

    def __init__(self, V, params, rho, k, e_max=None, f_margin=None):
        self.V = V
        self.params = params
        self.rho = float(rho)
        self.lam = rho * rho
        self.k = np.asarray(k, dtype=float)
        st = stats(V)
        self.v = st.v
        self.b_hat = V.coefficient((0, 0)).real / math.sqrt(V.lattice.cell_volume)
        self.v_off = (st.v - abs(self.b_hat)) + 1e-12
        if e_max is None:
            if f_margin is None:
                f_margin = max(200.0, 30.0 * self.v)
            e_max = self.lam + 100.0 * self.v + f_margin
        self.e_max = float(e_max)
        self._fiber = None
        self._coupling_cache = {}

    @property
    def fiber(self):
        if self._fiber is None:
            self._fiber = bloch.banded_fiber(self.V.lattice, self.V, self.k,
                                             self.e_max)
        return self._fiber

    # -- class blocks --------------------------------------------------

    def _coupling(self, offsets):
        key = offsets.tobytes()
        if key not in self._coupling_cache:
            n = len(offsets)
            root_vol = math.sqrt(self.V.lattice.cell_volume)
            dtype = float if self.V.is_real_symmetric() else complex
            C = np.zeros((n, n), dtype=dtype)
            diff = offsets[:, None, :] - offsets[None, :, :]
            for g, c in self.V.coeffs.items():
                hit = (diff[:, :, 0] == g[0]) & (diff[:, :, 1] == g[1])
                C[hit] += c / root_vol if dtype is complex else c.real / root_vol
            self._coupling_cache[key] = C
        return self._coupling_cache[key]

    def class_matrices(self, ups):
        """(free energies, full block matrix) over the class members."""
        free = (ups.members ** 2).sum(axis=1)
        H = self._coupling(ups.offsets).copy()
        H[np.arange(len(free)), np.arange(len(free))] += free
        return free, H

    def t_label(self, ups, member_index):
        """1-based crystallographic rank of a member's free energy."""
        free = (ups.members ** 2).sum(axis=1)
        return 1 + _lex_rank(np.delete(free, member_index),
                             np.delete(ups.members, member_index, axis=0),
                             free[member_index], ups.members[member_index])

    def nu_value(self, xi, label=None):
        """(nu, t, ups): the class eigenvalue with the member's label."""
        xi = np.asarray(xi, dtype=float)
        ups = zones.upsilon(xi, self.params, self.rho, label=label)
        seed_idx = int(np.argmin(((ups.members - xi) ** 2).sum(axis=1)))
        t = self.t_label(ups, seed_idx)
        if ups.size > 400:
            banded = bloch.banded_from_modes(self.V.lattice, self.V,
                                             ups.offsets, xi)
            nu = bloch.fiber_eigenvalue_by_index(banded, t)
        else:
            _, H = self.class_matrices(ups)
            nu = float(np.linalg.eigvalsh(H)[t - 1])
        return nu, t, ups

    # -- global labeling ------------------------------------------------

    def _ambiguous_modes(self, value):
        """Fiber modes whose class eigenvalue could straddle `value`."""
        fib = self.fiber
        centers = fib.energies + self.b_hat
        lo = value - self.v_off - 1e-9
        hi = value + self.v_off + 1e-9
        certain = int((centers < lo).sum())
        amb = np.flatnonzero((centers >= lo) & (centers <= hi))
        return certain, amb

    def p_label(self, xi, nu_xi):
        """Global 1-based rank of nu(xi) in the fiber's H~ spectrum."""
        xi = np.asarray(xi, dtype=float)
        fib = self.fiber
        certain, amb = self._ambiguous_modes(nu_xi)
        count = certain
        xi_int = split(self.V.lattice, xi).integer_coords
        for idx in amb:
            mode = fib.modes[idx]
            if np.array_equal(mode, xi_int):
                continue  # the seed itself
            eta = self.V.lattice.dual_vector(mode) + self.k
            nu_eta, _, _ = self.nu_value(eta)
            if nu_eta < nu_xi or (nu_eta == nu_xi and tuple(eta) < tuple(xi)):
                count += 1
        return count + 1

    def f_value(self, p):
        return bloch.fiber_eigenvalue_by_index(self.fiber, p)

    def f_g_pair(self, xi):
        """ApproxPair for a point of the (slightly shrunk) annulus."""
        xi = np.asarray(xi, dtype=float)
        label = zones.classify(xi, self.params, self.rho)
        nu, t, ups = self.nu_value(xi, label=label)
        p = self.p_label(xi, nu)
        f = self.f_value(p)
        if label.kind == zones.RESONANT:
            sets = zones.StripSets(self.params, label.l, self.rho)
            x2 = sets.coords(xi[None, :])[0, 1]
            core_x2 = x2 + ups.core_js * sets.theta_len
            tau = 1 + int((core_x2 ** 2 < x2 * x2 - 1e-12).sum())
        else:
            tau = t
        return ApproxPair(xi=xi, f_val=float(f), g_val=float(nu), t=t,
                          tau=tau, p=p)

    def tilde_window_spectrum(self, window):
        """Multiset of H~ eigenvalues nu(eta) inside the window, labeled."""
        lo, hi = window
        fib = self.fiber
        centers = fib.energies + self.b_hat
        cand = np.flatnonzero((centers >= lo - self.v_off - 1e-9) &
                              (centers <= hi + self.v_off + 1e-9))
        out = []
        for idx in cand:
            eta = self.V.lattice.dual_vector(fib.modes[idx]) + self.k
            nu, t, ups = self.nu_value(eta)
            if lo <= nu <= hi:
                out.append({"nu": nu, "t": t, "kind": ups.kind,
                            "l": ups.l, "mode": fib.modes[idx].tolist()})
        out.sort(key=lambda d: d["nu"])
        return out

    def full_window_spectrum(self, window):
        return bloch.fiber_window_eigenvalues(self.fiber, window[0], window[1])

    # -- second order ----------------------------------------------------

    def rayleigh_schrodinger2(self, xi):
        """|xi|^2 + mean + exact second-order sum over the potential modes."""
        xi = np.asarray(xi, dtype=float)
        sq = float(xi @ xi)
        root_vol = math.sqrt(self.V.lattice.cell_volume)
        corr = 0.0
        for g, c in self.V.coeffs.items():
            if g == (0, 0):
                continue
            eta = self.V.lattice.dual_vector(np.array(g))
            den = sq - float((xi + eta) @ (xi + eta))
            if abs(den) < 10.0 * self.v:
                raise SmallDenominator(
                    f"denominator {den:g} for mode {g} (misclassified point?)")
            corr += abs(c / root_vol) ** 2 / den
        return sq + self.b_hat + corr


def make_context(V, params, rho, xi=None, k=None, **kw):
    """FiberContext for the fiber containing xi (or an explicit k)."""
    if k is None:
        k = fractional_parts(V.lattice, np.asarray(xi, float)[None, :])[0]
    return FiberContext(V, params, rho, k, **kw)
