"""Brillouin-zone quadrature for N(lambda), normalization to N~, residuals
against (lambda - b)/(4 pi), and dyadic-interval coefficient fitting with
logarithmic terms.

Quadrature rule: midpoint on a uniform G x G grid of the dual fundamental
cell. Counting functions are piecewise constant in k, so midpoint sampling is
unbiased and avoids the eigenvalue degeneracies that sit on symmetry points.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bloch
from .errors import IllConditioned
from .potential import stats

FOUR_PI_SQ = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class IdsSample:
    lam: float
    N: float
    N_tilde: float
    grid: int
    e_max: float


@dataclass(frozen=True)
class ExpansionFit:
    rho_interval: tuple
    K: int
    e: np.ndarray          # e_j, j = 0..K
    e_hat: np.ndarray      # e^_j, j = 2..K
    residual_sup: float
    cond: float
    std_err: np.ndarray    # per-column least-squares standard errors


def bz_midpoint_grid(lat, G):
    """Midpoint quasi-momenta ((i+1/2)/G) d1 + ((j+1/2)/G) d2."""
    t = (np.arange(G) + 0.5) / G
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    return np.stack([t1.ravel(), t2.ravel()], axis=1) @ lat.dual_basis


def _diagonal_counts(lat, shift, lam, ks):
    """Counting for a multiplication-free potential: #{m : |m+k|^2 <= lam-shift}."""
    thr = lam - shift
    if thr < 0:
        return np.zeros(len(ks), dtype=np.int64)
    r = math.sqrt(thr) + float(np.abs(ks).max()) * 2.0 + 1.0
    vecs = lat.dual_vector(lat.dual_ball_ints(r))
    counts = np.empty(len(ks), dtype=np.int64)
    chunk = max(1, int(4e6 // max(len(vecs), 1)))
    for s in range(0, len(ks), chunk):
        kk = ks[s:s + chunk]
        e = ((vecs[None, :, :] + kk[:, None, :]) ** 2).sum(axis=2)
        counts[s:s + chunk] = (e <= thr * (1 + 1e-15) + 1e-12).sum(axis=1)
    return counts


def _symmetry_representatives(G):
    """Midpoint-grid representatives under k -> -k with multiplicities.

    For real potentials spectrum(k) = spectrum(-k); on the midpoint grid the
    involution is (i, j) -> (G-1-i, G-1-j).
    """
    reps = []
    for i in range(G):
        for j in range(G):
            ii, jj = G - 1 - i, G - 1 - j
            if (i, j) < (ii, jj):
                reps.append((i, j, 2))
            elif (i, j) == (ii, jj):
                reps.append((i, j, 1))
    return reps


def integrated_dos(V, lam, grid, e_max=None):
    """One IdsSample: N = (vol O^dagger / G^2) sum_k #{mu_j(H(k)) <= lam}."""
    if grid < 4:
        raise ValueError("grid must be at least 4")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    lat = V.lattice
    if e_max is None:
        e_max = bloch.quadrature_cutoff(lam, V)
    G = int(grid)
    root_vol = math.sqrt(lat.cell_volume)
    offdiag = [g for g in V.coeffs if g != (0, 0)]
    if not offdiag:
        ks = bz_midpoint_grid(lat, G)
        total = int(_diagonal_counts(lat, V.coefficient((0, 0)).real / root_vol,
                                     lam, ks).sum())
    else:
        t = (np.arange(G) + 0.5) / G
        total = 0
        for i, j, mult in _symmetry_representatives(G):
            k = np.array([t[i], t[j]]) @ lat.dual_basis
            fib = bloch.banded_fiber(lat, V, k, e_max)
            total += mult * bloch.fiber_count_below(fib, lam)
    N = lat.dual_cell_volume * total / (G * G)
    return IdsSample(lam=float(lam), N=N, N_tilde=N / FOUR_PI_SQ,
                     grid=G, e_max=float(e_max))


def residual(V, lam, grid, e_max=None):
    """N~(lambda) - (lambda - b) / (4 pi)."""
    sample = integrated_dos(V, lam, grid, e_max=e_max)
    b = stats(V).b
    return sample.N_tilde - (lam - b) / (4.0 * math.pi)


def _design_matrix(rhos, K):
    cols = [rhos ** (-j) for j in range(K + 1)]
    cols += [np.log(rhos) * rhos ** (-j) for j in range(2, K + 1)]
    return np.stack(cols, axis=1)


def fit_expansion(samples, K, cond_cap=1e12):
    """Least-squares fit of N(rho^2) - pi rho^2 over one dyadic rho-interval
    against the basis {rho^-j : 0..K} union {rho^-j log rho : 2..K}.

    The leading pi rho^2 term is fixed, not fitted, which removes the
    dominant collinearity.
    """
    samples = sorted(samples, key=lambda s: s.lam)
    rhos = np.array([math.sqrt(s.lam) for s in samples])
    if len(np.unique(rhos)) < 2 * (K + 1):
        raise ValueError(f"need at least {2*(K+1)} samples with distinct rho")
    if rhos[-1] > 4.0 * rhos[0] * (1 + 1e-9):
        raise ValueError("samples must lie in one dyadic interval [rho_n, 4 rho_n]")
    y = np.array([s.N for s in samples]) - math.pi * rhos ** 2
    X = _design_matrix(rhos, K)
    sv = np.linalg.svd(X, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    if cond > cond_cap:
        raise IllConditioned(f"design matrix condition {cond:.3g} > {cond_cap:g}; "
                             "reduce K")
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ coef
    resid = y - fitted
    dof = max(len(y) - X.shape[1], 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return ExpansionFit(rho_interval=(float(rhos[0]), float(rhos[-1])), K=K,
                        e=coef[:K + 1], e_hat=coef[K + 1:],
                        residual_sup=float(np.abs(resid).max()), cond=cond,
                        std_err=np.sqrt(np.diag(cov)))


def bootstrap_ehat_se(samples, K, index=0, n_boot=200, seed=0):
    """Bootstrap standard error of e^_{2+index} by resampling the sample set."""
    rng = np.random.default_rng(seed)
    samples = list(samples)
    vals = []
    need = 2 * (K + 1)
    for _ in range(n_boot):
        while True:
            pick = rng.integers(0, len(samples), size=len(samples))
            sub = [samples[i] for i in pick]
            if len({s.lam for s in sub}) >= need:
                break
        vals.append(fit_expansion(sub, K).e_hat[index])
    return float(np.std(vals, ddof=1))


def samples_to_csv(path, samples):
    with open(path, "w") as fh:
        fh.write("lambda,N,N_tilde,grid,E_max\n")
        for s in samples:
            fh.write(f"{s.lam:.17g},{s.N:.17g},{s.N_tilde:.17g},"
                     f"{s.grid},{s.e_max:.17g}\n")


def fit_to_json(fit):
    return {
        "rho_interval": list(fit.rho_interval),
        "K": fit.K,
        "e": [float(c) for c in fit.e],
        "e_hat": [float(c) for c in fit.e_hat],
        "residual_sup": fit.residual_sup,
        "condition_number": fit.cond,
        "std_err": [float(c) for c in fit.std_err],
    }
