"""Resonance-zone decomposition of the spectral annulus.

For each primitive direction theta with a strip, the chain
Xi1 -> Xi2 -> Xi3 -> Xi4 -> Xi5 carves the resonance region Xi5(theta) out of
the annulus A(rho) = {|xi|^2 in [rho^2 - 100 v, rho^2 + 100 v]}; what is left
is the non-resonance region B, split into sectors B_l between consecutive
perpendiculars. Upsilon equivalence classes and the projection block scheme
are built from lattice balls Theta_j = dual lattice intersect B(j * R_n).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffTooSmall, EmptyBall, OutsideAnnulus
from .lattice import frame_for, primitive_vectors_int

BOUNDARY_REL_TOL = 1e-9

NONRESONANT = 0
RESONANT = 1
OUTSIDE = 2


def strip_width(theta_len, rho_n):
    """Smallest a >= rho_n^(1/3) with 2 a / |theta| - 1/2 a natural number."""
    floor = rho_n ** (1.0 / 3.0)
    j = max(0, math.ceil(2.0 * floor / theta_len - 0.5 - 1e-12))
    a = (j + 0.5) * theta_len / 2.0
    while a < floor - 1e-12:
        j += 1
        a = (j + 0.5) * theta_len / 2.0
    return a


def _norm_candidates(lat, r_max):
    """Distinct dual-vector norms <= r_max, ascending."""
    ints = lat.dual_ball_ints(r_max, include_zero=False)
    norms = np.sqrt((lat.dual_vector(ints) ** 2).sum(axis=1))
    out = []
    for x in np.sort(norms):
        if not out or x > out[-1] * (1 + 1e-12):
            out.append(float(x))
    return out


def auto_direction_radius(lat, rho_n, R_n, m_tilde, v):
    """Largest direction-ball radius (<= 6 M~ R_n) whose primitive strips are
    pairwise disjoint inside the annulus and obey a(theta) <= 2 rho_n^(1/3).

    The paper takes all primitives of Theta'_{6 M~}; at desk scale that floods
    the annulus with overlapping strips, so the radius is capped by the two
    constructive conditions above.
    """
    target = 6.0 * m_tilde * R_n
    best = None
    pad = 2.0 * 100.0 * v / max(rho_n, 1.0)
    for r in _norm_candidates(lat, target):
        prim = primitive_vectors_int(lat, r)
        vecs = lat.dual_vector(prim)
        lens = np.sqrt((vecs ** 2).sum(axis=1))
        widths = np.array([strip_width(t, rho_n) for t in lens])
        if widths.max() > 2.0 * rho_n ** (1.0 / 3.0) + 1e-9:
            break
        angles = np.sort(np.mod(np.arctan2(vecs[:, 1], vecs[:, 0]), math.pi))
        ok = True
        for i in range(len(angles)):
            j = (i + 1) % len(angles)
            gap = angles[j] - angles[i] if j else angles[0] + math.pi - angles[-1]
            if gap < 1e-12:
                continue
            # strips around two lines at angle `gap` stay disjoint inside the
            # annulus iff their crossing lozenge sits well inside radius rho_n
            if (widths.max() * 2.0 + pad) / math.sin(min(gap, math.pi / 2)) \
                    > 0.8 * rho_n:
                ok = False
                break
        if ok:
            best = r
        else:
            break
    if best is None:
        raise EmptyBall("no direction radius yields disjoint strips at this rho_n")
    return best


@dataclass(frozen=True)
class ZoneParams:
    lattice: object
    rho_n: float
    R_n: float
    M: int
    m_tilde: int
    v: float
    direction_radius: float
    directions_int: np.ndarray
    theta_lens: np.ndarray
    a: np.ndarray
    frames: tuple
    _ball_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def L(self):
        return len(self.directions_int)

    def theta_ball(self, level, exclude_zero=False):
        """Integer coordinates of Theta_level = dual lattice in B(level * R_n)."""
        key = (int(level), bool(exclude_zero))
        if key not in self._ball_cache:
            if level == 0:
                ints = np.zeros((0 if exclude_zero else 1, 2), dtype=np.int64)
            else:
                ints = self.lattice.dual_ball_ints(level * self.R_n,
                                                   include_zero=not exclude_zero)
            self._ball_cache[key] = ints
        return self._ball_cache[key]

    def annulus_window(self, rho):
        lam = rho * rho
        return lam - 100.0 * self.v, lam + 100.0 * self.v


def make_zone_params(lattice, rho_n, R_n, M, v, m_tilde=None,
                     direction_radius=None):
    m_tilde = 3 * M if m_tilde is None else m_tilde
    if direction_radius is None:
        direction_radius = auto_direction_radius(lattice, rho_n, R_n, m_tilde, v)
    dirs = primitive_vectors_int(lattice, direction_radius)
    vecs = lattice.dual_vector(dirs)
    lens = np.sqrt((vecs ** 2).sum(axis=1))
    widths = np.array([strip_width(t, rho_n) for t in lens])
    frames = tuple(frame_for(t) for t in vecs)
    return ZoneParams(lattice=lattice, rho_n=float(rho_n), R_n=float(R_n),
                      M=int(M), m_tilde=int(m_tilde), v=float(v),
                      direction_radius=float(direction_radius),
                      directions_int=dirs, theta_lens=lens, a=widths,
                      frames=frames)


# ---------------------------------------------------------------------------
# strip set algebra

@dataclass(frozen=True)
class StripBounds:
    """Closed-form extremals of the Xi chain for one direction at one rho."""

    a: float
    p_minus: float
    p_plus: float
    p_tilde_minus: float
    a_tilde: float


def strip_bounds(params, l, rho):
    lo, hi = params.annulus_window(rho)
    a = params.a[l]
    if lo - a * a <= 0:
        raise OutsideAnnulus("annulus too wide for this rho (rho^2 < 100 v + a^2)")
    return StripBounds(a=a,
                       p_minus=math.sqrt(lo - a * a),
                       p_plus=math.sqrt(hi),
                       p_tilde_minus=math.sqrt(max(hi - a * a, 0.0)),
                       a_tilde=math.sqrt(a * a + (hi - lo)))


def in_annulus(params, rho, pts):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    lo, hi = params.annulus_window(rho)
    sq = (pts ** 2).sum(axis=1)
    return (sq >= lo) & (sq <= hi)


class StripSets:
    """Vectorized membership tests for the Xi sets of one direction."""

    def __init__(self, params, l, rho):
        self.params = params
        self.l = l
        self.rho = rho
        self.frame = params.frames[l]
        self.theta_len = float(params.theta_lens[l])
        self.bounds = strip_bounds(params, l, rho)
        self.lo, self.hi = params.annulus_window(rho)
        self.tol_c = BOUNDARY_REL_TOL * rho
        self.tol_sq = 2.0 * BOUNDARY_REL_TOL * rho * rho

    def coords(self, pts):
        return self.frame.to_frame(np.atleast_2d(np.asarray(pts, dtype=float)))

    def _near(self, x, thresholds, tol):
        out = np.zeros(x.shape, dtype=bool)
        for t in thresholds:
            out |= np.abs(x - t) < tol
        return out

    def xi1(self, pts, boundary=None):
        c = self.coords(pts)
        sq = (c ** 2).sum(axis=1)
        if boundary is not None:
            boundary |= self._near(sq, [self.lo, self.hi], self.tol_sq)
            boundary |= self._near(np.abs(c[:, 1]), [self.bounds.a], self.tol_c)
        return (sq >= self.lo) & (sq <= self.hi) & \
            (np.abs(c[:, 1]) < self.bounds.a) & (c[:, 0] > 0)

    def xi2(self, pts, boundary=None):
        c = self.coords(pts)
        if boundary is not None:
            boundary |= self._near(c[:, 0], [self.bounds.p_minus,
                                             self.bounds.p_plus], self.tol_c)
        return (c[:, 0] > self.bounds.p_minus) & (c[:, 0] < self.bounds.p_plus)

    def xi3(self, pts, boundary=None):
        c = self.coords(pts)
        out = self.xi2(pts, boundary)
        if boundary is not None:
            boundary |= self._near(np.abs(c[:, 1]), [self.bounds.a], self.tol_c)
        return out & (np.abs(c[:, 1]) < self.bounds.a)

    def xi4(self, pts, boundary=None):
        c = self.coords(pts)
        sq = (c ** 2).sum(axis=1)
        if boundary is not None:
            boundary |= self._near(sq, [self.lo, self.hi], self.tol_sq)
            boundary |= self._near(np.abs(c[:, 1]), [self.bounds.a], self.tol_c)
        return self.xi2(pts, boundary) & (sq >= self.lo) & (sq <= self.hi) & \
            (np.abs(c[:, 1]) >= self.bounds.a)

    def carve_js(self, pts):
        """Per point, True when some Z*theta translate lands in Xi4."""
        c = self.coords(pts)
        x1, x2 = c[:, 0], c[:, 1]
        u = np.sqrt(np.maximum(self.hi - x1 * x1, 0.0))
        jlo = np.ceil((-x2 - u) / self.theta_len - 1e-12).astype(int)
        jhi = np.floor((-x2 + u) / self.theta_len + 1e-12).astype(int)
        carved = np.zeros(len(c), dtype=bool)
        if len(c) == 0:
            return carved
        for j in range(int(jlo.min()), int(jhi.max()) + 1):
            y = x2 + j * self.theta_len
            sq = x1 * x1 + y * y
            carved |= (np.abs(y) >= self.bounds.a) & (sq >= self.lo) & (sq <= self.hi)
        return carved

    def xi5(self, pts, boundary=None):
        return self.xi3(pts, boundary) & ~self.carve_js(pts)


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ZoneLabel:
    kind: int          # NONRESONANT / RESONANT / OUTSIDE
    l: int
    boundary: bool


def classify_many(pts, params, rho):
    """Labels for an (n, 2) array of annulus points.

    Returns (kind, l, boundary) arrays; kind is OUTSIDE off the annulus.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = len(pts)
    kind = np.full(n, OUTSIDE, dtype=np.int8)
    lab = np.full(n, -1, dtype=np.int64)
    boundary = np.zeros(n, dtype=bool)
    inside = in_annulus(params, rho, pts)
    sq = (pts ** 2).sum(axis=1)
    lo, hi = params.annulus_window(rho)
    boundary |= (np.abs(sq - lo) < 2e-9 * rho * rho) | \
        (np.abs(sq - hi) < 2e-9 * rho * rho)
    kind[inside] = NONRESONANT
    for l in range(params.L):
        hit = StripSets(params, l, rho).xi5(pts, boundary) & inside
        multi = hit & (kind == RESONANT)
        boundary |= multi  # strips are disjoint by construction; flag if not
        fresh = hit & (kind != RESONANT)
        kind[fresh] = RESONANT
        lab[fresh] = l
    nonres = inside & (kind == NONRESONANT)
    if nonres.any():
        lab[nonres] = sector_index(params, pts[nonres], boundary, nonres)
    return kind, lab, boundary


def sector_index(params, pts, boundary=None, mask=None):
    """Index l of the sector B_l: <xi, theta_l> > 0 and <xi, theta_{l+1}> < 0."""
    vecs = params.lattice.dual_vector(params.directions_int)
    perp_ang = np.mod(np.arctan2(-vecs[:, 0], vecs[:, 1]) + 2 * math.pi,
                      2 * math.pi)
    # angle of theta_l-perp where perp(x) = (y, -x)
    order = np.argsort(perp_ang)
    ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * math.pi)
    pos = np.searchsorted(perp_ang[order], ang, side="right") - 1
    pos = np.where(pos < 0, len(order) - 1, pos)
    out = order[pos]
    dots_l = (pts * vecs[out]).sum(axis=1)
    nxt = order[(pos + 1) % len(order)]
    dots_r = (pts * vecs[nxt]).sum(axis=1)
    if boundary is not None and mask is not None:
        scale = np.linalg.norm(pts, axis=1)
        bnd = (np.abs(dots_l) < 1e-9 * scale) | (np.abs(dots_r) < 1e-9 * scale)
        idx = np.flatnonzero(mask)
        boundary[idx[bnd]] = True
    return out


def classify(xi, params, rho):
    """ZoneLabel of a single annulus point; raises OutsideAnnulus off it."""
    kind, lab, boundary = classify_many(np.asarray(xi, float)[None, :], params, rho)
    if kind[0] == OUTSIDE:
        raise OutsideAnnulus(f"|xi|^2 outside [rho^2 - 100v, rho^2 + 100v]")
    return ZoneLabel(kind=int(kind[0]), l=int(lab[0]), boundary=bool(boundary[0]))


# ---------------------------------------------------------------------------
# Upsilon classes

@dataclass(frozen=True)
class UpsilonClass:
    seed: np.ndarray          # seed point xi
    kind: int                 # NONRESONANT / RESONANT
    l: int                    # strip index for resonant classes, sector else
    core_js: np.ndarray       # core translate indices along theta (resonant)
    offsets: np.ndarray       # (n, 2) integer offsets from seed, lex sorted
    members: np.ndarray       # seed + offsets in dual space

    @property
    def size(self):
        return len(self.offsets)


def _dedup_lex(ints):
    ints = np.asarray(ints, dtype=np.int64)
    keys = ints[:, 0] * (1 << 24) + ints[:, 1]
    _, idx = np.unique(keys, return_index=True)
    kept = ints[np.sort(idx)]
    order = np.lexsort((kept[:, 1], kept[:, 0]))
    return kept[order]


def core_translates(params, l, rho, xi):
    """Integer j with xi + j*theta_l in Xi3(theta_l)."""
    sets = StripSets(params, l, rho)
    c = sets.coords(np.asarray(xi, float)[None, :])[0]
    a = sets.bounds.a
    t = sets.theta_len
    jlo = math.ceil((-c[1] - a) / t - 1e-12)
    jhi = math.floor((a - c[1]) / t + 1e-12)
    js = [j for j in range(jlo, jhi + 1) if abs(c[1] + j * t) < a]
    return np.array(js, dtype=np.int64)


def upsilon(xi, params, rho, label=None):
    """Equivalence class Upsilon(xi): the nonresonant ball xi + Theta_{M~} or
    the resonant core {xi + j theta in Xi3} padded by Theta_{7 M~}."""
    xi = np.asarray(xi, dtype=float)
    if label is None:
        label = classify(xi, params, rho)
    if label.kind == NONRESONANT:
        offs = _dedup_lex(params.theta_ball(params.m_tilde))
        core = np.array([0], dtype=np.int64)
    else:
        l = label.l
        js = core_translates(params, l, rho, xi)
        theta = params.directions_int[l]
        pad = params.theta_ball(7 * params.m_tilde)
        core_pts = js[:, None] * theta[None, :]
        offs = _dedup_lex((core_pts[:, None, :] + pad[None, :, :]).reshape(-1, 2))
        core = js
    members = xi[None, :] + params.lattice.dual_vector(offs)
    return UpsilonClass(seed=xi, kind=label.kind, l=label.l, core_js=core,
                        offsets=offs, members=members)


# ---------------------------------------------------------------------------
# projection scheme

@dataclass(frozen=True)
class ProjectionScheme:
    """Partition of basis modes into blocks P^l_j (l = 0 nonresonant family,
    l >= 1 strips) plus the remainder Q, as index arrays."""

    blocks: list            # blocks[l][j] = np.ndarray of mode indices
    q_indices: np.ndarray
    overlap_count: int      # modes claimed by several families (desk scale)

    def all_block_indices(self):
        return [idx for fam in self.blocks for idx in fam]


_BIG_LEVEL = np.iinfo(np.int32).max


def _membership_levels(params, vectors, member_fn, max_level, candidates):
    """Per mode, the smallest ball index m <= max_level such that
    eta - g lies in the target set for some g in Theta_m."""
    levels = np.full(len(vectors), _BIG_LEVEL, dtype=np.int32)
    idx = np.flatnonzero(candidates)
    if len(idx) == 0:
        return levels
    ball = params.theta_ball(max_level)
    gvecs = params.lattice.dual_vector(ball)
    g_level = np.maximum(np.ceil(np.sqrt((gvecs ** 2).sum(axis=1))
                                 / params.R_n - 1e-12).astype(np.int32), 0)
    V = vectors[idx]
    chunk = max(1, int(3e6 // max(len(ball), 1)))
    for s in range(0, len(idx), chunk):
        sub = V[s:s + chunk]
        shifted = (sub[:, None, :] - gvecs[None, :, :]).reshape(-1, 2)
        hit = member_fn(shifted).reshape(len(sub), len(ball))
        lv = np.where(hit, g_level[None, :], _BIG_LEVEL).min(axis=1)
        levels[idx[s:s + chunk]] = lv
    return levels


def projection_scheme(k, params, rho, basis):
    """Block structure {P^0_j, P^l_j, Q} over the modes of a plane-wave basis.

    Pre: the basis cutoff covers the annulus plus (7 M~ + 1) R_n of padding.
    """
    need = (math.sqrt(params.annulus_window(rho)[1]) +
            (7 * params.m_tilde + 1) * params.R_n) ** 2
    if basis.cutoff < need * (1 - 1e-12):
        raise CutoffTooSmall(f"scheme needs E_max >= {need:.6g}, "
                             f"basis has {basis.cutoff:.6g}")
    mt = params.m_tilde
    vectors = basis.vectors
    n = len(vectors)
    claimed = np.zeros(n, dtype=bool)
    overlap = 0
    blocks = [None] * (params.L + 1)
    pad = (7 * mt + 1) * params.R_n
    for l in range(params.L):
        sets = StripSets(params, l, rho)
        c = sets.coords(vectors)
        cand = (np.abs(c[:, 1]) <= sets.bounds.a + pad) & \
            (c[:, 0] > sets.bounds.p_minus - pad) & \
            (c[:, 0] < sets.bounds.p_plus + pad)
        lev = _membership_levels(params, vectors,
                                 lambda pts, s=sets: s.xi5(pts), 7 * mt, cand)
        fam = [lev <= 6 * mt]
        for j in range(1, mt + 1):
            fam.append(lev == 6 * mt + j)
        fam_any = lev <= 7 * mt
        overlap += int((fam_any & claimed).sum())
        blocks[l + 1] = [np.flatnonzero(sel & ~claimed) for sel in fam]
        claimed |= fam_any

    # nonresonant family: B is the annulus minus all strip sets
    def in_B(pts):
        out = in_annulus(params, rho, pts)
        if not out.any():
            return out
        sub = np.flatnonzero(out)
        keep = np.ones(len(sub), dtype=bool)
        for l in range(params.L):
            keep &= ~StripSets(params, l, rho).xi5(pts[sub])
        out[sub] = keep
        return out

    lo, hi = params.annulus_window(rho)
    pad0 = (mt + 1) * params.R_n
    sq = (vectors ** 2).sum(axis=1)
    cand0 = (sq >= max(math.sqrt(lo) - pad0, 0.0) ** 2) & \
        (sq <= (math.sqrt(hi) + pad0) ** 2)
    lev0 = _membership_levels(params, vectors, in_B, mt, cand0)
    fam0 = [lev0 == j for j in range(0, mt + 1)]
    fam_any = lev0 <= mt
    overlap += int((fam_any & claimed).sum())
    blocks[0] = [np.flatnonzero(sel & ~claimed) for sel in fam0]
    claimed |= fam_any
    q = np.flatnonzero(~claimed)
    return ProjectionScheme(blocks=blocks, q_indices=q, overlap_count=overlap)


# ---------------------------------------------------------------------------
# census

def sample_annulus(params, rho, n, seed):
    """Area-uniform sample of the annulus: |xi|^2 uniform in the window."""
    rng = np.random.default_rng(seed)
    lo, hi = params.annulus_window(rho)
    r = np.sqrt(rng.uniform(lo, hi, size=n))
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1), rng


def _line_reps(params):
    """One representative per strip line, with the indices sharing it."""
    reps = {}
    for l, th in enumerate(params.directions_int):
        key = tuple(th) if (th[0], th[1]) > (-th[0], -th[1]) else \
            (-int(th[0]), -int(th[1]))
        reps.setdefault(key, []).append(l)
    return reps


def zone_census(params, rho, n_samples, seed=0):
    """Sampled verification of the zone lemmas; returns a report dict.

    Measured constants are reported for the quantitative lemmas; the set
    inclusion lemmas contribute to `violations` (which acceptance requires
    empty). Points within the boundary tolerance are excluded.
    """
    pts, _ = sample_annulus(params, rho, n_samples, seed)
    kind, lab, boundary = classify_many(pts, params, rho)
    ok = ~boundary
    report = {
        "rho": rho, "rho_n": params.rho_n, "R_n": params.R_n,
        "M": params.M, "M_tilde": params.m_tilde, "v": params.v,
        "L": params.L, "direction_radius": params.direction_radius,
        "n_samples": int(n_samples),
        "n_boundary": int(boundary.sum()),
        "counts": {"resonant": int((kind[ok] == RESONANT).sum()),
                   "nonresonant": int((kind[ok] == NONRESONANT).sum())},
        "violations": [],
    }
    mt = params.m_tilde
    lat = params.lattice
    vecs_dir = lat.dual_vector(params.directions_int)

    # lem:Xi9 -- Xi1(theta) subset Xi5(theta) on samples
    xi9_checked = 0
    for l in range(params.L):
        sets = StripSets(params, l, rho)
        in1 = sets.xi1(pts) & ok
        xi9_checked += int(in1.sum())
        bad = in1 & ~((kind == RESONANT) & (lab == l))
        for i in np.flatnonzero(bad):
            report["violations"].append(
                {"lemma": "Xi9", "l": l, "point": pts[i].tolist()})
    report["xi9_checked"] = xi9_checked

    # lem:Xi1 -- xi outside Lambda(theta), g = t*theta in Theta'_{6M~}:
    # | |xi+g|^2 - |xi|^2 | >= c * rho_n^(1/3); c measured, violation iff 0.
    xi1_min = math.inf
    sq = (pts ** 2).sum(axis=1)
    for l in range(params.L):
        sets = StripSets(params, l, rho)
        c = sets.coords(pts)
        outside = (np.abs(c[:, 1]) >= sets.bounds.a) & ok
        if not outside.any():
            continue
        tl = sets.theta_len
        tmax = int(math.floor(6 * mt * params.R_n / tl + 1e-12))
        x2 = c[outside, 1]
        for t in range(1, tmax + 1):
            for s in (1.0, -1.0):
                diff = np.abs(2.0 * s * t * tl * x2 + (t * tl) ** 2)
                xi1_min = min(xi1_min, float(diff.min()))
    report["xi1_constant"] = xi1_min / params.rho_n ** (1.0 / 3.0)
    if xi1_min <= 0.0:
        report["violations"].append({"lemma": "Xi1", "detail": "exact degeneracy"})

    # lem:Xi2 / cor:Xi3 -- |xi1 - rho| <= C rho^(-1/3) on Xi2 samples
    xi2_dev = 0.0
    for l in range(params.L):
        sets = StripSets(params, l, rho)
        m = sets.xi2(pts) & ok
        if m.any():
            xi2_dev = max(xi2_dev,
                          float(np.abs(sets.coords(pts[m])[:, 0] - rho).max()))
    report["xi2_constant"] = xi2_dev * rho ** (1.0 / 3.0)

    # lem:Xi4 -- closed-form extremal gaps
    xi4_p = max(strip_bounds(params, l, rho).p_tilde_minus -
                strip_bounds(params, l, rho).p_minus for l in range(params.L))
    xi4_a = max(strip_bounds(params, l, rho).a_tilde -
                strip_bounds(params, l, rho).a for l in range(params.L))
    report["xi4_p_constant"] = xi4_p * rho
    report["xi4_a_constant"] = xi4_a * rho ** (1.0 / 3.0)

    # lem:Xi5 / lem:Xi7 / lem:Xi8 / lem:Xi10 -- lattice translate scans
    ball15 = params.theta_ball(15 * mt, exclude_zero=True)
    gvecs15 = lat.dual_vector(ball15)
    lo, hi = params.annulus_window(rho)
    xi5_min = math.inf
    xi5_checked = xi7_checked = xi8_checked = 0
    strip_sets = [StripSets(params, l, rho) for l in range(params.L)]
    for l in range(params.L):
        sets = strip_sets[l]
        in34 = (sets.xi3(pts) | sets.xi4(pts)) & ok
        if not in34.any():
            continue
        in5 = sets.xi5(pts) & ok
        theta = params.directions_int[l]
        cross = ball15[:, 0] * theta[1] - ball15[:, 1] * theta[0]
        indep = cross != 0
        P = pts[in34]
        xi5_checked += len(P)
        chunk = max(1, int(4e6 // max(len(ball15), 1)))
        res5_idx = np.flatnonzero(in5[in34])
        src_idx = np.flatnonzero(in34)
        for s in range(0, len(P), chunk):
            sub = P[s:s + chunk]
            sq_shift = ((sub[:, None, :] + gvecs15[None, :, :]) ** 2).sum(axis=2)
            dist = np.abs(sq_shift - rho * rho)
            if indep.any():
                xi5_min = min(xi5_min, float(dist[:, indep].min()))
            # translates that re-enter the annulus
            reenter = (sq_shift >= lo) & (sq_shift <= hi)
            rows, cols = np.nonzero(reenter)
            for r, cidx in zip(rows, cols):
                i_global = src_idx[s + r]
                if not in5[i_global]:
                    continue  # Xi7/Xi8 hypotheses need xi in Xi5
                xi7_checked += 1
                target = pts[i_global] + gvecs15[cidx]
                t_arr = target[None, :]
                if indep[cidx] and not strip_sets[l].xi5(t_arr)[0]:
                    report["violations"].append(
                        {"lemma": "Xi7", "l": l, "point": pts[i_global].tolist(),
                         "g": ball15[cidx].tolist()})
                for l2 in range(params.L):
                    if l2 == l:
                        continue
                    xi8_checked += 1
                    if strip_sets[l2].xi5(t_arr)[0]:
                        report["violations"].append(
                            {"lemma": "Xi8", "l1": l, "l2": l2,
                             "point": pts[i_global].tolist(),
                             "g": ball15[cidx].tolist()})
    report["xi5_constant"] = (xi5_min / rho ** 0.8) if xi5_min < math.inf else None
    report["xi5_checked"] = xi5_checked
    report["xi7_checked"] = xi7_checked
    report["xi8_checked"] = xi8_checked
    if xi5_min <= 0.0:
        report["violations"].append({"lemma": "Xi5", "detail": "translate on circle"})

    # eq2 of lem:Xi10 -- (Xi0(B) + Theta_{M~}) does not meet Xi0(theta_j):
    # no B-sample reaches Xi5(theta_j) within Theta_{9 M~}
    ball9 = params.theta_ball(9 * mt, exclude_zero=True)
    gvecs9 = lat.dual_vector(ball9)
    inB = (kind == NONRESONANT) & ok
    PB = pts[inB]
    xi10_checked = 0
    chunk = max(1, int(4e6 // max(len(ball9), 1)))
    for s in range(0, len(PB), chunk):
        sub = PB[s:s + chunk]
        sq_shift = ((sub[:, None, :] + gvecs9[None, :, :]) ** 2).sum(axis=2)
        reenter = (sq_shift >= lo) & (sq_shift <= hi)
        rows, cols = np.nonzero(reenter)
        xi10_checked += len(rows)
        for r, cidx in zip(rows, cols):
            target = (sub[r] + gvecs9[cidx])[None, :]
            for l2 in range(params.L):
                if strip_sets[l2].xi5(target)[0]:
                    report["violations"].append(
                        {"lemma": "Xi10", "l": l2,
                         "point": sub[r].tolist(), "g": ball9[cidx].tolist()})
    report["xi10_checked"] = xi10_checked

    # corollary angle1 constant over the direction list
    if params.L >= 4:
        angs = np.sort(np.mod(np.arctan2(vecs_dir[:, 1], vecs_dir[:, 0]), math.pi))
        gaps = np.diff(np.concatenate([angs, [angs[0] + math.pi]]))
        gaps = gaps[gaps > 1e-12]
        report["angle_constant"] = float(np.sin(gaps.min())) * \
            (6 * mt * params.R_n) ** 2
    return report
