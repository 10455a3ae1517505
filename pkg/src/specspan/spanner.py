"""Spectral spanner construction and verification.

The greedy build repeatedly finds a vector whose squared projection along some
direction beats every chosen vector by a factor alpha, then adds the input
vector with the largest projection along that direction.  Verification covers
the per-direction (weak) property, per-vector domination certificates obtained
by Frank-Wolfe over distributions on the spanner, and the k-order variant that
mixes a volume-greedy stage with a spanner built in the projected frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .lp import DominationQuery, DominationResult, domination_check
from .vectorset import VectorSet, as_matrix, as_vector_set

ZERO_NORM_REL = 1e-12        # ingestion: drop vectors this far below max norm
SCREEN_SLACK = 1e-6          # safety margin of the l1 coverage pre-screen
SPAN_RESIDUAL_REL = 1e-9     # in-span test for the pre-screen
FW_MAX_ITERS = 2000
FW_REL_DECREASE = 1e-10
FW_REFRESH_EVERY = 64        # rebuild the maintained inverse this often
CERT_SLACK = 1e-6            # certificate passes when delta >= 1/alpha - this
NOT_IN_SPAN_REL = 1e-7
DOMINANCE_TOL = 1e-9

STAGE_VOLUME = "volume_greedy"
STAGE_DSPANNER = "d_spanner"


class NotInSpan(Exception):
    """Target vector has a significant component outside span(U)."""


@dataclass
class SpannerParams:
    """Build parameters; alpha defaults to alpha_scale * dim * (1 + ln dim)^2."""

    k: int | None = None
    alpha: float | None = None
    alpha_scale: float = 1.0
    m_override: int | None = None

    def resolve_alpha(self, dim: int) -> float:
        if self.alpha is not None:
            if self.alpha < 1.0:
                raise ValueError("alpha must be >= 1")
            return float(self.alpha)
        return max(1.0, self.alpha_scale * dim * (1.0 + math.log(max(dim, 1))) ** 2)

    def resolve_m(self, k: int, dim: int) -> int:
        if self.m_override is not None:
            return int(self.m_override)
        # 2k(1 + ceil(log2(k+1))) keeps m^(2k/m) <= 4; bit_length is the exact ceil
        return min(dim, 2 * k * (1 + k.bit_length()))


@dataclass
class Spanner:
    indices: list[int]                     # original labels, selection order
    vectors: np.ndarray                    # aligned (size, d) selected vectors
    stage_tags: list[str]
    witnesses: list[np.ndarray | None]     # aligned; None for volume picks
    params: SpannerParams
    alpha: float                           # alpha used by the d-spanner stage
    dspanner_vectors: np.ndarray           # full d-stage pick trace
    dspanner_witnesses: np.ndarray         # aligned witnesses (ambient frame)

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass
class CoverageCertificate:
    """Distribution over spanner vectors dominating one input vector."""

    vector_index: int
    support: list[tuple[int, float]]       # (spanner label, probability)
    delta: float
    status: str = "pass"                   # "pass" | "inconclusive"

    def passes(self, alpha: float) -> bool:
        return self.delta >= 1.0 / alpha - CERT_SLACK


def _ingest(vs) -> tuple[np.ndarray, np.ndarray]:
    """Drop (near-)zero vectors and exact duplicates, keeping lowest labels."""
    v = as_vector_set(vs)
    if len(v) == 0:
        raise ValueError("empty vector set")
    x = v.vectors
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    max_norm = float(norms.max())
    if max_norm == 0.0:
        raise ValueError("vector set is all zeros")
    keep = norms > ZERO_NORM_REL * max_norm
    seen: dict[bytes, int] = {}
    positions: list[int] = []
    for i in np.flatnonzero(keep):
        key = x[i].tobytes()
        if key not in seen:
            seen[key] = i
            positions.append(int(i))
    return x[positions], v.labels[positions]


def _coverage_screen(x: np.ndarray, u: np.ndarray, alpha: float) -> np.ndarray:
    """Rows of x certified covered by a cheap l1-representation bound.

    By LP duality t*(v, U) = 1 / min{sum |c| : sum c_u u = v}, so any
    representation with small enough l1 norm certifies coverage without
    touching the LP.  Sound but deliberately conservative near the threshold.
    """
    n = x.shape[0]
    if len(u) == 0:
        return np.zeros(n, dtype=bool)
    coeffs, resid = linalg.min_l2_coefficients(u, x)
    x_norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    r_norms = np.sqrt(np.einsum("ij,ij->i", resid, resid))
    in_span = r_norms <= SPAN_RESIDUAL_REL * np.maximum(x_norms, 1e-300)
    l1 = np.sum(np.abs(coeffs), axis=1)
    return in_span & (l1 <= math.sqrt(alpha) * (1.0 - SCREEN_SLACK))


def build_d_spanner(vs, alpha: float, max_size: int | None = None,
                    params: SpannerParams | None = None) -> Spanner:
    """Greedy spectral spanner for the full-dimensional order.

    Scans the input from index 0, adds argmax_u <u, x>^2 for the witness
    direction x of the first uncovered vector, and rescans until every vector
    is covered.  Coverage is monotone in U, so verdicts are cached; a cheap
    dual-feasibility screen certifies most covered vectors without an LP.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    x, labels = _ingest(vs)
    n, d = x.shape
    covered = np.zeros(n, dtype=bool)
    picks: list[int] = []
    wits: list[np.ndarray] = []
    # witness cache: position -> (x direction, margin, #picks checked against)
    cache: dict[int, tuple[np.ndarray, float, int]] = {}

    def check(i: int) -> DominationResult:
        ent = cache.pop(i, None)
        if ent is not None:
            wx, margin, upto = ent
            news = x[picks[upto:]]
            if len(news) == 0 or float(np.max(np.abs(news @ wx))) <= margin:
                cache[i] = (wx, margin, len(picks))
                return DominationResult("witness", margin, wx)
        res = domination_check(DominationQuery(x[i], x[picks], alpha))
        if not res.covered:
            cache[i] = (res.witness, res.margin, len(picks))
        return res

    while True:
        if max_size is not None and len(picks) >= max_size:
            break
        screen = _coverage_screen(x, x[picks], alpha)
        covered |= screen
        progressed = False
        for i in range(n):
            if covered[i]:
                continue
            res = check(i)
            if res.covered:
                covered[i] = True
                continue
            wx = res.witness
            j = int(np.argmax((x @ wx) ** 2))
            picks.append(j)
            wits.append(wx)
            covered[j] = True  # a member of U always has t* >= 1 >= 1/sqrt(alpha)
            cache.pop(j, None)
            progressed = True
            break
        if not progressed:
            break

    chosen = [int(labels[j]) for j in picks]
    sp = Spanner(
        indices=chosen,
        vectors=x[picks].copy() if picks else np.zeros((0, d)),
        stage_tags=[STAGE_DSPANNER] * len(picks),
        witnesses=[w.copy() for w in wits],
        params=params or SpannerParams(k=d, alpha=alpha),
        alpha=float(alpha),
        dspanner_vectors=x[picks].copy() if picks else np.zeros((0, d)),
        dspanner_witnesses=np.array(wits) if wits else np.zeros((0, d)),
    )
    ok, worst = check_witness_dominance(sp)
    if not ok:
        raise RuntimeError(f"witness diagonal dominance violated (slack {worst:.3e})")
    return sp


def check_witness_dominance(sp: Spanner, tol: float = DOMINANCE_TOL) -> tuple[bool, float]:
    """|<u_j, x_i>| <= <u_i, x_i>/sqrt(alpha) for all j < i over d-stage picks."""
    u = sp.dspanner_vectors
    xs = sp.dspanner_witnesses
    worst = -math.inf
    ok = True
    sqrt_a = math.sqrt(sp.alpha)
    for i in range(len(u)):
        xi = xs[i]
        diag = float(np.dot(u[i], xi))
        if diag < 0.0:
            xi = -xi
            diag = -diag
        bound = diag / sqrt_a
        if i:
            off = float(np.max(np.abs(u[:i] @ xi)))
            slack = off - bound
            worst = max(worst, slack)
            if slack > tol * max(1.0, bound):
                ok = False
    return ok, (worst if worst > -math.inf else 0.0)


def verify_weak(vs, sp, alpha: float) -> tuple[bool, tuple[int, np.ndarray] | None]:
    """Check every input vector is dominated in every direction.

    Returns (True, None) or (False, (label, x)) for the first violating vector
    and its witness direction.
    """
    v = as_vector_set(vs)
    u = sp.vectors if isinstance(sp, Spanner) else as_matrix(sp)
    x = v.vectors
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    max_norm = float(norms.max()) if len(x) else 0.0
    nontrivial = norms > ZERO_NORM_REL * max_norm
    screen = _coverage_screen(x, u, alpha)
    for i in range(len(x)):
        if not nontrivial[i] or screen[i]:
            continue
        res = domination_check(DominationQuery(x[i], u, alpha))
        if not res.covered:
            return False, (int(v.labels[i]), res.witness)
    return True, None


def _restricted_frame(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal basis of span(U) plus coordinates of U rows and v in it."""
    basis = linalg.gram_schmidt(u)
    ut = u @ basis.T
    vt = basis @ v
    resid = v - basis.T @ vt
    if linalg.vec_norm(resid) > NOT_IN_SPAN_REL * max(linalg.vec_norm(v), 1e-300):
        raise NotInSpan("vector has a component outside span(U)")
    return basis, ut, vt


def strong_certificate(v, spanner_vectors, alpha: float,
                       vector_index: int = -1,
                       labels=None) -> CoverageCertificate:
    """Best-found distribution mu on U with delta * vv^T <= E_mu[uu^T].

    Frank-Wolfe on the simplex minimizing g(p) = v^T M(p)^+ v from the uniform
    start (which spans span(U), keeping M invertible on it throughout).  The
    final delta is evaluated through the eigen-cutoff pseudo-inverse.
    """
    u = as_matrix(spanner_vectors)
    if len(u) == 0:
        raise NotInSpan("empty spanner cannot certify anything")
    v = np.asarray(v, dtype=np.float64)
    if labels is None:
        labels = list(range(len(u)))
    nrm = linalg.vec_norm(v)
    if nrm <= 1e-300:
        p = np.full(len(u), 1.0 / len(u))
        return CoverageCertificate(vector_index,
                                   list(zip(labels, p.tolist())), 1.0, "pass")
    for j in range(len(u)):  # exact member: point mass certifies delta = 1
        if np.array_equal(u[j], v):
            support = [(labels[j], 1.0)]
            return CoverageCertificate(vector_index, support, 1.0, "pass")

    _, ut, vt = _restricted_frame(u, v)
    m = len(u)
    p = np.full(m, 1.0 / m)
    mat = (ut.T * p) @ ut
    minv = linalg.inv_spd(mat)
    w = minv @ vt
    g = float(np.dot(vt, w))
    best_g, best_p = g, p.copy()
    for t in range(1, FW_MAX_ITERS + 1):
        scores = (ut @ w) ** 2
        q = int(np.argmax(scores))
        gamma = 2.0 / (t + 2.0)
        b = ut[q]
        ainv = minv / (1.0 - gamma)
        ab = ainv @ b
        minv = ainv - np.outer(ab, ab) * (gamma / (1.0 + gamma * float(np.dot(b, ab))))
        mat = (1.0 - gamma) * mat + gamma * np.outer(b, b)
        p *= 1.0 - gamma
        p[q] += gamma
        if t % FW_REFRESH_EVERY == 0:
            minv = linalg.inv_spd(mat)
        w = minv @ vt
        g_new = float(np.dot(vt, w))
        if g_new < best_g:
            best_g = g_new
            best_p = p.copy()
        decrease = g - g_new
        g = g_new
        if 0.0 <= decrease < FW_REL_DECREASE * max(abs(g), 1e-300):
            break
    best_p = best_p / float(np.sum(best_p))
    m_full = (u.T * best_p) @ u
    quad = linalg.pinv_quadform(m_full, v)
    delta = min(1.0, 1.0 / quad) if quad > 0.0 else 1.0
    cert = CoverageCertificate(
        vector_index,
        list(zip(labels, best_p.tolist())),
        float(delta),
        "pass" if delta >= 1.0 / alpha - CERT_SLACK else "inconclusive",
    )
    return cert


def certify_all(vs, sp: Spanner, alpha: float) -> list[CoverageCertificate]:
    v = as_vector_set(vs)
    return [
        strong_certificate(v.vectors[i], sp.vectors, alpha,
                           vector_index=int(v.labels[i]), labels=sp.indices)
        for i in range(len(v))
    ]


def volume_greedy(vs, m: int, params: SpannerParams | None = None) -> Spanner:
    """Greedy volume maximization: repeatedly take the largest residual norm.

    Ties break to the lowest index at relative tolerance 1e-9; stops early when
    the best residual norm falls to 1e-10 of the largest input norm (rank).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    v = as_vector_set(vs)
    x = v.vectors.copy()
    n, d = x.shape
    norms0 = np.sqrt(np.einsum("ij,ij->i", x, x))
    max_norm = float(norms0.max()) if n else 0.0
    resid = x.copy()
    picks: list[int] = []
    for _ in range(min(m, n)):
        rn = np.sqrt(np.einsum("ij,ij->i", resid, resid))
        best = float(rn.max())
        if best <= 1e-10 * max_norm:
            break
        j = int(np.argmax(rn >= best * (1.0 - 1e-9)))
        picks.append(j)
        b = resid[j] / float(rn[j])
        resid -= np.outer(resid @ b, b)
    return Spanner(
        indices=[int(v.labels[j]) for j in picks],
        vectors=v.vectors[picks].copy(),
        stage_tags=[STAGE_VOLUME] * len(picks),
        witnesses=[None] * len(picks),
        params=params or SpannerParams(),
        alpha=1.0,
        dspanner_vectors=np.zeros((0, d)),
        dspanner_witnesses=np.zeros((0, d)),
    )


def build_k_spanner(vs, k: int, params: SpannerParams | None = None,
                    max_size: int | None = None) -> Spanner:
    """Spanner for the k-order: volume-greedy stage plus a projected spanner.

    With m = min(d, ceil(2k(1 + ceil(log2(k+1))))), runs volume_greedy for m
    picks, projects the input onto their span, and builds a d-spanner in that
    frame.  Degenerates to a plain d-spanner when m <= 2k or m >= d (then
    A <= B already implies A <=_k B).
    """
    v = as_vector_set(vs)
    d = v.dim
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    params = params or SpannerParams(k=k)
    m = params.resolve_m(k, d)
    if m <= 2 * k or m >= d:
        alpha = params.resolve_alpha(d)
        return build_d_spanner(v, alpha, max_size=max_size, params=params)

    vol = volume_greedy(v, m, params=params)
    basis = linalg.gram_schmidt(vol.vectors)
    r = basis.shape[0]
    alpha = params.resolve_alpha(r)
    proj = VectorSet(v.vectors @ basis.T, v.labels)
    sub_cap = None if max_size is None else max(0, max_size - vol.size)
    if sub_cap == 0:
        sub = None
    else:
        sub = build_d_spanner(proj, alpha, max_size=sub_cap, params=params)

    indices = list(vol.indices)
    tags = list(vol.stage_tags)
    wits: list[np.ndarray | None] = [None] * vol.size
    vectors = [row for row in vol.vectors]
    trace_vecs: list[np.ndarray] = []
    trace_wits: list[np.ndarray] = []
    if sub is not None:
        label_to_pos = {int(lbl): i for i, lbl in enumerate(v.labels)}
        for lbl, wx in zip(sub.indices, sub.witnesses):
            lifted = basis.T @ wx
            pos = label_to_pos[int(lbl)]
            trace_vecs.append(v.vectors[pos])
            trace_wits.append(lifted)
            if lbl in indices:
                continue
            indices.append(int(lbl))
            tags.append(STAGE_DSPANNER)
            wits.append(lifted)
            vectors.append(v.vectors[pos])
    return Spanner(
        indices=indices,
        vectors=np.array(vectors),
        stage_tags=tags,
        witnesses=wits,
        params=params,
        alpha=alpha,
        dspanner_vectors=np.array(trace_vecs) if trace_vecs else np.zeros((0, d)),
        dspanner_witnesses=np.array(trace_wits) if trace_wits else np.zeros((0, d)),
    )


def projection_domination_holds(vs, m: int, k: int, tol: float = 1e-7) -> bool:
    """Orthogonal-component bound behind the volume-greedy stage.

    For U from volume_greedy(V, m) with m > 2k, every v satisfies
    proj_perp(v) proj_perp(v)^T <=_k 2 m^(2k/m) * mean_u uu^T.
    """
    v = as_vector_set(vs)
    vol = volume_greedy(v, m)
    mm = vol.size
    if mm == 0:
        return False
    basis = linalg.gram_schmidt(vol.vectors)
    gamma = 2.0 * mm ** (2.0 * k / mm)
    mean_outer = vol.vectors.T @ vol.vectors / mm
    rhs = gamma * mean_outer
    for row in v.vectors:
        perp = linalg.project_orth(row, basis)
        if not linalg.preceq_k(np.outer(perp, perp), rhs, k, tol):
            return False
    return True


def verify_k_spanner(vs, sp: Spanner, k: int, alpha: float,
                     tol: float = 1e-7) -> bool:
    """Check vv^T <=_k alpha * E_mu[uu^T] with the explicit mixture.

    The distribution mirrors the construction: a uniform part over the
    volume-greedy picks handles the component orthogonal to their span, a
    domination certificate in the projected frame handles the rest, and the
    two are mixed with the constants the chain of inequalities dictates.
    """
    v = as_vector_set(vs)
    d = v.dim
    vol_pos = [i for i, t in enumerate(sp.stage_tags) if t == STAGE_VOLUME]
    dsp_vecs = sp.dspanner_vectors

    if not vol_pos:  # degenerate build: certificates alone settle it
        for i in range(len(v)):
            vec = v.vectors[i]
            if linalg.vec_norm(vec) <= 1e-300:
                continue
            try:
                cert = strong_certificate(vec, sp.vectors, alpha)
            except NotInSpan:
                return False
            mix = np.zeros((d, d))
            for pos, prob in cert.support:  # default labels are positions
                mix += prob * np.outer(sp.vectors[pos], sp.vectors[pos])
            if not linalg.preceq_k(np.outer(vec, vec), alpha * mix, k, tol):
                return False
        return True

    u0 = sp.vectors[vol_pos]
    m = len(vol_pos)
    basis = linalg.gram_schmidt(u0)
    gamma = 2.0 * m ** (2.0 * k / m)
    mean_u0 = u0.T @ u0 / m
    if len(dsp_vecs) == 0:
        return False
    w_proj = dsp_vecs @ basis.T

    for i in range(len(v)):
        vec = v.vectors[i]
        nrm = linalg.vec_norm(vec)
        if nrm <= 1e-300:
            continue
        vpar_t = basis @ vec
        if linalg.vec_norm(vpar_t) <= 1e-12 * nrm:
            mix = mean_u0
        else:
            try:
                cert = strong_certificate(vpar_t, w_proj, alpha)
            except NotInSpan:
                return False
            delta = max(cert.delta, 1e-12)
            e_nu = np.zeros((d, d))
            for pos, prob in cert.support:  # default labels are positions
                e_nu += prob * np.outer(dsp_vecs[pos], dsp_vecs[pos])
            c1 = 2.0 * gamma * (1.0 + 2.0 / delta)
            c2 = 4.0 / delta
            total = c1 + c2
            mix = (c1 * mean_u0 + c2 * e_nu) / total
        if not linalg.preceq_k(np.outer(vec, vec), alpha * mix, k, tol):
            return False
    return True
