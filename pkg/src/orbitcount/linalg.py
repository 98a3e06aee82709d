"""Matrix kernels for SL(d, R): norms, spectra, projections, proximality.

Every function takes plain ``numpy`` arrays.  Projective points and
covectors are unit vectors whose first nonzero coordinate is positive, so
equality of lines is equality of representatives; :func:`normalize_projective`
produces that normal form.  Cartan and Jordan projections are returned in
the closed positive chamber (coordinates non-increasing, summing to zero
for unimodular input).
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import DegeneratePair, NotProximal, SingularInput

NORM_KINDS = ("euclidean", "l1", "linf")

#: dual vector norm used for covectors, per primal norm kind
DUAL_NORM_KIND = {"euclidean": "euclidean", "l1": "linf", "linf": "l1"}

_DET_FLOOR = 1e-12
_PAIRING_FLOOR = 1e-14
_SAMPLE_SEED = 20240817


def unimodularize(m):
    """Rescale a square matrix so |det| = 1.

    Parameters
    ----------
    m : (d, d) array_like
        Invertible matrix.

    Returns
    -------
    (d, d) ndarray
        ``m / |det m|**(1/d)``.  The sign of the determinant is preserved.

    Raises
    ------
    SingularInput
        If ``|det m| < 1e-12``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SingularInput("expected a square matrix, got shape %s" % (m.shape,))
    det = np.linalg.det(m)
    if abs(det) < _DET_FLOOR:
        raise SingularInput("determinant %.3e below floor %.0e" % (det, _DET_FLOOR))
    return m / abs(det) ** (1.0 / m.shape[0])


def vector_norm(v, norm_kind="euclidean"):
    """Vector norm of the requested kind (euclidean, l1, linf)."""
    if norm_kind == "euclidean":
        return float(np.linalg.norm(v))
    if norm_kind == "l1":
        return float(np.abs(v).sum())
    if norm_kind == "linf":
        return float(np.abs(v).max())
    raise ValueError("unknown norm kind %r" % (norm_kind,))


def operator_norm_log(g, norm_kind="euclidean"):
    """log of the operator norm of ``g`` induced by the chosen vector norm.

    The euclidean operator norm is the largest singular value; the l1 norm
    is the maximum absolute column sum and linf the maximum absolute row
    sum.  All three dominate the spectral radius, so
    ``operator_norm_log(g) >= spectral_radius_log(g)`` exactly.
    """
    g = np.asarray(g, dtype=float)
    if norm_kind == "euclidean":
        s = np.linalg.svd(g, compute_uv=False)
        return float(np.log(s[0]))
    if norm_kind == "l1":
        return float(np.log(np.abs(g).sum(axis=0).max()))
    if norm_kind == "linf":
        return float(np.log(np.abs(g).sum(axis=1).max()))
    raise ValueError("unknown norm kind %r" % (norm_kind,))


def _top_modulus_log_2x2(g):
    # characteristic roots from trace and determinant: the trace stays
    # exact in the formed entries while a dense eigensolver loses the top
    # eigenvalue of a huge-norm product to its eigenvector conditioning.
    # The computed determinant of such a product is rounding noise, so it
    # snaps to the unimodular precondition past the same floor as
    # _log_abs_det.
    tr = g[0, 0] + g[1, 1]
    det = np.linalg.det(g)
    floor = 40.0 * np.finfo(float).eps * max(1.0, np.abs(g).max()) ** 2
    if not np.isfinite(det) or abs(det) <= floor:
        det = 1.0
    elif abs(abs(det) - 1.0) <= floor:
        det = 1.0 if det > 0 else -1.0
    disc = tr * tr - 4.0 * det
    if disc <= 0.0:
        return 0.5 * float(np.log(det))  # complex pair of modulus sqrt(det)
    return float(np.log(0.5 * (abs(tr) + np.sqrt(disc))))


def spectral_radius_log(g):
    """log of the largest eigenvalue modulus of ``g``.

    For a proximal matrix this is the logarithm of the top eigenvalue and
    equals the first Jordan projection coordinate.
    """
    g = np.asarray(g, dtype=float)
    if g.shape == (2, 2):
        return _top_modulus_log_2x2(g)
    w = np.linalg.eigvals(g)
    return float(np.log(np.abs(w).max()))


def exterior_power(g, k):
    """k-th exterior power of ``g`` in the lexicographic minor basis.

    Multiplicative by Cauchy-Binet, and its top singular value (resp.
    spectral radius) is the product of the k largest singular values
    (moduli) of ``g``.  That product is what makes long products tractable:
    it sits at the compound's own norm scale, so it comes out with full
    relative accuracy even when the small singular values of ``g`` itself
    are far below the rounding floor of a direct SVD.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if not 1 <= k <= d:
        raise ValueError("exterior power order %d outside 1..%d" % (k, d))
    if k == 1:
        return g.copy()
    idx = list(combinations(range(d), k))
    out = np.empty((len(idx), len(idx)))
    for i, rows in enumerate(idx):
        sub = g[rows, :]
        for j, cols in enumerate(idx):
            out[i, j] = np.linalg.det(sub[:, cols])
    return out


def _log_abs_det(g):
    # the determinant of a huge-norm product is swamped by rounding at
    # absolute scale eps*|g|^d; below that floor, or within it of the
    # unimodular value 1, trust the precondition instead of the noise
    d = g.shape[0]
    adet = abs(np.linalg.det(g))
    floor = 10.0 * d * d * np.finfo(float).eps * max(1.0, np.abs(g).max()) ** d
    if not np.isfinite(adet) or adet <= floor or abs(adet - 1.0) <= floor:
        return 0.0
    return float(np.log(adet))


def cartan_projection(g):
    """Cartan projection a(g): log singular values, non-increasing.

    Computed as successive differences of the top singular values of the
    exterior powers, so every coordinate carries relative accuracy; a
    direct SVD loses the small singular values of badly conditioned
    products to roundoff at scale ``eps * sigma_1``.  For unimodular ``g``
    the coordinates sum to zero up to rounding and the first coordinate is
    ``operator_norm_log(g, "euclidean")``.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    S = np.empty(d + 1)
    S[0] = 0.0
    for k in range(1, d):
        top = np.linalg.svd(exterior_power(g, k), compute_uv=False)[0]
        S[k] = np.log(top)
    S[d] = _log_abs_det(g)
    return np.diff(S)


def jordan_projection(g):
    """Jordan projection lambda(g): log eigenvalue moduli, non-increasing.

    Same exterior-power scheme as :func:`cartan_projection`: the spectral
    radius of the k-th compound is the product of the k largest moduli.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    T = np.empty(d + 1)
    T[0] = 0.0
    for k in range(1, d):
        gk = exterior_power(g, k)
        if gk.shape == (2, 2):
            T[k] = _top_modulus_log_2x2(gk)
        else:
            T[k] = np.log(np.abs(np.linalg.eigvals(gk)).max())
    T[d] = _log_abs_det(g)
    return np.diff(T)


def opposition_involution(v):
    """Opposition involution on Cartan vectors: negate and reverse.

    Satisfies ``opposition_involution(jordan_projection(g))
    == jordan_projection(inv(g))`` and preserves dominance.
    """
    v = np.asarray(v, dtype=float)
    return -v[::-1]


def normalize_projective(v):
    """Normal form of a projective point or covector.

    Unit euclidean length, first coordinate of modulus above 1e-12 made
    positive.  Two representatives of the same line map to equal arrays.
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < _DET_FLOOR:
        raise ValueError("cannot projectivize the zero vector")
    v = v / n
    for x in v:
        if abs(x) > 1e-12:
            if x < 0:
                v = -v
            break
    return v


def projective_distance(u, v):
    """Angle between the lines spanned by ``u`` and ``v``, in [0, pi/2]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = abs(float(u @ v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.arccos(min(1.0, c)))


def hyperplane_distance(theta, v):
    """Angle from the line of ``v`` to the hyperplane ker(theta)."""
    theta = np.asarray(theta, dtype=float)
    v = np.asarray(v, dtype=float)
    s = abs(float(theta @ v)) / (np.linalg.norm(theta) * np.linalg.norm(v))
    return float(np.arcsin(min(1.0, s)))


def is_dominant(v, tol=1e-9):
    """True iff the coordinates of ``v`` are non-increasing within tol."""
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.diff(v) <= tol))


def _real_eigenvector(vec):
    # simple real eigenvalue => eigenvector is real up to a global phase
    idx = int(np.argmax(np.abs(vec)))
    phase = vec[idx] / abs(vec[idx])
    return np.real(vec / phase)


def proximal_parts(g, gap_tol=1e-8):
    """Attracting line and repelling covector of a proximal matrix.

    Parameters
    ----------
    g : (d, d) array_like
    gap_tol : float
        Required gap between the top two eigenvalue moduli.

    Returns
    -------
    (attract, repel)
        ``attract`` is the normalized top eigendirection of ``g``;
        ``repel`` is the normalized covector annihilating the invariant
        complement, i.e. the top eigendirection of ``g.T``.

    Raises
    ------
    NotProximal
        If the modulus gap between the first and second eigenvalue is
        below ``gap_tol``.  A complex leading pair always fails, since its
        two moduli coincide.
    """
    g = np.asarray(g, dtype=float)
    w, vr = np.linalg.eig(g)
    mods = np.abs(w)
    order = np.argsort(-mods, kind="stable")
    gap = mods[order[0]] - mods[order[1]]
    if gap < gap_tol:
        raise NotProximal("eigenvalue modulus gap %.3e below %.0e" % (gap, gap_tol))
    attract = normalize_projective(_real_eigenvector(vr[:, order[0]]))

    wl, vl = np.linalg.eig(g.T)
    lorder = np.argsort(-np.abs(wl), kind="stable")
    repel = normalize_projective(_real_eigenvector(vl[:, lorder[0]]))
    return attract, repel


def gromov_product(theta, v):
    """Gromov product log(|theta(v)| / (|theta| |v|)), always <= 0.

    Raises
    ------
    DegeneratePair
        If the pairing of the unit representatives is below 1e-14.
    """
    theta = np.asarray(theta, dtype=float)
    v = np.asarray(v, dtype=float)
    val = abs(float(theta @ v)) / (np.linalg.norm(theta) * np.linalg.norm(v))
    if val < _PAIRING_FLOOR:
        raise DegeneratePair("covector annihilates the point within 1e-14")
    return float(np.log(min(1.0, val)))


def _sphere_grid(dim, resolution):
    # deterministic probe set on the unit sphere; exact grid on the circle,
    # seeded low-discrepancy sample in higher dimension
    if dim == 2:
        n = max(8, int(np.ceil(np.pi / resolution)))
        ang = np.arange(n) * (np.pi / n)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    rng = np.random.default_rng(_SAMPLE_SEED)
    count = int(min(2.0e5, max(1000, (4.0 / resolution) ** (dim - 1))))
    pts = rng.standard_normal((count, dim))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def is_r_eps_proximal(g, r, eps):
    """Sampled (r, eps)-proximality check.

    True iff ``g`` is proximal, ``exp(gromov_product(g_minus, g_plus)) > r``,
    and every sampled line at angle >= eps from the repelling hyperplane is
    mapped within angle eps of the attracting line.  The sphere is probed
    at angular resolution eps/4 (seeded sample for d > 2), so the check is
    a certificate at that resolution rather than a proof.
    """
    g = np.asarray(g, dtype=float)
    try:
        attract, repel = proximal_parts(g, gap_tol=_DET_FLOOR * 10)
    except NotProximal:
        return False
    try:
        gp = gromov_product(repel, attract)
    except DegeneratePair:
        return False
    if np.exp(gp) <= r:
        return False

    pts = _sphere_grid(g.shape[0], eps / 4.0)
    dist_to_ker = np.arcsin(np.minimum(1.0, np.abs(pts @ repel)))
    probes = pts[dist_to_ker >= eps]
    if probes.size == 0:
        return True
    images = probes @ g.T
    images /= np.linalg.norm(images, axis=1, keepdims=True)
    dist_to_attract = np.arccos(np.minimum(1.0, np.abs(images @ attract)))
    return bool(np.all(dist_to_attract <= eps))


def iwasawa_cocycle(g, frame):
    """Iwasawa (Busemann) cocycle of ``g`` at the flag carried by ``frame``.

    Parameters
    ----------
    g : (d, d) array_like
    frame : (d, d) array_like
        Orthogonal matrix whose leading k columns span the k-th flag part.

    Returns
    -------
    (d,) ndarray
        ``log diag(R)`` from the sign-fixed QR decomposition of
        ``g @ frame``.  Sums to zero for unimodular ``g``; the first
        coordinate is the euclidean beta-cocycle of the flag's line.

    The partial products ``r_11 ... r_kk`` equal the k-volume spanned by
    ``g`` times the leading frame columns, so each entry is recovered as a
    difference of compound-norm logs.  A literal QR loses the trailing
    diagonal to roundoff at scale ``eps * |g|`` once the product is badly
    conditioned; the volume route keeps every coordinate at its own scale.
    """
    g = np.asarray(g, dtype=float)
    frame = np.asarray(frame, dtype=float)
    d = g.shape[0]
    c = np.empty(d + 1)
    c[0] = 0.0
    for k in range(1, d):
        # Pluecker vector of the leading k columns is the first compound
        # column; the frame is orthogonal so it has unit length
        w = exterior_power(frame, k)[:, 0]
        vol = np.linalg.norm(exterior_power(g, k) @ w)
        if not vol > 0.0:
            raise SingularInput("flag is degenerate under g: zero k-volume")
        c[k] = np.log(vol)
    fdet = abs(np.linalg.det(frame))
    if fdet < _DET_FLOOR:
        raise SingularInput("frame is singular")
    c[d] = _log_abs_det(g) + np.log(fdet)
    return np.diff(c)


def flag_action(g, frame):
    """Image flag frame: orthogonal factor of ``g @ frame``, signs fixed.

    Column signs are normalized so that the triangular factor has positive
    diagonal, which makes the action well defined on frames and satisfies
    ``iwasawa_cocycle(g h, x) = iwasawa_cocycle(g, flag_action(h, x))
    + iwasawa_cocycle(h, x)``.
    """
    g = np.asarray(g, dtype=float)
    frame = np.asarray(frame, dtype=float)
    q, rr = np.linalg.qr(g @ frame)
    s = np.sign(np.diag(rr))
    s[s == 0] = 1.0
    return q * s
