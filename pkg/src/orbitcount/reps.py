"""Representations of free groups into SL(d, R).

A representation stores one unimodular matrix per letter (generators and
their inverses).  Schottky representations additionally carry a ping-pong
scheme; a verified scheme certifies freeness and proximality of every
nontrivial element, which the counting layer relies on for exact
enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    NotProximal,
    ParseError,
    SingularGenerator,
    SingularInput,
)
from .groups import GeneratorSet

_INVERSE_RESIDUAL = 1e-10
_MIN_MARGIN = 1e-3


@dataclass
class PingPongScheme:
    """Projective neighborhoods, one per letter, with a declared margin.

    ``balls`` maps letter index -> (center, angular radius); centers are
    normalized projective points.  ``margin`` is the slack the certificate
    is expected to realize; the verification grid has resolution margin/4.
    """

    balls: Dict[int, Tuple[np.ndarray, float]]
    margin: float


@dataclass
class PingPongReport:
    ok: bool
    margin: float
    failures: list = field(default_factory=list)
    resolution: float = 0.0


@dataclass
class Representation:
    dim: int
    gen_set: GeneratorSet
    gens: Dict[str, np.ndarray]
    letter_mats: np.ndarray
    kind: str
    certification: Optional[PingPongScheme] = None

    @property
    def certified(self) -> bool:
        return self.certification is not None

    def letter_matrix(self, letter: int) -> np.ndarray:
        return self.letter_mats[letter]


def _assemble(dim, gen_set, base_mats, kind, certification=None):
    """Build the letter-indexed matrix table from per-generator matrices."""
    letter_mats = np.empty((gen_set.n_letters, dim, dim))
    gens = {}
    for i, lab in enumerate(gen_set.labels):
        m = linalg.unimodularize(base_mats[i])
        minv = np.linalg.inv(m)
        resid = np.abs(m @ minv - np.eye(dim)).max()
        if resid > _INVERSE_RESIDUAL:
            raise SingularGenerator(
                "generator %r inverse residual %.2e exceeds %.0e"
                % (lab, resid, _INVERSE_RESIDUAL)
            )
        letter_mats[2 * i] = m
        letter_mats[2 * i + 1] = minv
        gens[lab] = m
        gens[lab + "'"] = minv
    return Representation(dim, gen_set, gens, letter_mats, kind, certification)


def load_representation(path) -> Representation:
    """Load generators from a plain text file.

    Format: a header line ``d <dim>``, then per generator a line
    ``gen <label>`` followed by ``dim`` rows of ``dim`` decimal entries.
    Lines starting with ``#`` and blank lines are ignored.  Matrices are
    unimodularized on load and inverses are synthesized, so the file lists
    only the generators themselves.  Loaded representations carry no
    certificate; reports downstream mark them as approximate.
    """
    lines = []
    with open(path) as fh:
        for raw in fh:
            s = raw.strip()
            if s and not s.startswith("#"):
                lines.append(s)
    if not lines or not lines[0].startswith("d "):
        raise ParseError("first line must be 'd <dim>'")
    try:
        dim = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ParseError("malformed dimension line %r" % (lines[0],)) from None
    if dim < 2:
        raise ParseError("dimension must be >= 2")

    labels = []
    mats = []
    i = 1
    while i < len(lines):
        if not lines[i].startswith("gen "):
            raise ParseError("expected 'gen <label>', got %r" % (lines[i],))
        label = lines[i].split(None, 1)[1].strip()
        rows = []
        i += 1
        for _ in range(dim):
            if i >= len(lines):
                raise DimensionMismatch("generator %r truncated" % (label,))
            try:
                row = [float(x) for x in lines[i].split()]
            except ValueError:
                raise ParseError("bad matrix row %r" % (lines[i],)) from None
            if len(row) != dim:
                raise DimensionMismatch(
                    "generator %r row has %d entries, expected %d"
                    % (label, len(row), dim)
                )
            rows.append(row)
            i += 1
        labels.append(label)
        mats.append(np.array(rows))
    if not labels:
        raise ParseError("no generators in file")

    try:
        return _assemble(dim, GeneratorSet(labels), mats, "loaded")
    except SingularInput as exc:
        raise SingularGenerator(str(exc)) from exc


def _sym_matrix(a: np.ndarray, m: int) -> np.ndarray:
    # row j holds the monomial coefficients of (a00 x + a01 y)^(m-j)
    # * (a10 x + a11 y)^j, so S(AB) = S(A) S(B) and the plain Veronese
    # map is equivariant
    top = np.array([a[0, 0], a[0, 1]])
    bot = np.array([a[1, 0], a[1, 1]])
    rows = []
    for j in range(m + 1):
        poly = np.array([1.0])
        for _ in range(m - j):
            poly = np.polymul(poly, top)
        for _ in range(j):
            poly = np.polymul(poly, bot)
        row = np.zeros(m + 1)
        row[m + 1 - len(poly):] = poly
        rows.append(row)
    return np.array(rows)


def symmetric_power(rep: Representation, m: int) -> Representation:
    """m-th symmetric power of a 2-dimensional representation.

    Generators act on degree-m homogeneous polynomials in the plain
    monomial basis (x^m, x^(m-1) y, ..., y^m) and are unimodularized after
    construction.  Eigenvalues scale as powers, so the top Jordan
    coordinate multiplies by m.  The ping-pong certificate of the base is
    inherited: the base coding transfers along the (faithful) power map.
    """
    if rep.dim != 2:
        raise DimensionMismatch("symmetric power expects a 2-dimensional base")
    if m < 1:
        raise ValueError("power must be >= 1")
    mats = [_sym_matrix(rep.gens[lab], m) for lab in rep.gen_set.labels]
    return _assemble(
        m + 1,
        GeneratorSet(rep.gen_set.labels),
        mats,
        "symmetric_power",
        certification=rep.certification,
    )


def veronese_map(p, m: int) -> np.ndarray:
    """Veronese image [x:y] -> [x^m : x^(m-1) y : ... : y^m], normalized."""
    p = linalg.normalize_projective(p)
    if p.shape != (2,):
        raise DimensionMismatch("veronese map is defined on the projective line")
    x, y = p
    out = np.array([x ** (m - k) * y ** k for k in range(m + 1)])
    return linalg.normalize_projective(out)


def fixed_points(g, gap_tol=1e-8):
    """Attracting lines of ``g`` and of its inverse (biproximal data)."""
    g = np.asarray(g, dtype=float)
    plus, _ = linalg.proximal_parts(g, gap_tol)
    minus, _ = linalg.proximal_parts(np.linalg.inv(g), gap_tol)
    return plus, minus


def verify_ping_pong(rep: Representation, scheme: PingPongScheme) -> PingPongReport:
    """Check a ping-pong scheme on a projective grid.

    Conditions: the closed neighborhoods are pairwise disjoint, and every
    letter maps the complement of its inverse's neighborhood strictly
    inside its own.  The realized margin is the smallest slack over all
    conditions; a certificate below margin 1e-3 is rejected as numerically
    unsafe.  The grid has angular resolution ``scheme.margin / 4``.
    """
    if scheme.margin <= 0:
        raise ValueError("scheme margin must be positive")
    res = scheme.margin / 4.0
    letters = sorted(scheme.balls)
    if set(letters) != set(range(rep.gen_set.n_letters)):
        raise DimensionMismatch("scheme must cover every letter exactly once")

    failures = []
    slacks = []
    for i, li in enumerate(letters):
        ci, ri = scheme.balls[li]
        for lj in letters[i + 1:]:
            cj, rj = scheme.balls[lj]
            slack = linalg.projective_distance(ci, cj) - ri - rj
            slacks.append(slack)
            if slack <= 0:
                failures.append(
                    "neighborhoods %s and %s overlap"
                    % (rep.gen_set.label(li), rep.gen_set.label(lj))
                )

    grid = linalg._sphere_grid(rep.dim, res)
    for l in letters:
        target_c, target_r = scheme.balls[l]
        source_c, source_r = scheme.balls[l ^ 1]
        dist_from_source = np.arccos(
            np.minimum(1.0, np.abs(grid @ linalg.normalize_projective(source_c)))
        )
        probes = grid[dist_from_source >= source_r]
        if probes.size == 0:
            failures.append("no probes outside %s" % rep.gen_set.label(l ^ 1))
            continue
        images = probes @ rep.letter_mats[l].T
        images /= np.linalg.norm(images, axis=1, keepdims=True)
        dist_to_target = np.arccos(
            np.minimum(1.0, np.abs(images @ linalg.normalize_projective(target_c)))
        )
        slack = target_r - float(dist_to_target.max())
        slacks.append(slack)
        if slack <= 0:
            failures.append(
                "letter %s does not contract into its neighborhood"
                % rep.gen_set.label(l)
            )

    margin = float(min(slacks)) if slacks else 0.0
    ok = not failures and margin >= _MIN_MARGIN
    if not failures and margin < _MIN_MARGIN:
        failures.append("realized margin %.2e below safety floor 1e-3" % margin)
    return PingPongReport(ok=ok, margin=margin, failures=failures, resolution=res)


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def schottky_reference() -> Representation:
    """Reference Schottky pair in SL(2, R), certified at construction.

    ``a = diag(9, 1/9)`` and ``b`` its conjugate by the rotation of angle
    pi/4.  The ping-pong intervals have angular radius 0.15 around the four
    fixed directions (angles 0, pi/2, pi/4, 3pi/4).
    """
    a = np.diag([9.0, 1.0 / 9.0])
    r = _rotation(np.pi / 4.0)
    b = r @ a @ r.T
    rep = _assemble(2, GeneratorSet(("a", "b")), [a, b], "schottky")

    radius = 0.15
    angles = {0: 0.0, 1: np.pi / 2.0, 2: np.pi / 4.0, 3: 3.0 * np.pi / 4.0}
    balls = {
        l: (linalg.normalize_projective([np.cos(t), np.sin(t)]), radius)
        for l, t in angles.items()
    }
    scheme = PingPongScheme(balls=balls, margin=0.05)
    report = verify_ping_pong(rep, scheme)
    if not report.ok:
        raise NotProximal(
            "reference scheme failed its own certificate: %s" % report.failures
        )
    rep.certification = scheme
    return rep
