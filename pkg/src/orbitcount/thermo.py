"""Symbolic thermodynamics: shifts, transfer operators, entropy roots.

The growth rate of a certified Schottky group is recovered as the unique
root of the pressure equation P(-s * potential) = 0, where the potential
is a depth-k discretization of the norm-increment roof function.  Pressure
of a locally constant potential is the log spectral radius of a weighted
transfer matrix over (k-1)-blocks, which the finite-state machinery below
computes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import (
    NonPositivePotential,
    NonPositiveRoof,
    NotCertified,
    TooFewPeriods,
)

_POWER_TOL = 1e-13
_POWER_MAXIT = 100000
_ROOT_TOL = 1e-10


@dataclass
class FiniteShift:
    """Subshift of finite type on labelled states with 0/1 transitions."""

    states: Tuple[str, ...]
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.shape != (len(self.states), len(self.states)):
            raise ValueError("adjacency shape does not match state count")
        self.adjacency = (a != 0).astype(float)

    def pruned(self) -> "FiniteShift":
        """Drop states with no outgoing or no incoming edge, iteratively."""
        keep = np.arange(len(self.states))
        adj = self.adjacency
        while True:
            alive = (adj.sum(axis=1) > 0) & (adj.sum(axis=0) > 0)
            if alive.all():
                break
            keep = keep[alive]
            adj = adj[np.ix_(alive, alive)]
            if not len(keep):
                break
        return FiniteShift(tuple(self.states[i] for i in keep), adj)

    def is_primitive(self) -> bool:
        """Some power of the adjacency is entrywise positive.

        Checked by repeated boolean squaring up to the Wielandt exponent
        (n-1)^2 + 1; primitivity of the letter graph carries over to every
        higher block graph, so this one check justifies power iteration on
        all weighted transfer matrices built from the shift.
        """
        n = len(self.states)
        if n == 0:
            return False
        b = self.adjacency > 0
        power = 1
        while power < (n - 1) ** 2 + 1:
            if b.all():
                return True
            b = (b.astype(np.uint8) @ b.astype(np.uint8)) > 0
            power *= 2
        return bool(b.all())


@dataclass
class DepthKPotential:
    """Locally constant potential: one value per admissible k-block."""

    depth: int
    values: Dict[Tuple[int, ...], float]

    def min_value(self) -> float:
        return min(self.values.values())


def schottky_shift(gen_set) -> FiniteShift:
    """Letter shift of a rank-n Schottky group: forbid x followed by x'."""
    n = gen_set.n_letters
    adj = np.ones((n, n))
    for u in range(n):
        adj[u, u ^ 1] = 0.0
    labels = tuple(gen_set.label(l) for l in range(n))
    return FiniteShift(labels, adj).pruned()


def _admissible_blocks(shift: FiniteShift, k: int):
    n = len(shift.states)
    if k == 0:
        return [()]
    blocks = [(u,) for u in range(n)]
    for _ in range(k - 1):
        blocks = [
            b + (v,) for b in blocks for v in range(n) if shift.adjacency[b[-1], v]
        ]
    return blocks


def norm_potential(rep, shift: FiniteShift, k: int, norm_kind="euclidean"):
    """Depth-k norm-increment potential of a certified Schottky rep.

    Value on a block (x0 ... x_{k-1}) is
    ``log|rho(x0 ... x_{k-1})| - log|rho(x1 ... x_{k-1})|``, the depth-k
    approximation of the boundary roof function.  Strictly positive from
    some depth on for genuinely contracting schemes; :func:`entropy_root`
    requires that positivity.
    """
    if not getattr(rep, "certified", False):
        raise NotCertified("norm potential needs a certified Schottky rep")
    labels = tuple(rep.gen_set.label(l) for l in range(rep.gen_set.n_letters))
    if shift.states != labels:
        raise NotCertified("shift states do not match the representation letters")
    values = {}
    for block in _admissible_blocks(shift, k):
        m = np.eye(rep.dim)
        for l in block:
            m = m @ rep.letter_mats[l]
        tail = np.eye(rep.dim)
        for l in block[1:]:
            tail = tail @ rep.letter_mats[l]
        values[block] = linalg.operator_norm_log(m, norm_kind) - (
            linalg.operator_norm_log(tail, norm_kind) if k > 1 else 0.0
        )
    return DepthKPotential(depth=k, values=values)


def potential_variation(pot: DepthKPotential) -> float:
    """Max spread of depth-k values over blocks sharing their (k-1)-prefix."""
    groups: Dict[Tuple[int, ...], list] = {}
    for block, val in pot.values.items():
        groups.setdefault(block[:-1], []).append(val)
    return max(max(v) - min(v) for v in groups.values())


def transfer_matrix(shift: FiniteShift, pot: DepthKPotential, s: float):
    """Weighted transfer matrix of exp(-s * pot) over (k-1)-blocks.

    For depth k >= 2 the states are admissible (k-1)-blocks with overlap
    transitions; the edge (x0...x_{k-2}) -> (x1...x_{k-1}) carries weight
    exp(-s * pot(x0...x_{k-1})).  For depth 1 the letter graph itself is
    used, with the weight attached to the source letter.
    """
    k = pot.depth
    if k == 1:
        n = len(shift.states)
        w = np.exp(-s * np.array([pot.values[(u,)] for u in range(n)]))
        return shift.adjacency * w[:, None], [(u,) for u in range(n)]
    blocks = _admissible_blocks(shift, k - 1)
    index = {b: i for i, b in enumerate(blocks)}
    m = np.zeros((len(blocks), len(blocks)))
    for block, val in pot.values.items():
        i = index[block[:-1]]
        j = index[block[1:]]
        m[i, j] = np.exp(-s * val)
    return m, blocks


def _spectral_radius(m: np.ndarray) -> float:
    # power iteration with Rayleigh quotient; the block graph of a mixing
    # letter shift is primitive, so convergence is geometric
    n = m.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    r_old = 0.0
    for _ in range(_POWER_MAXIT):
        w = m @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        r = float(v @ (m @ v))
        if abs(r - r_old) <= _POWER_TOL * max(1.0, abs(r)):
            return r
        r_old = r
    return r_old


def pressure(shift: FiniteShift, pot: DepthKPotential, s: float) -> float:
    """Pressure P(-s * pot): log spectral radius of the transfer matrix.

    Exact for locally constant potentials; strictly decreasing and convex
    in s when the potential is strictly positive.
    """
    m, _ = transfer_matrix(shift, pot, s)
    primitive = getattr(shift, "_primitive", None)
    if primitive is None:
        primitive = shift.is_primitive()
        shift._primitive = primitive
    if primitive:
        r = _spectral_radius(m)
    else:
        # power iteration is only justified on primitive support patterns
        r = float(np.abs(np.linalg.eigvals(m)).max())
    if r <= 0.0:
        raise NonPositivePotential("transfer matrix has zero spectral radius")
    return float(np.log(r))


def entropy_root(shift: FiniteShift, pot: DepthKPotential, tol=_ROOT_TOL) -> float:
    """Unique root of s -> P(-s * pot), located by bisection to ``tol``.

    The potential must be strictly positive; the root is bracketed in
    [0, log(max outdegree) / min pot] and strict monotonicity of the
    pressure makes it unique.
    """
    min_pot = pot.min_value()
    if min_pot <= 0.0:
        raise NonPositivePotential(
            "minimum potential value %.3e is not positive" % min_pot
        )
    lo = 0.0
    p_lo = pressure(shift, pot, lo)
    if p_lo <= 0.0:
        return 0.0  # subexponential shift: root sits at the bracket edge
    max_out = shift.adjacency.sum(axis=1).max()
    hi = float(np.log(max_out) / min_pot) if max_out > 1 else 1.0
    while pressure(shift, pot, hi) > 0.0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pressure(shift, pot, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def abramov_entropy(h_base: float, mean_roof: float) -> float:
    """Entropy rescaling under a roof change of time: h / mean roof."""
    if mean_roof <= 0.0:
        raise NonPositiveRoof("mean roof %.3e is not positive" % mean_roof)
    return h_base / mean_roof


def periodic_orbit_sum(shift: FiniteShift, pot: DepthKPotential, s: float, n: int):
    """Weighted periodic point sum: trace of the n-th transfer matrix power.

    At s = 0 this counts admissible closed words of length n exactly.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    m, _ = transfer_matrix(shift, pot, s)
    return float(np.trace(np.linalg.matrix_power(m, n)))


@dataclass
class ArithmeticityVerdict:
    kind: str  # "lattice" or "non_arithmetic"
    generator: float  # candidate gcd (0.0 when non-arithmetic)
    remainder: float  # auditable residual, see period_arithmeticity


def period_arithmeticity(periods: Sequence[float], tol=1e-7) -> ArithmeticityVerdict:
    """Classify a period set as lattice-like or non-arithmetic.

    Runs the real Euclidean cascade with cutoff ``tol`` over all periods.
    The verdict is ``lattice(g)`` when the candidate gcd stays well above
    the cutoff (g >= 1000 * tol; a gcd that has collapsed to the cutoff
    scale approximates anything within tol, so accepting it would make the
    test vacuous) and every period is within ``tol`` of a multiple of g.
    Otherwise the verdict is non_arithmetic and the reported remainder is
    the smallest cascade value still above ``tol``, the scale at which
    commensurability was lost.
    """
    periods = [float(p) for p in periods]
    if len(periods) < 2:
        raise TooFewPeriods("need at least two periods")
    if min(periods) <= 0.0:
        raise TooFewPeriods("periods must be positive")

    floor = 1000.0 * tol

    def real_gcd(a: float, b: float) -> float:
        # remainders below the cutoff count as exact division; the
        # returned value is therefore always above the cutoff
        a, b = max(a, b), min(a, b)
        while b > tol:
            a, b = b, a - b * np.floor(a / b)
        return a

    g = periods[0]
    for p in sorted(periods):
        g = real_gcd(g, p)

    misfit = max(abs(p - g * round(p / g)) for p in periods)
    if g >= floor and misfit <= tol:
        return ArithmeticityVerdict(kind="lattice", generator=g, remainder=misfit)
    remainder = g if g < floor else misfit
    return ArithmeticityVerdict(
        kind="non_arithmetic", generator=0.0, remainder=remainder
    )
