"""Cocycles over the boundary action and the limit cone.

The scalar cocycle ``beta1`` measures log-stretch of a line, its dual
measures log-stretch of a hyperplane under the inverse-transpose action,
and the vector cocycle refines both to the full Cartan algebra through the
Iwasawa decomposition.  Periods recover Jordan projections: on the
attracting fixed line, ``beta1`` of gamma is the top eigenvalue log of
rho(gamma) and the dual period is the top eigenvalue log of rho(gamma^-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .groups import enumerate_primitive_classes, evaluate, invert_word

_ZERO_JORDAN = 1e-10


def beta1(rep, word, x, norm_kind="euclidean"):
    """log(|rho(w) v| / |v|) for v spanning the line x."""
    v = np.asarray(x, dtype=float)
    img = evaluate(rep, word) @ v
    return float(
        np.log(linalg.vector_norm(img, norm_kind) / linalg.vector_norm(v, norm_kind))
    )


def beta1_dual(rep, word, theta, norm_kind="euclidean"):
    """log-stretch of the covector theta under theta -> theta o rho(w)^-1.

    Covectors are measured in the dual norm of ``norm_kind`` (euclidean is
    self-dual, l1 and linf swap), so the period identity
    ``beta1_dual(gamma, theta_plus) = lambda_1(rho(gamma)^-1)`` holds for
    every kind.
    """
    theta = np.asarray(theta, dtype=float)
    # rho(w)^-1 as the product over the inverted word: long words make
    # rho(w) numerically singular, but each letter inverse is tame
    m_inv = evaluate(rep, invert_word(word))
    pulled = m_inv.T @ theta  # theta o rho(w)^-1
    dual = linalg.DUAL_NORM_KIND[norm_kind]
    return float(
        np.log(linalg.vector_norm(pulled, dual) / linalg.vector_norm(theta, dual))
    )


def pair_gromov_product(rep, eta_x, xi_y):
    """Boundary pairing [x, y] = Gromov product of eta(x) and xi(y).

    The arguments are the hyperplane covector at x and the line at y, as
    produced by :func:`orbitcount.linalg.proximal_parts` or supplied by the
    caller.  Shifting both by a group element changes the value by
    ``-(beta1_dual(gamma, eta_x) + beta1(gamma, xi_y))``; the rep argument
    is kept so call sites read like the equivariance identity.
    """
    del rep
    return linalg.gromov_product(eta_x, xi_y)


@dataclass
class LimitConeSample:
    """Unit Jordan rays with the word lengths that produced them."""

    rays: np.ndarray  # (n, d), unit rows in the dominant chamber
    lengths: np.ndarray  # (n,) cyclic word lengths

    def __len__(self) -> int:
        return len(self.lengths)


def vector_cocycle(rep, word, frame):
    """Iwasawa cocycle of rho(word) at a flag frame (see linalg)."""
    return linalg.iwasawa_cocycle(evaluate(rep, word), frame)


def limit_cone_sample(rep, L) -> LimitConeSample:
    """Normalized Jordan projections over primitive classes of length <= L.

    Classes with numerically zero Jordan projection (elliptic or parabolic
    images) are excluded, so an elliptic-only input yields an empty sample.
    """
    rays = []
    lengths = []
    for core in enumerate_primitive_classes(rep.gen_set, L):
        lam = linalg.jordan_projection(evaluate(rep, core))
        norm = float(np.linalg.norm(lam))
        if norm < _ZERO_JORDAN:
            continue
        rays.append(lam / norm)
        lengths.append(len(core))
    if not rays:
        return LimitConeSample(
            rays=np.empty((0, rep.dim)), lengths=np.empty(0, dtype=int)
        )
    return LimitConeSample(rays=np.array(rays), lengths=np.array(lengths, dtype=int))


def functional_margin(phi, sample: LimitConeSample) -> float:
    """Smallest value of phi over the sampled rays (+inf when empty)."""
    phi = np.asarray(phi, dtype=float)
    if len(sample) == 0:
        return float("inf")
    return float((sample.rays @ phi).min())


def functional_interior_check(phi, sample: LimitConeSample, margin=1e-8) -> bool:
    """Sampled dual-cone interior test: phi(ray) >= margin for every ray.

    An empty sample certifies nothing and returns False.  Functionals are
    evaluated by the plain pairing; on the zero-sum Cartan vectors produced
    here the constant-shift gauge of phi is invisible.
    """
    if len(sample) == 0:
        return False
    return bool(functional_margin(phi, sample) >= margin)
