import numpy as np
import pytest
from numpy.testing import assert_allclose

from orbitcount import groups, linalg, reps
from orbitcount.errors import (
    DimensionMismatch,
    NotProximal,
    ParseError,
    SingularGenerator,
)

PHI = (1.0 + np.sqrt(5.0)) / 2.0
E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def write_rep(tmp_path, text, name="rep.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def diag_file(t):
    return "d 2\ngen a\n%r 0\n0 %r\n" % (float(t), 1.0 / float(t))


def random_sl2(rng):
    g = rng.normal(size=(2, 2))
    while abs(np.linalg.det(g)) < 0.1:
        g = rng.normal(size=(2, 2))
    g /= np.sqrt(abs(np.linalg.det(g)))
    if np.linalg.det(g) < 0:
        g[0] *= -1.0
    return g


# ---------------------------------------------------------------- loading


def test_load_single_generator(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, diag_file(3.0)))
    assert rep.dim == 2
    assert rep.kind == "loaded"
    assert not rep.certified
    assert set(rep.gens) == {"a", "a'"}
    assert_allclose(rep.gens["a"], np.diag([3.0, 1.0 / 3.0]), rtol=1e-12)
    assert_allclose(rep.gens["a'"], np.diag([1.0 / 3.0, 3.0]), rtol=1e-12)
    assert_allclose(rep.letter_matrix(0) @ rep.letter_matrix(1), np.eye(2),
                    atol=1e-12)


def test_load_skips_comments_and_blanks(tmp_path):
    text = "# header\n\nd 2\n# generator block\ngen a\n3 0\n\n0 0.3333333333333333\n"
    rep = reps.load_representation(write_rep(tmp_path, text))
    assert rep.gen_set.rank == 1


def test_load_unimodularizes(tmp_path):
    # det 4 input: rescaled by 1/2 on load
    rep = reps.load_representation(write_rep(tmp_path, "d 2\ngen a\n4 0\n0 1\n"))
    assert_allclose(np.linalg.det(rep.gens["a"]), 1.0, rtol=1e-12)
    assert_allclose(rep.gens["a"], np.diag([2.0, 0.5]), rtol=1e-12)


def test_load_errors(tmp_path):
    with pytest.raises(ParseError):
        reps.load_representation(write_rep(tmp_path, "gen a\n1 0\n0 1\n"))
    with pytest.raises(ParseError):
        reps.load_representation(write_rep(tmp_path, "d two\ngen a\n1 0\n0 1\n"))
    with pytest.raises(ParseError):
        reps.load_representation(write_rep(tmp_path, "d 1\ngen a\n1\n"))
    with pytest.raises(ParseError):
        reps.load_representation(write_rep(tmp_path, "d 2\n"))
    with pytest.raises(ParseError):
        reps.load_representation(write_rep(tmp_path, "d 2\n1 0\n0 1\n"))
    with pytest.raises(ParseError):
        reps.load_representation(write_rep(tmp_path, "d 2\ngen a\n1 x\n0 1\n"))


def test_load_dimension_mismatch(tmp_path):
    # non-square rows
    with pytest.raises(DimensionMismatch):
        reps.load_representation(write_rep(tmp_path, "d 2\ngen a\n1 0 0\n0 1 0\n"))
    # truncated generator
    with pytest.raises(DimensionMismatch):
        reps.load_representation(write_rep(tmp_path, "d 2\ngen a\n1 0\n"))


def test_load_singular_generator(tmp_path):
    with pytest.raises(SingularGenerator):
        reps.load_representation(write_rep(tmp_path, "d 2\ngen a\n1 0\n0 0\n"))


# ------------------------------------------------------- symmetric powers


def test_sym2_of_diagonal(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, diag_file(3.0)))
    sym = reps.symmetric_power(rep, 2)
    assert sym.dim == 3
    assert sym.kind == "symmetric_power"
    assert_allclose(sym.gens["a"], np.diag([9.0, 1.0, 1.0 / 9.0]), atol=1e-12)


def test_sym_of_identity_like(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, "d 2\ngen a\n1 0\n0 1\n"))
    for m in (1, 2, 4):
        assert_allclose(reps.symmetric_power(rep, m).gens["a"],
                        np.eye(m + 1), atol=1e-12)


def test_sym_requires_dim_two_base(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, diag_file(3.0)))
    sym = reps.symmetric_power(rep, 2)
    with pytest.raises(DimensionMismatch):
        reps.symmetric_power(sym, 2)
    with pytest.raises(ValueError):
        reps.symmetric_power(rep, 0)


def test_sym_eigenvalue_homogeneity_pinned(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, diag_file(3.0)))
    sym = reps.symmetric_power(rep, 3)
    assert_allclose(linalg.spectral_radius_log(sym.gens["a"]),
                    3.0 * np.log(3.0), rtol=1e-12)


def test_sym_eigenvalue_homogeneity_random():
    rng = np.random.default_rng(11)
    n = 0
    while n < 100:
        g = random_sl2(rng)
        if abs(g[0, 0] + g[1, 1]) <= 2.0:
            g = g @ np.diag([3.0, 1.0 / 3.0])
        if abs(g[0, 0] + g[1, 1]) <= 2.0:
            continue
        n += 1
        for m in (2, 3):
            assert abs(linalg.spectral_radius_log(reps._sym_matrix(g, m))
                       - m * linalg.spectral_radius_log(g)) < 1e-8


def test_sym_homomorphism_on_letters():
    base = reps.schottky_reference()
    sym = reps.symmetric_power(base, 2)
    rng = np.random.default_rng(7)
    for _ in range(200):
        l1, l2 = rng.integers(0, 4, 2)
        lhs = sym.letter_matrix(l1) @ sym.letter_matrix(l2)
        rhs = reps._sym_matrix(base.letter_matrix(l1) @ base.letter_matrix(l2), 2)
        assert np.abs(lhs - rhs).max() < 1e-9


def test_sym_homomorphism_on_words():
    # entries of Sym^m of a length-6 product reach 1e11 and the rounding
    # error of forming either side rides at eps times the product of the
    # factor norms, so the per-entry bound carries that scale
    base = reps.schottky_reference()
    rng = np.random.default_rng(17)
    for m in (2, 3):
        sym = reps.symmetric_power(base, m)
        for _ in range(100):
            w1 = groups.reduce_word(base.gen_set,
                                    tuple(rng.integers(0, 4, 3)))
            w2 = groups.reduce_word(base.gen_set,
                                    tuple(rng.integers(0, 4, 3)))
            lhs = groups.evaluate(sym, w1) @ groups.evaluate(sym, w2)
            g1 = groups.evaluate(base, w1)
            g2 = groups.evaluate(base, w2)
            rhs = reps._sym_matrix(g1 @ g2, m)
            scale = max(1.0, np.abs(reps._sym_matrix(g1, m)).max()
                        * np.abs(reps._sym_matrix(g2, m)).max())
            assert np.abs(lhs - rhs).max() < 1e-9 * scale


def test_sym_inherits_certificate():
    base = reps.schottky_reference()
    assert base.certified
    sym = reps.symmetric_power(base, 2)
    assert sym.certified
    assert sym.certification is base.certification


# --------------------------------------------------------------- veronese


def test_veronese_pinned_values():
    assert_allclose(reps.veronese_map([1.0, 0.0], 3), [1, 0, 0, 0], atol=1e-15)
    v = reps.veronese_map([1.0, 1.0], 2)
    assert_allclose(v, np.ones(3) / np.sqrt(3.0), rtol=1e-15)
    with pytest.raises(DimensionMismatch):
        reps.veronese_map([1.0, 0.0, 0.0], 2)


def test_veronese_equivariance_pinned():
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    p = np.array([1.0, 2.0])
    lhs = linalg.normalize_projective(reps._sym_matrix(A, 2)
                                      @ reps.veronese_map(p, 2))
    rhs = reps.veronese_map(A @ p, 2)
    assert min(np.abs(lhs - rhs).max(), np.abs(lhs + rhs).max()) < 1e-9


def test_veronese_equivariance_random():
    rng = np.random.default_rng(13)
    for _ in range(100):
        A = random_sl2(rng)
        m = int(rng.integers(2, 5))
        p = rng.normal(size=2)
        lhs = linalg.normalize_projective(reps._sym_matrix(A, m)
                                          @ reps.veronese_map(p, m))
        rhs = reps.veronese_map(A @ p, m)
        assert min(np.abs(lhs - rhs).max(), np.abs(lhs + rhs).max()) < 1e-9


# ------------------------------------------------------------ fixed points


def test_fixed_points_diagonal():
    plus, minus = reps.fixed_points(np.diag([3.0, 1.0 / 3.0]))
    assert_allclose(plus, E1, atol=1e-12)
    assert_allclose(minus, E2, atol=1e-12)


def test_fixed_points_fibonacci():
    plus, minus = reps.fixed_points(np.array([[2.0, 1.0], [1.0, 1.0]]))
    assert_allclose(plus, np.array([PHI, 1.0]) / np.hypot(PHI, 1.0), atol=1e-10)
    assert_allclose(np.abs(minus @ np.array([1.0, -PHI])) / np.hypot(PHI, 1.0),
                    1.0, atol=1e-10)


def test_fixed_points_rotation_not_proximal():
    c, s = np.cos(0.3), np.sin(0.3)
    with pytest.raises(NotProximal):
        reps.fixed_points(np.array([[c, -s], [s, c]]))


def test_fixed_points_of_powers():
    base = reps.schottky_reference()
    for w in groups.enumerate_ball(base.gen_set, 2):
        if not w:
            continue
        g = groups.evaluate(base, w)
        p1, m1 = reps.fixed_points(g)
        for n in (2, 3):
            pn, mn = reps.fixed_points(np.linalg.matrix_power(g, n))
            assert abs(abs(p1 @ pn) - 1.0) < 1e-8
            assert abs(abs(m1 @ mn) - 1.0) < 1e-8


# ---------------------------------------------------------------- ping pong


def test_reference_is_certified():
    rep = reps.schottky_reference()
    assert rep.certified
    assert rep.kind == "schottky"
    report = reps.verify_ping_pong(rep, rep.certification)
    assert report.ok
    assert report.margin > 0.05
    assert report.failures == []
    assert report.resolution == pytest.approx(rep.certification.margin / 4.0)


def test_ping_pong_rejects_overlap(tmp_path):
    text = "d 2\ngen a\n9 0\n0 %r\ngen b\n9 0\n0 %r\n" % (1 / 9, 1 / 9)
    rep = reps.load_representation(write_rep(tmp_path, text))
    balls = {0: (E1, 0.15), 1: (E2, 0.15), 2: (E1, 0.15), 3: (E2, 0.15)}
    report = reps.verify_ping_pong(rep, reps.PingPongScheme(balls, 0.05))
    assert not report.ok
    assert any("overlap" in f for f in report.failures)


def test_ping_pong_weak_contraction_fails(tmp_path):
    # diag(2, 1/2) moves the boundary probe at angle pi/2 - 0.2 only to
    # atan(tan(pi/2 - 0.2)/4) ~ 0.89 rad, far outside a 0.2 ball around e1
    rep = reps.load_representation(write_rep(tmp_path, diag_file(2.0)))
    balls = {0: (E1, 0.2), 1: (E2, 0.2)}
    report = reps.verify_ping_pong(rep, reps.PingPongScheme(balls, 0.05))
    assert not report.ok
    assert any("contract" in f for f in report.failures)


def test_ping_pong_single_strong_generator(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, diag_file(9.0)))
    balls = {0: (E1, 0.2), 1: (E2, 0.2)}
    report = reps.verify_ping_pong(rep, reps.PingPongScheme(balls, 0.05))
    assert report.ok
    assert report.margin > 0.1


def test_ping_pong_scheme_errors(tmp_path):
    rep = reps.load_representation(write_rep(tmp_path, diag_file(9.0)))
    with pytest.raises(ValueError):
        reps.verify_ping_pong(rep, reps.PingPongScheme({0: (E1, 0.2),
                                                        1: (E2, 0.2)}, 0.0))
    with pytest.raises(DimensionMismatch):
        reps.verify_ping_pong(rep, reps.PingPongScheme({0: (E1, 0.2)}, 0.05))


def test_certified_elements_are_proximal():
    # freeness certificate promises a positive top eigenvalue gap for every
    # nontrivial element; check the whole radius-4 ball
    rep = reps.schottky_reference()
    for w in groups.enumerate_ball(rep.gen_set, 4):
        if not w:
            continue
        lam = linalg.jordan_projection(groups.evaluate(rep, w))
        assert lam[0] - lam[1] > 0.5
