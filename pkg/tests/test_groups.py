import numpy as np
import pytest
from numpy.testing import assert_allclose

from orbitcount import groups, linalg, reps
from orbitcount.errors import UnknownLabel
from orbitcount.groups import GeneratorSet

F2 = GeneratorSet(("a", "b"))
F1 = GeneratorSet(("a",))


def words_of_length(gens, m):
    return [w for w in groups.enumerate_ball(gens, m) if len(w) == m]


def random_reduced(gens, rng, max_len):
    w = tuple(rng.integers(gens.n_letters, size=rng.integers(max_len + 1)))
    return groups.reduce_word(gens, w)


def test_generator_set_labels():
    assert F2.rank == 2
    assert F2.n_letters == 4
    assert F2.label(0) == "a"
    assert F2.label(1) == "a'"
    assert F2.label(3) == "b'"
    assert F2.letter("b'") == 3
    assert F2.parse("a b' a") == (0, 3, 0)
    assert F2.format((0, 3, 0)) == "a b' a"
    for l in range(4):
        assert GeneratorSet.inverse(GeneratorSet.inverse(l)) == l
    with pytest.raises(UnknownLabel):
        F2.letter("c")
    with pytest.raises(UnknownLabel):
        F2.label(4)
    with pytest.raises(UnknownLabel):
        GeneratorSet(("a", "a"))
    with pytest.raises(UnknownLabel):
        GeneratorSet(("x'",))
    with pytest.raises(UnknownLabel):
        GeneratorSet(())


def test_reduce_word():
    assert groups.reduce_word(F2, F2.parse("a a' b")) == F2.parse("b")
    assert groups.reduce_word(F2, ()) == ()
    assert groups.reduce_word(F2, F2.parse("a b b' a")) == F2.parse("a a")
    rng = np.random.default_rng(0)
    for _ in range(200):
        w = tuple(rng.integers(4, size=12))
        r = groups.reduce_word(F2, w)
        assert groups.reduce_word(F2, r) == r
        assert all(x != y ^ 1 for x, y in zip(r, r[1:]))
    with pytest.raises(UnknownLabel):
        groups.reduce_word(F2, (0, 9))


def test_ball_sizes():
    assert sum(1 for _ in groups.enumerate_ball(F2, 0)) == 1
    assert sum(1 for _ in groups.enumerate_ball(F2, 2)) == 17
    assert sum(1 for _ in groups.enumerate_ball(F2, 3)) == 53
    # sphere of length k has 2n (2n-1)^(k-1) reduced words at rank n
    for gens, n in ((F2, 2), (GeneratorSet(("a", "b", "c")), 3)):
        for k in (1, 2, 3, 4):
            assert len(words_of_length(gens, k)) == 2 * n * (2 * n - 1) ** (k - 1)
    with pytest.raises(ValueError):
        list(groups.enumerate_ball(F2, -1))


def test_ball_order_and_uniqueness():
    ball = list(groups.enumerate_ball(F2, 4))
    assert len(set(ball)) == len(ball)
    assert ball == sorted(ball, key=lambda w: (len(w), w))
    assert ball[:8] == [
        (), (0,), (1,), (2,), (3,), (0, 0), (0, 2), (0, 3)
    ]


def test_canonical_rotation():
    assert groups.canonical_rotation((2, 0, 3)) == (0, 3, 2)
    assert groups.canonical_rotation(()) == ()
    assert groups.canonical_rotation((1,)) == (1,)
    rng = np.random.default_rng(1)
    for _ in range(100):
        w = tuple(rng.integers(4, size=6))
        c = groups.canonical_rotation(w)
        k = rng.integers(6)
        assert groups.canonical_rotation(w[k:] + w[:k]) == c


def test_cyclic_reduce_examples():
    core, conj = groups.cyclic_reduce(F2.parse("a b a'"))
    assert core == F2.parse("b")
    assert conj == F2.parse("a")
    core, conj = groups.cyclic_reduce(F2.parse("a b"))
    assert core == F2.parse("a b") and conj == ()
    assert groups.cyclic_reduce(()) == ((), ())
    # conjugator absorbs both stripping and the canonical rotation
    core, conj = groups.cyclic_reduce(F2.parse("a' b a a"))
    assert core == F2.parse("a b")
    rebuilt = groups.reduce_word(F2, conj + core + groups.invert_word(conj))
    assert rebuilt == F2.parse("a' b a a")


def test_cyclic_reduce_identity_on_random_words():
    rng = np.random.default_rng(2)
    for _ in range(300):
        w = random_reduced(F2, rng, 10)
        core, conj = groups.cyclic_reduce(w)
        assert groups.reduce_word(F2, conj + core + groups.invert_word(conj)) == w
        if len(core) >= 2:
            assert core[0] != core[-1] ^ 1
        assert groups.canonical_rotation(core) == core


def test_invert_word():
    assert groups.invert_word(F2.parse("a b a'")) == F2.parse("a b' a'")
    rng = np.random.default_rng(3)
    for _ in range(100):
        w = random_reduced(F2, rng, 8)
        assert groups.invert_word(groups.invert_word(w)) == w
        assert groups.reduce_word(F2, w + groups.invert_word(w)) == ()


def test_is_primitive():
    assert groups.is_primitive(F2.parse("a b"))
    assert not groups.is_primitive(F2.parse("a b a b"))
    assert groups.is_primitive(F2.parse("a a b"))
    assert not groups.is_primitive(())
    assert groups.is_primitive((0,))
    assert not groups.is_primitive((0, 0, 0))


def test_powers_of_primitives_are_not_primitive():
    for w in groups.enumerate_primitive_classes(F2, 3):
        for n in (2, 3, 4):
            core, _ = groups.cyclic_reduce(w * n)
            assert not groups.is_primitive(core)


def brute_force_classes(gens, m):
    seen = set()
    out = []
    for w in words_of_length(gens, m):
        if m >= 2 and w[0] == w[-1] ^ 1:
            continue
        c = groups.canonical_rotation(w)
        if c not in seen:
            seen.add(c)
            if groups.is_primitive(c):
                out.append(c)
    return out


def test_primitive_class_counts():
    classes = list(groups.enumerate_primitive_classes(F2, 2))
    assert len(classes) == 8
    assert set(classes[:4]) == {(0,), (1,), (2,), (3,)}
    assert set(classes[4:]) == {(0, 2), (0, 3), (1, 2), (1, 3)}
    assert list(groups.enumerate_primitive_classes(F1, 3)) == [(0,), (1,)]
    # against plain enumeration with rotation dedup
    got = list(groups.enumerate_primitive_classes(F2, 6))
    want = [c for m in range(1, 7) for c in brute_force_classes(F2, m)]
    assert sorted(got, key=lambda w: (len(w), w)) == sorted(
        want, key=lambda w: (len(w), w)
    )
    assert len(set(got)) == len(got)


def test_evaluate():
    rep = reps.schottky_reference()
    assert_allclose(groups.evaluate(rep, ()), np.eye(2))
    assert_allclose(groups.evaluate(rep, F2.parse("a a'")), np.eye(2), atol=1e-12)
    ab = groups.evaluate(rep, F2.parse("a b"))
    assert_allclose(ab, rep.gens["a"] @ rep.gens["b"], atol=1e-12)
    with pytest.raises(UnknownLabel):
        groups.evaluate(rep, (7,))


def test_evaluate_respects_reduction():
    rep = reps.schottky_reference()
    rng = np.random.default_rng(4)
    for _ in range(1000):
        w = tuple(rng.integers(4, size=rng.integers(9)))
        full = groups.evaluate(rep, w)
        red = groups.evaluate(rep, groups.reduce_word(F2, w))
        tol = 1e-10 * max(1, len(w)) * max(1.0, np.abs(full).max())
        assert np.abs(full - red).max() < tol


def test_spectral_radius_is_a_class_function():
    rep = reps.schottky_reference()
    rng = np.random.default_rng(5)
    for _ in range(100):
        w = random_reduced(F2, rng, 6)
        if not w:
            continue
        g = random_reduced(F2, rng, 4)
        conj = groups.reduce_word(F2, g + w + groups.invert_word(g))
        lhs = linalg.spectral_radius_log(groups.evaluate(rep, conj))
        rhs = linalg.spectral_radius_log(groups.evaluate(rep, w))
        assert abs(lhs - rhs) < 1e-8
