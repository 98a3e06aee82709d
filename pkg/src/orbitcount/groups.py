"""Reduced words, balls and conjugacy classes of a free group.

Letters are small integers: generator ``i`` is ``2*i`` and its inverse is
``2*i + 1``, so ``letter ^ 1`` inverts.  Words are tuples of letters; the
alphabet order ``a < a' < b < b' < ...`` fixes the length-then-lexicographic
enumeration order.  A cyclic word is stored as the lexicographically least
rotation of its cyclically reduced core.
"""

from __future__ import annotations

from typing import Iterator, Sequence, Tuple

import numpy as np

from .errors import UnknownLabel

Word = Tuple[int, ...]


class GeneratorSet:
    """Free generating set with formal inverses.

    The inverse of label ``x`` is written ``x'``; labels therefore must not
    end with an apostrophe themselves.
    """

    def __init__(self, labels: Sequence[str]):
        labels = tuple(labels)
        if not labels:
            raise UnknownLabel("generator set needs at least one label")
        if len(set(labels)) != len(labels):
            raise UnknownLabel("generator labels must be distinct")
        for lab in labels:
            if not lab or lab.endswith("'"):
                raise UnknownLabel("bad generator label %r" % (lab,))
        self.labels = labels

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def n_letters(self) -> int:
        return 2 * len(self.labels)

    @staticmethod
    def inverse(letter: int) -> int:
        return letter ^ 1

    def label(self, letter: int) -> str:
        if not 0 <= letter < self.n_letters:
            raise UnknownLabel("letter %r out of range" % (letter,))
        base = self.labels[letter >> 1]
        return base + "'" if letter & 1 else base

    def letter(self, token: str) -> int:
        inv = token.endswith("'")
        base = token[:-1] if inv else token
        try:
            idx = self.labels.index(base)
        except ValueError:
            raise UnknownLabel("unknown generator label %r" % (token,)) from None
        return 2 * idx + (1 if inv else 0)

    def parse(self, text: str) -> Word:
        """Parse a whitespace-separated word like ``"a b' a"``."""
        return tuple(self.letter(tok) for tok in text.split())

    def format(self, word: Sequence[int]) -> str:
        return " ".join(self.label(l) for l in word)

    def validate(self, word: Sequence[int]) -> Word:
        word = tuple(int(l) for l in word)
        for l in word:
            if not 0 <= l < self.n_letters:
                raise UnknownLabel("letter %r out of range" % (l,))
        return word


def reduce_word(gens: GeneratorSet, word: Sequence[int]) -> Word:
    """Free reduction: cancel adjacent inverse pairs until none remain."""
    word = gens.validate(word)
    out: list[int] = []
    for l in word:
        if out and out[-1] == l ^ 1:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def _extend(gens: GeneratorSet, prefix: list, remaining: int) -> Iterator[Word]:
    if remaining == 0:
        yield tuple(prefix)
        return
    last = prefix[-1] if prefix else None
    for l in range(gens.n_letters):
        if last is not None and l == last ^ 1:
            continue
        prefix.append(l)
        yield from _extend(gens, prefix, remaining - 1)
        prefix.pop()


def enumerate_ball(gens: GeneratorSet, L: int) -> Iterator[Word]:
    """All reduced words of length <= L, in length-then-lexicographic order.

    The sphere of length k >= 1 has ``2n (2n-1)**(k-1)`` words for rank n.
    """
    if L < 0:
        raise ValueError("ball radius must be >= 0")
    for n in range(L + 1):
        yield from _extend(gens, [], n)


def canonical_rotation(word: Sequence[int]) -> Word:
    """Lexicographically least rotation of ``word``."""
    w = tuple(word)
    if len(w) <= 1:
        return w
    return min(w[i:] + w[:i] for i in range(len(w)))


def cyclic_reduce(word: Sequence[int]) -> Tuple[Word, Word]:
    """Split a reduced word as ``conjugator * core * conjugator^-1``.

    The core is returned as its lexicographically least rotation and the
    conjugator absorbs the rotation, so the group identity
    ``word = conjugator + core + inverse(conjugator)`` holds exactly after
    free reduction.  The empty word has empty core and conjugator.
    """
    w = tuple(int(l) for l in word)
    head: list[int] = []
    while len(w) >= 2 and w[0] == w[-1] ^ 1:
        head.append(w[0])
        w = w[1:-1]
    core = canonical_rotation(w)
    if core != w:
        # core is w rotated by r; fold the rotation into the conjugator
        for r in range(1, len(w)):
            if w[r:] + w[:r] == core:
                head.extend(w[:r])
                break
    return core, tuple(head)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(l ^ 1 for l in reversed(word))


def is_primitive(core: Sequence[int]) -> bool:
    """True iff the cyclic word is not a proper power.

    A canonical rotation of a proper power is itself periodic, so checking
    word-level periods over proper divisors of the length suffices.
    """
    w = tuple(core)
    m = len(w)
    if m == 0:
        return False
    for p in range(1, m):
        if m % p == 0 and w[:p] * (m // p) == w:
            return False
    return True


def enumerate_primitive_classes(gens: GeneratorSet, L: int) -> Iterator[Word]:
    """Primitive conjugacy classes with cyclically reduced length <= L.

    Yields each class exactly once as its canonical cyclic word, ordered by
    (length, lexicographic).  Classes of gamma and gamma^-1 are distinct.
    """
    for m in range(1, L + 1):
        seen = set()
        for w in _extend(gens, [], m):
            if m >= 2 and w[0] == w[-1] ^ 1:
                continue  # not cyclically reduced
            c = canonical_rotation(w)
            if c in seen:
                continue
            seen.add(c)
            if is_primitive(c):
                yield c


def evaluate(rep, word: Sequence[int]) -> np.ndarray:
    """Ordered product of generator matrices for ``word`` under ``rep``.

    The empty word gives the identity.  ``rep`` provides ``dim`` and
    ``letter_mats`` aligned with the letter indices of its generator set.
    """
    word = rep.gen_set.validate(word)
    out = np.eye(rep.dim)
    for l in word:
        out = out @ rep.letter_mats[l]
    return out
