"""Words over signed generator alphabets.

A word is a tuple of nonzero ints: ``+i`` is generator ``i`` (1-based) and
``-i`` its inverse. Letters are ordered a < a' < b < b' < ..., which fixes the
lexicographic order used for canonical forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple


def letter_key(x: int) -> int:
    return 2 * abs(x) + (x < 0)


def word_key(w: Sequence[int]) -> tuple:
    return tuple(2 * abs(x) + (x < 0) for x in w)


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def free_reduce(w: Iterable[int]) -> Word:
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def rotations(w: Sequence[int]) -> list:
    w = tuple(w)
    return [w[i:] + w[:i] for i in range(len(w))] if w else []


def least_rotation_index(keys: Sequence[int]) -> int:
    """Booth's algorithm: start index of the lexicographically least rotation."""
    s = list(keys) * 2
    n = len(keys)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n if n else 0


def cyclic_normalize(w: Sequence[int]) -> Word:
    """Least rotation of the cyclic reduction of ``w``."""
    c = cyclic_reduce(w)
    if not c:
        return c
    k = least_rotation_index(word_key(c))
    return c[k:] + c[:k]


def orbit(w: Sequence[int]) -> frozenset:
    """All rotations of ``w`` and of its inverse (``w`` cyclically reduced)."""
    w = tuple(w)
    return frozenset(rotations(w)) | frozenset(rotations(inverse(w)))


@dataclass(frozen=True)
class WordSet:
    words: frozenset = frozenset()
    closed: bool = False

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(sorted(self.words, key=lambda w: (len(w), word_key(w))))

    def representatives(self) -> list:
        """One canonical word per rotation/inversion orbit, sorted."""
        reps = set()
        for w in self.words:
            c = cyclic_normalize(w)
            reps.add(min(c, cyclic_normalize(inverse(c)), key=word_key))
        return sorted(reps, key=lambda w: (len(w), word_key(w)))


def close_word_set(W) -> WordSet:
    words = W.words if isinstance(W, WordSet) else W
    out = set()
    for w in words:
        if w not in out:
            out |= orbit(w)
    return WordSet(frozenset(out), closed=True)


def commutator(x: Sequence[int], y: Sequence[int]) -> Word:
    return free_reduce(tuple(x) + tuple(y) + inverse(x) + inverse(y))


# ---------------------------------------------------------------------------
# text format


class PresentationSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int = -1):
        super().__init__(f"{msg} (at position {pos})" if pos >= 0 else msg)
        self.pos = pos


@dataclass(frozen=True)
class Presentation:
    names: tuple
    relators: tuple = ()
    parabolics: tuple = field(default=())

    @property
    def generator_count(self) -> int:
        return len(self.names)

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise ValueError("presentation needs at least one generator")
        if len(set(self.names)) != n:
            raise ValueError("duplicate generator names")
        for r in self.relators:
            if not r:
                raise ValueError("empty relator")
            if any(x == 0 or abs(x) > n for x in r):
                raise ValueError(f"relator uses unknown generator: {r}")
        seen = set()
        for p in self.parabolics:
            if not p or any(i < 1 or i > n for i in p):
                raise ValueError(f"bad parabolic generator subset {sorted(p)}")
            if p in seen:
                raise ValueError(f"repeated parabolic subset {sorted(p)}")
            seen.add(p)


_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


class _Parser:
    def __init__(self, text: str, names: Sequence[str] = ()):
        self.s = text
        self.i = 0
        self.names = list(names)
        self.index = {nm: k + 1 for k, nm in enumerate(self.names)}

    def err(self, msg):
        raise PresentationSyntaxError(msg, self.i)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self):
        self.ws()
        return self.s[self.i] if self.i < len(self.s) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.err(f"expected {ch!r}")
        self.i += 1

    def keyword(self, kw) -> bool:
        self.ws()
        m = _NAME.match(self.s, self.i)
        if m and m.group() == kw:
            self.i = m.end()
            return True
        return False

    def name(self) -> str:
        self.ws()
        m = _NAME.match(self.s, self.i)
        if not m:
            self.err("expected a name")
        self.i = m.end()
        return m.group()

    def generator(self) -> int:
        # longest declared name that prefixes the remaining input
        self.ws()
        m = _NAME.match(self.s, self.i)
        if not m:
            self.err("expected a generator")
        run = m.group()
        for L in range(len(run), 0, -1):
            if run[:L] in self.index:
                self.i += L
                return self.index[run[:L]]
        self.err(f"unknown generator {run!r}")

    def integer(self) -> int:
        self.ws()
        m = re.compile(r"[+-]?\d+").match(self.s, self.i)
        if not m:
            self.err("expected an integer")
        self.i = m.end()
        return int(m.group())

    def atom(self) -> Word:
        ch = self.peek()
        if ch == "(":
            self.i += 1
            w = self.word()
            self.expect(")")
            return w
        if ch == "[":
            self.i += 1
            x = self.word()
            self.expect(",")
            y = self.word()
            self.expect("]")
            return commutator(x, y)
        if ch == "1" and not self.s[self.i + 1:self.i + 2].isdigit():
            self.i += 1
            return ()
        return (self.generator(),)

    def factor(self) -> Word:
        w = self.atom()
        while True:
            ch = self.peek()
            if ch == "'":
                self.i += 1
                w = inverse(w)
            elif ch == "^":
                self.i += 1
                k = self.integer()
                w = (w if k >= 0 else inverse(w)) * abs(k)
            else:
                return w

    def word(self) -> Word:
        parts = []
        while True:
            ch = self.peek()
            if ch and (ch in "([" or ch.isalpha() or ch == "1"):
                parts.append(self.factor())
            else:
                break
        if not parts:
            self.err("expected a word")
        return free_reduce(x for p in parts for x in p)

    def at_end(self):
        return self.peek() == ""


def parse_word(text: str, names: Sequence[str]) -> Word:
    p = _Parser(text, names)
    w = p.word()
    if not p.at_end():
        p.err("trailing input")
    return w


def parse_presentation(text: str) -> Presentation:
    p = _Parser(text)
    if not p.keyword("gens"):
        p.err("expected 'gens'")
    names = [p.name()]
    while p.peek() == ",":
        p.i += 1
        names.append(p.name())
    if len(set(names)) != len(names):
        p.err("duplicate generator name")
    p.names = names
    p.index = {nm: k + 1 for k, nm in enumerate(names)}
    relators, parabolics = [], []
    while p.peek() == ";":
        p.i += 1
        if p.at_end():
            break
        if p.keyword("rel"):
            while True:
                start = p.i
                r = cyclic_reduce(p.word())
                if not r:
                    raise PresentationSyntaxError("relator is empty after reduction", start)
                relators.append(r)
                if p.peek() != ",":
                    break
                p.i += 1
        elif p.keyword("par"):
            while True:
                start = p.i
                p.expect("{")
                sub = {p.generator()}
                while p.peek() == ",":
                    p.i += 1
                    sub.add(p.generator())
                p.expect("}")
                sub = frozenset(sub)
                if sub in parabolics:
                    raise PresentationSyntaxError("repeated parabolic subset", start)
                parabolics.append(sub)
                if p.peek() != ",":
                    break
                p.i += 1
        else:
            p.err("expected 'rel' or 'par'")
    if not p.at_end():
        p.err("unexpected input")
    return Presentation(tuple(names), tuple(relators), tuple(parabolics))


def format_word(w: Sequence[int], names: Sequence[str]) -> str:
    if not w:
        return "1"
    sep = "" if all(len(nm) == 1 for nm in names) else " "
    out = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        tok = names[abs(w[i]) - 1] + ("'" if w[i] < 0 else "")
        out.append(tok if j - i == 1 else f"{tok}^{j - i}")
        i = j
    return sep.join(out)


def format_presentation(P: Presentation) -> str:
    text = "gens " + ",".join(P.names)
    if P.relators:
        text += "; rel " + ",".join(format_word(r, P.names) for r in P.relators)
    if P.parabolics:
        subs = ["{" + ",".join(P.names[i - 1] for i in sorted(s)) + "}" for s in P.parabolics]
        text += "; par " + ",".join(subs)
    return text


def read_word_set(text: str, names: Sequence[str]) -> WordSet:
    words = [parse_word(line, names) for line in text.splitlines() if line.strip()]
    return WordSet(frozenset(words))


def write_word_set(W: WordSet, names: Sequence[str]) -> str:
    return "".join(format_word(w, names) + "\n" for w in W)
