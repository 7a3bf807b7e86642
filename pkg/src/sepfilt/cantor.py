"""Finite-level model of a measured group action on a Cantor fiber.

The fiber is a finite quotient of size N with the uniform probability
measure; generators act by permutations, so invariance is automatic.  Group
elements are words in the generators.  Thick orbits pair a clopen subset of
the fiber with a bounded cell set in declared fundamental-domain (lattice)
coordinates; per-generator translation vectors make geometric overlap tests
computable for the lattice fixtures used here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ActionIncomplete, PartitionInvalid

IDENTITY = ()


def word(*steps):
    """Build a group word from (generator, power) steps or bare names."""
    out = []
    for step in steps:
        if isinstance(step, str):
            out.append((step, 1))
        else:
            name, power = step
            out.append((name, int(power)))
    return tuple(out)


def invert_word(w):
    return tuple((name, -power) for name, power in reversed(w))


class ClopenAlgebra:
    """Uniformly measured finite quotient with a permutation action.

    ``generators`` maps a name to a permutation given as the image list;
    ``translations`` optionally maps each generator to its displacement in
    the fundamental-domain lattice.  ``relation_words`` are words that must
    act as the identity; they are verified at construction.
    """

    def __init__(self, level_size, generators, translations=None, relation_words=()):
        if level_size < 1:
            raise ValueError("level size must be positive")
        self.level_size = int(level_size)
        self.generators = {}
        self._inverses = {}
        for name, images in dict(generators).items():
            perm = tuple(int(x) for x in images)
            if sorted(perm) != list(range(self.level_size)):
                raise ValueError(f"generator {name!r} is not a permutation")
            self.generators[name] = perm
            inverse = [0] * self.level_size
            for source, target in enumerate(perm):
                inverse[target] = source
            self._inverses[name] = tuple(inverse)
        self.translations = None
        if translations is not None:
            self.translations = {
                name: tuple(vec) for name, vec in dict(translations).items()
            }
            missing = set(self.generators) - set(self.translations)
            if missing:
                raise ValueError(f"translations missing for {sorted(missing)}")
        self.relation_words = tuple(word(*w) if not _is_word(w) else w
                                    for w in relation_words)
        for w in self.relation_words:
            for x in range(self.level_size):
                if self.act(w, x) != x:
                    raise ValueError(f"relation word {w} does not act trivially")

    def points(self):
        return range(self.level_size)

    def full_set(self):
        return frozenset(self.points())

    def measure(self, subset):
        return Fraction(len(subset), self.level_size)

    def act(self, w, x):
        """Apply a word to one point, rightmost letter first."""
        for name, power in reversed(w):
            table = self.generators if power > 0 else self._inverses
            if name not in table:
                raise ActionIncomplete(f"unknown generator {name!r}")
            perm = table[name]
            for _ in range(abs(power)):
                x = perm[x]
        return x

    def act_set(self, w, subset):
        return frozenset(self.act(w, x) for x in subset)

    def translation(self, w):
        """Displacement of a word in the declared lattice coordinates."""
        if self.translations is None:
            raise ActionIncomplete("no translation coordinates declared")
        total = None
        for name, power in w:
            vec = self.translations.get(name)
            if vec is None:
                raise ActionIncomplete(f"unknown generator {name!r}")
            if total is None:
                total = [0] * len(vec)
            for i, value in enumerate(vec):
                total[i] += power * value
        if total is None:
            sample = next(iter(self.translations.values()), ())
            total = [0] * len(sample)
        return tuple(total)

    def word_for_translation(self, vec):
        """A word realizing a lattice displacement (abelian coordinates)."""
        if self.translations is None:
            raise ActionIncomplete("no translation coordinates declared")
        names = sorted(self.translations)
        axes = {}
        for name in names:
            t = self.translations[name]
            nonzero = [i for i, v in enumerate(t) if v]
            if len(nonzero) != 1 or t[nonzero[0]] not in (1, -1):
                raise ActionIncomplete(
                    "word_for_translation needs unit-axis generators"
                )
            axes.setdefault(nonzero[0], (name, t[nonzero[0]]))
        out = []
        for i, value in enumerate(vec):
            if value == 0:
                continue
            if i not in axes:
                raise ActionIncomplete(f"no generator moves along axis {i}")
            name, direction = axes[i]
            out.append((name, value * direction))
        return tuple(out)

    def to_json(self):
        return {
            "level_size": self.level_size,
            "generators": {k: list(v) for k, v in sorted(self.generators.items())},
            "translations": (
                {k: list(v) for k, v in sorted(self.translations.items())}
                if self.translations
                else None
            ),
            "relation_words": [list(map(list, w)) for w in self.relation_words],
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            data["level_size"],
            data["generators"],
            translations=data.get("translations"),
            relation_words=[
                tuple((name, power) for name, power in w)
                for w in data.get("relation_words", ())
            ],
        )

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_json(json.load(handle))


def _is_word(w):
    return isinstance(w, tuple) and all(
        isinstance(step, tuple) and len(step) == 2 for step in w
    )


def cyclic_action(level_size):
    """The +1 shift on Z/N with unit lattice translation."""
    perm = [(x + 1) % level_size for x in range(level_size)]
    return ClopenAlgebra(level_size, {"s": perm}, translations={"s": (1,)})


def grid_action(width, height=None):
    """Independent coordinate shifts on (Z/w) x (Z/h) with unit translations."""
    height = width if height is None else height
    size = width * height

    def index(i, j):
        return (i % width) * height + (j % height)

    horizontal = [index(i + 1, j) for i in range(width) for j in range(height)]
    vertical = [index(i, j + 1) for i in range(width) for j in range(height)]
    return ClopenAlgebra(
        size,
        {"h": horizontal, "v": vertical},
        translations={"h": (1, 0), "v": (0, 1)},
    )


@dataclass(frozen=True)
class ThickOrbit:
    """A clopen set paired with bounded cells in lattice coordinates.

    ``cell_volumes`` carries the d-volume of each base cell (1.0 when
    omitted).  ``overlap_words`` declares the nonidentity words whose
    translate of the cell set meets the cell set itself; when the orbit is
    declared non-self-intersecting those words must move the clopen set off
    itself, which is verified at construction.
    """

    algebra: ClopenAlgebra
    clopen: frozenset
    cells: frozenset
    dim: int
    cell_volumes: dict = field(default_factory=dict)
    overlap_words: tuple = ()
    non_self_intersecting: bool = False

    def __post_init__(self):
        object.__setattr__(self, "clopen", frozenset(self.clopen))
        object.__setattr__(
            self, "cells", frozenset(tuple(cell) for cell in self.cells)
        )
        if self.non_self_intersecting:
            for w in self.overlap_words:
                moved = self.algebra.act_set(w, self.clopen)
                if moved & self.clopen:
                    raise PartitionInvalid(
                        f"translate {w} of the thick set meets itself"
                    )

    def base_area(self):
        return float(
            sum(self.cell_volumes.get(cell, 1.0) for cell in self.cells)
        )

    def translated_cells(self, w):
        vec = self.algebra.translation(w)
        return frozenset(
            tuple(c + v for c, v in zip(cell, vec)) for cell in self.cells
        )


def thick_area(orbit, d):
    """Measure-weighted area mu(A) * Area_d(S) of a thick orbit."""
    if d != orbit.dim:
        raise ValueError(f"orbit is {orbit.dim}-dimensional, not {d}")
    return float(orbit.algebra.measure(orbit.clopen)) * orbit.base_area()


def relevant_translates(orbit, ball_cells):
    """Lattice displacements whose translate of the orbit's cells meets the ball."""
    ball = {tuple(cell) for cell in ball_cells}
    if not ball or not orbit.cells:
        return []
    vectors = set()
    for target in ball:
        for source in orbit.cells:
            vectors.add(tuple(t - s for t, s in zip(target, source)))
    hits = []
    for vec in sorted(vectors):
        translated = frozenset(
            tuple(c + v for c, v in zip(cell, vec)) for cell in orbit.cells
        )
        if translated & ball:
            hits.append(vec)
    return hits


def pattern_partition(orbits, ball_cells):
    """Partition the fiber so each part sees one thick-orbit pattern.

    Points land in the same part exactly when they belong to the same sets
    gamma A_j over all translates gamma whose cells meet the ball; the parts
    are the fibers of that membership vector, i.e. the atoms of the algebra
    the translates generate.
    """
    if not orbits:
        return [frozenset(range(0))]
    algebra = orbits[0].algebra
    membership_sets = []
    for orbit in orbits:
        for vec in relevant_translates(orbit, ball_cells):
            w = algebra.word_for_translation(vec)
            membership_sets.append(algebra.act_set(w, orbit.clopen))
    keys = {}
    for x in algebra.points():
        key = tuple(x in s for s in membership_sets)
        keys.setdefault(key, []).append(x)
    return [frozenset(keys[key]) for key in sorted(keys)]


def independent_partition(overlap_words, algebra):
    """Clopen parts X_1..X_m with gamma X_j disjoint from X_j for gamma in F.

    Realized as a greedy proper coloring (largest degree first, index ties)
    of the graph joining x to gamma x; m need not be minimal.  Words acting
    as the identity are ignored.
    """
    moving = []
    for w in overlap_words:
        if any(algebra.act(w, x) != x for x in algebra.points()):
            moving.append(w)
    edges = set()
    for w in moving:
        for x in algebra.points():
            y = algebra.act(w, x)
            if y != x:
                edges.add((min(x, y), max(x, y)))
    neighbors = {x: set() for x in algebra.points()}
    for a, b in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    order = sorted(algebra.points(), key=lambda x: (-len(neighbors[x]), x))
    color = {}
    for x in order:
        used = {color[y] for y in neighbors[x] if y in color}
        c = 0
        while c in used:
            c += 1
        color[x] = c
    m = max(color.values()) + 1 if color else 1
    parts = [
        frozenset(x for x in algebra.points() if color[x] == c) for c in range(m)
    ]
    for part in parts:
        for w in moving:
            if algebra.act_set(w, part) & part:
                raise PartitionInvalid(
                    f"part {sorted(part)} is not independent under {w}"
                )
    return parts


@dataclass(frozen=True)
class PackingOutcome:
    """Result of the greedy equivariant packing with its growth stages."""

    chosen: frozenset
    stages: tuple

    @property
    def measure_positive(self):
        return len(self.chosen) > 0


def greedy_equivariant_packing(clopen, ball_cells, overlap_words, parts, algebra):
    """Grow a maximal subset of the clopen set with disjoint ball translates.

    Stage j adds the part of A inside X_j that meets no translate (over the
    overlap words F) of what was already chosen.  The result E satisfies:
    the translates gamma(E x B) are pairwise disjoint, every rejected point
    of A meets the orbit of E x B, and E inherits positive measure from A.
    """
    clopen = frozenset(clopen)
    full = algebra.full_set()
    union = frozenset().union(*parts) if parts else frozenset()
    if union != full:
        raise PartitionInvalid("parts do not cover the fiber")
    moving = [
        w
        for w in overlap_words
        if any(algebra.act(w, x) != x for x in algebra.points())
    ]
    for part in parts:
        for w in moving:
            if algebra.act_set(w, part) & part:
                raise PartitionInvalid(
                    f"part {sorted(part)} is not independent under {w}"
                )
    current = frozenset()
    stages = [current]
    for part in parts:
        forbidden = set()
        for w in overlap_words:
            forbidden |= algebra.act_set(w, current)
        current = current | ((clopen & part) - forbidden)
        stages.append(current)
    return PackingOutcome(current, tuple(stages))


def thick_rainbow_weight(z0_orbits, dimension):
    """Weighted rainbow total 2^n sum_i mu(A_i) c_i of a projected 0-level.

    Each entry pairs the clopen set of a 0-level thick orbit with the number
    of points it contributes per sheet.
    """
    total = Fraction(0)
    for clopen_or_orbit, count in z0_orbits:
        if isinstance(clopen_or_orbit, ThickOrbit):
            measure = clopen_or_orbit.algebra.measure(clopen_or_orbit.clopen)
        else:
            clopen, algebra = clopen_or_orbit
            measure = algebra.measure(clopen)
        total += measure * count
    return Fraction(2**dimension) * total


def parametrized_l1_norm(thick_chain, algebra):
    """Sum of |integral of f_i| over the chain's clopen-integer coefficients.

    Each term is (f, simplex) with f a length-N integer sequence (or a dict
    point -> value); the simplices must not be translates of one another,
    which the caller certifies.  Integrals are exact rationals.
    """
    total = Fraction(0)
    for f, _simplex in thick_chain:
        if isinstance(f, dict):
            integral = Fraction(sum(f.values()), algebra.level_size)
        else:
            values = list(f)
            if len(values) != algebra.level_size:
                raise ValueError("coefficient function has the wrong length")
            integral = Fraction(sum(values), algebra.level_size)
        total += abs(integral)
    return total
