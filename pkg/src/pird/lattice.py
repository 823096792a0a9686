"""Redundancy lattice of source antichains.

The nodes of the lattice are *atoms*: collections of source-index subsets in
which no subset contains another (antichains under set inclusion). Atoms are
partially ordered by the Williams-Beer relation, and redundancy values
assigned to atoms are converted into partial-information values by Moebius
inversion over that order.

Source indices are 1-based (``1..M``) everywhere in this module; the mapping
from atom indices to actual data channels is the caller's concern.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import ArgumentError, CapabilityError

#: Largest supported number of sources. The atom count follows the Dedekind
#: numbers minus two (1, 4, 18, 166, 7579, ...), so anything beyond 4 is both
#: slow to build and useless to interpret.
M_MAX = 4

_ATOM_COUNTS = {1: 1, 2: 4, 3: 18, 4: 166}


@dataclass(frozen=True)
class Atom:
    """A canonicalized antichain of source-index sets.

    Parameters
    ----------
    elements : iterable of iterables of int
        The source-index sets. Canonicalization sorts each set ascending
        and the sets lexicographically, so two atoms built from the same
        sets in any order compare equal and hash alike.

    Raises
    ------
    ArgumentError
        If an element is empty, an index is < 1, or one element is a
        subset of another (antichain violation).
    """

    elements: tuple[tuple[int, ...], ...]

    def __init__(self, elements: Iterable[Iterable[int]]):
        canon = sorted(tuple(sorted(set(el))) for el in elements)
        object.__setattr__(self, "elements", tuple(canon))
        if not self.elements:
            raise ArgumentError("an atom needs at least one element")
        for el in self.elements:
            if not el:
                raise ArgumentError("atom elements must be nonempty index sets")
            if el[0] < 1:
                raise ArgumentError(f"source indices are 1-based, got {el}")
        for a, b in combinations(self.elements, 2):
            if set(a) <= set(b) or set(b) <= set(a):
                raise ArgumentError(
                    f"not an antichain: {set(a)} and {set(b)} are nested"
                )

    def __str__(self) -> str:
        return "".join("{" + "".join(str(i) for i in el) + "}" for el in self.elements)

    def __repr__(self) -> str:
        return f"Atom({self})"


def precedes(a: Atom, b: Atom) -> bool:
    """Williams-Beer partial order: ``a`` precedes ``b`` iff every element
    of ``b`` has some element of ``a`` as a subset.

    The relation is reflexive, antisymmetric and transitive on canonical
    atoms over a common source set.
    """
    return all(
        any(set(ai) <= set(bj) for ai in a.elements) for bj in b.elements
    )


@dataclass(frozen=True)
class RedundancyLattice:
    """All antichain atoms over ``m`` sources with their partial order.

    ``atoms`` is stored in a fixed linear extension of the order (atoms
    sorted by strict-down-set size, ties broken by element tuples), so a
    single forward pass suffices for the Moebius recursion. ``down_sets``
    holds, for each atom, the indices of its strict predecessors.

    Instances are immutable and safe to share across threads.
    """

    m: int
    atoms: tuple[Atom, ...]
    down_sets: tuple[tuple[int, ...], ...]
    _index: dict[Atom, int] = field(repr=False, hash=False, compare=False, default_factory=dict)

    def __post_init__(self):
        self._index.update({atom: i for i, atom in enumerate(self.atoms)})

    def __len__(self) -> int:
        return len(self.atoms)

    def index(self, atom: Atom) -> int:
        """Position of ``atom`` in :attr:`atoms`.

        Raises
        ------
        ArgumentError
            If the atom does not belong to this lattice (wrong ``m``).
        """
        try:
            return self._index[atom]
        except KeyError:
            raise ArgumentError(
                f"atom {atom} is not part of the lattice over M={self.m} sources"
            ) from None

    @property
    def top(self) -> Atom:
        """The greatest atom: the full source set as a single element."""
        return Atom([tuple(range(1, self.m + 1))])

    @property
    def bottom(self) -> Atom:
        """The least atom: all singletons."""
        return Atom([(i,) for i in range(1, self.m + 1)])

    def precedes(self, a: Atom, b: Atom) -> bool:
        """Partial-order test with membership validation (both atoms must
        belong to this lattice, which catches mismatched source counts)."""
        self.index(a)
        self.index(b)
        return precedes(a, b)

    def invert_values(self, redundancy: np.ndarray) -> np.ndarray:
        """Moebius-invert an array of redundancy values into PI values.

        Parameters
        ----------
        redundancy : ndarray
            First axis indexes atoms in :attr:`atoms` order; any trailing
            axes (e.g. a frequency grid) are carried through elementwise.

        Returns
        -------
        ndarray
            Same shape, PI values satisfying
            ``redundancy[a] == sum(pi[b] for b preceding-or-equal a)``.
        """
        red = np.asarray(redundancy, dtype=float)
        if red.shape[0] != len(self.atoms):
            raise ArgumentError(
                f"expected {len(self.atoms)} redundancy rows, got {red.shape[0]}"
            )
        if not np.all(np.isfinite(red)):
            raise ArgumentError("redundancy values must be finite")
        pi = np.empty_like(red)
        for i, below in enumerate(self.down_sets):
            if below:
                pi[i] = red[i] - pi[list(below)].sum(axis=0)
            else:
                pi[i] = red[i]
        return pi

    def coarse_group(self, atom: Atom) -> str:
        """Label of an atom in the unique/redundant/synergistic coarse
        graining: ``"redundant"`` for atoms holding at least two singleton
        elements, ``"unique:m"`` for atoms whose only singleton element is
        ``{m}`` (every other element a larger group), ``"synergistic"``
        for atoms with no singleton element.

        Summing partial information over these groups yields the
        coarse-grained decomposition; for two sources the groups are the
        four individual atoms.
        """
        self.index(atom)
        singles = [el[0] for el in atom.elements if len(el) == 1]
        if len(singles) >= 2:
            return "redundant"
        if len(singles) == 1:
            return f"unique:{singles[0]}"
        return "synergistic"

    def coarse_groups(self) -> dict[str, tuple[int, ...]]:
        """Atom indices per coarse group, keyed by :meth:`coarse_group` labels."""
        groups: dict[str, list[int]] = {}
        for i, atom in enumerate(self.atoms):
            groups.setdefault(self.coarse_group(atom), []).append(i)
        return {k: tuple(v) for k, v in groups.items()}


def _antichain_masks(n_subsets: int, conflict: list[int]) -> list[int]:
    """Enumerate bitmask collections of subsets with no nested pair."""
    good = []
    for mask in range(1, 1 << n_subsets):
        rest = mask
        ok = True
        while rest:
            i = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            if conflict[i] & mask & ~(1 << i):
                ok = False
                break
        if ok:
            good.append(mask)
    return good


@lru_cache(maxsize=None)
def enumerate_antichains(m: int) -> RedundancyLattice:
    """Build the full redundancy lattice over ``m`` sources.

    All antichains of nonempty subsets of ``{1..m}`` (excluding the empty
    antichain) are generated by filtering every collection of subsets
    against the pairwise non-inclusion predicate, and the strict
    predecessor sets are materialized. Results are cached per ``m``.

    Raises
    ------
    CapabilityError
        If ``m`` is outside ``1..M_MAX``.
    """
    if not 1 <= m <= M_MAX:
        raise CapabilityError(
            f"lattice over M={m} sources is unsupported (limit is 1..{M_MAX}; "
            f"the atom count grows super-exponentially)"
        )
    subsets = [
        tuple(c) for size in range(1, m + 1) for c in combinations(range(1, m + 1), size)
    ]
    bits = [sum(1 << (i - 1) for i in s) for s in subsets]
    conflict = [
        sum(
            1 << j
            for j, bj in enumerate(bits)
            if j != i and (bi | bj == bj or bi | bj == bi)
        )
        for i, bi in enumerate(bits)
    ]
    atoms = [
        Atom([subsets[j] for j in range(len(subsets)) if mask & (1 << j)])
        for mask in _antichain_masks(len(subsets), conflict)
    ]
    assert len(atoms) == _ATOM_COUNTS[m]

    # Linear extension: strict-down-set size is monotone along the order.
    n_below = [sum(precedes(b, a) for b in atoms) - 1 for a in atoms]
    order = sorted(range(len(atoms)), key=lambda i: (n_below[i], atoms[i].elements))
    atoms = [atoms[i] for i in order]
    down_sets = tuple(
        tuple(j for j, b in enumerate(atoms) if j != i and precedes(b, a))
        for i, a in enumerate(atoms)
    )
    return RedundancyLattice(m=m, atoms=tuple(atoms), down_sets=down_sets)


def moebius_invert(
    lattice: RedundancyLattice, redundancy: Mapping[Atom, float]
) -> dict[Atom, float]:
    """Convert redundancy values on every atom into partial-information values.

    Implements the bottom-up recursion ``PI(a) = red(a) - sum(PI(b) for b
    strictly preceding a)``, which inverts the defining accumulation
    ``red(a) = sum(PI(b) for b preceding-or-equal a)``.

    Raises
    ------
    ArgumentError
        If any lattice atom is missing from ``redundancy`` or a value is
        not finite.
    """
    missing = [a for a in lattice.atoms if a not in redundancy]
    if missing:
        raise ArgumentError(f"redundancy missing for atoms: {missing[:4]}")
    values = np.array([float(redundancy[a]) for a in lattice.atoms])
    pi = lattice.invert_values(values)
    return {atom: float(pi[i]) for i, atom in enumerate(lattice.atoms)}
