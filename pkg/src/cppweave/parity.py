"""GF(2) symbol algebra for protection signals.

Every demand ``i`` owns two atoms: ``s_i`` (payload sent from its S end) and
``d_i`` (payload sent from its T end). A signal on a protection link is an
XOR of atoms, represented as the set of atoms with odd multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

S = "S"
T = "T"


@dataclass(frozen=True, order=True)
class SymbolAtom:
    demand_id: int
    side: str

    def __post_init__(self) -> None:
        if self.side not in (S, T):
            raise ValueError(f"side must be 'S' or 'T', not {self.side!r}")

    def __str__(self) -> str:
        return f"{'s' if self.side == S else 'd'}{self.demand_id}"


class SymbolExpr:
    """An XOR of atoms; the empty expression is the zero signal."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[SymbolAtom] = ()):
        acc: set[SymbolAtom] = set()
        for a in atoms:
            acc ^= {a}
        self.atoms = frozenset(acc)

    @classmethod
    def atom(cls, demand_id: int, side: str) -> "SymbolExpr":
        return cls((SymbolAtom(demand_id, side),))

    @classmethod
    def parity(cls, demand_id: int) -> "SymbolExpr":
        """c_i = s_i XOR d_i."""
        return cls((SymbolAtom(demand_id, S), SymbolAtom(demand_id, T)))

    def __xor__(self, other: "SymbolExpr") -> "SymbolExpr":
        out = SymbolExpr()
        out.atoms = self.atoms ^ other.atoms
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymbolExpr) and self.atoms == other.atoms

    def __hash__(self) -> int:
        return hash(self.atoms)

    def __bool__(self) -> bool:
        return bool(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def demands(self) -> frozenset[int]:
        return frozenset(a.demand_id for a in self.atoms)

    def __str__(self) -> str:
        if not self.atoms:
            return "0"
        return " + ".join(str(a) for a in sorted(self.atoms))

    def __repr__(self) -> str:
        return f"SymbolExpr({self})"

    def to_list(self) -> list[str]:
        return [str(a) for a in sorted(self.atoms)]


ZERO = SymbolExpr()


def xor_all(exprs: Iterable[SymbolExpr]) -> SymbolExpr:
    out = ZERO
    for e in exprs:
        out = out ^ e
    return out


def span_witness(generators: Sequence[SymbolExpr], target: SymbolExpr) -> tuple[int, ...] | None:
    """Indices of generators whose XOR equals ``target``, or None if outside the span.

    Gaussian elimination over GF(2) with atoms as bit positions; each reduced
    row carries the bitmask of generators that produced it.
    """
    atoms = sorted(set().union(target.atoms, *(g.atoms for g in generators)))
    pos = {a: k for k, a in enumerate(atoms)}

    def bits(e: SymbolExpr) -> int:
        v = 0
        for a in e.atoms:
            v |= 1 << pos[a]
        return v

    pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (row, combination)
    for k, g in enumerate(generators):
        row, combo = bits(g), 1 << k
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = (row, combo)
                break
            prow, pcombo = pivots[top]
            row ^= prow
            combo ^= pcombo

    row, combo = bits(target), 0
    while row:
        top = row.bit_length() - 1
        if top not in pivots:
            return None
        prow, pcombo = pivots[top]
        row ^= prow
        combo ^= pcombo
    return tuple(k for k in range(len(generators)) if combo >> k & 1)


def in_span(generators: Sequence[SymbolExpr], target: SymbolExpr) -> bool:
    return span_witness(generators, target) is not None


def diversity_encode(blocks: np.ndarray) -> np.ndarray:
    """Parity of N equal-length bit vectors (rows of ``blocks``)."""
    blocks = np.asarray(blocks)
    return np.bitwise_xor.reduce(blocks, axis=0)


def diversity_decode(blocks: np.ndarray, parity: np.ndarray, failed: int) -> np.ndarray:
    """Recover the erased row ``failed`` (1-based) from the parity and the survivors.

    Rows may be bit vectors (a 2-D 0/1 array) or packed integer words (1-D).
    """
    blocks = np.asarray(blocks)
    parity = np.asarray(parity)
    if blocks.ndim == 0:
        raise ValueError("blocks must hold at least one row")
    n = blocks.shape[0]
    if not 1 <= failed <= n:
        raise IndexError(f"failed index {failed} outside 1..{n}")
    if parity.shape != blocks.shape[1:]:
        raise ValueError(f"length mismatch: parity {parity.shape} vs blocks {blocks.shape[1:]}")
    survivors = np.delete(blocks, failed - 1, axis=0)
    out = parity.copy()
    if survivors.shape[0]:
        out = out ^ np.bitwise_xor.reduce(survivors, axis=0)
    return out
