"""
Spacetime Complex
=================
Combinatorial spacetime: boundary-component atoms bound to boundary spaces,
regions with an ordered boundary decomposition, slice regions and gluings.

Usage:
    cx = SpacetimeComplex()
    cx.add_space(qm_space(2, "qubit"))
    a = cx.make_atom("initial", "qubit")
    b = cx.make_atom("final", "qubit")
    M = cx.make_region("M", [a.atom_id, b.atom_id])

A complex is an append-only registry: build it from one thread, then share it
read-only.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import (
    DuplicateEntityError,
    EmptyInterfaceError,
    RepeatedAtomError,
    UnknownEntityError,
)
from .ordered_linear_core import BoundarySpaceSpec, SignedBasis


class RegionKind(str, Enum):
    ELEMENTARY = "elementary"
    SLICE = "slice"
    COMPOSITE = "composite"


@dataclass(frozen=True)
class Atom:
    """A component hypersurface, bound to the space of its boundary conditions."""

    atom_id: str
    label: str
    space_id: str


@dataclass(frozen=True)
class Region:
    """A region M with its boundary decomposition (ordered atom ids)."""

    region_id: str
    label: str
    boundary: tuple[str, ...]
    kind: RegionKind = RegionKind.ELEMENTARY

    @property
    def arity(self) -> int:
        return len(self.boundary)


@dataclass(frozen=True)
class Gluing:
    """Record of M u N along the interfacing hypersurface (shared atoms)."""

    left: str
    right: str
    interface: tuple[str, ...]
    composite: str


class SpacetimeComplex:
    """Registry of spaces, atoms, regions and gluings."""

    def __init__(self):
        self.spaces: dict[str, BoundarySpaceSpec] = {}
        self.atoms: dict[str, Atom] = {}
        self.regions: dict[str, Region] = {}
        self.gluings: dict[str, Gluing] = {}
        self._bases: dict[str, SignedBasis] = {}
        self._counter = 0

    def _fresh_id(self, prefix: str, label: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}:{label}"

    # -------------------------------------------------------------------------
    # Spaces
    # -------------------------------------------------------------------------

    def add_space(self, space: BoundarySpaceSpec) -> BoundarySpaceSpec:
        """
        Register a space and cache its signed orthonormal basis.

        Raises:
            DuplicateEntityError: a space with the same label exists
            DegeneratePairingError: the slice pairing has no signed basis
        """
        if space.space_id in self.spaces:
            raise DuplicateEntityError(f"space '{space.space_id}' is already registered")
        self._bases[space.space_id] = space.signed_basis
        self.spaces[space.space_id] = space
        return space

    def space(self, space_id: str) -> BoundarySpaceSpec:
        try:
            return self.spaces[space_id]
        except KeyError:
            raise UnknownEntityError(f"unknown space '{space_id}'") from None

    def signed_basis(self, space_id: str) -> SignedBasis:
        self.space(space_id)
        return self._bases[space_id]

    # -------------------------------------------------------------------------
    # Atoms and regions
    # -------------------------------------------------------------------------

    def atom(self, atom_id: str) -> Atom:
        try:
            return self.atoms[atom_id]
        except KeyError:
            raise UnknownEntityError(f"unknown atom '{atom_id}'") from None

    def space_of(self, atom_id: str) -> BoundarySpaceSpec:
        return self.space(self.atom(atom_id).space_id)

    def region(self, region_id: str) -> Region:
        try:
            return self.regions[region_id]
        except KeyError:
            raise UnknownEntityError(f"unknown region '{region_id}'") from None

    def gluing(self, composite_id: str) -> Gluing:
        try:
            return self.gluings[composite_id]
        except KeyError:
            raise UnknownEntityError(f"no gluing produced region '{composite_id}'") from None

    def make_atom(self, label: str, space_binding: str) -> Atom:
        """Create a fresh atom bound to an existing space (labels may repeat)."""
        self.space(space_binding)
        atom = Atom(self._fresh_id("a", label), label, space_binding)
        self.atoms[atom.atom_id] = atom
        return atom

    def make_region(self, label: str, boundary_atoms: Sequence[str]) -> Region:
        """
        Create an ELEMENTARY region with the given boundary decomposition.

        Raises:
            RepeatedAtomError: an atom occurs twice in the boundary
            UnknownEntityError: an atom does not exist
        """
        boundary = tuple(boundary_atoms)
        for atom_id in boundary:
            self.atom(atom_id)
        if len(set(boundary)) != len(boundary):
            repeated = sorted({a for a in boundary if boundary.count(a) > 1})
            raise RepeatedAtomError(f"region '{label}' repeats boundary atom(s) {repeated}")
        region = Region(self._fresh_id("r", label), label, boundary, RegionKind.ELEMENTARY)
        self.regions[region.region_id] = region
        return region

    def slice(self, atom_id: str, mirror_label: str = "") -> Region:
        """
        Slice region over an atom: boundary (atom, fresh mirror copy).

        The mirror atom is bound to the same space as the original.
        """
        original = self.atom(atom_id)
        mirror = self.make_atom(mirror_label or f"{original.label}'", original.space_id)
        region = Region(
            self._fresh_id("r", f"slice({original.label})"),
            f"slice({original.label})",
            (original.atom_id, mirror.atom_id),
            RegionKind.SLICE,
        )
        self.regions[region.region_id] = region
        return region

    def glue(self, left: Region, right: Region, label: str = "") -> tuple[Region, Gluing]:
        """
        Glue two regions along the atoms their boundaries share.

        The composite boundary is left's remaining atoms followed by right's
        remaining atoms; the interface keeps left's boundary order.

        Each interface atom occurs once in each boundary (make_region forbids
        repeats) and never in the composite. Gluings are checked one at a
        time: a region may take part in several gluings, so the complex can
        hold alternative decompositions of the same composite, e.g.
        (R01|R12)|R23 next to R01|(R12|R23).

        Raises:
            EmptyInterfaceError: the boundaries share no atom
        """
        left = self.region(left.region_id)
        right = self.region(right.region_id)
        if left.region_id == right.region_id:
            raise EmptyInterfaceError(f"region '{left.label}' cannot be glued to itself")
        shared = set(left.boundary) & set(right.boundary)
        if not shared:
            raise EmptyInterfaceError(
                f"regions '{left.label}' and '{right.label}' share no boundary atom (disjoint union is not supported)"
            )
        interface = tuple(a for a in left.boundary if a in shared)
        boundary = tuple(a for a in left.boundary if a not in shared) + tuple(
            a for a in right.boundary if a not in shared
        )
        composite_label = label or f"({left.label}|{right.label})"
        composite = Region(self._fresh_id("r", composite_label), composite_label, boundary, RegionKind.COMPOSITE)
        gluing = Gluing(left.region_id, right.region_id, interface, composite.region_id)
        self.regions[composite.region_id] = composite
        self.gluings[composite.region_id] = gluing
        return composite, gluing
