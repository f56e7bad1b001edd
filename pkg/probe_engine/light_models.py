"""
Light Models
============
Apparatus hierarchies built from fine-grained outcome probes.

An apparatus with lights that show green ("g") or red ("r") gives one
primitive probe per full outcome tuple. Coarse-graining replaces positions by
"*" ("any colour") and sums the matching probes, so that

    0 <= P(g) <= P(*),   P(*) = P(g) + P(r)
    0 <= P(g, r) <= P(*, r) <= P(*, *)

The probe with "*" everywhere encodes the mere presence of the apparatus.
A scale apparatus works the same way with reading ranges instead of colours.
"""

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional, Sequence

import numpy as np

from .probes import Probe, zero_like
from .classical_model import stat_probe
from .quantum_model import KrausSet, as_self_adjoint, check_effect, effect_sqrt, probe_from_kraus, two_atom_spaces
from .spacetime_complex import Region, SpacetimeComplex

WILDCARD = "*"
GREEN = "g"
RED = "r"
COLOURS = (GREEN, RED)


def coarse_grain(fine: Mapping[tuple[str, ...], Probe]) -> dict[tuple[str, ...], Probe]:
    """
    All wildcard coarse-grainings of a family of fine outcome probes.

    Args:
        fine: Probe per full outcome tuple; every tuple has the same length

    Returns:
        Dict from pattern (outcomes or "*") to the sum of matching fine probes
    """
    keys = list(fine)
    if not keys:
        raise ValueError("coarse-graining needs at least one outcome probe")
    length = len(keys[0])
    if any(len(k) != length for k in keys):
        raise ValueError("outcome tuples must all have the same length")

    per_position = []
    for pos in range(length):
        seen: list[str] = []
        for k in keys:
            if k[pos] not in seen:
                seen.append(k[pos])
        per_position.append(seen + [WILDCARD])

    family = {}
    for pattern in product(*per_position):
        members = [fine[k] for k in keys if all(p == WILDCARD or p == x for p, x in zip(pattern, k))]
        total = members[0]
        for member in members[1:]:
            total = total + member
        family[pattern] = total.relabel(f"P({','.join(pattern)})")
    return family


# =============================================================================
# QUANTUM LIGHTS
# =============================================================================

def one_light_quantum(
    cx: SpacetimeComplex,
    region: Region,
    green_effect,
    channel: Optional[KrausSet] = None,
) -> dict[tuple[str, ...], Probe]:
    """One light measured by the two-outcome POVM {E_g, I - E_g}."""
    _, space_out = two_atom_spaces(cx, region)
    e_green = as_self_adjoint(space_out, green_effect, "green effect")
    check_effect(e_green, "green effect", bounded=True)
    effects = {GREEN: e_green, RED: np.eye(e_green.shape[0]) - e_green}
    fine = {}
    for colour, effect in effects.items():
        branch = KrausSet((effect_sqrt(effect),))
        if channel is not None:
            branch = branch.compose_after(channel)
        fine[(colour,)] = probe_from_kraus(cx, region, branch)
    return coarse_grain(fine)


def two_light_quantum(
    cx: SpacetimeComplex,
    region: Region,
    first_green_effect,
    second_green_effect,
    channel: Optional[KrausSet] = None,
) -> dict[tuple[str, ...], Probe]:
    """Two lights read in sequence: Kraus operator sqrt(F_b) sqrt(E_a) for outcome (a, b)."""
    _, space_out = two_atom_spaces(cx, region)
    e_first = as_self_adjoint(space_out, first_green_effect, "first green effect")
    e_second = as_self_adjoint(space_out, second_green_effect, "second green effect")
    check_effect(e_first, "first green effect", bounded=True)
    check_effect(e_second, "second green effect", bounded=True)
    identity = np.eye(e_first.shape[0])
    first = {GREEN: effect_sqrt(e_first), RED: effect_sqrt(identity - e_first)}
    second = {GREEN: effect_sqrt(e_second), RED: effect_sqrt(identity - e_second)}
    fine = {}
    for a, b in product(COLOURS, COLOURS):
        branch = KrausSet((second[b] @ first[a],))
        if channel is not None:
            branch = branch.compose_after(channel)
        fine[(a, b)] = probe_from_kraus(cx, region, branch)
    return coarse_grain(fine)


# =============================================================================
# CLASSICAL LIGHTS
# =============================================================================

def one_light_classical(cx: SpacetimeComplex, region: Region, green_kernel, red_kernel) -> dict[tuple[str, ...], Probe]:
    """One light whose colour is recorded by two nonnegative kernels."""
    fine = {
        (GREEN,): stat_probe(cx, region, green_kernel),
        (RED,): stat_probe(cx, region, red_kernel),
    }
    return coarse_grain(fine)


def two_light_classical(
    cx: SpacetimeComplex,
    region: Region,
    kernels: Mapping[tuple[str, str], object],
) -> dict[tuple[str, ...], Probe]:
    """Two lights; one nonnegative kernel per colour pair."""
    fine = {tuple(k): stat_probe(cx, region, kernel) for k, kernel in kernels.items()}
    return coarse_grain(fine)


# =============================================================================
# SCALE APPARATUS
# =============================================================================

@dataclass(frozen=True)
class ScaleApparatus:
    """Binned scale readings; one primitive probe per bin."""

    bins: tuple[tuple[float, float], ...]
    probes: tuple[Probe, ...]

    def range_probe(self, low: float, high: float) -> Probe:
        """Probe for "reading lies in [low, high]": sum of the bins inside the range."""
        inside = [p for (lo, hi), p in zip(self.bins, self.probes) if lo >= low and hi <= high]
        if not inside:
            return zero_like(self.probes[0])
        total = inside[0]
        for probe in inside[1:]:
            total = total + probe
        return total.relabel(f"P([{low:g},{high:g}])")

    @property
    def presence(self) -> Probe:
        return self.range_probe(self.bins[0][0], self.bins[-1][1])


def scale_apparatus_classical(
    cx: SpacetimeComplex,
    region: Region,
    bin_edges: Sequence[float],
    kernels: Sequence,
) -> ScaleApparatus:
    """
    Scale apparatus with readings binned by consecutive edges.

    Args:
        bin_edges: Increasing edges, e.g. [0, 1, 1.5, 3.5, 4, 5]
        kernels: One nonnegative kernel per bin
    """
    edges = [float(e) for e in bin_edges]
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError(f"bin edges must be increasing, got {edges}")
    if len(kernels) != len(edges) - 1:
        raise ValueError(f"{len(edges) - 1} bins need as many kernels, got {len(kernels)}")
    bins = tuple(zip(edges[:-1], edges[1:]))
    probes = tuple(stat_probe(cx, region, k, label=f"bin[{lo:g},{hi:g}]") for (lo, hi), k in zip(bins, kernels))
    return ScaleApparatus(bins, probes)
