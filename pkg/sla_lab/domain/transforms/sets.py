"""Canonical transformation sets and their compositions."""

from __future__ import annotations

from itertools import permutations
from typing import Iterable, Optional, Sequence

from sla_lab.domain.errors import ConfigError
from sla_lab.domain.transforms.entities import (
    CHANNEL_NAMES,
    Transformation,
    TransformationSet,
    TransformKind,
)


def identity_set() -> TransformationSet:
    return TransformationSet.of([Transformation.rotate(0)])


def rotation_set(degrees: Optional[Sequence[int]] = None) -> TransformationSet:
    """0, 90, 180, 270 degrees counter-clockwise, or the listed subset."""
    degrees = [0, 90, 180, 270] if degrees is None else list(degrees)
    bad = [d for d in degrees if d % 90]
    if bad:
        raise ConfigError(f"rotations must be multiples of 90 degrees, got {bad}")
    return TransformationSet.of([Transformation.rotate((d // 90) % 4) for d in degrees])


def color_perm_set(names: Optional[Iterable[str]] = None) -> TransformationSet:
    """All six RGB orderings, RGB first then lexicographic, or the named subset."""
    if names is None:
        perms = list(permutations(range(3)))
    else:
        perms = [parse_channel_order(n) for n in names]
    return TransformationSet.of([Transformation.channels(p) for p in perms])


def parse_channel_order(name: str) -> tuple:
    name = name.strip().upper()
    if sorted(name) != sorted(CHANNEL_NAMES):
        raise ConfigError(f"'{name}' is not an ordering of {CHANNEL_NAMES}")
    return tuple(CHANNEL_NAMES.index(ch) for ch in name)


def product_set(rot_subset: TransformationSet, perm_subset: TransformationSet) -> TransformationSet:
    """``{t_c . t_r}``: rotate by ``t_r`` then permute by ``t_c``, rotation-major."""
    composed = [
        Transformation(TransformKind.COMPOSED, rotation=t_r.rotation, permutation=t_c.permutation)
        for t_r in rot_subset
        for t_c in perm_subset
    ]
    return TransformationSet.of(composed)
