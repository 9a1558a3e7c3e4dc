"""Input transformations: quarter-turn rotations, channel permutations, both.

Images are ``H x W x C`` float arrays; batches are ``B x H x W x C``. Every
transformation is a pixel permutation, so it never changes the multiset of
pixel values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sla_lab.domain.errors import ContractViolation, DimensionError

CHANNEL_NAMES = "RGB"


class TransformKind(str, Enum):
    ROTATION = "rotation"
    CHANNEL_PERM = "channel_perm"
    COMPOSED = "composed"


def _is_identity_perm(perm: Optional[Tuple[int, ...]]) -> bool:
    return perm is None or perm == tuple(range(len(perm)))


@dataclass(frozen=True)
class Transformation:
    """``kind`` tags which parts are meaningful.

    ``rotation`` counts counter-clockwise quarter turns; ``permutation`` maps
    output channel ``c`` to input channel ``permutation[c]``. A composed
    transformation rotates first, then permutes channels.
    """

    kind: TransformKind
    rotation: int = 0
    permutation: Optional[Tuple[int, ...]] = None
    index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.rotation < 4:
            raise ContractViolation(f"rotation must be in 0..3 quarter turns, got {self.rotation}")
        if self.permutation is not None and sorted(self.permutation) != list(range(len(self.permutation))):
            raise ContractViolation(f"{self.permutation} is not a permutation")

    @classmethod
    def rotate(cls, quarter_turns: int, index: int = 0) -> "Transformation":
        return cls(TransformKind.ROTATION, rotation=quarter_turns % 4, index=index)

    @classmethod
    def channels(cls, permutation: Sequence[int], index: int = 0) -> "Transformation":
        return cls(TransformKind.CHANNEL_PERM, permutation=tuple(int(c) for c in permutation), index=index)

    @property
    def name(self) -> str:
        parts = []
        if self.kind in (TransformKind.ROTATION, TransformKind.COMPOSED):
            parts.append(f"rot{90 * self.rotation}")
        if self.kind in (TransformKind.CHANNEL_PERM, TransformKind.COMPOSED):
            parts.append(channel_name(self.permutation))
        return "+".join(parts)

    @property
    def is_identity(self) -> bool:
        return self.rotation == 0 and _is_identity_perm(self.permutation)

    def same_map(self, other: "Transformation") -> bool:
        """Equality as pixel maps (ignores ``kind`` and ``index``)."""
        mine = None if _is_identity_perm(self.permutation) else self.permutation
        theirs = None if _is_identity_perm(other.permutation) else other.permutation
        return self.rotation == other.rotation and mine == theirs

    def with_index(self, index: int) -> "Transformation":
        return replace(self, index=index)


def channel_name(perm: Optional[Tuple[int, ...]]) -> str:
    if perm is None:
        return CHANNEL_NAMES
    return "".join(CHANNEL_NAMES[c] if len(perm) == 3 else str(c) for c in perm)


def compose(first: Transformation, then: Transformation) -> Transformation:
    """The map ``x -> then(first(x))``.

    Rotations act on the spatial axes and permutations on the channel axis, so
    the two families commute and the result is again rotation-then-permute.
    """
    rotation = (first.rotation + then.rotation) % 4
    if first.permutation is None:
        perm = then.permutation
    elif then.permutation is None:
        perm = first.permutation
    else:
        if len(first.permutation) != len(then.permutation):
            raise DimensionError(
                f"cannot compose permutations over {len(first.permutation)} and {len(then.permutation)} channels"
            )
        perm = tuple(first.permutation[c] for c in then.permutation)
    if perm is None:
        kind = TransformKind.ROTATION
    elif rotation == 0 and first.kind != TransformKind.COMPOSED and then.kind != TransformKind.COMPOSED:
        kind = TransformKind.CHANNEL_PERM
    else:
        kind = TransformKind.COMPOSED
    return Transformation(kind, rotation=rotation, permutation=perm)


def transform_batch(images: np.ndarray, t: Transformation) -> np.ndarray:
    """Apply ``t`` to every image of a ``B x H x W x C`` batch."""
    if images.ndim != 4:
        raise DimensionError(f"expected a B x H x W x C batch, got shape {images.shape}")
    _, height, width, chans = images.shape
    out = images
    if t.rotation:
        if height != width:
            raise DimensionError(f"rotation needs square images, got {height}x{width}")
        out = np.rot90(out, k=t.rotation, axes=(1, 2))
    if t.permutation is not None:
        if chans != len(t.permutation):
            raise DimensionError(
                f"channel permutation over {len(t.permutation)} channels applied to an image with {chans}"
            )
        out = out[..., list(t.permutation)]
    return np.ascontiguousarray(out)


def apply(t: Transformation, image: np.ndarray) -> np.ndarray:
    """Apply ``t`` to a single ``H x W x C`` image."""
    if image.ndim != 3:
        raise DimensionError(f"expected an H x W x C image, got shape {image.shape}")
    return transform_batch(image[None], t)[0]


@dataclass(frozen=True)
class TransformationSet:
    """Ordered ``t_0 .. t_{M-1}``; ``t_0`` is the identity."""

    transforms: Tuple[Transformation, ...]

    def __post_init__(self) -> None:
        if not self.transforms:
            raise ContractViolation("a transformation set needs at least one transformation")
        if not self.transforms[0].is_identity:
            raise ContractViolation(f"first transformation must be the identity, got {self.transforms[0].name}")
        for a in range(len(self.transforms)):
            for b in range(a + 1, len(self.transforms)):
                if self.transforms[a].same_map(self.transforms[b]):
                    raise ContractViolation(
                        f"transformations {a} and {b} are the same map ({self.transforms[a].name})"
                    )
        reindexed = tuple(t.with_index(j) for j, t in enumerate(self.transforms))
        object.__setattr__(self, "transforms", reindexed)

    @classmethod
    def of(cls, transforms: Sequence[Transformation]) -> "TransformationSet":
        return cls(tuple(transforms))

    @property
    def size(self) -> int:
        return len(self.transforms)

    def __len__(self) -> int:
        return len(self.transforms)

    def __iter__(self) -> Iterator[Transformation]:
        return iter(self.transforms)

    def __getitem__(self, j: int) -> Transformation:
        return self.transforms[j]

    def names(self) -> List[str]:
        return [t.name for t in self.transforms]

    def truncated(self, m: int) -> "TransformationSet":
        """The first ``m`` transformations (``m=1`` leaves only the identity)."""
        return TransformationSet(self.transforms[:m])
