"""Rotations, channel permutations, their products and batch expansion."""

from itertools import product

import numpy as np
import pytest

from sla_lab.domain.errors import ConfigError, ContractViolation, DimensionError, LabelIndexError
from sla_lab.domain.transforms import (
    Transformation,
    TransformationSet,
    apply,
    color_perm_set,
    compose,
    expand_batch,
    identity_set,
    joint_label,
    parse_channel_order,
    product_set,
    rotation_set,
    split_joint_label,
    transform_batch,
)


def _same_map(a: Transformation, b: Transformation, image: np.ndarray) -> bool:
    return np.array_equal(apply(a, image), apply(b, image))


class TestApply:
    """Single-image pixel maps."""

    def test_rotation_zero_is_identity(self, rng):
        image = rng.uniform(size=(4, 4, 3))
        np.testing.assert_array_equal(apply(Transformation.rotate(0), image), image)

    def test_quarter_turn_is_counter_clockwise(self):
        a, b, c, d = 1.0, 2.0, 3.0, 4.0
        image = np.array([[a, b], [c, d]])[..., None]
        out = apply(Transformation.rotate(1), image)[..., 0]
        np.testing.assert_array_equal(out, [[b, d], [a, c]])

    def test_channel_swap(self):
        pixel = np.array([[[0.1, 0.2, 0.3]]])
        out = apply(Transformation.channels((1, 0, 2)), pixel)
        np.testing.assert_array_equal(out[0, 0], [0.2, 0.1, 0.3])

    def test_non_square_rotation_rejected(self):
        with pytest.raises(DimensionError, match="square"):
            apply(Transformation.rotate(1), np.zeros((2, 3, 1)))

    def test_non_square_identity_allowed(self):
        image = np.ones((2, 3, 1))
        np.testing.assert_array_equal(apply(Transformation.rotate(0), image), image)

    def test_grayscale_rejects_channel_permutation(self):
        with pytest.raises(DimensionError, match="channels"):
            apply(Transformation.channels((1, 0, 2)), np.zeros((2, 2, 1)))

    def test_pixel_multiset_preserved(self, rng):
        image = rng.uniform(size=(3, 3, 3))
        for t in product_set(rotation_set(), color_perm_set()):
            np.testing.assert_array_equal(np.sort(apply(t, image), axis=None), np.sort(image, axis=None))

    def test_batch_matches_single_apply(self, rng):
        images = rng.uniform(size=(5, 3, 3, 3))
        t = product_set(rotation_set(), color_perm_set())[7]
        out = transform_batch(images, t)
        for b in range(5):
            np.testing.assert_array_equal(out[b], apply(t, images[b]))


class TestRotationSet:
    """The four quarter turns."""

    def test_size_and_identity_first(self):
        rot = rotation_set()
        assert rot.size == 4
        assert rot[0].is_identity
        assert rot.names() == ["rot0", "rot90", "rot180", "rot270"]

    def test_ninety_plus_ninety(self, rng):
        rot = rotation_set()
        assert _same_map(compose(rot[1], rot[1]), rot[2], rng.uniform(size=(3, 3, 1)))

    def test_composition_table_mod_four(self, rng):
        image = rng.uniform(size=(4, 4, 2))
        for k1, k2 in product(range(4), repeat=2):
            twice = apply(Transformation.rotate(k2), apply(Transformation.rotate(k1), image))
            np.testing.assert_array_equal(twice, apply(Transformation.rotate((k1 + k2) % 4), image))

    def test_subset(self):
        assert rotation_set([0, 180]).names() == ["rot0", "rot180"]

    def test_subset_must_start_with_identity(self):
        with pytest.raises(ContractViolation, match="identity"):
            rotation_set([90, 0])

    def test_non_quarter_angle_rejected(self):
        with pytest.raises(ConfigError):
            rotation_set([0, 45])


class TestColorPermSet:
    """The symmetric group on three channels."""

    def test_canonical_order(self):
        perms = color_perm_set()
        assert perms.size == 6
        assert perms.names() == ["RGB", "RBG", "GRB", "GBR", "BRG", "BGR"]

    def test_identity_leaves_pixels(self, rng):
        image = rng.uniform(size=(2, 2, 3))
        np.testing.assert_array_equal(apply(color_perm_set()[0], image), image)

    def test_closure_and_inverses(self, rng):
        perms = list(color_perm_set())
        image = rng.uniform(size=(2, 2, 3))
        for a in perms:
            composed = [compose(a, b) for b in perms]
            for c in composed:
                assert any(_same_map(c, p, image) for p in perms)
            assert any(compose(a, b).is_identity for b in perms)

    def test_composition_matches_sequential_apply(self, rng):
        image = rng.uniform(size=(2, 2, 3))
        for a, b in product(color_perm_set(), repeat=2):
            np.testing.assert_array_equal(apply(compose(a, b), image), apply(b, apply(a, image)))

    def test_named_subset(self):
        assert color_perm_set(["RGB", "GBR", "BRG"]).size == 3

    def test_bad_name(self):
        with pytest.raises(ConfigError):
            parse_channel_order("RGX")


class TestProductSet:
    """Rotate first, then permute channels."""

    def test_sizes(self):
        assert product_set(rotation_set(), color_perm_set(["RGB", "GBR", "BRG"])).size == 12
        assert product_set(rotation_set(), color_perm_set()).size == 24

    def test_rotation_major_order(self):
        names = product_set(rotation_set(), color_perm_set(["RGB", "GBR"])).names()
        assert names[:4] == ["rot0+RGB", "rot0+GBR", "rot90+RGB", "rot90+GBR"]

    def test_identity_first(self):
        assert product_set(rotation_set(), color_perm_set())[0].is_identity

    def test_singleton_perm_set_equals_rotation_set(self, rng):
        prod = product_set(rotation_set(), color_perm_set(["RGB"]))
        image = rng.uniform(size=(3, 3, 3))
        assert prod.size == 4
        for a, b in zip(prod, rotation_set()):
            assert _same_map(a, b, image)

    def test_rotate_then_permute(self, rng):
        image = rng.uniform(size=(3, 3, 3))
        t = product_set(rotation_set(), color_perm_set())[1 * 6 + 3]
        expected = apply(color_perm_set()[3], apply(rotation_set()[1], image))
        np.testing.assert_array_equal(apply(t, image), expected)

    def test_duplicate_maps_rejected(self):
        with pytest.raises(ContractViolation, match="same map"):
            TransformationSet.of([Transformation.rotate(0), Transformation.rotate(1), Transformation.rotate(5)])


class TestExpandBatch:
    """Joint labels ``y * M + j``, input-major."""

    def test_joint_label_arithmetic(self):
        assert joint_label(3, 2, 4) == 14
        assert split_joint_label(14, 4) == (3, 2)

    def test_label_space_size(self):
        assert joint_label(9, 3, 4) + 1 == 40

    def test_identity_positions(self, rng):
        images = rng.uniform(size=(2, 3, 3, 1))
        ex = expand_batch(images, np.array([1, 0]), rotation_set(), 2)
        assert ex.images.shape == (8, 3, 3, 1)
        np.testing.assert_array_equal(ex.images[0], images[0])
        np.testing.assert_array_equal(ex.images[4], images[1])
        np.testing.assert_array_equal(ex.joint_labels, [4, 5, 6, 7, 0, 1, 2, 3])
        np.testing.assert_array_equal(ex.transform_index, [0, 1, 2, 3, 0, 1, 2, 3])

    def test_recovery_is_lossless(self, rng):
        labels = rng.integers(0, 5, size=6)
        ex = expand_batch(rng.uniform(size=(6, 2, 2, 3)), labels, color_perm_set(), 5)
        y, j = np.divmod(ex.joint_labels, 6)
        np.testing.assert_array_equal(y, ex.labels)
        np.testing.assert_array_equal(j, ex.transform_index)

    def test_invalid_label(self):
        with pytest.raises(LabelIndexError):
            expand_batch(np.zeros((1, 2, 2, 1)), np.array([2]), identity_set(), 2)
