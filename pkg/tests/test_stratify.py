import numpy as np
import pytest

from stratseg import GrayImage, SplitPolicy, build_quadtree, leaves, region_complexity
from stratseg.stratify import iter_nodes, node_to_dict, stats_from_histogram


def quadrant_image():
    """16x16 quadrants with values 0 (NW), 85 (NE), 170 (SW), 255 (SE)."""
    px = np.zeros((16, 16), dtype=np.uint8)
    px[:8, 8:] = 85
    px[8:, :8] = 170
    px[8:, 8:] = 255
    return GrayImage(px)


def random_image(rng, max_side=64):
    w = int(rng.integers(1, max_side))
    h = int(rng.integers(1, max_side))
    style = rng.integers(0, 3)
    if style == 0:
        px = rng.integers(0, 256, size=(h, w))
    elif style == 1:  # blocky: low-res noise upsampled
        small = rng.integers(0, 256, size=(max(h // 7, 1), max(w // 7, 1)))
        px = np.kron(small, np.ones((7, 7)))[:h, :w]
    else:  # smooth gradient plus noise
        ys, xs = np.mgrid[0:h, 0:w]
        px = 128.0 + 100.0 * np.sin(xs / 11.0) + rng.normal(0, 20, size=(h, w))
    return GrayImage(np.clip(px, 0, 255).astype(np.uint8))


def random_policy(rng):
    return SplitPolicy(
        max_depth=int(rng.integers(0, 6)),
        min_side=int(rng.integers(2, 17)),
        var_threshold=float(rng.uniform(10, 2000)),
    )


def test_constant_image_single_leaf():
    img = GrayImage(np.full((64, 64), 77, dtype=np.uint8))
    tree = build_quadtree(img, SplitPolicy(var_threshold=0.0))
    assert tree.root.is_leaf
    assert tree.root.stats.variance == 0.0
    assert tree.root.stats.mean == 77.0


def test_quadrant_image_splits_once():
    tree = build_quadtree(quadrant_image(), SplitPolicy(min_side=8))
    lv = leaves(tree)
    assert len(lv) == 4
    # NW, NE, SW, SE order with the expected rectangles and flat stats
    expect = [(0, 0, 0.0), (8, 0, 85.0), (0, 8, 170.0), (8, 8, 255.0)]
    for leaf, (x0, y0, mean) in zip(lv, expect):
        assert (leaf.rect.x0, leaf.rect.y0) == (x0, y0)
        assert (leaf.rect.w, leaf.rect.h) == (8, 8)
        assert leaf.stats.variance == 0.0
        assert leaf.stats.mean == mean
        assert leaf.depth == 1


def test_root_stats_hand_computed():
    # values {0, 85, 170, 255} in equal proportion:
    # mean 127.5, variance ((127.5)^2 + (42.5)^2) / 2 = 9031.25, entropy 2 bits
    tree = build_quadtree(quadrant_image(), SplitPolicy(min_side=8))
    st = tree.root.stats
    assert st.count == 256
    assert st.mean == pytest.approx(127.5)
    assert st.variance == pytest.approx(9031.25)
    assert st.entropy_bits == pytest.approx(2.0)


def test_max_depth_zero_single_leaf():
    tree = build_quadtree(quadrant_image(), SplitPolicy(max_depth=0, min_side=2))
    assert tree.root.is_leaf


def test_min_side_blocks_split():
    # splitting 16x16 would give 8-px children; min_side 9 forbids it
    tree = build_quadtree(quadrant_image(), SplitPolicy(min_side=9))
    assert tree.root.is_leaf


def test_odd_side_split_point_is_ceiling_half():
    px = np.zeros((5, 5), dtype=np.uint8)
    px[:, 3:] = 255  # heterogeneous, forces a split with min_side=2
    tree = build_quadtree(GrayImage(px), SplitPolicy(min_side=2, var_threshold=100))
    nw, ne, sw, se = tree.root.children
    assert (nw.rect.w, nw.rect.h) == (3, 3)
    assert (ne.rect.x0, ne.rect.w) == (3, 2)
    assert (sw.rect.y0, sw.rect.h) == (3, 2)
    assert (se.rect.w, se.rect.h) == (2, 2)


def test_leaves_tile_image_exactly():
    rng = np.random.default_rng(21)
    for _ in range(30):
        img = random_image(rng)
        tree = build_quadtree(img, random_policy(rng))
        cover = np.zeros((img.height, img.width), dtype=np.int32)
        for leaf in leaves(tree):
            r = leaf.rect
            cover[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w] += 1
        assert np.all(cover == 1)


def test_node_stats_match_direct_pixel_computation():
    rng = np.random.default_rng(22)
    for _ in range(10):
        img = random_image(rng)
        tree = build_quadtree(img, random_policy(rng))
        for node in iter_nodes(tree):
            r = node.rect
            sub = img.pixels[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w].astype(np.float64)
            assert node.stats.count == sub.size
            assert node.stats.mean == pytest.approx(sub.mean(), rel=1e-12, abs=1e-12)
            assert node.stats.variance == pytest.approx(
                np.mean((sub - sub.mean()) ** 2), rel=1e-9, abs=1e-9
            )
            counts = np.bincount(sub.astype(np.int64).ravel(), minlength=256)
            p = counts[counts > 0] / sub.size
            assert node.stats.entropy_bits == pytest.approx(
                -(p * np.log2(p)).sum(), rel=1e-12, abs=1e-12
            )


def _structure(node):
    return (node.rect, node.depth, tuple(_structure(c) for c in node.children))


def test_relaxing_variance_threshold_gives_prefix_tree():
    """Raising var_threshold can only prune: the coarse tree's internal
    nodes must appear, identically split, in the fine tree."""
    rng = np.random.default_rng(23)
    for _ in range(10):
        img = random_image(rng)
        fine = build_quadtree(img, SplitPolicy(min_side=2, var_threshold=100.0))
        coarse = build_quadtree(img, SplitPolicy(min_side=2, var_threshold=900.0))

        def check_prefix(cn, fn):
            assert cn.rect == fn.rect
            if cn.children:
                assert fn.children, "coarse split missing from fine tree"
                for c, f in zip(cn.children, fn.children):
                    check_prefix(c, f)

        check_prefix(coarse.root, fine.root)


def test_split_requires_variance_above_threshold():
    rng = np.random.default_rng(24)
    for _ in range(10):
        img = random_image(rng)
        policy = random_policy(rng)
        tree = build_quadtree(img, policy)
        for node in iter_nodes(tree):
            if node.children:
                assert node.stats.variance > policy.var_threshold
                assert node.depth < policy.max_depth


def test_region_complexity_bounds_and_known_values():
    flat = stats_from_histogram(np.eye(256, dtype=np.int64)[40] * 10)

    class N:
        stats = flat

    assert region_complexity(N()) == 0.0
    uniform = stats_from_histogram(np.ones(256, dtype=np.int64))

    class U:
        stats = uniform

    assert region_complexity(U()) == pytest.approx(1.0)
    two = np.zeros(256, dtype=np.int64)
    two[10] = two[200] = 50

    class T:
        stats = stats_from_histogram(two)

    assert region_complexity(T()) == pytest.approx(1.0 / 8.0)


def test_build_is_deterministic():
    rng = np.random.default_rng(25)
    img = random_image(rng)
    policy = SplitPolicy(min_side=4, var_threshold=200.0)
    t1 = build_quadtree(img, policy)
    t2 = build_quadtree(img, policy)
    assert _structure(t1.root) == _structure(t2.root)
    assert node_to_dict(t1.root) == node_to_dict(t2.root)


def test_policy_validation():
    with pytest.raises(ValueError):
        SplitPolicy(max_depth=-1)
    with pytest.raises(ValueError):
        SplitPolicy(min_side=1)
    with pytest.raises(ValueError):
        SplitPolicy(var_threshold=-1.0)
