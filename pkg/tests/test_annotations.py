import numpy as np
import pytest
from PIL import Image

from app.annotations import (
    BitMask,
    BoundingBox,
    ClassMap,
    ImageRef,
    Instance,
    LabeledImage,
    PolygonAnnotation,
    bbox_from_polygon,
    box_to_polygon,
    emit_label_file,
    extract_masked_crop,
    pad_to_square,
    parse_label_file,
    rasterize_polygon,
    read_labels,
    read_mask_png,
    remap_classes,
    write_labels,
    write_mask_png,
)
from app.errors import (
    CoordinateOutOfRange,
    DegenerateExtent,
    EmptyCrop,
    MalformedLine,
    UnknownClass,
    UnmappedClass,
    ZeroDimension,
)
from app.manifest import ManifestEntry, load_labeled_image

# --- Label files ---


def test_parse_box_line():
    records = parse_label_file("0 0.5 0.5 0.2 0.2\n", class_count=3)
    assert records == [(0, BoundingBox(0.5, 0.5, 0.2, 0.2))]


def test_parse_triangle_polygon():
    [(class_id, poly)] = parse_label_file("1 0.0 0.0 0.5 0.0 0.5 0.5", class_count=3)
    assert class_id == 1
    assert isinstance(poly, PolygonAnnotation)
    assert poly.vertices == ((0.0, 0.0), (0.5, 0.0), (0.5, 0.5))


def test_parse_skips_blank_lines():
    assert len(parse_label_file("\n0 0.5 0.5 0.2 0.2\n\n   \n1 0.1 0.1 0.1 0.1\n", 3)) == 2


def test_parse_rejects_out_of_range_coordinate():
    with pytest.raises(CoordinateOutOfRange):
        parse_label_file("0 1.2 0.5 0.2 0.2", class_count=3)


def test_parse_rejects_zero_width_box():
    with pytest.raises(CoordinateOutOfRange):
        parse_label_file("0 0.5 0.5 0.0 0.2", class_count=3)


@pytest.mark.parametrize(
    "line", ["0 0.5 0.5 0.2", "0 0.1 0.1 0.2 0.2 0.3", "0 0.1 0.1 0.2 0.2 0.3 0.3 0.4", "x 0.5 0.5 0.2 0.2"]
)
def test_parse_rejects_malformed_lines(line):
    with pytest.raises(MalformedLine) as info:
        parse_label_file("0 0.5 0.5 0.2 0.2\n" + line, class_count=3)
    assert info.value.line_no == 2


def test_parse_rejects_unknown_class():
    with pytest.raises(UnknownClass):
        parse_label_file("3 0.5 0.5 0.2 0.2", class_count=3)


def test_canonical_text_round_trips_byte_identical():
    text = "0 0.500000 0.500000 0.200000 0.200000\n1 0.000000 0.000000 0.500000 0.000000 0.500000 0.500000\n"
    assert emit_label_file(parse_label_file(text, class_count=2)) == text


# --- Geometry ---


def test_bbox_from_triangle():
    box = bbox_from_polygon(PolygonAnnotation(0, ((0.0, 0.0), (0.5, 0.0), (0.5, 0.5))))
    assert box.cx == pytest.approx(0.25)
    assert box.cy == pytest.approx(0.25)
    assert box.w == pytest.approx(0.5)
    assert box.h == pytest.approx(0.5)


def test_bbox_from_colinear_polygon_is_degenerate():
    with pytest.raises(DegenerateExtent):
        bbox_from_polygon(PolygonAnnotation(0, ((0.1, 0.2), (0.3, 0.2), (0.6, 0.2))))


def test_bbox_of_square_is_the_square():
    box = BoundingBox(0.5, 0.4, 0.2, 0.3)
    assert bbox_from_polygon(box_to_polygon(0, box)).xyxy() == pytest.approx(box.xyxy())


def test_bbox_contains_every_vertex(rng):
    for _ in range(50):
        verts = tuple(map(tuple, rng.uniform(0, 1, size=(int(rng.integers(3, 9)), 2))))
        x1, y1, x2, y2 = bbox_from_polygon(PolygonAnnotation(0, verts)).xyxy()
        for x, y in verts:
            assert x1 - 1e-12 <= x <= x2 + 1e-12
            assert y1 - 1e-12 <= y <= y2 + 1e-12


# --- Rasterization ---


def test_full_frame_square_sets_every_bit():
    mask = rasterize_polygon(PolygonAnnotation(0, ((0, 0), (1, 0), (1, 1), (0, 1))), 8, 8)
    assert mask.bits.sum() == 64


def test_half_triangle_fill_fraction():
    mask = rasterize_polygon(PolygonAnnotation(0, ((0, 0), (1, 0), (1, 1))), 100, 100)
    assert mask.fill_fraction == pytest.approx(0.5, abs=0.02)


def test_rasterization_matches_convex_oracle_at_pixel_centers():
    poly = PolygonAnnotation(0, ((0.1, 0.1), (0.9, 0.2), (0.6, 0.9), (0.2, 0.7)))
    mask = rasterize_polygon(poly, 64, 48)
    gx, gy = np.meshgrid((np.arange(64) + 0.5) / 64, (np.arange(48) + 0.5) / 48)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    # Convex quadrilateral: inside iff on the same side of every edge.
    verts = poly.as_array()
    edges = np.roll(verts, -1, axis=0) - verts
    rel = pts[:, None, :] - verts[None, :, :]
    cross = edges[None, :, 0] * rel[..., 1] - edges[None, :, 1] * rel[..., 0]
    inside = ((cross > 0).all(axis=1) | (cross < 0).all(axis=1)).reshape(48, 64)
    assert (mask.bits != inside).sum() <= 2


def test_zero_area_polygon_gives_empty_mask():
    mask = rasterize_polygon(PolygonAnnotation(0, ((0.1, 0.1), (0.5, 0.5), (0.9, 0.9))), 32, 32)
    assert mask.bits.sum() == 0


def test_rasterize_rejects_zero_dimension():
    with pytest.raises(ZeroDimension):
        rasterize_polygon(PolygonAnnotation(0, ((0, 0), (1, 0), (1, 1))), 0, 10)


def test_self_intersecting_polygon_uses_even_odd_rule():
    # Bow-tie: the two lobes are inside, the crossing point is not double counted.
    mask = rasterize_polygon(PolygonAnnotation(0, ((0, 0), (1, 1), (1, 0), (0, 1))), 40, 40)
    assert mask.fill_fraction == pytest.approx(0.5, abs=0.05)


# --- Square standardization ---


def test_pad_identity_for_target_sized_input(rng):
    tile = rng.integers(0, 255, size=(512, 512, 3), dtype=np.uint8)
    assert np.array_equal(pad_to_square(tile), tile)


def test_pad_centers_small_crop_without_scaling():
    tile = np.full((40, 100, 3), 7, dtype=np.uint8)
    out = pad_to_square(tile)
    assert out.shape == (512, 512, 3)
    ys, xs = np.nonzero(out[..., 0])
    assert (xs.min(), ys.min()) == (206, 236)
    assert (xs.max() - xs.min() + 1, ys.max() - ys.min() + 1) == (100, 40)
    assert out.sum() == tile.sum()


def test_pad_downscales_large_mask_nearest():
    bits = np.zeros((400, 600), dtype=bool)
    bits[:, :300] = True
    out = pad_to_square(BitMask(600, 400, bits))
    assert isinstance(out, BitMask)
    assert (out.width, out.height) == (512, 512)

    expected = np.asarray(Image.fromarray(bits.astype(np.uint8) * 255).resize((512, 341), Image.Resampling.NEAREST)) > 0
    off_y = (512 - 341) // 2
    assert np.array_equal(out.bits[off_y : off_y + 341], expected)
    assert not out.bits[:off_y].any()
    assert not out.bits[off_y + 341 :].any()
    assert set(np.unique(out.bits)) <= {False, True}


def test_pad_never_upscales():
    out = pad_to_square(BitMask(3, 2, np.ones((2, 3), dtype=bool)), target=16)
    assert out.bits.sum() == 6


def test_pad_rejects_empty_crop():
    with pytest.raises(EmptyCrop):
        pad_to_square(np.zeros((0, 5), dtype=np.uint8))


def test_extract_masked_crop_zeroes_outside_polygon():
    image = np.full((100, 200, 3), 200, dtype=np.uint8)
    poly = PolygonAnnotation(0, ((0.25, 0.2), (0.75, 0.2), (0.5, 0.8)))
    tile, mask = extract_masked_crop(image, poly, target=128)
    assert tile.shape == (128, 128, 3)
    assert (mask.width, mask.height) == (128, 128)
    assert (tile[~mask.bits] == 0).all()
    assert (tile[mask.bits] == 200).all()


def test_mask_png_round_trip(tmp_path, rng):
    mask = BitMask(17, 9, rng.random((9, 17)) > 0.5)
    path = tmp_path / "m.png"
    write_mask_png(mask, path)
    with Image.open(path) as img:
        assert img.mode == "L"
        assert set(np.unique(np.asarray(img))) <= {0, 255}
    assert np.array_equal(read_mask_png(path).bits, mask.bits)


# --- Class remapping ---

SOURCE = ("Sugar beet", "Cirsium", "Convolvulus", "Fallopia", "Echinochloa")


def _labeled(*class_ids):
    box = BoundingBox(0.5, 0.5, 0.1, 0.1)
    return LabeledImage(ImageRef("a", "a.png", 10, 10), tuple(Instance(c, box) for c in class_ids))


@pytest.mark.parametrize(
    ("source_id", "target"),
    [(0, "sugar_beet"), (1, "dicot"), (2, "dicot"), (3, "dicot"), (4, "monocot")],
)
def test_remap_species_to_groups(source_id, target):
    class_map = ClassMap(SOURCE)
    out = remap_classes(_labeled(source_id), class_map)
    assert class_map.target_classes[out.instances[0].class_id] == target


def test_remap_preserves_geometry_and_count():
    poly = PolygonAnnotation(1, ((0.1, 0.1), (0.3, 0.1), (0.2, 0.3)))
    labeled = LabeledImage(
        ImageRef("a", "a.png", 10, 10),
        (Instance(1, bbox_from_polygon(poly), poly), Instance(4, BoundingBox(0.5, 0.5, 0.2, 0.2))),
    )
    out = remap_classes(labeled, ClassMap(SOURCE))
    assert len(out.instances) == 2
    assert [i.box for i in out.instances] == [i.box for i in labeled.instances]
    assert out.instances[0].polygon.vertices == poly.vertices


def test_remap_rejects_unmapped_species():
    class_map = ClassMap((*SOURCE, "Chenopodium"))
    with pytest.raises(UnmappedClass) as info:
        remap_classes(_labeled(5), class_map)
    assert info.value.name == "Chenopodium"


# --- Label file I/O ---


def test_missing_label_file_is_empty(tmp_path):
    labeled = read_labels(ImageRef("a", "a.png", 10, 10), tmp_path / "nope.txt", class_count=3)
    assert labeled.instances == ()


def test_write_then_read_labels(tmp_path):
    poly = PolygonAnnotation(2, ((0.1, 0.1), (0.3, 0.1), (0.2, 0.3)))
    labeled = LabeledImage(ImageRef("a", "a.png", 10, 10), (Instance(2, bbox_from_polygon(poly), poly),))
    path = tmp_path / "a.txt"
    write_labels(labeled, path)
    back = read_labels(labeled.image, path, class_count=3)
    flat = [c for v in back.instances[0].polygon.vertices for c in v]
    assert flat == pytest.approx([c for v in poly.vertices for c in v])
    assert back.instances[0].box.w == pytest.approx(0.2)


def test_manifest_entry_loads_its_labels(tmp_path):
    (tmp_path / "labels").mkdir()
    (tmp_path / "labels" / "a.txt").write_text("2 0.5 0.5 0.2 0.4\n")
    entry = ManifestEntry(id="a", path="images/a.png", width=10, height=10, labels_path="labels/a.txt")
    labeled = load_labeled_image(entry, tmp_path, class_count=3)
    assert labeled.image.id == "a"
    assert labeled.instances == (Instance(2, BoundingBox(0.5, 0.5, 0.2, 0.4)),)
    assert not labeled.model_annotated

    model_entry = entry.model_copy(update={"annotated_by": "model"})
    assert load_labeled_image(model_entry, tmp_path, class_count=3).model_annotated
