import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_frame
from tafibench.errors import GeometryMismatch, InvalidSpec
from tafibench.interp import (
    DEFAULT_PARAMS,
    BlendMode,
    InterpMode,
    InterpParams,
    ObmcMode,
    dump_motion_field,
    estimate_motion,
    interpolate,
    interpolate_luma,
    parse_motion_field,
)
from tafibench.media import extract_patch, make_frame
from tafibench.metrics import psnr
from tafibench.texgen import fbm_2d


def brute_force_motion(prev, nxt, block_size, search_range, lam):
    """Independent reference: exhaustive search with the declared cost/tie-break."""
    h, w = prev.shape
    gh = -(-h // block_size)
    gw = -(-w // block_size)
    vec = np.zeros((gh, gw, 2), dtype=np.int64)
    p64 = prev.astype(np.int64)
    n64 = nxt.astype(np.int64)
    for by in range(gh):
        for bx in range(gw):
            y0, y1 = by * block_size, min((by + 1) * block_size, h)
            x0, x1 = bx * block_size, min((bx + 1) * block_size, w)
            neighbors = []
            if bx > 0:
                neighbors.append(vec[by, bx - 1])
            if by > 0:
                if bx > 0:
                    neighbors.append(vec[by - 1, bx - 1])
                neighbors.append(vec[by - 1, bx])
                if bx + 1 < gw:
                    neighbors.append(vec[by - 1, bx + 1])
            if neighbors:
                arr = np.array(neighbors, dtype=np.float64)
                mx, my = np.median(arr[:, 0]), np.median(arr[:, 1])
            else:
                mx = my = 0.0
            best_key = None
            best = None
            for dy in range(-search_range, search_range + 1):
                for dx in range(-search_range, search_range + 1):
                    if y0 + dy < 0 or y1 + dy > h or x0 + dx < 0 or x1 + dx > w:
                        continue
                    sad = int(np.abs(p64[y0:y1, x0:x1]
                                     - n64[y0 + dy:y1 + dy, x0 + dx:x1 + dx]).sum())
                    cost = sad + lam * (abs(dx - mx) + abs(dy - my))
                    key = (cost, abs(dx) + abs(dy), dy, dx)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = (dx, dy)
            vec[by, bx] = best
    return vec


def textured(seed, w, h):
    yy, xx = np.indices((h, w), dtype=np.float64)
    return np.clip(np.rint(128 + 100 * fbm_2d(xx / 9.0, yy / 9.0, seed)),
                   0, 255).astype(np.uint8)


def shifted_pair(seed, w, h, dx, dy, margin=8):
    canvas = textured(seed, w + 2 * margin, h + 2 * margin)
    prev = canvas[margin:margin + h, margin:margin + w]
    nxt = canvas[margin + dy:margin + dy + h, margin + dx:margin + dx + w]
    return prev.copy(), nxt.copy()


def test_params_validation():
    with pytest.raises(InvalidSpec):
        InterpParams(block_size=12)
    with pytest.raises(InvalidSpec):
        InterpParams(search_range=33)
    with pytest.raises(InvalidSpec):
        InterpParams(smoothness_lambda=-1.0)


def test_identity_vectors_on_textured_frame():
    luma = textured(3, 48, 32)
    f = make_frame(luma)
    field = estimate_motion(f, f, InterpParams(block_size=16, search_range=4))
    assert np.all(field.vectors == 0)
    assert np.all(field.matched_sad == 0)


def test_flat_frames_tie_break_to_zero():
    f = make_frame(np.full((32, 32), 90, np.uint8))
    field = estimate_motion(f, f, InterpParams(block_size=8, search_range=5,
                                               smoothness_lambda=0.0))
    assert np.all(field.vectors == 0)


def test_global_shift_recovered_in_interior():
    prev, nxt = shifted_pair(9, 64, 48, dx=4, dy=0)
    field = estimate_motion(make_frame(prev), make_frame(nxt),
                            InterpParams(block_size=16, search_range=8,
                                         smoothness_lambda=0.0))
    interior = field.vectors[1:-1, 1:-1]
    assert np.all(interior[:, :, 0] == -4)
    assert np.all(interior[:, :, 1] == 0)


def test_geometry_mismatch_rejected(rng):
    with pytest.raises(GeometryMismatch):
        estimate_motion(random_frame(rng, 16, 16), random_frame(rng, 32, 16),
                        DEFAULT_PARAMS)


@pytest.mark.parametrize("lam", [0.0, 16.0, 256.0])
@pytest.mark.parametrize("block_size", [8, 16])
def test_motion_matches_brute_force(lam, block_size, rng):
    for trial in range(6):
        prev = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        nxt = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        field = estimate_motion(
            make_frame(prev), make_frame(nxt),
            InterpParams(block_size=block_size, search_range=6,
                         smoothness_lambda=lam))
        expected = brute_force_motion(prev, nxt, block_size, 6, lam)
        assert np.array_equal(field.vectors.astype(np.int64), expected)


def test_motion_matches_brute_force_partial_blocks(rng):
    # frame not divisible by the block size: edge blocks are smaller
    prev = rng.integers(0, 256, (20, 28), dtype=np.uint8)
    nxt = rng.integers(0, 256, (20, 28), dtype=np.uint8)
    field = estimate_motion(make_frame(prev), make_frame(nxt),
                            InterpParams(block_size=16, search_range=5,
                                         smoothness_lambda=7.0))
    expected = brute_force_motion(prev, nxt, 16, 5, 7.0)
    assert np.array_equal(field.vectors.astype(np.int64), expected)


def _all_param_combos():
    for bs in (8, 16, 32):
        for obmc in ObmcMode:
            for blend in BlendMode:
                for mode in InterpMode:
                    yield InterpParams(block_size=bs, search_range=4,
                                       smoothness_lambda=16.0, obmc=obmc,
                                       blend=blend, mode=mode)


def test_interpolate_idempotent_on_static_input(rng):
    f = random_frame(rng, 48, 32)
    for params in _all_param_combos():
        assert interpolate(f, f, params) == f


def test_frame_average_arithmetic():
    a = make_frame(np.full((16, 16), 100, np.uint8))
    b = make_frame(np.full((16, 16), 200, np.uint8))
    out = interpolate(a, b, InterpParams(mode=InterpMode.FRAME_AVERAGE))
    assert np.all(out.luma == 150)


def test_frame_average_symmetry(rng):
    a, b = random_frame(rng, 16, 16), random_frame(rng, 16, 16)
    p = InterpParams(mode=InterpMode.FRAME_AVERAGE)
    assert interpolate(a, b, p) == interpolate(b, a, p)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32), st.sampled_from([8, 16, 32]),
       st.sampled_from(list(ObmcMode)), st.sampled_from(list(BlendMode)),
       st.sampled_from(list(InterpMode)))
def test_output_range_and_geometry(seed, bs, obmc, blend, mode):
    rng = np.random.default_rng(seed)
    a, b = random_frame(rng, 32, 24), random_frame(rng, 32, 24)
    params = InterpParams(block_size=bs, search_range=3, smoothness_lambda=4.0,
                          obmc=obmc, blend=blend, mode=mode)
    out = interpolate(a, b, params)
    assert out.luma.shape == (24, 32)
    assert out.luma.dtype == np.uint8       # uint8 is the [0, 255] guarantee
    assert out.chroma_u.shape == (12, 16)


def test_mci_beats_frame_average_on_translation():
    canvas = textured(21, 120, 80)
    prev = make_frame(canvas[8:72, 8:104].copy())
    mid = make_frame(canvas[8:72, 10:106].copy())
    nxt = make_frame(canvas[8:72, 12:108].copy())
    mci = interpolate(prev, nxt, InterpParams(block_size=16, search_range=4))
    avg = interpolate(prev, nxt, InterpParams(mode=InterpMode.FRAME_AVERAGE))
    assert psnr(mci, mid) >= psnr(avg, mid)
    assert psnr(mci, mid) > 30.0


def test_mci_near_symmetric_on_texture():
    canvas = textured(22, 120, 80)
    prev = make_frame(canvas[8:72, 8:104].copy())
    mid = make_frame(canvas[8:72, 10:106].copy())
    nxt = make_frame(canvas[8:72, 12:108].copy())
    fwd = psnr(interpolate(prev, nxt, DEFAULT_PARAMS), mid)
    bwd = psnr(interpolate(nxt, prev, DEFAULT_PARAMS), mid)
    assert abs(fwd - bwd) < 0.5


def test_interpolate_luma_matches_full(rng):
    a, b = random_frame(rng, 32, 32), random_frame(rng, 32, 32)
    for params in (DEFAULT_PARAMS,
                   InterpParams(obmc=ObmcMode.RAISED_COSINE,
                                blend=BlendMode.SAD_WEIGHTED),
                   InterpParams(mode=InterpMode.FRAME_AVERAGE)):
        assert np.array_equal(interpolate_luma(a, b, params),
                              interpolate(a, b, params).luma)


def test_chroma_follows_luma_motion():
    # full-plane even translation: chroma must be compensated too
    yy, xx = np.indices((96, 128), dtype=np.float64)
    luma = np.clip(np.rint(128 + 100 * fbm_2d(xx / 9, yy / 9, 5)), 0, 255).astype(np.uint8)
    cu = np.clip(np.rint(128 + 60 * fbm_2d(xx[::2, ::2] / 7, yy[::2, ::2] / 7, 6)),
                 0, 255).astype(np.uint8)
    cv = np.full_like(cu, 128)
    from tafibench.media import Frame
    full = Frame(luma, cu, cv)
    prev = extract_patch(full, 8, 8, 96, 64)
    mid = extract_patch(full, 10, 8, 96, 64)
    nxt = extract_patch(full, 12, 8, 96, 64)
    out = interpolate(prev, nxt, InterpParams(block_size=16, search_range=4))
    naive = interpolate(prev, nxt, InterpParams(mode=InterpMode.FRAME_AVERAGE))
    err_mci = np.mean(np.abs(out.chroma_u.astype(int) - mid.chroma_u.astype(int)))
    err_avg = np.mean(np.abs(naive.chroma_u.astype(int) - mid.chroma_u.astype(int)))
    assert err_mci < err_avg


def test_motion_field_dump_round_trip(rng):
    a, b = random_frame(rng, 48, 32), random_frame(rng, 48, 32)
    field = estimate_motion(a, b, InterpParams(block_size=16, search_range=3))
    text = dump_motion_field(field)
    back = parse_motion_field(text)
    assert np.array_equal(back.vectors, field.vectors)
    assert back.block_size == field.block_size
    assert (back.frame_width, back.frame_height) == (48, 32)


def test_search_range_zero_yields_zero_field(rng):
    a, b = random_frame(rng, 32, 32), random_frame(rng, 32, 32)
    field = estimate_motion(a, b, InterpParams(search_range=0))
    assert np.all(field.vectors == 0)
