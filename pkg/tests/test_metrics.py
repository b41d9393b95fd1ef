import json
import math
import os
import stat
import sys

import numpy as np
import pytest

from conftest import flat_frame, random_clip, random_frame
from tafibench.errors import FrameTooSmall, GeometryMismatch, ToolFailed
from tafibench.media import make_frame
from tafibench.metrics import (
    PSNR_CAP_DB,
    VmafToolConfig,
    psnr,
    ssim,
    vmaf_external,
)

C1 = (0.01 * 255.0) ** 2
C2 = (0.03 * 255.0) ** 2


def test_psnr_identical_frames_capped(rng):
    f = random_frame(rng, 16, 16)
    assert psnr(f, f) == PSNR_CAP_DB


def test_psnr_all_zero_vs_all_16():
    expected = 10.0 * math.log10(255.0 ** 2 / 256.0)
    assert psnr(flat_frame(0), flat_frame(16)) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(24.048, abs=1e-3)


def test_psnr_all_zero_vs_all_255():
    assert psnr(flat_frame(0), flat_frame(255)) == pytest.approx(0.0, abs=1e-9)


def test_psnr_geometry_mismatch(rng):
    with pytest.raises(GeometryMismatch):
        psnr(random_frame(rng, 16, 16), random_frame(rng, 8, 8))


def test_psnr_symmetry(rng):
    a, b = random_frame(rng, 12, 12), random_frame(rng, 12, 12)
    assert psnr(a, b) == psnr(b, a)


def test_psnr_monotonic_under_noise(rng):
    base = rng.integers(60, 190, (32, 32), dtype=np.uint8)
    ref = make_frame(base)
    values = []
    for amplitude in (1, 3, 7, 15, 31):
        noise = rng.integers(-amplitude, amplitude + 1, base.shape)
        test = make_frame(np.clip(base.astype(int) + noise, 0, 255).astype(np.uint8))
        values.append(psnr(ref, test))
    assert all(a > b for a, b in zip(values, values[1:]))


def test_ssim_identity(rng):
    f = random_frame(rng, 16, 16)
    assert ssim(f, f) == pytest.approx(1.0, abs=1e-9)


def test_ssim_constant_100_vs_110():
    expected = (2 * 100 * 110 + C1) / (100 ** 2 + 110 ** 2 + C1)
    got = ssim(flat_frame(100), flat_frame(110))
    assert got == pytest.approx(expected, abs=1e-7)
    assert got == pytest.approx(0.99548, abs=1e-5)


def test_ssim_constant_0_vs_255():
    expected = C1 / (255 ** 2 + C1)
    assert ssim(flat_frame(0), flat_frame(255)) == pytest.approx(expected, rel=1e-6)
    assert expected == pytest.approx(1.0e-4, abs=2e-6)


def test_ssim_symmetry(rng):
    a, b = random_frame(rng, 14, 14), random_frame(rng, 14, 14)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_frame_too_small():
    with pytest.raises(FrameTooSmall):
        ssim(flat_frame(0, 10, 10), flat_frame(0, 10, 10))


def test_ssim_range(rng):
    a, b = random_frame(rng, 24, 24), random_frame(rng, 24, 24)
    assert -1.0 <= ssim(a, b) <= 1.0


# ---------------------------------------------------------------------------
# external VMAF adapter, exercised through a stub tool
# ---------------------------------------------------------------------------

def _write_stub_tool(path, payload, exit_code=0):
    script = f"""#!{sys.executable}
import json, sys
out = sys.argv[3]
with open(out, "w") as fh:
    json.dump({payload!r}, fh)
sys.exit({exit_code})
"""
    with open(path, "w") as fh:
        fh.write(script)
    os.chmod(path, os.stat(path).st_mode | stat.S_IEXEC)


def test_vmaf_unconfigured_returns_none():
    clip = random_clip(0, w=8, h=8, n=2)
    assert vmaf_external(clip, clip, None) is None
    assert vmaf_external(clip, clip, VmafToolConfig(command=None)) is None


def test_vmaf_stub_tool_parses_pooled_score(tmp_path):
    tool = tmp_path / "fake_vmaf.py"
    _write_stub_tool(tool, {"version": "stub-1.0",
                            "pooled_metrics": {"vmaf": {"mean": 97.25}}})
    cfg = VmafToolConfig(command=f"{sys.executable} {tool} {{ref}} {{dist}} {{out}}")
    clip = random_clip(1, w=8, h=8, n=2)
    result = vmaf_external(clip, clip, cfg)
    assert result.score == pytest.approx(97.25)
    assert result.tool_version == "stub-1.0"


def test_vmaf_nonzero_exit_raises(tmp_path):
    tool = tmp_path / "fail_vmaf.py"
    _write_stub_tool(tool, {}, exit_code=3)
    cfg = VmafToolConfig(command=f"{sys.executable} {tool} {{ref}} {{dist}} {{out}}")
    clip = random_clip(2, w=8, h=8, n=2)
    with pytest.raises(ToolFailed):
        vmaf_external(clip, clip, cfg)


def test_vmaf_missing_score_key_raises(tmp_path):
    tool = tmp_path / "empty_vmaf.py"
    _write_stub_tool(tool, {"something": "else"})
    cfg = VmafToolConfig(command=f"{sys.executable} {tool} {{ref}} {{dist}} {{out}}")
    clip = random_clip(3, w=8, h=8, n=2)
    with pytest.raises(ToolFailed):
        vmaf_external(clip, clip, cfg)
