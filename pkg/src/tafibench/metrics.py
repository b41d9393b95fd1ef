"""Full-reference quality metrics, computed on the luma plane.

PSNR uses L = 255 with a 100 dB cap on zero-MSE pairs so per-clip means stay
finite. SSIM is the classic single-scale form: 11x11 Gaussian window with
sigma 1.5, stride 1, valid positions only, C1 = (0.01*255)^2,
C2 = (0.03*255)^2.
"""
from __future__ import annotations

import json
import math
import os
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import FrameTooSmall, GeometryMismatch, ToolFailed
from .media import Clip, Frame, write_y4m_file

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


def luma_mse(ref_luma: np.ndarray, test_luma: np.ndarray) -> float:
    """Mean squared error between two uint8 planes."""
    if ref_luma.shape != test_luma.shape:
        raise GeometryMismatch(f"metric inputs differ in geometry: "
                               f"{ref_luma.shape} vs {test_luma.shape}")
    diff = ref_luma.astype(np.int64) - test_luma.astype(np.int64)
    return float(np.sum(diff * diff)) / diff.size


def frame_mse(ref: Frame, test: Frame) -> float:
    """Mean squared luma error."""
    return luma_mse(ref.luma, test.luma)


def psnr_from_mse(mse: float) -> float:
    if mse <= 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(255.0 ** 2 / mse)


def psnr(ref: Frame, test: Frame) -> float:
    """Luma PSNR in dB; identical frames return the 100 dB cap."""
    return psnr_from_mse(frame_mse(ref, test))


def _gaussian_kernel(n: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(n) - (n - 1) / 2.0
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


_SSIM_KERNEL = _gaussian_kernel()


def _windowed(img: np.ndarray) -> np.ndarray:
    # separable Gaussian, then crop to valid positions
    half = SSIM_WINDOW // 2
    out = correlate1d(img, _SSIM_KERNEL, axis=0, mode="constant")
    out = correlate1d(out, _SSIM_KERNEL, axis=1, mode="constant")
    return out[half:img.shape[0] - half, half:img.shape[1] - half]


def luma_ssim(ref_luma: np.ndarray, test_luma: np.ndarray) -> float:
    if ref_luma.shape != test_luma.shape:
        raise GeometryMismatch(f"metric inputs differ in geometry: "
                               f"{ref_luma.shape} vs {test_luma.shape}")
    if min(ref_luma.shape) < SSIM_WINDOW:
        raise FrameTooSmall(f"SSIM needs both dimensions >= {SSIM_WINDOW}, "
                            f"got {ref_luma.shape[1]}x{ref_luma.shape[0]}")
    x = ref_luma.astype(np.float64)
    y = test_luma.astype(np.float64)
    mu_x = _windowed(x)
    mu_y = _windowed(y)
    var_x = _windowed(x * x) - mu_x * mu_x
    var_y = _windowed(y * y) - mu_y * mu_y
    cov = _windowed(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _C1) * (2.0 * cov + _C2)
    den = (mu_x * mu_x + mu_y * mu_y + _C1) * (var_x + var_y + _C2)
    return float(np.mean(num / den))


def ssim(ref: Frame, test: Frame) -> float:
    """Mean local luma SSIM over all fully-valid window positions."""
    return luma_ssim(ref.luma, test.luma)


# ---------------------------------------------------------------------------
# external VMAF adapter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VmafToolConfig:
    """How to invoke an external VMAF tool.

    ``command`` is a template with {ref}, {dist} and {out} placeholders; the
    tool must write JSON to {out}. ``score_key`` is a dotted path to the
    pooled score inside that JSON, ``version_key`` (optional) to a reported
    tool/model version string. command=None means "not configured".
    """

    command: str | None = None
    score_key: str = "pooled_metrics.vmaf.mean"
    version_key: str = "version"


@dataclass(frozen=True)
class VmafResult:
    score: float
    tool_version: str | None = None


def _dig(obj, dotted_key: str):
    cur = obj
    for part in dotted_key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return None
        cur = cur[part]
    return cur


def vmaf_external(ref_clip: Clip, test_clip: Clip,
                  tool: VmafToolConfig | None) -> VmafResult | None:
    """Score test_clip against ref_clip with the configured external tool.

    Returns None when no tool is configured (the benchmark then proceeds with
    PSNR/SSIM only). Raises ToolFailed on nonzero exit or unparseable output.
    """
    if tool is None or not tool.command:
        return None
    with tempfile.TemporaryDirectory(prefix="tafibench_vmaf_") as tmp:
        ref_path = os.path.join(tmp, "ref.y4m")
        dist_path = os.path.join(tmp, "dist.y4m")
        out_path = os.path.join(tmp, "scores.json")
        write_y4m_file(ref_clip, ref_path)
        write_y4m_file(test_clip, dist_path)
        cmd = tool.command.format(ref=ref_path, dist=dist_path, out=out_path)
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0:
            raise ToolFailed(f"VMAF command exited {proc.returncode}: {cmd}",
                             stdout=proc.stdout, stderr=proc.stderr)
        try:
            with open(out_path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ToolFailed(f"VMAF output unreadable: {exc}",
                             stdout=proc.stdout, stderr=proc.stderr) from exc
        score = _dig(doc, tool.score_key)
        if not isinstance(score, (int, float)):
            raise ToolFailed(f"key {tool.score_key!r} missing from VMAF output",
                             stdout=proc.stdout, stderr=proc.stderr)
        version = _dig(doc, tool.version_key)
        return VmafResult(score=float(score),
                          tool_version=str(version) if version is not None else None)
