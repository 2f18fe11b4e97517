"""Reconstruction metrics: PSNR, SSIM and IoU."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ShapeMismatch, TooSmall

PSNR_CAP = 200.0


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float | None = None
    iou: float | None = None


def _pair(pred, target) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(pred, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return a, b


def psnr(pred, target, peak: float = 1.0) -> float:
    """``10 log10(peak^2 / mse)``; identical inputs give ``PSNR_CAP``."""
    a, b = _pair(pred, target)
    err = float(np.mean((a - b) ** 2))
    if err == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(peak * peak / err))


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    # separable correlation, then crop to windows fully inside the image
    out = correlate1d(img, win, axis=0, mode="constant")
    out = correlate1d(out, win, axis=1, mode="constant")
    h = len(win) // 2
    return out[h : img.shape[0] - h, h : img.shape[1] - h]


def ssim_map(pred, target, data_range: float = 1.0, win_size: int = 11,
             sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03) -> np.ndarray:
    """Local SSIM over every valid window of a single-channel 2-D grid."""
    a, b = _pair(pred, target)
    if a.ndim != 2:
        raise ShapeMismatch(f"ssim_map expects a 2-D grid, got {a.shape}")
    if min(a.shape) < win_size:
        raise TooSmall(f"grid {a.shape} smaller than {win_size}x{win_size} window")
    win = gaussian_window(win_size, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_a = _filter_valid(a, win)
    mu_b = _filter_valid(b, win)
    var_a = _filter_valid(a * a, win) - mu_a**2
    var_b = _filter_valid(b * b, win) - mu_b**2
    cov = _filter_valid(a * b, win) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return num / den


def ssim(pred, target, data_range: float = 1.0, **kw) -> float:
    """Mean SSIM; a trailing channel axis on 3-D input is averaged over."""
    a, b = _pair(pred, target)
    if a.ndim == 2:
        return float(ssim_map(a, b, data_range, **kw).mean())
    if a.ndim == 3:
        return float(np.mean([ssim_map(a[..., c], b[..., c], data_range, **kw).mean()
                              for c in range(a.shape[-1])]))
    raise ShapeMismatch(f"ssim needs a 2-D grid (optionally with channels), got {a.shape}")


def iou(pred, target, threshold: float = 0.5) -> float:
    """Intersection over union of ``pred >= threshold`` and ``target >= threshold``."""
    a, b = _pair(pred, target)
    ma, mb = a >= threshold, b >= threshold
    union = np.count_nonzero(ma | mb)
    if union == 0:
        return 1.0
    return np.count_nonzero(ma & mb) / union
