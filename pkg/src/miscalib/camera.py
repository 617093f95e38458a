"""Pinhole camera model with radial and tangential lens distortion.

Conventions
-----------
Normalized coordinates live on the z = 1 plane.  The distortion model is
Brown-Conrady with three radial and two tangential terms::

    r2     = x^2 + y^2
    radial = 1 + k1*r2 + k2*r2^2 + k3*r2^3
    xd     = x*radial + 2*p1*x*y + p2*(r2 + 2*x^2)
    yd     = y*radial + p1*(r2 + 2*y^2) + 2*p2*x*y

Pixel coordinates are continuous, with pixel centers at integer positions
and the origin at the top-left pixel center.  At file boundaries the five
distortion coefficients are ordered (k1, k2, p1, p2, k3), matching KITTI's
distortion vector.

All functions accept scalars or numpy arrays (broadcast over the trailing
shape) and compute in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BehindCamera, NonConvergence, NonPositiveFocal

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 20


@dataclass(frozen=True)
class ImageSize:
    """Image dimensions in pixels (width, height)."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"image size must be at least 2x2, got {self}")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass(frozen=True)
class Intrinsics:
    """Calibration parameter set: focal lengths, principal point, distortion.

    fu, fv    focal lengths in pixels
    uc, vc    principal point in pixels
    k1,k2,k3  radial distortion coefficients
    p1,p2     tangential distortion coefficients
    """

    fu: float
    fv: float
    uc: float
    vc: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        values = self.as_tuple()
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"intrinsics must be finite, got {values}")
        if self.fu <= 0 or self.fv <= 0:
            raise NonPositiveFocal(f"focal lengths must be positive, got fu={self.fu}, fv={self.fv}")

    @property
    def kr(self) -> tuple:
        """Radial coefficients (k1, k2, k3)."""
        return (self.k1, self.k2, self.k3)

    @property
    def kt(self) -> tuple:
        """Tangential coefficients (p1, p2)."""
        return (self.p1, self.p2)

    def as_tuple(self) -> tuple:
        """The nine parameters in canonical order (fu, fv, uc, vc, k1, k2, k3, p1, p2)."""
        return (self.fu, self.fv, self.uc, self.vc, self.k1, self.k2, self.k3, self.p1, self.p2)

    @classmethod
    def from_tuple(cls, values) -> "Intrinsics":
        fu, fv, uc, vc, k1, k2, k3, p1, p2 = (float(v) for v in values)
        return cls(fu=fu, fv=fv, uc=uc, vc=vc, k1=k1, k2=k2, k3=k3, p1=p1, p2=p2)

    def dist_coeffs(self) -> np.ndarray:
        """File-boundary distortion vector in KITTI order (k1, k2, p1, p2, k3)."""
        return np.array([self.k1, self.k2, self.p1, self.p2, self.k3])

    def with_dist_coeffs(self, d) -> "Intrinsics":
        k1, k2, p1, p2, k3 = (float(v) for v in d)
        return replace(self, k1=k1, k2=k2, k3=k3, p1=p1, p2=p2)

    def scaled(self, sx: float, sy: float) -> "Intrinsics":
        """Intrinsics for the same camera after resizing the image by (sx, sy).

        Distortion coefficients act on normalized coordinates and are
        unaffected by resolution.
        """
        return replace(self, fu=self.fu * sx, fv=self.fv * sy, uc=self.uc * sx, vc=self.vc * sy)


def scale_intrinsics(intr: Intrinsics, size: ImageSize, new_size: ImageSize) -> Intrinsics:
    """Rescale `intr`, valid for `size`, to an image of `new_size`."""
    return intr.scaled(new_size.width / size.width, new_size.height / size.height)


def _tangential(x, y, p1, p2):
    r2 = x * x + y * y
    tx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
    ty = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
    return tx, ty


def _pair(x, y, scalar):
    if scalar:
        return float(x), float(y)
    return x, y


def distort_normalized(x, y, intr: Intrinsics):
    """Apply the distortion model to normalized coordinates.

    Returns the distorted (xd, yd).  Total on finite inputs; the origin is
    a fixed point for any coefficient set.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r2 = x * x + y * y
    radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3))
    tx, ty = _tangential(x, y, intr.p1, intr.p2)
    return _pair(x * radial + tx, y * radial + ty, scalar)


def undistort_normalized(xd, yd, intr: Intrinsics, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER):
    """Invert the distortion model for a single normalized point.

    Fixed-point iteration p_{n+1} = (pd - tangential(p_n)) / radial(p_n),
    seeded with p_0 = pd.  Raises NonConvergence when the forward-model
    residual stays above `tol` after `max_iter` iterations, which signals
    an out-of-model input (extreme coefficients or radius).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x, y, ok = undistort_normalized_array(xd, yd, intr, tol=tol, max_iter=max_iter)
    if not np.all(ok):
        rx, ry = distort_normalized(x, y, intr)
        residual = float(np.max(np.hypot(rx - xd, ry - yd)))
        raise NonConvergence(residual, max_iter)
    if np.ndim(xd) == 0:
        return float(x), float(y)
    return x, y


def undistort_normalized_array(xd, yd, intr: Intrinsics, tol: float = DEFAULT_TOL,
                               max_iter: int = DEFAULT_MAX_ITER):
    """Vectorized inversion; returns (x, y, converged_mask) without raising."""
    xd = np.asarray(xd, dtype=np.float64)
    yd = np.asarray(yd, dtype=np.float64)
    x = xd.copy()
    y = yd.copy()
    done = np.zeros(xd.shape, dtype=bool)
    for _ in range(max_iter):
        fx, fy = distort_normalized(x, y, intr)
        done = np.hypot(fx - xd, fy - yd) <= tol
        if np.all(done):
            break
        r2 = x * x + y * y
        radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3))
        tx, ty = _tangential(x, y, intr.p1, intr.p2)
        with np.errstate(divide="ignore", invalid="ignore"):
            nx = (xd - tx) / radial
            ny = (yd - ty) / radial
        bad = ~np.isfinite(nx) | ~np.isfinite(ny)
        # keep already-converged and non-finite entries in place
        step = ~done & ~bad
        x = np.where(step, nx, x)
        y = np.where(step, ny, y)
    else:
        fx, fy = distort_normalized(x, y, intr)
        done = np.hypot(fx - xd, fy - yd) <= tol
    return x, y, done


def pixel_from_normalized(x, y, intr: Intrinsics):
    """(u, v) = (fu*x + uc, fv*y + vc)."""
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    return _pair(intr.fu * np.asarray(x, dtype=np.float64) + intr.uc,
                 intr.fv * np.asarray(y, dtype=np.float64) + intr.vc, scalar)


def normalized_from_pixel(u, v, intr: Intrinsics):
    """Exact inverse of pixel_from_normalized."""
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    return _pair((np.asarray(u, dtype=np.float64) - intr.uc) / intr.fu,
                 (np.asarray(v, dtype=np.float64) - intr.vc) / intr.fv, scalar)


def project(X, Y, Z, intr: Intrinsics):
    """Project camera-frame 3D points through distortion to pixel coordinates.

    Raises BehindCamera if any depth is non-positive.
    """
    scalar = np.ndim(X) == 0 and np.ndim(Z) == 0
    Z = np.asarray(Z, dtype=np.float64)
    if np.any(Z <= 0):
        raise BehindCamera(f"point depth must be positive, got min Z = {np.min(Z)}")
    x = np.asarray(X, dtype=np.float64) / Z
    y = np.asarray(Y, dtype=np.float64) / Z
    xd, yd = distort_normalized(x, y, intr)
    return _pair(*pixel_from_normalized(xd, yd, intr), scalar)
