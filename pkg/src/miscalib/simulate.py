"""Point-projection experiments relating APPD to reprojection error.

Two protocols on a synthetic point cloud in front of a virtual camera:

fixed_projection     project every point with the reference parameters,
                     then rectify the projections with both the reference
                     and the perturbed set; the error is the mean distance
                     between the two rectified projections.
fixed_rectification  project with the perturbed set, rectify with the
                     reference, and compare against the reference-projected,
                     reference-rectified positions.

Point rectification here is the bare normalize / undistort / denormalize
chain with no crop or rescale: cropping depends on the parameter set and
would mix framing changes into a point-level comparison.

Also provides single-parameter APPD sweep curves.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .camera import ImageSize, Intrinsics, normalized_from_pixel, pixel_from_normalized, \
    project, undistort_normalized_array
from .errors import NonConvergence, NoValidRegion, TooFewValidPoints
from .metric import appd_from_params

PARAM_NAMES = ("fu", "fv", "uc", "vc", "k1", "k2", "k3", "p1", "p2")

UNDISTORT_TOL = 1e-10
UNDISTORT_MAX_ITER = 50


@dataclass(frozen=True)
class FrustumSpec:
    """Synthetic point cloud: depths uniform in [z_min, z_max], lateral
    extents chosen so projections cover the raw image at mid-depth."""

    n_points: int = 500
    z_min: float = 2.0
    z_max: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.z_min <= 0:
            raise ValueError("z_min must be positive")
        if self.z_max < self.z_min:
            raise ValueError("z_max must be at least z_min")
        if self.n_points < 10:
            raise ValueError("n_points must be at least 10")


@dataclass(frozen=True)
class ReprojResult:
    appd: float
    reproj_error: float
    n_valid: int
    protocol: str


def generate_points(frustum: FrustumSpec, intr: Intrinsics, size: ImageSize):
    """Seeded 3D points in the camera's viewing frustum.

    The frustum cross-section is the back-projected (undistorted) raw
    image border, so the lateral extent grows linearly with depth and the
    reference projections cover the whole raw image at every depth.
    """
    border_u = np.concatenate([
        np.arange(size.width, dtype=float),
        np.arange(size.width, dtype=float),
        np.zeros(size.height),
        np.full(size.height, size.width - 1.0),
    ])
    border_v = np.concatenate([
        np.zeros(size.width),
        np.full(size.width, size.height - 1.0),
        np.arange(size.height, dtype=float),
        np.arange(size.height, dtype=float),
    ])
    nx, ny = normalized_from_pixel(border_u, border_v, intr)
    ux, uy, ok = undistort_normalized_array(nx, ny, intr, tol=UNDISTORT_TOL,
                                            max_iter=UNDISTORT_MAX_ITER)
    if not np.any(ok):
        raise NonConvergence(np.inf, UNDISTORT_MAX_ITER,
                             "no border point could be undistorted")

    rng = np.random.default_rng(frustum.seed)
    dir_x = rng.uniform(ux[ok].min(), ux[ok].max(), frustum.n_points)
    dir_y = rng.uniform(uy[ok].min(), uy[ok].max(), frustum.n_points)
    Z = rng.uniform(frustum.z_min, frustum.z_max, frustum.n_points)
    return dir_x * Z, dir_y * Z, Z


def rectify_points(u, v, intr: Intrinsics):
    """Rectified pixel positions of raw pixel coordinates, plus a
    convergence mask for the distortion inversion."""
    nx, ny = normalized_from_pixel(u, v, intr)
    ux, uy, ok = undistort_normalized_array(nx, ny, intr, tol=UNDISTORT_TOL,
                                            max_iter=UNDISTORT_MAX_ITER)
    ru, rv = pixel_from_normalized(ux, uy, intr)
    return ru, rv, ok


def rectify_point(u: float, v: float, intr: Intrinsics):
    """Single-point rectification; raises NonConvergence on failure."""
    ru, rv, ok = rectify_points(np.asarray([u], dtype=float),
                                np.asarray([v], dtype=float), intr)
    if not ok[0]:
        raise NonConvergence(np.nan, UNDISTORT_MAX_ITER)
    return float(ru[0]), float(rv[0])


def _mean_error(du, dv, ok, n_points, appd_value, protocol):
    n_valid = int(ok.sum())
    if n_valid < 0.5 * n_points:
        raise TooFewValidPoints(
            f"only {n_valid}/{n_points} points usable under protocol {protocol}"
        )
    err = float(np.hypot(du[ok], dv[ok]).mean())
    return ReprojResult(appd=appd_value, reproj_error=err, n_valid=n_valid,
                        protocol=protocol)


def run_fixed_projection(theta_star: Intrinsics, theta_m: Intrinsics,
                         size: ImageSize, frustum: FrustumSpec = FrustumSpec(),
                         points=None) -> ReprojResult:
    """Protocol (a): fixed projection, varied rectification."""
    X, Y, Z = points if points is not None else generate_points(frustum, theta_star, size)
    u, v = project(X, Y, Z, theta_star)
    ru_s, rv_s, ok_s = rectify_points(u, v, theta_star)
    ru_m, rv_m, ok_m = rectify_points(u, v, theta_m)
    value = appd_from_params(theta_star, theta_m, size)
    return _mean_error(ru_s - ru_m, rv_s - rv_m, ok_s & ok_m, len(X), value,
                       "fixed_projection")


def run_fixed_rectification(theta_star: Intrinsics, theta_m: Intrinsics,
                            size: ImageSize, frustum: FrustumSpec = FrustumSpec(),
                            points=None) -> ReprojResult:
    """Protocol (b): varied projection, fixed rectification."""
    X, Y, Z = points if points is not None else generate_points(frustum, theta_star, size)
    u_m, v_m = project(X, Y, Z, theta_m)
    u_s, v_s = project(X, Y, Z, theta_star)
    ru_m, rv_m, ok_m = rectify_points(u_m, v_m, theta_star)
    ru_s, rv_s, ok_s = rectify_points(u_s, v_s, theta_star)
    value = appd_from_params(theta_star, theta_m, size)
    return _mean_error(ru_s - ru_m, rv_s - rv_m, ok_s & ok_m, len(X), value,
                       "fixed_rectification")


def sweep_parameter(theta_star: Intrinsics, size: ImageSize, param: str,
                    factors) -> list:
    """APPD per multiplication factor with one parameter varied.

    Returns (factor, appd, note) tuples; `appd` is NaN with a note when a
    factor produces no valid crop region.
    """
    if param not in PARAM_NAMES:
        raise ValueError(f"unknown parameter {param!r}, expected one of {PARAM_NAMES}")
    factors = list(factors)
    if not factors:
        raise ValueError("factors must be nonempty")
    out = []
    for f in factors:
        theta_m = dataclasses.replace(theta_star, **{param: getattr(theta_star, param) * f})
        try:
            out.append((f, appd_from_params(theta_star, theta_m, size), ""))
        except NoValidRegion as exc:
            out.append((f, float("nan"), f"no valid region: {exc}"))
    return out
