"""Dataset generation: calibration ingestion, sample production, manifests.

A dataset is a directory of rectified PNG images plus a JSON-lines manifest:
the first line is a header object (reference calibration, perturbation
ranges, sampler configuration, seed, tool version), each following line is
one sample record.  Everything needed to recompute a record's APPD label
from scratch is stored, and generation is deterministic given the seed,
including file naming.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__ as _version
from .camera import ImageSize, Intrinsics, scale_intrinsics
from .errors import EmptyInputDir, MissingKey, NoValidRegion, ParseError, VersionMismatch
from .image_io import image_size, read_image, write_image
from .rectify import rectify_pipeline
from .sampling import LabeledPerturbation, PerturbRanges, SamplerConfig, sample_uniform_appd

MANIFEST_FORMAT = 1
MANIFEST_NAME = "manifest.jsonl"
IMAGE_DIR_NAME = "images"
_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

_NATIVE_KEYS = ("fu", "fv", "uc", "vc", "k1", "k2", "k3", "p1", "p2", "width", "height")


@dataclass(frozen=True)
class CalibSource:
    """A parsed reference calibration bound to its raw image size."""

    camera_id: str
    intrinsics: Intrinsics
    raw_size: ImageSize
    origin: str


@dataclass(frozen=True)
class SampleRecord:
    sample_id: str
    source_image: str
    output_image: str
    theta_m: tuple
    appd_label: float
    pool_index: int

    def to_json(self) -> str:
        return json.dumps({
            "sample_id": self.sample_id,
            "source_image": self.source_image,
            "output_image": self.output_image,
            "theta_m": list(self.theta_m),
            "appd_label": self.appd_label,
            "pool_index": self.pool_index,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "SampleRecord":
        return cls(
            sample_id=obj["sample_id"],
            source_image=obj["source_image"],
            output_image=obj["output_image"],
            theta_m=tuple(obj["theta_m"]),
            appd_label=obj["appd_label"],
            pool_index=obj["pool_index"],
        )


@dataclass
class Manifest:
    header: dict
    records: list

    @property
    def raw_size(self) -> ImageSize:
        w, h = self.header["raw_size"]
        return ImageSize(w, h)

    @property
    def theta_star(self) -> Intrinsics:
        return Intrinsics.from_tuple(self.header["theta_star"])

    @property
    def label_size(self) -> ImageSize:
        w, h = self.header["label_size"]
        return ImageSize(w, h)


def _parse_kv_lines(path):
    data = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" in line:
                key, _, value = line.partition(":")
            elif "=" in line:
                key, _, value = line.partition("=")
            else:
                raise ParseError(f"{path}:{lineno}: expected 'key: value', got {raw!r}")
            data[key.strip()] = value.strip()
    return data


def parse_calib(path, fmt: str = "native", camera: int = 2) -> CalibSource:
    """Read a calibration file.

    native  key-value text with fu fv uc vc k1 k2 k3 p1 p2 width height
    kitti   calib_cam_to_cam.txt subset: K_0X (3x3 row-major), D_0X
            (k1 k2 p1 p2 k3), S_0X (width height) for camera index X
    """
    path = Path(path)
    data = _parse_kv_lines(path)
    if fmt == "native":
        missing = [k for k in _NATIVE_KEYS if k not in data]
        if missing:
            raise MissingKey(missing[0])
        try:
            values = {k: float(data[k]) for k in _NATIVE_KEYS}
        except ValueError as exc:
            raise ParseError(f"{path}: non-numeric calibration value: {exc}") from exc
        intr = Intrinsics(fu=values["fu"], fv=values["fv"], uc=values["uc"], vc=values["vc"],
                          k1=values["k1"], k2=values["k2"], k3=values["k3"],
                          p1=values["p1"], p2=values["p2"])
        size = ImageSize(int(values["width"]), int(values["height"]))
        camera_id = data.get("camera_id", path.stem)
        return CalibSource(camera_id=camera_id, intrinsics=intr, raw_size=size,
                           origin=f"{path} (native)")
    if fmt == "kitti":
        idx = f"{camera:02d}"
        for key in (f"K_{idx}", f"D_{idx}", f"S_{idx}"):
            if key not in data:
                raise MissingKey(key)

        def floats(key, n):
            parts = data[key].split()
            if len(parts) != n:
                raise ParseError(f"{path}: {key} must have {n} values, got {len(parts)}")
            try:
                return [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"{path}: non-numeric value in {key}") from exc

        k = floats(f"K_{idx}", 9)
        d = floats(f"D_{idx}", 5)  # k1 k2 p1 p2 k3
        s = floats(f"S_{idx}", 2)
        intr = Intrinsics(fu=k[0], fv=k[4], uc=k[2], vc=k[5],
                          k1=d[0], k2=d[1], p1=d[2], p2=d[3], k3=d[4])
        size = ImageSize(int(round(s[0])), int(round(s[1])))
        return CalibSource(camera_id=f"cam{idx}", intrinsics=intr, raw_size=size,
                           origin=f"{path} (kitti camera {camera})")
    raise ValueError(f"unknown calibration format {fmt!r}")


def theta_raw_from_sample(theta_star: Intrinsics, sample: LabeledPerturbation) -> Intrinsics:
    """Perturbed parameters at raw resolution.

    Pixel-valued parameters are rebuilt from the stored factors so that
    zero-label entries stay bit-identical to the reference; distortion
    coefficients are resolution-free and copied from the sampled set.
    """
    f = sample.factors
    t = sample.theta
    return Intrinsics(fu=theta_star.fu * f[0], fv=theta_star.fv * f[1],
                      uc=theta_star.uc * f[2], vc=theta_star.vc * f[3],
                      k1=t.k1, k2=t.k2, k3=t.k3, p1=t.p1, p2=t.p2)


def _list_images(image_dir) -> list:
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise EmptyInputDir(f"{image_dir} is not a directory")
    return sorted(p for p in image_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)


def generate_dataset(image_dir, calib: CalibSource, ranges: PerturbRanges,
                     cfg: SamplerConfig, per_image: int | None, out_dir,
                     n_total: int | None = None,
                     label_size: ImageSize | None = None, jobs: int = 1) -> Manifest:
    """Build a labeled semi-synthetic dataset under `out_dir`.

    Draws per_image labeled perturbations per usable raw image (or
    `n_total` in all, when given instead) from one shared pool, so the
    pool's label distribution, not each image's, is shaped.  The pool is
    partitioned round-robin across images; each image is rectified under
    its perturbed parameters and written to out_dir/images/*.png along
    with the manifest.  APPD labels are evaluated at `label_size`
    (default: raw size) with rescaled intrinsics.  Deterministic given
    cfg.seed, including file naming.
    """
    if (per_image is None) == (n_total is None):
        raise ValueError("provide exactly one of per_image and n_total")
    if per_image is not None and per_image < 1:
        raise ValueError("per_image must be positive")
    if n_total is not None and n_total < 1:
        raise ValueError("n_total must be positive")
    raw_size = calib.raw_size
    label_size = label_size or raw_size

    skipped = []
    images = []
    for path in _list_images(image_dir):
        try:
            img = read_image(path)
        except Exception as exc:  # undecodable file: report, never silently drop
            skipped.append({"file": str(path), "reason": f"decode failed: {exc}"})
            continue
        if image_size(img) != raw_size:
            got = image_size(img)
            skipped.append({"file": str(path),
                            "reason": f"size {got.width}x{got.height} does not match "
                                      f"calibration {raw_size.width}x{raw_size.height}"})
            continue
        images.append((path, img))
    if not images:
        raise EmptyInputDir(f"no usable images in {image_dir}")

    pool_size = n_total if n_total is not None else per_image * len(images)
    cfg = dataclasses.replace(cfg, n_samples=pool_size)
    theta_eval = scale_intrinsics(calib.intrinsics, raw_size, label_size)
    result = sample_uniform_appd(theta_eval, label_size, ranges, cfg)

    out_dir = Path(out_dir)
    (out_dir / IMAGE_DIR_NAME).mkdir(parents=True, exist_ok=True)

    dropped = []

    def produce(item):
        pool_index, sample = item
        src_path, src_img = images[pool_index % len(images)]
        theta_m = theta_raw_from_sample(calib.intrinsics, sample)
        sample_id = f"{pool_index:06d}"
        out_name = f"{IMAGE_DIR_NAME}/{sample_id}.png"
        try:
            rectified, _ = rectify_pipeline(src_img, theta_m)
        except NoValidRegion as exc:
            return sample_id, None, str(exc)
        write_image(out_dir / out_name, rectified)
        record = SampleRecord(sample_id=sample_id, source_image=str(src_path),
                              output_image=out_name, theta_m=theta_m.as_tuple(),
                              appd_label=sample.appd, pool_index=pool_index)
        return sample_id, record, None

    items = list(enumerate(result.samples))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            produced = list(pool.map(produce, items))
    else:
        produced = [produce(item) for item in items]

    records = []
    for sample_id, record, problem in produced:
        if record is None:
            dropped.append({"sample_id": sample_id, "reason": problem})
        else:
            records.append(record)

    header = {
        "format_version": MANIFEST_FORMAT,
        "tool": f"miscalib {_version}",
        "camera_id": calib.camera_id,
        "calib_origin": calib.origin,
        "theta_star": list(calib.intrinsics.as_tuple()),
        "raw_size": [raw_size.width, raw_size.height],
        "label_size": [label_size.width, label_size.height],
        "ranges": {
            "focal": list(ranges.focal),
            "center": list(ranges.center),
            "distortion": list(ranges.distortion),
            "distortion_additive_eps": ranges.distortion_additive_eps,
        },
        "sampler": {
            "n_samples": cfg.n_samples,
            "n_bins": cfg.n_bins,
            "appd_max": result.appd_max,
            "zero_fraction": cfg.zero_fraction,
            "max_attempts_per_slot": cfg.max_attempts_per_slot,
            "pilot_draws": cfg.pilot_draws,
            "attempts": result.attempts,
        },
        "seed": cfg.seed,
        "per_image": per_image,
        "source_images": [str(p) for p, _ in images],
        "skipped_images": skipped,
        "dropped_samples": dropped,
        "starved_bins": [dataclasses.asdict(s) for s in result.starved],
    }
    manifest = Manifest(header=header, records=records)
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def write_manifest(manifest: Manifest, path) -> None:
    with open(path, "w") as f:
        f.write(json.dumps(manifest.header, sort_keys=True) + "\n")
        for record in manifest.records:
            f.write(record.to_json() + "\n")


def read_manifest(path) -> Manifest:
    path = Path(path)
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty manifest")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:1: bad header JSON: {exc}") from exc
    version = header.get("format_version")
    if version != MANIFEST_FORMAT:
        raise VersionMismatch(
            f"{path}: manifest format {version!r}, this tool reads {MANIFEST_FORMAT}"
        )
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(SampleRecord.from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ParseError(f"{path}:{lineno}: bad record: {exc}") from exc
    return Manifest(header=header, records=records)


def validate_manifest(path, recompute: int = 0, seed: int = 0) -> list:
    """Integrity re-check of a dataset directory; returns a list of problems.

    Verifies that every referenced output image exists, decodes, and has
    the raw size, and that labels are non-negative.  With recompute > 0,
    re-derives that many labels (seeded choice) from the stored parameters
    and compares within 1e-9.
    """
    from .metric import appd_from_params  # local import to avoid cycles

    path = Path(path)
    base = path.parent
    problems = []
    try:
        manifest = read_manifest(path)
    except ParseError as exc:
        return [str(exc)]
    raw_size = manifest.raw_size

    for record in manifest.records:
        img_path = base / record.output_image
        if not img_path.exists():
            problems.append(f"{record.sample_id}: missing image {record.output_image}")
            continue
        try:
            img = read_image(img_path)
        except Exception as exc:
            problems.append(f"{record.sample_id}: unreadable image {record.output_image}: {exc}")
            continue
        if image_size(img) != raw_size:
            got = image_size(img)
            problems.append(
                f"{record.sample_id}: image is {got.width}x{got.height}, "
                f"expected {raw_size.width}x{raw_size.height}"
            )
        if record.appd_label < 0:
            problems.append(f"{record.sample_id}: negative label {record.appd_label}")

    if recompute > 0 and manifest.records:
        import numpy as np

        rng = np.random.default_rng(seed)
        theta_star = manifest.theta_star
        label_size = manifest.label_size
        star_eval = scale_intrinsics(theta_star, raw_size, label_size)
        picks = rng.choice(len(manifest.records), size=min(recompute, len(manifest.records)),
                           replace=False)
        for i in picks:
            record = manifest.records[i]
            theta_m = Intrinsics.from_tuple(record.theta_m)
            theta_eval = scale_intrinsics(theta_m, raw_size, label_size)
            value = appd_from_params(star_eval, theta_eval, label_size)
            if abs(value - record.appd_label) > 1e-9:
                problems.append(
                    f"{record.sample_id}: stored label {record.appd_label!r} but "
                    f"recomputed {value!r}"
                )
    return problems
