"""Protocol sampling, strength labels, and reproducible dataset generation.

A dataset sample is a (clean, degraded, sidecar) triple.  The sidecar is
a flat key-value text file holding the full protocol, both seeds, the
basis artifact hash, and the generator id: everything needed to replay
the degradation bit-exactly, which is what lets a restoration model
re-degrade its output during training without shipping the degraded
tensor pipeline state.

Determinism contract: all per-sample randomness derives from
(master_seed, sample index) through counter-based streams, so the output
of a generation run is byte-identical no matter how many workers split
the work.
"""

from __future__ import annotations

import multiprocessing
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from turbsim import imageio, rng
from turbsim.operators import DegradationRealization, realize, simulate_forward
from turbsim.optics import TurbulenceProtocol
from turbsim.psf import P2sMap, PsfBasis

__all__ = [
    "ProtocolTable",
    "TableRow",
    "StrengthLabel",
    "SampleSidecar",
    "SidecarVersionError",
    "default_table",
    "table_to_text",
    "table_from_text",
    "sample_protocol",
    "classify_strength",
    "load_source_image",
    "generate_dataset",
    "reproduce_sample",
]

SIDECAR_VERSION = 1
MANIFEST_NAME = "manifest.tsv"

# Strength thresholds on D/r0; boundaries belong to the weaker class.
WEAK_MAX = 2.0
MEDIUM_MAX = 4.0

# derive_seed purposes for the per-sample streams
_PURPOSE_FIELD = 0
_PURPOSE_NOISE = 1

_SOURCE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")
DEFAULT_NOISE_SIGMA = 0.01


class SidecarVersionError(ValueError):
    """Sidecar or artifact version drift; replay refused."""


# ---------------------------------------------------------------------------
# Protocol table


@dataclass(frozen=True)
class TableRow:
    """One sampling row: continuous ranges plus a discrete f-number set."""

    distance_m: tuple[float, float]
    focal_length_m: tuple[float, float]
    f_numbers: tuple[float, ...]
    scene_width_m: tuple[float, float]
    cn2_1e14: tuple[float, float]

    def __post_init__(self) -> None:
        for name in ("distance_m", "focal_length_m", "scene_width_m",
                     "cn2_1e14"):
            lo, hi = getattr(self, name)
            if not (0 < lo < hi):
                raise ValueError(f"{name} range must satisfy 0 < lo < hi, "
                                 f"got ({lo}, {hi})")
        if len(self.f_numbers) == 0:
            raise ValueError("f-number set must be nonempty")
        if any(n < 1 for n in self.f_numbers):
            raise ValueError("f-numbers must be >= 1")


@dataclass(frozen=True)
class ProtocolTable:
    rows: tuple[TableRow, ...]

    def __post_init__(self) -> None:
        if len(self.rows) == 0:
            raise ValueError("protocol table must have at least one row")


def default_table() -> ProtocolTable:
    """The six-row synthesis table the dataset generator samples from."""
    return ProtocolTable(rows=(
        TableRow((200.0, 400.0), (1.0, 2.0), (8.0, 11.0),
                 (0.2, 0.5), (3.0, 7.0)),
        TableRow((200.0, 400.0), (1.0, 2.0), (5.6, 8.0, 11.0),
                 (0.5, 1.0), (6.0, 30.0)),
        TableRow((400.0, 600.0), (1.0, 2.5), (8.0, 11.0, 16.0),
                 (0.4, 0.8), (2.0, 6.0)),
        TableRow((400.0, 600.0), (1.0, 2.5), (5.6, 8.0, 11.0),
                 (0.8, 1.5), (6.0, 30.0)),
        TableRow((600.0, 800.0), (1.0, 3.0), (11.0, 16.0),
                 (0.5, 1.2), (2.0, 5.0)),
        TableRow((600.0, 800.0), (1.0, 3.0), (8.0, 11.0),
                 (1.2, 2.0), (5.0, 30.0)),
    ))


def table_to_text(table: ProtocolTable) -> str:
    """Render a table as one ``row:`` line per row, editable by hand."""
    lines = ["# turbsim protocol table v1"]
    for row in table.rows:
        parts = []
        for name in ("distance_m", "focal_length_m", "f_numbers",
                     "scene_width_m", "cn2_1e14"):
            vals = ", ".join(repr(float(v)) for v in getattr(row, name))
            parts.append(f"{name} = {vals}")
        lines.append("row: " + "; ".join(parts))
    return "\n".join(lines) + "\n"


def table_from_text(text: str) -> ProtocolTable:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("row:"):
            raise ValueError(f"table line {lineno}: expected 'row: ...'")
        fields: dict[str, tuple[float, ...]] = {}
        for part in line[len("row:"):].split(";"):
            key, sep, vals = part.partition("=")
            if not sep:
                raise ValueError(
                    f"table line {lineno}: expected 'name = values'")
            fields[key.strip()] = tuple(
                float(v) for v in vals.split(","))
        try:
            rows.append(TableRow(**fields))
        except TypeError as exc:
            raise ValueError(f"table line {lineno}: {exc}") from None
    return ProtocolTable(rows=tuple(rows))


def sample_protocol(table: ProtocolTable, gen: np.random.Generator,
                    image_width_px: int = 256, image_height_px: int = 256,
                    noise_sigma: float = 0.0) -> TurbulenceProtocol:
    """Draw one protocol: uniform row, then uniform fields within the row.

    Draw order is fixed (row, distance, focal length, f-number, scene
    width, Cn2) so a seeded generator always yields the same protocol.
    """
    row = table.rows[int(gen.integers(len(table.rows)))]
    distance = float(gen.uniform(*row.distance_m))
    focal = float(gen.uniform(*row.focal_length_m))
    f_number = float(row.f_numbers[int(gen.integers(len(row.f_numbers)))])
    scene = float(gen.uniform(*row.scene_width_m))
    cn2 = float(gen.uniform(*row.cn2_1e14)) * 1e-14
    return TurbulenceProtocol(distance_m=distance, focal_length_m=focal,
                              f_number=f_number, scene_width_m=scene,
                              cn2=cn2, image_width_px=image_width_px,
                              image_height_px=image_height_px,
                              noise_sigma=noise_sigma)


@dataclass(frozen=True)
class StrengthLabel:
    label: str
    d_over_r0: float

    def __post_init__(self) -> None:
        if self.label not in ("weak", "medium", "strong"):
            raise ValueError(f"unknown strength label {self.label!r}")


def classify_strength(p: TurbulenceProtocol) -> StrengthLabel:
    """Pure severity label from D/r0; no turbulence classifies as weak."""
    d = p.d_over_r0()
    if d <= WEAK_MAX:
        return StrengthLabel("weak", d)
    if d <= MEDIUM_MAX:
        return StrengthLabel("medium", d)
    return StrengthLabel("strong", d)


# ---------------------------------------------------------------------------
# Sidecars


@dataclass(frozen=True)
class SampleSidecar:
    """Replay record for one generated sample."""

    protocol: TurbulenceProtocol
    field_seed: int
    noise_seed: int
    basis_hash: str
    generator_id: str
    strength: StrengthLabel
    source_ref: str
    degraded_raw: str
    clean_raw: str
    version: int = SIDECAR_VERSION

    def to_text(self) -> str:
        lines = [f"format_version = {self.version}",
                 f"generator_id = {self.generator_id}",
                 f"basis_hash = {self.basis_hash}",
                 f"field_seed = {self.field_seed}",
                 f"noise_seed = {self.noise_seed}",
                 f"strength = {self.strength.label}",
                 f"d_over_r0 = {self.strength.d_over_r0!r}",
                 f"source = {self.source_ref}",
                 f"degraded_raw = {self.degraded_raw}",
                 f"clean_raw = {self.clean_raw}"]
        lines.append(self.protocol.to_text().rstrip("\n"))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SampleSidecar":
        entries: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"sidecar line {lineno} is not key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key in entries:
                raise ValueError(f"duplicate sidecar key {key!r}")
            entries[key] = value.strip()
        version = int(entries.pop("format_version", "-1"))
        if version != SIDECAR_VERSION:
            raise SidecarVersionError(
                f"sidecar format version {version} unsupported "
                f"(expected {SIDECAR_VERSION})")
        try:
            own = {
                "generator_id": entries.pop("generator_id"),
                "basis_hash": entries.pop("basis_hash"),
                "field_seed": int(entries.pop("field_seed")),
                "noise_seed": int(entries.pop("noise_seed")),
                "strength": StrengthLabel(entries.pop("strength"),
                                          float(entries.pop("d_over_r0"))),
                "source_ref": entries.pop("source"),
                "degraded_raw": entries.pop("degraded_raw"),
                "clean_raw": entries.pop("clean_raw"),
            }
        except KeyError as exc:
            raise ValueError(f"sidecar missing key {exc.args[0]!r}") from None
        protocol_text = "\n".join(f"{k} = {v}" for k, v in entries.items())
        protocol = TurbulenceProtocol.from_text(protocol_text)
        return cls(protocol=protocol, version=version, **own)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SampleSidecar":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Sources


def load_source_image(path, width: int, height: int) -> np.ndarray:
    """Load a source image and center-crop it to the protocol raster.

    No resampling: a source smaller than the raster is an error, so the
    pixels in fixtures are always the file's own.
    """
    img = imageio.load_png(path)
    h, w = img.shape[:2]
    if h < height or w < width:
        raise ValueError(
            f"source image {path} is {h}x{w}, smaller than the protocol "
            f"raster {height}x{width}")
    top = (h - height) // 2
    left = (w - width) // 2
    return np.ascontiguousarray(img[top:top + height, left:left + width])


def _list_sources(src_dir) -> list[Path]:
    src = Path(src_dir)
    if not src.is_dir():
        raise FileNotFoundError(f"source directory not found: {src}")
    files = sorted(p for p in src.iterdir()
                   if p.suffix.lower() in _SOURCE_EXTENSIONS)
    if not files:
        raise FileNotFoundError(f"no source images in {src}")
    return files


# ---------------------------------------------------------------------------
# Generation


_WORKER: dict = {}


def _protocol_generator(master_seed: int, index: int) -> np.random.Generator:
    key = [master_seed, rng.stream_id(rng.DOMAIN_PROTOCOL, index)]
    return np.random.Generator(np.random.Philox(key=key))


def _sample_paths(out_dir: Path, index: int) -> dict[str, Path]:
    stem = f"{index:06d}"
    return {
        "degraded_png": out_dir / f"{stem}_degraded.png",
        "degraded_raw": out_dir / f"{stem}_degraded.raw",
        "clean_png": out_dir / f"{stem}_clean.png",
        "clean_raw": out_dir / f"{stem}_clean.raw",
        "sidecar": out_dir / f"{stem}.sidecar.txt",
    }


def _generate_one(index: int) -> tuple:
    w = _WORKER
    table: ProtocolTable = w["table"]
    out_dir: Path = w["out_dir"]
    sources: list[Path] = w["sources"]
    master_seed: int = w["master_seed"]

    p = sample_protocol(table, _protocol_generator(master_seed, index),
                        image_width_px=w["width"], image_height_px=w["height"],
                        noise_sigma=w["noise_sigma"])
    label = classify_strength(p)
    field_seed = rng.derive_seed(master_seed, index, _PURPOSE_FIELD)
    noise_seed = rng.derive_seed(master_seed, index, _PURPOSE_NOISE)
    source = sources[index % len(sources)]
    clean = load_source_image(source, p.image_width_px, p.image_height_px)

    rz = realize(p, field_seed, w["basis"], w["p2s"],
                 basis_hash=w["basis_hash"], noise_seed=noise_seed)
    degraded = simulate_forward(clean.astype(np.float32), rz)

    paths = _sample_paths(out_dir, index)
    sc = SampleSidecar(protocol=p, field_seed=field_seed,
                       noise_seed=noise_seed, basis_hash=w["basis_hash"],
                       generator_id=rng.GENERATOR_ID, strength=label,
                       source_ref=source.name,
                       degraded_raw=paths["degraded_raw"].name,
                       clean_raw=paths["clean_raw"].name)
    imageio.save_raw(paths["degraded_raw"], degraded)
    imageio.save_png(paths["degraded_png"], degraded)
    imageio.save_raw(paths["clean_raw"], clean)
    imageio.save_png(paths["clean_png"], clean)
    sc.save(paths["sidecar"])
    return (index, paths["degraded_png"].name, paths["degraded_raw"].name,
            paths["clean_png"].name, paths["clean_raw"].name,
            paths["sidecar"].name, label.label, label.d_over_r0,
            field_seed, noise_seed, source.name)


def _init_worker(state: dict) -> None:
    _WORKER.clear()
    _WORKER.update(state)


def generate_dataset(src_dir, out_dir, n_samples: int, table: ProtocolTable,
                     basis: PsfBasis, p2s: P2sMap, master_seed: int,
                     workers: int = 1, basis_hash: str = "unset",
                     noise_sigma: float = DEFAULT_NOISE_SIGMA,
                     image_width_px: int = 256,
                     image_height_px: int = 256) -> Path:
    """Generate (clean, degraded, sidecar) triples plus a manifest.

    Sources are consumed round-robin in sorted filename order.  Per-sample
    seeds derive from (master_seed, index), so worker count never changes
    a single output byte.  Returns the manifest path.
    """
    if n_samples < 0:
        raise ValueError(f"n_samples must be nonnegative, got {n_samples}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if p2s.k != basis.k:
        raise ValueError("surrogate and basis disagree on component count; "
                         "wrong pairing of artifacts")
    sources = _list_sources(src_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory not writable: {out}")

    state = {"table": table, "out_dir": out, "sources": sources,
             "master_seed": int(master_seed), "basis": basis, "p2s": p2s,
             "basis_hash": basis_hash, "noise_sigma": float(noise_sigma),
             "width": int(image_width_px), "height": int(image_height_px)}
    indices = range(n_samples)
    if workers == 1 or n_samples <= 1:
        _init_worker(state)
        records = [_generate_one(i) for i in indices]
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=workers, initializer=_init_worker,
                      initargs=(state,)) as pool:
            records = pool.map(_generate_one, indices, chunksize=1)
    records.sort(key=lambda r: r[0])

    manifest = out / MANIFEST_NAME
    with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# turbsim dataset manifest v{SIDECAR_VERSION}\n")
        fh.write(f"# n_samples = {n_samples}\n")
        fh.write(f"# master_seed = {int(master_seed)}\n")
        fh.write(f"# basis_hash = {basis_hash}\n")
        fh.write(f"# generator_id = {rng.GENERATOR_ID}\n")
        fh.write("index\tdegraded_png\tdegraded_raw\tclean_png\tclean_raw\t"
                 "sidecar\tstrength\td_over_r0\tfield_seed\tnoise_seed\t"
                 "source\n")
        for rec in records:
            idx, *rest = rec
            d_over_r0 = rest[6]
            fields = [str(idx), *rest[:6], repr(float(d_over_r0)),
                      str(rest[7]), str(rest[8]), rest[9]]
            fh.write("\t".join(str(f) for f in fields) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# Replay


def reproduce_sample(sidecar: SampleSidecar, clean: np.ndarray,
                     basis: PsfBasis, p2s: P2sMap,
                     artifact_hash: str) -> np.ndarray:
    """Re-degrade a clean image exactly as the stored sample was made.

    Refuses to run when the sidecar's basis hash or generator id does not
    match what is installed; silent drift would poison consistency
    training.
    """
    if sidecar.basis_hash != artifact_hash:
        raise SidecarVersionError(
            f"sidecar basis hash {sidecar.basis_hash[:12]}... does not match "
            f"installed artifact {artifact_hash[:12]}...")
    if sidecar.generator_id != rng.GENERATOR_ID:
        raise SidecarVersionError(
            f"sidecar generator id {sidecar.generator_id!r} does not match "
            f"{rng.GENERATOR_ID!r}")
    clean = np.asarray(clean)
    p = sidecar.protocol
    if clean.shape[:2] != (p.image_height_px, p.image_width_px):
        raise ValueError(
            f"clean image {clean.shape[:2]} does not match protocol raster "
            f"{(p.image_height_px, p.image_width_px)}")
    rz = realize(p, sidecar.field_seed, basis, p2s,
                 basis_hash=sidecar.basis_hash,
                 noise_seed=sidecar.noise_seed)
    return simulate_forward(clean.astype(np.float32), rz)


def replay_realization(sidecar: SampleSidecar, basis: PsfBasis,
                       p2s: P2sMap) -> DegradationRealization:
    """Rebuild the degradation realization a sidecar describes."""
    return realize(sidecar.protocol, sidecar.field_seed, basis, p2s,
                   basis_hash=sidecar.basis_hash,
                   noise_seed=sidecar.noise_seed)
