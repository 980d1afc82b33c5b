"""Image/volume/mask I/O and synthetic phantom generation.

Formats are deliberately minimal and bit-exact:

  * 2D: binary PGM (P5), maxval 255 or 65535 (16-bit samples big-endian).
  * 3D: a text header (DIMS / SPACING / TYPE / DATA lines) next to a raw
    file in x-fastest order, element type u8 or u16 little-endian.
  * masks: PGM with values {0, 255} in 2D, u8 raw with values {0, 1} in 3D.

Phantoms are deterministic given the spec and noise seed; noise comes from
numpy's PCG64 generator (O'Neill's PCG XSL RR 128/64) seeded with the given
64-bit integer, Gaussian variates via numpy's ziggurat standard_normal.
"""

import os
import re
from dataclasses import dataclass

import numpy as np

from ._kernels import fill_polygon_mask
from .errors import BadMagic, HeaderMalformed, SizeMismatch, TruncatedData
from .field import ScalarField

# ---------------------------------------------------------------------------
# PGM (P5)
# ---------------------------------------------------------------------------

def _parse_pgm_header(data):
    if not data.startswith(b"P5"):
        raise BadMagic("not a binary PGM (P5) file")
    # header tokens separated by whitespace; '#' comments run to end of line
    pos, tokens = 2, []
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedData("PGM header ended early")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval <= 0 or maxval > 65535:
        raise BadMagic(f"unsupported maxval {maxval}")
    return width, height, maxval, pos


def read_image_2d(path, spacing=(1.0, 1.0)):
    """Read a binary PGM into a ScalarField (row-major, float64)."""
    with open(path, "rb") as fh:
        return pgm_to_field(fh.read(), spacing)


def pgm_to_field(data, spacing=(1.0, 1.0)):
    width, height, maxval, pos = _parse_pgm_header(data)
    if maxval > 255:
        count = width * height * 2
        raw = data[pos:pos + count]
        if len(raw) < count:
            raise TruncatedData(f"expected {count} bytes, got {len(raw)}")
        values = np.frombuffer(raw, dtype=">u2").astype(np.float64)
    else:
        count = width * height
        raw = data[pos:pos + count]
        if len(raw) < count:
            raise TruncatedData(f"expected {count} bytes, got {len(raw)}")
        values = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    return ScalarField(values.reshape(height, width), spacing)


def pgm_bytes(values, maxval=None):
    """Encode a 2D array as binary PGM bytes."""
    values = np.asarray(values)
    if maxval is None:
        maxval = 65535 if values.max(initial=0) > 255 else 255
    height, width = values.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode()
    quant = np.clip(np.rint(values), 0, maxval)
    if maxval > 255:
        return header + quant.astype(">u2").tobytes()
    return header + quant.astype(np.uint8).tobytes()


def write_image_2d(values, path, maxval=None):
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(values, maxval))


def write_mask_2d(mask, path):
    """Binary mask as P5 with values {0, 255}."""
    write_image_2d(np.where(np.asarray(mask) > 0, 255, 0), path, maxval=255)


def read_mask_2d(path):
    f = read_image_2d(path)
    return (f.values > 0).astype(np.uint8)


# ---------------------------------------------------------------------------
# volume header + raw
# ---------------------------------------------------------------------------

_DTYPES = {"u8": np.uint8, "u16le": np.dtype("<u2")}


def read_volume(header_path):
    """Read the DIMS/SPACING/TYPE/DATA text header and its raw payload."""
    fields = {}
    with open(header_path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            fields[key.upper()] = rest.strip()
    try:
        nx, ny, nz = (int(t) for t in fields["DIMS"].split())
        sx, sy, sz = (float(t) for t in fields["SPACING"].split())
        typ = fields["TYPE"]
        data_rel = fields["DATA"]
    except (KeyError, ValueError) as exc:
        raise HeaderMalformed(f"bad volume header {header_path}: {exc}") from exc
    if typ not in _DTYPES:
        raise HeaderMalformed(f"TYPE must be u8 or u16le, got {typ!r}")
    if min(nx, ny, nz) < 1 or min(sx, sy, sz) <= 0:
        raise HeaderMalformed("DIMS must be >= 1 and SPACING > 0")
    raw_path = os.path.join(os.path.dirname(os.path.abspath(header_path)), data_rel)
    with open(raw_path, "rb") as fh:
        raw = fh.read()
    dtype = _DTYPES[typ]
    expected = nx * ny * nz * dtype.itemsize if typ == "u16le" else nx * ny * nz
    if len(raw) != expected:
        raise SizeMismatch(f"raw payload is {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype=dtype).astype(np.float64).reshape(nz, ny, nx)
    return ScalarField(values, (sx, sy, sz))


def write_volume(field, header_path, data_path=None, dtype="u16le"):
    """Write a 3D ScalarField as header + raw pair."""
    if dtype not in _DTYPES:
        raise ValueError("dtype must be u8 or u16le")
    if data_path is None:
        data_path = os.path.splitext(header_path)[0] + ".raw"
    nz, ny, nx = field.values.shape
    sx, sy, sz = field.spacing
    rel = os.path.relpath(os.path.abspath(data_path),
                          os.path.dirname(os.path.abspath(header_path)))
    header = (f"DIMS {nx} {ny} {nz}\nSPACING {sx:.9g} {sy:.9g} {sz:.9g}\n"
              f"TYPE {dtype}\nDATA {rel}\n")
    maxv = 255 if dtype == "u8" else 65535
    quant = np.clip(np.rint(field.values), 0, maxv).astype(_DTYPES[dtype])
    with open(header_path, "w", encoding="utf-8") as fh:
        fh.write(header)
    with open(data_path, "wb") as fh:
        fh.write(quant.tobytes())


def write_mask_3d(mask, spacing, header_path, data_path=None):
    """Binary 3D mask as u8 raw with values {0, 1}."""
    f = ScalarField(np.where(np.asarray(mask) > 0, 1, 0).astype(np.float64), spacing)
    write_volume(f, header_path, data_path, dtype="u8")


def read_mask(path):
    """Load a mask from PGM or a volume header, by extension/magic."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P5":
        return read_mask_2d(path), (1.0, 1.0)
    f = read_volume(path)
    return (f.values > 0).astype(np.uint8), f.spacing


# ---------------------------------------------------------------------------
# phantoms
# ---------------------------------------------------------------------------

PHANTOM_KINDS = ("disk", "ellipse", "occluded-ellipse", "star", "sphere", "ellipsoid")


@dataclass
class PhantomSpec:
    kind: str
    size: tuple                      # voxel counts (nx, ny[, nz])
    spacing: tuple = None            # defaults to 1.0 per axis
    center: tuple = None             # voxel coords; defaults to the middle
    radius: float = 0.0              # voxels (disk/sphere, star outer radius)
    semi_axes: tuple = ()            # voxels (ellipse/ellipsoid)
    points: int = 5                  # star
    inner: float = 0.5               # star inner/outer radius ratio
    rotation: float = 0.0            # radians (star/ellipse)
    fg: float = 100.0
    bg: float = 0.0
    noise: float = 0.0               # additive Gaussian stddev
    noise_seed: int = 0
    occlusion: float = 0.0           # boundary arc fraction set to bg
    occlusion_depth: float = 0.2     # radial depth of the occluded band
    depth: str = "u8"                # element range for clamping: u8 | u16

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValueError(f"kind must be one of {PHANTOM_KINDS}")
        self.size = tuple(int(n) for n in self.size)
        if self.spacing is None:
            self.spacing = (1.0,) * len(self.size)
        self.spacing = tuple(float(s) for s in self.spacing)
        if self.center is None:
            self.center = tuple((n - 1) / 2.0 for n in self.size)
        self.center = tuple(float(c) for c in self.center)
        if not 0.0 <= self.occlusion < 1.0:
            raise ValueError("occlusion fraction must be in [0, 1)")
        limit = 255 if self.depth == "u8" else 65535
        if not (0 <= self.bg <= limit and 0 <= self.fg <= limit):
            raise ValueError(f"intensities must fit the {self.depth} range")


def make_phantom(spec):
    """Build (field, ground-truth mask) for a phantom spec.

    Geometry parameters are in voxel units; the mask applies the analytic
    inside test at every voxel center (stars are rasterized with the same
    even-odd rule the pipeline uses).
    """
    dim = len(spec.size)
    if spec.kind in ("sphere", "ellipsoid") and dim != 3:
        raise ValueError(f"{spec.kind} needs a 3D size")
    if spec.kind in ("disk", "ellipse", "occluded-ellipse", "star") and dim != 2:
        raise ValueError(f"{spec.kind} needs a 2D size")

    if dim == 2:
        nx, ny = spec.size
        cx, cy = spec.center
        x = np.arange(nx, dtype=np.float64)[None, :] - cx
        y = np.arange(ny, dtype=np.float64)[:, None] - cy
        if spec.kind == "disk":
            inside = x ** 2 + y ** 2 <= spec.radius ** 2
        elif spec.kind in ("ellipse", "occluded-ellipse"):
            a, b = spec.semi_axes
            ca, sa = np.cos(spec.rotation), np.sin(spec.rotation)
            xr = x * ca + y * sa
            yr = -x * sa + y * ca
            inside = (xr / a) ** 2 + (yr / b) ** 2 <= 1.0
        elif spec.kind == "star":
            from .geometry import star_template
            tpl = star_template(spec.points, spec.inner, spec.rotation)
            poly = (tpl.vertices * spec.radius + np.array([cx, cy])) * np.array(spec.spacing)
            inside = fill_polygon_mask(np.ascontiguousarray(poly), ny, nx,
                                       spec.spacing[0], spec.spacing[1]).astype(bool)
        mask = inside.astype(np.uint8)
        values = np.where(inside, spec.fg, spec.bg).astype(np.float64)
        if spec.kind == "occluded-ellipse" and spec.occlusion > 0:
            a, b = spec.semi_axes
            ca, sa = np.cos(spec.rotation), np.sin(spec.rotation)
            xr = x * ca + y * sa
            yr = -x * sa + y * ca
            u = np.sqrt((xr / a) ** 2 + (yr / b) ** 2)
            ang = np.mod(np.arctan2(yr, xr), 2 * np.pi)
            band = inside & (u > 1.0 - spec.occlusion_depth) \
                & (ang < 2 * np.pi * spec.occlusion)
            values[band] = spec.bg
    else:
        nx, ny, nz = spec.size
        cx, cy, cz = spec.center
        x = np.arange(nx, dtype=np.float64)[None, None, :] - cx
        y = np.arange(ny, dtype=np.float64)[None, :, None] - cy
        z = np.arange(nz, dtype=np.float64)[:, None, None] - cz
        if spec.kind == "sphere":
            inside = x ** 2 + y ** 2 + z ** 2 <= spec.radius ** 2
        else:
            a, b, c = spec.semi_axes
            inside = (x / a) ** 2 + (y / b) ** 2 + (z / c) ** 2 <= 1.0
        mask = inside.astype(np.uint8)
        values = np.where(inside, spec.fg, spec.bg).astype(np.float64)

    if spec.noise > 0:
        rng = np.random.default_rng(spec.noise_seed)
        values = values + rng.normal(0.0, spec.noise, values.shape)
        values = np.clip(values, 0, 255 if spec.depth == "u8" else 65535)
    return ScalarField(values, spec.spacing), mask


_LIST_KEYS = {"size", "spacing", "center", "semi_axes"}
_INT_KEYS = {"points", "noise_seed"}
_STR_KEYS = {"kind", "depth"}


def parse_phantom_spec(text):
    """Key-value phantom spec: one `key value...` per line, '#' comments."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = re.split(r"[\s,]+", line)
        key = key.lower().replace("-", "_")
        if not vals:
            raise ValueError(f"line {lineno}: key {key!r} has no value")
        if key in _STR_KEYS:
            kwargs[key] = vals[0]
        elif key in _LIST_KEYS:
            kwargs[key] = tuple(float(v) for v in vals)
        elif key in _INT_KEYS:
            kwargs[key] = int(vals[0])
        else:
            kwargs[key] = float(vals[0])
    return PhantomSpec(**kwargs)
