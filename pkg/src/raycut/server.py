"""HTTP facade for the interactive UI: sessions, slices, segmentation.

Uploads are held in an in-memory session store with an idle TTL. All
computation is synchronous (segmentations take seconds); concurrent requests
on the same session serialize, last writer wins on the cached result. JSON
payloads carry numbers rounded to 6 significant digits so identical requests
produce identical bytes (runtime_ms is the one informational exception).

2D data travels as raw PGM bytes; 3D volumes travel as a JSON envelope
{"header_text": ..., "data_b64": ...} wrapping the native header+raw pair.
"""

import argparse
import base64
import json
import math
import os
import tempfile
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from . import io as imio
from .errors import RaycutError
from .field import ScalarField
from .geometry import BUILTIN_TEMPLATES, builtin_template, load_tpl, parse_tpl
from .pipeline import SegmentConfig, iterate_seed, segment

DEFAULT_TTL = 1800.0
DEFAULT_MAX_UPLOAD = 512 * 1024 * 1024


class Session:
    def __init__(self, sid, field):
        self.id = sid
        self.field = field
        self.templates = {}
        self.result = None
        self.touched = time.time()
        self.lock = threading.Lock()


class SessionStore:
    def __init__(self, ttl=DEFAULT_TTL):
        self.ttl = ttl
        self._lock = threading.Lock()
        self._sessions = {}

    def create(self, field):
        sid = uuid.uuid4().hex
        with self._lock:
            self._purge()
            self._sessions[sid] = Session(sid, field)
        return sid

    def get(self, sid):
        with self._lock:
            self._purge()
            s = self._sessions.get(sid)
            if s is not None:
                s.touched = time.time()
            return s

    def _purge(self):
        now = time.time()
        dead = [k for k, s in self._sessions.items() if now - s.touched > self.ttl]
        for k in dead:
            del self._sessions[k]


def _round6(obj):
    """Round all floats to 6 significant digits for stable payload bytes."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    return obj


def _json_response(payload, status=200):
    body = json.dumps(_round6(payload), sort_keys=True,
                      separators=(",", ":")).encode()
    return Response(content=body, status_code=status, media_type="application/json")


def _error(status, token, detail=""):
    return _json_response({"error": token, "detail": str(detail)}, status=status)


def _volume_from_envelope(payload):
    header_text = payload["header_text"]
    raw = base64.b64decode(payload["data_b64"])
    with tempfile.TemporaryDirectory() as tmp:
        header_path = os.path.join(tmp, "vol.hdr")
        lines = []
        for line in header_text.splitlines():
            if line.split(" ", 1)[0].upper() == "DATA":
                line = "DATA vol.raw"
            lines.append(line)
        with open(header_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(os.path.join(tmp, "vol.raw"), "wb") as fh:
            fh.write(raw)
        return imio.read_volume(header_path)


def _volume_envelope(field, dtype="u8"):
    with tempfile.TemporaryDirectory() as tmp:
        header_path = os.path.join(tmp, "vol.hdr")
        imio.write_volume(field, header_path, dtype=dtype)
        with open(header_path, "r", encoding="utf-8") as fh:
            header_text = fh.read()
        with open(os.path.join(tmp, "vol.raw"), "rb") as fh:
            raw = fh.read()
    return {"header_text": header_text, "data_b64": base64.b64encode(raw).decode()}


def _slice_polylines(mask2d):
    """Closed isolines of a binary slice as [x, y] point lists."""
    from skimage import measure
    polylines = []
    for contour in measure.find_contours(mask2d.astype(float), 0.5):
        polylines.append([[float(c[1]), float(c[0])] for c in contour])
    return polylines


def create_app(ttl=DEFAULT_TTL, max_upload=DEFAULT_MAX_UPLOAD,
               templates_dir=None, static_dir=None):
    app = FastAPI(title="raycut")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(ttl=ttl)
    app.state.store = store

    registered = {}
    if templates_dir:
        for name in sorted(os.listdir(templates_dir)):
            if name.lower().endswith(".tpl"):
                registered[os.path.splitext(name)[0]] = load_tpl(
                    os.path.join(templates_dir, name))

    def resolve_template(spec, session):
        if isinstance(spec, dict) and "tpl_text" in spec:
            return parse_tpl(spec["tpl_text"])
        if not isinstance(spec, str):
            raise ValueError("template must be a name or {'tpl_text': ...}")
        if spec in session.templates:
            return session.templates[spec]
        if spec in registered:
            return registered[spec]
        return builtin_template(spec)

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.body()
        if len(body) > max_upload:
            return _error(413, "TooLarge", f"upload cap is {max_upload} bytes")
        ctype = request.headers.get("content-type", "")
        try:
            if ctype.startswith("application/json"):
                payload = json.loads(body)
                if "header_text" in payload:
                    field = _volume_from_envelope(payload)
                elif "pgm_b64" in payload:
                    raw = base64.b64decode(payload["pgm_b64"])
                    spacing = tuple(payload.get("spacing", (1.0, 1.0)))
                    field = _pgm_field(raw, spacing)
                else:
                    return _error(400, "BadFormat",
                                  "JSON body needs header_text+data_b64 or pgm_b64")
            else:
                field = _pgm_field(body, (1.0, 1.0))
        except RaycutError as exc:
            return _error(400, type(exc).__name__, exc)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            return _error(400, "BadFormat", exc)
        sid = store.create(field)
        return _json_response({"session": sid, "dims": list(field.extents),
                               "spacing": list(field.spacing)}, status=201)

    @app.get("/sessions/{sid}/slice")
    def get_slice(sid: str, axis: str = "z", index: int = 0, window: str = ""):
        session = store.get(sid)
        if session is None:
            return _error(404, "UnknownSession")
        field = session.field
        try:
            plane = _extract_slice(field, axis, index)
        except (ValueError, IndexError) as exc:
            return _error(422, "BadSlice", exc)
        if window:
            try:
                lo, hi = (float(x) for x in window.split(","))
            except ValueError as exc:
                return _error(422, "BadWindow", exc)
        else:
            lo, hi = float(field.values.min()), float(field.values.max())
        if not hi > lo:
            return _error(422, "BadWindow", "window needs hi > lo")
        scaled = (plane - lo) * (255.0 / (hi - lo))
        pixels = np.clip(np.floor(scaled + 0.5), 0, 255)
        return Response(content=imio.pgm_bytes(pixels, maxval=255),
                        media_type="image/x-portable-graymap")

    @app.post("/sessions/{sid}/segment")
    async def run_segment(sid: str, request: Request):
        session = store.get(sid)
        if session is None:
            return _error(404, "UnknownSession")
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(422, "BadRequest", exc)
        with session.lock:
            try:
                return _segment_session(session, payload)
            except RaycutError as exc:
                return _error(422, type(exc).__name__, exc)
            except (ValueError, KeyError, TypeError) as exc:
                return _error(422, "BadRequest", exc)
            except Exception as exc:  # pragma: no cover - defensive
                return _error(500, "Internal", type(exc).__name__)

    def _segment_session(session, payload):
        field = session.field
        default_tpl = "circle" if field.dim == 2 else "icosphere"
        template = resolve_template(payload.get("template", default_tpl), session)
        config = SegmentConfig(
            rays=int(payload.get("rays", 360)),
            nodes=payload.get("nodes"),
            delta_r=int(payload.get("delta", 2)),
            scale_max=float(payload.get("scale", 2.0)),
            avg_window_d=payload.get("avg_window"),
            ico_level=int(payload.get("ico_level", 3)))
        seed = payload["seed"]
        t0 = time.perf_counter()
        iterate = payload.get("iterate") or {}
        if iterate.get("max_iters", 0):
            result = iterate_seed(field, template, seed, config,
                                  max_iters=int(iterate["max_iters"]),
                                  eps=iterate.get("eps"))
        else:
            result = segment(field, template, seed, config)
        runtime_ms = 1000.0 * (time.perf_counter() - t0)
        session.result = result

        if field.dim == 2:
            poly = result.contour_vertices / np.array(field.spacing)
            closed = np.vstack([poly, poly[:1]])
            boundary = [{"axis": "z", "index": 0,
                         "polylines": [[[float(x), float(y)] for x, y in closed]]}]
        else:
            wanted = payload.get("slices")
            if wanted is None:
                wanted = [int(k) for k in
                          np.flatnonzero(result.mask.any(axis=(1, 2)))]
            boundary = [{"axis": "z", "index": int(k),
                         "polylines": _slice_polylines(result.mask[int(k)])}
                        for k in wanted]
        return _json_response({
            "cut_value": result.cut_value,
            "max_flow": result.max_flow,
            "stats": result.stats,
            "boundary": boundary,
            "boundary_index_min": int(result.boundary_index.min()),
            "boundary_index_max": int(result.boundary_index.max()),
            "seed_quality": result.seed_quality,
            "iterations": len(result.iteration_seeds),
            "converged": result.converged,
            "warnings": result.warnings,
            "runtime_ms": runtime_ms,
        })

    @app.get("/sessions/{sid}/mask")
    def get_mask(sid: str):
        session = store.get(sid)
        if session is None:
            return _error(404, "UnknownSession")
        if session.result is None:
            return _error(404, "NoResult", "run a segmentation first")
        mask = session.result.mask
        if mask.ndim == 2:
            return Response(content=imio.pgm_bytes(np.where(mask > 0, 255, 0),
                                                   maxval=255),
                            media_type="image/x-portable-graymap")
        f = ScalarField(np.where(mask > 0, 1, 0).astype(np.float64),
                        session.field.spacing)
        return _json_response(_volume_envelope(f, dtype="u8"))

    @app.get("/templates")
    def list_templates():
        names = sorted(set(BUILTIN_TEMPLATES) | set(registered))
        return _json_response({"templates": names})

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def _pgm_field(data, spacing):
    return imio.pgm_to_field(data, spacing)


def _extract_slice(field, axis, index):
    if field.dim == 2:
        if axis != "z" or index != 0:
            raise ValueError("2D sessions only serve axis=z index=0")
        return field.values
    nx, ny, nz = field.extents
    if axis == "z":
        if not 0 <= index < nz:
            raise IndexError(f"z index {index} out of range [0, {nz})")
        return field.values[index]
    if axis == "y":
        if not 0 <= index < ny:
            raise IndexError(f"y index {index} out of range [0, {ny})")
        return field.values[:, index, :]
    if axis == "x":
        if not 0 <= index < nx:
            raise IndexError(f"x index {index} out of range [0, {nx})")
        return field.values[:, :, index]
    raise ValueError(f"axis must be x, y or z, got {axis!r}")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="raycut-server")
    parser.add_argument("--host", default=os.environ.get("RAYCUT_HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int,
                        default=int(os.environ.get("RAYCUT_PORT", "8787")))
    parser.add_argument("--ttl", type=float, default=DEFAULT_TTL,
                        help="session idle lifetime, seconds")
    parser.add_argument("--max-upload", type=int, default=DEFAULT_MAX_UPLOAD)
    parser.add_argument("--templates-dir", default=None,
                        help="directory of .tpl files to register")
    parser.add_argument("--static-dir", default=None,
                        help="serve the UI bundle from this directory")
    args = parser.parse_args(argv)
    import uvicorn
    uvicorn.run(create_app(ttl=args.ttl, max_upload=args.max_upload,
                           templates_dir=args.templates_dir,
                           static_dir=args.static_dir),
                host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
