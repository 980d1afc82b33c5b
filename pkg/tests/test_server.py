import base64
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from raycut.io import (PhantomSpec, make_phantom, pgm_bytes, pgm_to_field,
                       write_volume)
from raycut.server import create_app

from conftest import dsc


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def disk_pgm():
    spec = PhantomSpec(kind="disk", size=(220, 220), spacing=(0.005, 0.005),
                       center=(110, 110), radius=90, fg=200, bg=30)
    field, truth = make_phantom(spec)
    return pgm_bytes(field.values, maxval=255), truth


def upload_pgm(client, data, spacing=(0.005, 0.005)):
    body = {"pgm_b64": base64.b64encode(data).decode(), "spacing": list(spacing)}
    r = client.post("/sessions", json=body)
    assert r.status_code == 201
    return r.json()


def volume_envelope(tmp_path, values, spacing):
    from raycut.field import ScalarField
    hdr = tmp_path / "v.hdr"
    write_volume(ScalarField(values, spacing), hdr, dtype="u16le")
    raw = (tmp_path / "v.raw").read_bytes()
    return {"header_text": hdr.read_text(),
            "data_b64": base64.b64encode(raw).decode()}


class TestSessions:
    def test_upload_pgm_raw_body(self, client, disk_pgm):
        data, _ = disk_pgm
        r = client.post("/sessions", content=data,
                        headers={"content-type": "application/octet-stream"})
        assert r.status_code == 201
        assert r.json()["dims"] == [220, 220]
        assert r.json()["spacing"] == [1.0, 1.0]

    def test_upload_pgm_json(self, client, disk_pgm):
        data, _ = disk_pgm
        info = upload_pgm(client, data)
        assert info["dims"] == [220, 220]
        assert info["spacing"] == [0.005, 0.005]

    def test_upload_volume(self, client, tmp_path):
        vals = np.zeros((16, 16, 16))
        env = volume_envelope(tmp_path, vals, (0.5, 0.5, 0.8))
        r = client.post("/sessions", json=env)
        assert r.status_code == 201
        assert r.json()["dims"] == [16, 16, 16]
        assert r.json()["spacing"] == [0.5, 0.5, 0.8]

    def test_truncated_volume_400(self, client, tmp_path):
        vals = np.zeros((8, 8, 8))
        env = volume_envelope(tmp_path, vals, (1, 1, 1))
        raw = base64.b64decode(env["data_b64"])
        env["data_b64"] = base64.b64encode(raw[:-3]).decode()
        r = client.post("/sessions", json=env)
        assert r.status_code == 400
        assert "SizeMismatch" in r.json()["error"] or "SizeMismatch" in r.json()["detail"]

    def test_garbage_400(self, client):
        r = client.post("/sessions", content=b"not a pgm",
                        headers={"content-type": "application/octet-stream"})
        assert r.status_code == 400

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/deadbeef/slice").status_code == 404


class TestSlice:
    def test_2d_only_z0(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        ok = client.get(f"/sessions/{sid}/slice?axis=z&index=0")
        assert ok.status_code == 200
        assert ok.content.startswith(b"P5")
        assert client.get(f"/sessions/{sid}/slice?axis=z&index=1").status_code == 422
        assert client.get(f"/sessions/{sid}/slice?axis=x&index=0").status_code == 422

    def test_degenerate_window_422(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        r = client.get(f"/sessions/{sid}/slice?window=5,5")
        assert r.status_code == 422

    def test_window_round_half_up(self, client):
        vals = np.full((1, 2), 500.0)
        vals[0, 1] = 0.0
        data = pgm_bytes(vals, maxval=65535)
        sid = upload_pgm(client, data, (1, 1))["session"]
        r = client.get(f"/sessions/{sid}/slice?window=0,1000")
        field = pgm_to_field(r.content)
        assert field.values[0, 0] == 128  # 500/1000*255 = 127.5 rounds up
        assert field.values[0, 1] == 0

    def test_deterministic_bytes(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        a = client.get(f"/sessions/{sid}/slice?window=0,255").content
        b = client.get(f"/sessions/{sid}/slice?window=0,255").content
        assert a == b

    def test_3d_axes(self, client, tmp_path):
        vals = np.arange(4 * 5 * 6, dtype=float).reshape(6, 5, 4)
        env = volume_envelope(tmp_path, vals, (1, 1, 1))
        sid = client.post("/sessions", json=env).json()["session"]
        for axis, count in (("x", 4), ("y", 5), ("z", 6)):
            ok = client.get(f"/sessions/{sid}/slice?axis={axis}&index={count - 1}")
            assert ok.status_code == 200
            bad = client.get(f"/sessions/{sid}/slice?axis={axis}&index={count}")
            assert bad.status_code == 422


class TestSegment:
    def test_disk_segmentation(self, client, disk_pgm):
        data, truth = disk_pgm
        sid = upload_pgm(client, data)["session"]
        r = client.post(f"/sessions/{sid}/segment",
                        json={"seed": [110, 110], "template": "circle",
                              "rays": 180, "nodes": 120, "delta": 2})
        assert r.status_code == 200
        payload = r.json()
        poly = payload["boundary"][0]["polylines"][0]
        assert poly[0] == poly[-1]          # closed
        assert payload["stats"]["voxel_count"] > 0
        assert payload["seed_quality"] == "ok"

        mask_r = client.get(f"/sessions/{sid}/mask")
        assert mask_r.status_code == 200
        mask = (pgm_to_field(mask_r.content).values > 0).astype(np.uint8)
        assert dsc(mask, truth) >= 0.95

    def test_mask_before_segment_404(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        assert client.get(f"/sessions/{sid}/mask").status_code == 404

    def test_invalid_seed_422(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        r = client.post(f"/sessions/{sid}/segment", json={"seed": [999, 999]})
        assert r.status_code == 422
        assert r.json()["error"] == "InvalidSeed"

    def test_poor_seed_quality_flag(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        # seed straddling the disk edge: window mixes 200 and 30
        r = client.post(f"/sessions/{sid}/segment",
                        json={"seed": [200, 110], "rays": 90, "nodes": 60})
        assert r.status_code == 200
        assert r.json()["seed_quality"] == "poor"

    def test_delta_monotone_cut_value(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        values = []
        for delta in (0, 2):
            r = client.post(f"/sessions/{sid}/segment",
                            json={"seed": [118, 104], "rays": 90, "nodes": 60,
                                  "delta": delta})
            values.append(r.json()["cut_value"])
        assert values[1] <= values[0] + 1e-9

    def test_payload_determinism_modulo_runtime(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        body = {"seed": [110, 110], "rays": 90, "nodes": 60, "delta": 1}
        outs = []
        for _ in range(2):
            r = client.post(f"/sessions/{sid}/segment", json=body)
            payload = r.json()
            payload.pop("runtime_ms")
            outs.append(json.dumps(payload, sort_keys=True))
        assert outs[0] == outs[1]

    def test_inline_template(self, client, disk_pgm):
        data, truth = disk_pgm
        sid = upload_pgm(client, data)["session"]
        tpl_text = "TPL2\n" + "\n".join(
            f"v {np.cos(-a):.9f} {np.sin(-a):.9f}"
            for a in np.linspace(0, 2 * np.pi, 32, endpoint=False))
        r = client.post(f"/sessions/{sid}/segment",
                        json={"seed": [110, 110], "rays": 90, "nodes": 60,
                              "template": {"tpl_text": tpl_text}})
        assert r.status_code == 200

    def test_iterate(self, client, disk_pgm):
        data, _ = disk_pgm
        sid = upload_pgm(client, data)["session"]
        r = client.post(f"/sessions/{sid}/segment",
                        json={"seed": [130, 100], "rays": 90, "nodes": 60,
                              "iterate": {"max_iters": 3, "eps": 0.001}})
        assert r.status_code == 200
        assert r.json()["iterations"] >= 1

    def test_3d_segment_slices(self, client, tmp_path):
        spec = PhantomSpec(kind="sphere", size=(48, 48, 48),
                           spacing=(0.04, 0.04, 0.04), radius=16,
                           fg=150, bg=20, depth="u16")
        field, truth = make_phantom(spec)
        env = volume_envelope(tmp_path, field.values, field.spacing)
        sid = client.post("/sessions", json=env).json()["session"]
        r = client.post(f"/sessions/{sid}/segment",
                        json={"seed": [23.5, 23.5, 23.5], "ico_level": 1,
                              "nodes": 40, "delta": 2, "slices": [23]})
        assert r.status_code == 200
        payload = r.json()
        assert payload["boundary"][0]["index"] == 23
        assert len(payload["boundary"][0]["polylines"]) >= 1
        mask_r = client.get(f"/sessions/{sid}/mask")
        assert mask_r.status_code == 200
        assert "header_text" in mask_r.json()


class TestTemplates:
    def test_builtin_list(self, client):
        r = client.get("/templates")
        names = r.json()["templates"]
        for expected in ("circle", "square", "icosphere"):
            assert expected in names
