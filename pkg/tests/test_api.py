import contextlib
import json
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient

from hydrad.api import create_app
from hydrad.clock import VirtualClock
from hydrad.daemon import Daemon

from conftest import calibrate, make_config

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def check_schema(doc, name):
    schema = json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())
    jsonschema.validate(doc, schema)
    return doc


def expect_error(response, status, code):
    assert response.status_code == status
    body = check_schema(response.json(), "error")
    assert body["code"] == code
    return body


@pytest.fixture
def api(tmp_path):
    """(client, daemon) factory; daemons are shut down afterwards."""
    made = []

    def build(*, calibrated=True, config_path=None, **kwargs):
        cfg = make_config(tmp_path / f"d{len(made)}", **kwargs)
        daemon = Daemon(cfg, clock=VirtualClock(), config_path=config_path)
        if calibrated:
            calibrate(daemon)
        client = TestClient(create_app(daemon), raise_server_exceptions=False)
        made.append(daemon)
        return client, daemon

    yield build
    for daemon in made:
        daemon.shutdown()


@contextlib.contextmanager
def hold_controller_lock(daemon):
    """Simulate an in-flight command: whatever arrives next must 409."""
    daemon.controller._lock.acquire()
    try:
        yield
    finally:
        daemon.controller._lock.release()


class TestStatus:
    def test_fresh_boot_shape(self, api):
        client, _ = api(calibrated=False)
        doc = check_schema(client.get("/api/status").json(), "status")
        assert doc["state"] == "idle"
        assert doc["calibrated"] is False
        assert doc["last_reading"] is None
        assert doc["active_session"] is None
        assert doc["alarm_reason"] is None

    def test_mid_session_snapshots_are_schema_valid(self, api):
        from hydrad import serialize
        client, daemon = api(initial_theta=0.25)
        snapshots = []
        original = daemon.clock.sleep

        def spy(seconds):
            original(seconds)
            snapshots.append(check_schema(
                serialize.status_doc(daemon.controller.status), "status"))

        daemon.clock.sleep = spy
        client.post("/api/check")
        states = {s["state"] for s in snapshots}
        assert "watering" in states and "settling" in states
        for snap in snapshots:
            assert (snap["state"] == "watering") == (snap["active_session"] is not None)

    def test_alarm_state_surfaced(self, api):
        client, daemon = api(initial_theta=0.25, absorb=1e-12)
        client.post("/api/check")
        doc = check_schema(client.get("/api/status").json(), "status")
        assert doc["state"] == "alarm"
        assert "not restored" in doc["alarm_reason"]

    def test_polling_does_not_take_the_command_lock(self, api):
        client, daemon = api()
        with hold_controller_lock(daemon):
            assert client.get("/api/status").status_code == 200


class TestCheck:
    def test_happy_path_returns_reading(self, api):
        client, _ = api(initial_theta=0.55)
        resp = client.post("/api/check")
        assert resp.status_code == 200
        doc = check_schema(resp.json(), "reading")
        assert doc["percent"] == pytest.approx(55.0, abs=0.1)

    def test_cascades_into_watering(self, api):
        client, daemon = api(initial_theta=0.25)
        resp = client.post("/api/check")
        assert resp.status_code == 200
        assert resp.json()["percent"] >= 40.0
        waterings = client.get("/api/history", params={"kinds": "watering"}).json()
        assert len(waterings) >= 1

    def test_busy_conflicts(self, api):
        client, daemon = api()
        with hold_controller_lock(daemon):
            expect_error(client.post("/api/check"), 409, "conflict")

    def test_uncalibrated_rejected(self, api):
        client, _ = api(calibrated=False)
        expect_error(client.post("/api/check"), 409, "not_calibrated")

    def test_device_fault_maps_to_device_error(self, api):
        client, daemon = api(initial_theta=0.55)
        daemon.adc.inject_fault()
        expect_error(client.post("/api/check"), 503, "device_error")

    def test_reschedules_from_now(self, api):
        client, daemon = api(initial_theta=0.55)
        t0 = daemon.clock.now()
        client.post("/api/check")
        doc = client.get("/api/status").json()
        from hydrad.serialize import parse_iso
        assert parse_iso(doc["next_check_at"]) == pytest.approx(t0 + 1800.0, abs=0.1)


class TestWater:
    def test_happy_path(self, api):
        client, _ = api(initial_theta=0.5)
        resp = client.post("/api/water", json={"duration_s": 5})
        assert resp.status_code == 200
        doc = check_schema(resp.json(), "session")
        assert doc["trigger"] == "manual"
        assert len(doc["cycles"]) == 1
        assert doc["cycles"][0]["volume_l"] == pytest.approx(0.025, rel=1e-9)

    def test_negative_duration_rejected(self, api):
        client, _ = api()
        expect_error(client.post("/api/water", json={"duration_s": -1}), 400, "bad_request")

    def test_missing_duration_rejected(self, api):
        client, _ = api()
        expect_error(client.post("/api/water", json={}), 400, "bad_request")

    def test_non_json_body_rejected(self, api):
        client, _ = api()
        resp = client.post("/api/water", content=b"duration=5",
                           headers={"content-type": "application/json"})
        expect_error(resp, 400, "bad_request")

    def test_busy_conflicts(self, api):
        client, daemon = api()
        with hold_controller_lock(daemon):
            expect_error(client.post("/api/water", json={"duration_s": 5}), 409, "conflict")


class TestConfig:
    def test_get_returns_full_document(self, api):
        client, _ = api()
        doc = check_schema(client.get("/api/config").json(), "config")
        assert doc["threshold_pct"] == 40.0
        assert doc["check_interval_s"] == 1800.0

    def test_put_then_read_back(self, api):
        client, _ = api()
        resp = client.put("/api/config", json={"threshold_pct": 45.0})
        assert resp.status_code == 200
        assert client.get("/api/config").json()["threshold_pct"] == 45.0

    def test_put_is_idempotent(self, api):
        client, _ = api()
        body = {"threshold_pct": 42.0, "check_interval_s": 600.0}
        first = client.put("/api/config", json=body).json()
        second = client.put("/api/config", json=body).json()
        assert first == second == client.get("/api/config").json()

    def test_invariant_violation_names_field(self, api):
        client, _ = api()
        body = expect_error(client.put("/api/config", json={"threshold_pct": 140.0}),
                            400, "bad_request")
        assert "threshold_pct" in body["message"]

    def test_unknown_field_rejected(self, api):
        client, _ = api()
        body = expect_error(client.put("/api/config", json={"thresold": 40}),
                            400, "bad_request")
        assert "thresold" in body["message"]

    def test_cross_field_invariant_enforced(self, api):
        client, _ = api()
        expect_error(client.put("/api/config",
                                json={"threshold_pct": 90.0, "target_margin_pct": 20.0}),
                     400, "bad_request")

    def test_put_persists_to_config_file(self, api, tmp_path):
        from hydrad.config import default_doc
        config_path = tmp_path / "hydrad.json"
        config_path.write_text(json.dumps(default_doc()))
        client, _ = api(config_path=str(config_path))
        client.put("/api/config", json={"threshold_pct": 33.0})
        on_disk = json.loads(config_path.read_text())
        assert on_disk["controller"]["threshold_pct"] == 33.0


class TestHistory:
    def test_empty_store(self, api):
        client, _ = api()
        resp = client.get("/api/history")
        assert resp.status_code == 200
        assert check_schema(resp.json(), "history") == []

    def test_records_after_checks(self, api):
        client, daemon = api(initial_theta=0.55)
        client.post("/api/check")
        daemon.clock.advance(1800)
        client.post("/api/check")
        records = check_schema(client.get("/api/history").json(), "history")
        kinds = {r["kind"] for r in records}
        assert "reading" in kinds and "transition" in kinds
        readings = client.get("/api/history", params={"kinds": "reading"}).json()
        assert len(readings) == 2

    def test_window_filter(self, api):
        client, daemon = api(initial_theta=0.55)
        client.post("/api/check")
        daemon.clock.advance(1800)
        client.post("/api/check")
        from hydrad.serialize import iso
        window = client.get("/api/history", params={
            "from": iso(0.0), "to": iso(10.0), "kinds": "reading"}).json()
        assert len(window) == 1

    def test_inverted_window_rejected(self, api):
        client, _ = api()
        from hydrad.serialize import iso
        expect_error(client.get("/api/history",
                                params={"from": iso(100.0), "to": iso(0.0)}),
                     400, "bad_request")

    def test_bad_timestamp_rejected(self, api):
        client, _ = api()
        expect_error(client.get("/api/history", params={"from": "yesterday"}),
                     400, "bad_request")

    def test_unknown_kind_rejected(self, api):
        client, _ = api()
        expect_error(client.get("/api/history", params={"kinds": "header"}),
                     400, "bad_request")


class TestCalibrate:
    def test_two_phase_flow(self, api):
        client, daemon = api(calibrated=False)
        first = client.post("/api/calibrate", json={"phase": "dry"})
        assert first.status_code == 200
        doc = check_schema(first.json(), "calibration_result")
        assert doc == {"phase": "dry", "raw_code": 22400, "complete": False, "profile": None}
        second = client.post("/api/calibrate", json={"phase": "wet"})
        doc = check_schema(second.json(), "calibration_result")
        assert doc["complete"] is True
        assert doc["profile"]["raw_dry"] == 22400
        assert doc["profile"]["raw_wet"] == 9600
        assert client.get("/api/status").json()["calibrated"] is True
        assert Path(daemon.config.storage.profile_path).exists()

    def test_degenerate_profile_rejected_then_retryable(self, api):
        client, daemon = api(calibrated=False)

        @contextlib.contextmanager
        def miswired(phase):
            saved = daemon.rig.theta
            daemon.rig.force_theta(1.0 if phase == "dry" else 0.0)  # probe swapped
            try:
                yield
            finally:
                daemon.rig.force_theta(saved)

        client.post("/api/calibrate", json={"phase": "dry"})
        daemon.controller._reference_conditioner = miswired
        expect_error(client.post("/api/calibrate", json={"phase": "wet"}),
                     400, "bad_request")
        # dry reference was kept; a correctly wired retry completes
        daemon.controller._reference_conditioner = daemon._condition_reference
        retry = client.post("/api/calibrate", json={"phase": "wet"})
        assert retry.status_code == 200
        assert retry.json()["complete"] is True

    def test_bad_phase_rejected(self, api):
        client, _ = api(calibrated=False)
        expect_error(client.post("/api/calibrate", json={"phase": "moist"}),
                     400, "bad_request")

    def test_busy_conflicts(self, api):
        client, daemon = api(calibrated=False)
        with hold_controller_lock(daemon):
            expect_error(client.post("/api/calibrate", json={"phase": "dry"}),
                         409, "conflict")

    def test_n_samples_validated(self, api):
        client, _ = api(calibrated=False)
        expect_error(client.post("/api/calibrate", json={"phase": "dry", "n_samples": 0}),
                     400, "bad_request")


class TestAlarm:
    def test_clear_restores_idle(self, api):
        client, _ = api(initial_theta=0.25, absorb=1e-12)
        client.post("/api/check")
        expect_error(client.post("/api/check"), 409, "conflict")
        resp = client.post("/api/alarm/clear")
        assert resp.status_code == 200
        doc = check_schema(resp.json(), "status")
        assert doc["state"] == "idle"
        assert doc["alarm_reason"] is None

    def test_clear_without_alarm_conflicts(self, api):
        client, _ = api()
        expect_error(client.post("/api/alarm/clear"), 409, "conflict")


class TestStatic:
    def test_root_without_dashboard(self, api):
        client, _ = api()
        resp = client.get("/")
        assert resp.status_code == 200
        assert resp.json()["service"] == "hydrad"

    def test_root_serves_built_dashboard(self, tmp_path):
        from dataclasses import replace
        static = tmp_path / "dist"
        static.mkdir()
        (static / "index.html").write_text("<!doctype html><title>pot</title>")
        cfg = make_config(tmp_path)
        cfg = replace(cfg, server=replace(cfg.server, static_dir=str(static)))
        daemon = Daemon(cfg, clock=VirtualClock())
        try:
            client = TestClient(create_app(daemon))
            resp = client.get("/")
            assert resp.status_code == 200
            assert "pot" in resp.text
            assert client.get("/api/status").status_code == 200
        finally:
            daemon.shutdown()
