"""Record real server responses for the UI flow tests.

Drives the exact request sequence the frontend flow test replays, against the
in-process HTTP app, and writes the request/response tape plus the dataset
upload body into tests/fixtures/. Rerun after changing the engine or the API:

    python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tests"))

from scenarios import epm_scene  # noqa: E402

from etho.server import create_app  # noqa: E402
from etho.trackdata import dataset_to_json, objects_to_json  # noqa: E402

ROI_SQUARE = [[0, 0], [50, 0], [50, 50], [0, 50]]
ROI_BOWTIE = [[0, 0], [40, 40], [40, 0], [0, 40]]
UTTERANCE = (
    "Define <|closed time|>:\n```\n"
    'define closed_t as object("closed arm", overlap)\n```'
)

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> None:
    client = TestClient(create_app())
    tape: list[dict] = []

    def record(method: str, path: str, body=None):
        if method == "GET":
            response = client.get(path)
        else:
            response = client.post(path, json=body)
        content_type = response.headers.get("content-type", "")
        entry = {
            "method": method,
            "path": path,
            "status": response.status_code,
            "contentType": content_type,
        }
        if content_type.startswith("application/json"):
            entry["json"] = response.json()
        else:
            entry["text"] = response.text
        tape.append(entry)
        return response

    session_id = record("POST", "/sessions").json()["session_id"]
    base = f"/sessions/{session_id}"

    d, objects = epm_scene()
    upload_body = {"dataset": dataset_to_json(d), "objects": objects_to_json(objects)}
    (FIXTURE_DIR / "dataset_upload.json").write_text(json.dumps(upload_body), encoding="utf-8")

    record("POST", f"{base}/dataset", upload_body)
    record("GET", f"{base}/objects")
    record("POST", f"{base}/rois", {"name": "ROI9", "polygon": ROI_SQUARE})
    record("GET", f"{base}/objects")
    record("POST", f"{base}/rois", {"name": "ROI9", "polygon": ROI_SQUARE})  # duplicate -> 400
    record("POST", f"{base}/rois", {"name": "bow", "polygon": ROI_BOWTIE})  # bowtie -> 400
    record("POST", f"{base}/utterance", {"text": UTTERANCE})
    record("GET", f"{base}/state")
    record("POST", f"{base}/run", {"behavior": "epm_closed_arm", "params": {}})
    record("POST", f"{base}/run", {"behavior": "closed_t", "params": {}})
    record("GET", f"{base}/ethogram.svg?behaviors=epm_closed_arm")
    record("GET", f"{base}/trajectory.svg?animal=m0&bodyparts=mouse_center&behavior=epm_closed_arm")

    out = FIXTURE_DIR / "flow.json"
    out.write_text(json.dumps({"session_id": session_id, "tape": tape}, indent=1), encoding="utf-8")
    print(f"wrote {out} ({len(tape)} responses) and dataset_upload.json")


if __name__ == "__main__":
    main()
