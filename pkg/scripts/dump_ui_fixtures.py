#!/usr/bin/env python3
"""Capture service responses for the dashboard's offline test fixtures.

Two reference trials are replayed against an in-process service:

* top-dose: four-dose ladder, nine-patient budget, three enrollments at
  the top dose 60 days apart; by day 155 the retainment probability is
  0.936 against the 0.8 max-dose threshold and the MTD is identified.
* interior: six-dose ladder, fifteen-patient budget, nine patients on
  dose 2 (three with DLTs, four complete, two still in follow-up); the
  retainment probability is 0.404 against the 0.4 interior threshold but
  the data-only decision is to de-escalate, so the trial does not stop.

For each trial the decision view, the full state, and a what-if round
trip land as JSON under --out (default frontend/fixtures).

Usage:
    python3 scripts/dump_ui_fixtures.py [--out frontend/fixtures]
"""

import argparse
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from eidose.service import create_app


def dump(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def capture(client: TestClient, out: Path, name: str, trial_id: str,
            as_of: float, what_if: dict) -> None:
    decision = client.get(f"/trials/{trial_id}/decision", params={"as_of": as_of})
    state = client.get(f"/trials/{trial_id}/state")
    hypo = client.post(f"/trials/{trial_id}/decision:what-if", json=what_if)
    for resp in (decision, state, hypo):
        resp.raise_for_status()
    dump(out / name / "decision.json", decision.json())
    dump(out / name / "state.json", state.json())
    dump(out / name / "whatif.json", hypo.json())


def build_top_dose(client: TestClient) -> str:
    config = {
        "design": "boin", "mode": "ei_tite", "n_max": 9, "n_doses": 4,
        "window_days": 70.0, "enrollment": {"kind": "deterministic", "interval_days": 60.0},
    }
    trial_id = client.post("/trials", json={"config": config}).json()["trial_id"]
    for at, pid in ((0.0, 1), (60.0, 2), (120.0, 3)):
        client.post(
            f"/trials/{trial_id}/events",
            json={"at": at, "kind": "patient_enrolled", "id": pid, "dose": 4},
        ).raise_for_status()
    return trial_id


def build_interior(client: TestClient) -> str:
    config = {
        "design": "boin", "mode": "ei_tite", "n_max": 15, "n_doses": 6,
        "window_days": 90.0,
    }
    trial_id = client.post("/trials", json={"config": config}).json()["trial_id"]
    events = [(float(5 * i), "patient_enrolled", {"id": i + 1, "dose": 2})
              for i in range(7)]
    events += [
        (40.0, "dlt_observed", {"id": 1, "day": 40.0}),
        (45.0, "dlt_observed", {"id": 2, "day": 40.0}),
        (50.0, "dlt_observed", {"id": 3, "day": 40.0}),
        (120.0, "patient_enrolled", {"id": 8, "dose": 2}),
        (150.0, "patient_enrolled", {"id": 9, "dose": 2}),
    ]
    for at, kind, payload in events:
        client.post(
            f"/trials/{trial_id}/events",
            json={"at": at, "kind": kind, **payload},
        ).raise_for_status()
    return trial_id


def main() -> None:
    parser = argparse.ArgumentParser(description="dump dashboard fixtures")
    parser.add_argument("--out", default="frontend/fixtures")
    args = parser.parse_args()
    out = Path(args.out)
    with tempfile.TemporaryDirectory() as data_dir:
        with TestClient(create_app(data_dir)) as client:
            top = build_top_dose(client)
            capture(
                client, out, "top-dose", top, as_of=155.0,
                what_if={
                    "as_of": 155.0,
                    "events": [
                        {"at": 155.0, "kind": "dlt_observed", "id": 3, "day": 35.0}
                    ],
                },
            )
            interior = build_interior(client)
            capture(
                client, out, "interior", interior, as_of=180.0,
                what_if={
                    "as_of": 180.0,
                    "events": [
                        {"at": 180.0, "kind": "dlt_observed", "id": 9, "day": 30.0}
                    ],
                },
            )


if __name__ == "__main__":
    main()
