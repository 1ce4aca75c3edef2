#!/usr/bin/env python3
"""Build a complete demo store from a scripted day and print its reports.

Generates a synthetic detection stream (stop dwellers, median crossings,
one occlusion-heavy hour), runs every pipeline stage, and leaves a store
ready for `pedwatch serve`.

    python3 scripts/run_demo.py --dir demo
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pedwatch.cli import main as pedwatch

GROUPS = [
    {"name": "sb_stop", "kind": "dwell",
     "polygons": [[[0, 450], [200, 450], [200, 550], [0, 550]]]},
    {"name": "median", "kind": "crossing",
     "polygons": [[[400, 400], [1600, 400], [1600, 700], [400, 700]]]},
]


def scenario(source_uri: str) -> dict:
    agents = [
        {"behavior": "wait", "start_s": 10.0, "duration_s": 45.0, "roi": "sb_stop"},
        {"behavior": "wait", "start_s": 90.0, "duration_s": 30.0, "roi": "sb_stop",
         "dropout": 0.01, "dropout_burst_s": 2.5},
        {"behavior": "wait", "start_s": 160.0, "duration_s": 20.0, "roi": "sb_stop"},
    ]
    for k in range(5):
        agents.append({
            "behavior": "cross", "start_s": 20.0 + 30.0 * k, "duration_s": 5.0,
            "path": [[520 + 70 * k, 380], [520 + 70 * k, 720]],
        })
    return {
        "meta": {
            "camera_id": "cam42",
            "start_ts": "2020-03-10T10:00:00-05:00",
            "fps": 10.0,
            "frame_count": 2400,
            "width": 1920,
            "height": 1080,
            "source_uri": source_uri,
        },
        "groups": GROUPS,
        "agents": agents,
        "seed": 20,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dir", default="demo", help="output directory")
    args = parser.parse_args(argv)

    base = Path(args.dir)
    base.mkdir(parents=True, exist_ok=True)
    source = base / "raw.mp4"
    source.write_bytes(b"\x00" * 1024)  # stand-in for the camera file

    (base / "scenario.json").write_text(json.dumps(scenario(str(source)), indent=2))
    (base / "roi.json").write_text(json.dumps({"groups": GROUPS}, indent=2))
    (base / "boardings.csv").write_text(
        "stop_id,date,hour,boardings\nsb_stop,2020-03-10,10,3\n"
    )

    dets = base / "detections.jsonl"
    store = base / "store"
    steps = [
        ["synth", "--scenario", str(base / "scenario.json"), "--out", str(dets)],
        ["ingest", "--store", str(store), "--roi", str(base / "roi.json"),
         "--detections", str(dets), "--meta", f"{dets}.meta.json",
         "--boardings", str(base / "boardings.csv")],
        ["analyze", "--store", str(store)],
        ["correlate", "--store", str(store)],
        ["cutlist", "--store", str(store), "--merge"],
        ["render-clips", "--store", str(store),
         "--cutter", "cp {source} {output} # {start_s} {duration_s}"],
    ]
    for step in steps:
        code = pedwatch(step)
        if code != 0:
            return code

    summary = json.loads((store / "reports" / "summary.json").read_text())
    print()
    for name, doc in summary["groups"].items():
        print(f"{name} ({doc['kind']}): {doc['events']} events, total {doc['total']}")
    accuracy = json.loads((store / "reports" / "accuracy.json").read_text())
    for name, doc in accuracy["groups"].items():
        print(f"{name} vs boardings: MAE {doc['mae']:.2f} "
              f"over {doc['joined_pairs']} joined hour(s)")
    print()
    print("store ready; to browse it:")
    print(f"  python3 scripts/make_users.py --out {base}/users.json --user ana")
    print(f"  pedwatch serve --store {store} --users {base}/users.json "
          "--addr 127.0.0.1:8750")
    return 0


if __name__ == "__main__":
    sys.exit(main())
