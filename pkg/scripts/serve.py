#!/usr/bin/env python3
"""Run the decision service.

Usage:
    python3 scripts/serve.py --data-dir ./trial-data [--ui-dir frontend/dist]
"""

import argparse

import uvicorn

from eidose.service import create_app


def main() -> None:
    parser = argparse.ArgumentParser(description="serve the trial decision API")
    parser.add_argument("--data-dir", default="./trial-data",
                        help="directory for the append-only trial logs")
    parser.add_argument("--ui-dir", default=None,
                        help="optional static dashboard build to mount at /ui")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    args = parser.parse_args()
    app = create_app(args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
