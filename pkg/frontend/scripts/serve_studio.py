"""Serve the built studio and proxy API calls to a running weaklabel server.

The page and the API share one origin, so no cross-origin setup is needed:

    weaklabel --project demo serve --port 8700
    python3 scripts/serve_studio.py --backend http://127.0.0.1:8700 --port 8080
"""

from __future__ import annotations

import argparse
import urllib.error
import urllib.request
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

HOP_HEADERS = {"connection", "keep-alive", "transfer-encoding", "host", "content-length"}


class StudioHandler(SimpleHTTPRequestHandler):
    def __init__(self, *args, backend: str, **kwargs):
        self.backend = backend
        super().__init__(*args, **kwargs)

    def _proxy(self) -> None:
        length = int(self.headers.get("content-length") or 0)
        body = self.rfile.read(length) if length else None
        request = urllib.request.Request(
            self.backend + self.path, data=body, method=self.command
        )
        for name, value in self.headers.items():
            if name.lower() not in HOP_HEADERS:
                request.add_header(name, value)
        try:
            with urllib.request.urlopen(request) as response:
                payload = response.read()
                status = response.status
                headers = response.headers
        except urllib.error.HTTPError as error:  # 4xx/5xx still carry JSON bodies
            payload = error.read()
            status = error.code
            headers = error.headers
        self.send_response(status)
        for name, value in headers.items():
            if name.lower() not in HOP_HEADERS:
                self.send_header(name, value)
        self.send_header("content-length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self) -> None:
        if self.path.startswith("/api/"):
            self._proxy()
        else:
            super().do_GET()

    def do_POST(self) -> None:
        self._proxy()

    def do_PUT(self) -> None:
        self._proxy()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--backend", default="http://127.0.0.1:8700")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--root", default=str(Path(__file__).resolve().parents[1]))
    args = parser.parse_args()
    handler = partial(StudioHandler, backend=args.backend.rstrip("/"), directory=args.root)
    server = ThreadingHTTPServer(("127.0.0.1", args.port), handler)
    print(f"studio at http://127.0.0.1:{args.port}/ proxying API to {args.backend}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
