"""Record a real API session into a replay fixture for the studio's contract tests.

Builds a small project from the Python test corpus, drives the HTTP API
through an in-process client, and writes every request/response pair in
order. The UI tests replay these exchanges against a fake fetch, so every
number the UI shows is pinned to what the server actually returned.

Usage: python3 scripts/record_session.py tests/fixtures/session.json
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
import urllib.parse
from pathlib import Path

from fastapi.testclient import TestClient

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "tests"))

import helpers  # noqa: E402

from weaklabel import ops  # noqa: E402
from weaklabel.api import API_PREFIX, create_app  # noqa: E402
from weaklabel.project import Project  # noqa: E402

BROKEN_RULE = """name: draft-headline
task: sentiment
label: netral
rule: keyword_any(headline, ["kolom"], nocase)
"""

FIXED_RULE = """name: draft-headline
task: sentiment
label: netral
rule: keyword_any(title, ["kolom"], nocase)
"""


def build_project(root: Path) -> None:
    raw = root.parent / "articles.jsonl"
    helpers.write_raw_corpus(raw)
    project = ops.ingest(root, raw, max_tokens=48, train_ratio=0.6, validation_ratio=0.2, seed=0)
    for task, manifest in (("tags", "tags-v0"), ("sentiment", "sentiment-v0")):
        ops.build_matrix(project, task, manifest)
        ops.fit_task(project, task, model="cm")
        ops.predict_task(project, task)


def main() -> int:
    out_path = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/session.json")
    steps: list[dict] = []

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp) / "project"
        build_project(root)
        client = TestClient(create_app(root))

        def record(name: str, method: str, path: str, body: dict | None = None) -> dict:
            response = getattr(client, method.lower())(
                API_PREFIX + path, **({} if body is None else {"json": body})
            )
            payload = response.json()
            steps.append(
                {
                    "name": name,
                    "method": method,
                    "path": API_PREFIX + path,
                    "body": body,
                    "status": response.status_code,
                    "response": payload,
                }
            )
            return payload

        project_info = record("project-initial", "GET", "/project")
        analyze_v0 = record("analyze-sentiment-v0", "POST", "/analyze", {"task": "sentiment"})

        cli = subprocess.run(
            [sys.executable, "-m", "weaklabel", "--project", str(root),
             "analyze", "--task", "sentiment", "--json"],
            capture_output=True, text=True, check=True,
        )
        cli_report = json.loads(cli.stdout)
        assert cli_report == analyze_v0["analysis"], "CLI and API analysis reports must agree"

        record("analyze-tags-initial", "POST", "/analyze", {"task": "tags"})

        queue = record("queue-initial", "GET", "/review-queue/sentiment?split=validation")
        items = queue["items"]
        assert len(items) >= 3, "need at least three reviewable documents"
        encoded = urllib.parse.quote(items[0]["doc_id"], safe="")
        record("document-first", "GET", f"/documents/{encoded}")

        record("review-accept-1", "POST", "/reviews", {
            "doc_id": items[0]["doc_id"], "task": "sentiment", "label": items[0]["prediction"],
        })
        record("queue-after-accept-1", "GET", "/review-queue/sentiment?split=validation")
        record("review-accept-2", "POST", "/reviews", {
            "doc_id": items[1]["doc_id"], "task": "sentiment", "label": items[1]["prediction"],
        })
        record("queue-after-accept-2", "GET", "/review-queue/sentiment?split=validation")

        labels = project_info["tasks"]["sentiment"]["labels"]
        revised = next(label for label in labels if label != items[2]["prediction"])
        record("review-revise", "POST", "/reviews", {
            "doc_id": items[2]["doc_id"], "task": "sentiment", "label": revised,
        })
        record("queue-final", "GET", "/review-queue/sentiment?split=validation")
        record(
            "queue-conflicted-only",
            "GET",
            "/review-queue/sentiment?split=validation&only_conflicted=true",
        )

        manifest = record("manifest-v0", "GET", "/manifests/sentiment-v0")
        current = manifest["version"]

        broken_files = dict(manifest["files"])
        broken_files["draft-headline.lf"] = BROKEN_RULE
        record("put-draft-invalid", "PUT", "/manifests/sentiment-draft", {
            "base_version": current, "task": "sentiment", "version": "v0", "files": broken_files,
        })

        fixed_files = dict(manifest["files"])
        fixed_files["draft-headline.lf"] = FIXED_RULE
        record("put-draft-stale", "PUT", "/manifests/sentiment-draft", {
            "base_version": 1, "task": "sentiment", "version": "v0", "files": fixed_files,
        })
        refreshed = record("project-refresh", "GET", "/project")
        record("put-draft-valid", "PUT", "/manifests/sentiment-draft", {
            "base_version": refreshed["version"], "task": "sentiment",
            "version": "v0", "files": fixed_files,
        })

        record(
            "analyze-sentiment-v1", "POST", "/analyze",
            {"task": "sentiment", "manifest": "sentiment-v1"},
        )
        record("analyze-tags-final", "POST", "/analyze", {"task": "tags"})

        gold = json.loads((Project(root).gold_dir() / "gold.json").read_text(encoding="utf-8"))
        fixture = {
            "steps": steps,
            "cli_analyze_sentiment": cli_report,
            "final_gold_sentiment": gold["sentiment"],
        }

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(fixture, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {len(steps)} steps to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
