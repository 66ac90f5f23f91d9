"""Regenerate the completion cache of tests/fixtures/pipeline.

Runs the pipeline in record mode against a scripted transport that answers
each prompt strategy with the matching file from ``responses/``. The first
entity-list prompt is rejected with HTTP 429 so the cache also captures a
trim-and-retry episode. Re-run this after changing templates or the corpus:

    python tools/record_fixture_cache.py
"""

from __future__ import annotations

import json
import os
import shutil
import sys
from pathlib import Path

from promptner import pipeline
from promptner.transport import HttpResponse

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "pipeline"

MARKERS = {
    "### Annotated example document": "doc",
    "### Annotated example sentences": "sent",
    "### Example entities": "ent",
}
LATENCY = {"zero": 8.88, "doc": 11.42, "sent": 12.07, "ent": 20.98}


class ScriptedTransport:
    def __init__(self, responses: dict[str, str]):
        self.responses = responses
        self.rejected_entities = False
        self.calls: list[str] = []

    def post_json(self, url, payload, headers, timeout):
        prompt = payload["messages"][0]["content"]
        strategy = next((s for marker, s in MARKERS.items() if marker in prompt), "zero")
        self.calls.append(strategy)
        if strategy == "ent" and not self.rejected_entities:
            self.rejected_entities = True
            return HttpResponse(429, {"error": {"code": "rate_limit_exceeded", "message": "tokens per min limit"}}, {})
        body = {
            "choices": [{"message": {"role": "assistant", "content": self.responses[strategy]}}],
            "usage": {"prompt_tokens": len(prompt) // 4, "completion_tokens": len(self.responses[strategy]) // 4},
        }
        return HttpResponse(200, body, {})


def main() -> int:
    responses = {p.stem: p.read_text(encoding="utf-8") for p in (FIXTURE / "responses").glob("*.txt")}
    shutil.rmtree(FIXTURE / "cache", ignore_errors=True)
    shutil.rmtree(FIXTURE / "out", ignore_errors=True)
    os.environ.setdefault("PROMPTNER_API_KEY", "fixture")
    config = pipeline.PipelineConfig.from_file(FIXTURE / "promptner.yaml")
    config.mode = "record"
    pipeline.ingest(config)
    transport = ScriptedTransport(responses)
    result = pipeline.run(config, list(pipeline.PromptStrategy), transport=transport)
    # Pin latencies and timestamps so the shipped records are stable.
    for path in sorted((FIXTURE / "cache" / "completions").glob("*.json")):
        if path.name.endswith(".limit.json"):
            continue
        data = json.loads(path.read_text(encoding="utf-8"))
        strategy = next(r for r in result.manifest["results"].values() if r.get("prompt_hash") == data["prompt_hash"])
        name = next(k for k, v in result.manifest["results"].items() if v is strategy)
        data["latency_seconds"] = LATENCY[name]
        data["timestamp"] = "2025-01-15T12:00:00+00:00"
        path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    shutil.rmtree(FIXTURE / "out", ignore_errors=True)
    print("calls:", transport.calls, "failures:", result.failures)
    return 1 if result.failures else 0


if __name__ == "__main__":
    sys.exit(main())
