"""Integration: the generation pipeline driven through the live service."""

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest
import requests

PRIMARY_ROOT = Path(__file__).resolve().parents[2]
BUNDLES = PRIMARY_ROOT / "tests" / "fixtures" / "bundles"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def service_url():
    port = free_port()
    process = subprocess.Popen(
        [sys.executable, "-m", "uvicorn", "summarizer_service.app:app",
         "--host", "127.0.0.1", "--port", str(port), "--log-level", "warning"],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    url = f"http://127.0.0.1:{port}"
    try:
        deadline = time.time() + 20
        while True:
            try:
                if requests.get(f"{url}/health", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                pass
            if time.time() > deadline:
                pytest.fail("service did not become healthy in time")
            time.sleep(0.2)
        yield url
    finally:
        process.terminate()
        process.wait(timeout=10)


@pytest.mark.acceptance(11, "service conformance and pipeline-through-service run")
def test_pipeline_through_service(service_url, tmp_path):
    health = requests.get(f"{service_url}/health", timeout=5)
    assert health.status_code == 200 and health.json() == {"status": "ok"}

    wire = requests.post(
        f"{service_url}/summarize",
        json={"text": "a man sits. a man reads. a dog barks.", "beam_widths": [2, 3, 4, 5, 6]},
        timeout=10,
    )
    assert wire.status_code == 200
    assert [s["beam_width"] for s in wire.json()["summaries"]] == [2, 3, 4, 5, 6]

    manifest_path = tmp_path / "manifest.json"
    run = subprocess.run(
        [
            "ctxgen", "run",
            "--input", str(BUNDLES),
            "--output", str(manifest_path),
            "--backend", f"http:{service_url}",
        ],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert run.returncode == 0, run.stderr
    rows = {r["image_id"]: r for r in json.loads(manifest_path.read_text())["rows"]}
    assert rows["img_0002"]["status"] == "no_person"
    ok_row = rows["img_0001"]
    assert ok_row["status"] == "ok"
    assert ok_row["paragraph"]

    _assert_cleaning_postconditions(ok_row["paragraph"])


def _assert_cleaning_postconditions(paragraph: str):
    """Re-derive the analyzer text for the golden bundle and check the
    cleaned paragraph against the alpha/beta thresholds."""
    from ctxgen.config import PipelineConfig
    from ctxgen.embeddings import cosine_similarity, embed_sentence
    from ctxgen.image_analyzer import (
        analyze_captions,
        build_analyzer_text,
        dedup_captions,
        filter_person_captions,
        filter_short_captions,
        gate_people,
        parse_bundle,
        render_classifier_sentences,
        standardize_subject,
    )
    from ctxgen.resources import load_resources
    from ctxgen.text_core import SentenceRecord, split_sentences

    config = PipelineConfig()
    resources = load_resources()
    with open(BUNDLES / "img_0001.json", encoding="utf-8") as fh:
        bundle = parse_bundle(json.load(fh))
    p = gate_people(bundle.detections, config)
    caps = analyze_captions(list(bundle.captions), resources.lexicon)
    caps = dedup_captions(caps, resources.store, config)
    caps = filter_person_captions(caps, resources.graph)
    caps = filter_short_captions(caps)
    caps, noun = standardize_subject(caps, resources.graph)
    templates = render_classifier_sentences(bundle.classifiers, p, noun, config)
    text = build_analyzer_text(caps, templates, noun, resources.lexicon)

    source_vec = embed_sentence(
        [tok for record in text.sentences for tok in record.tokens], resources.store
    )
    records = [SentenceRecord.from_raw(s) for s in split_sentences(paragraph)]
    vectors = [embed_sentence(list(r.tokens), resources.store) for r in records]
    assert vectors, "paragraph must contain at least one sentence"
    for vec in vectors:
        assert cosine_similarity(vec, source_vec) >= config.alpha
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            assert cosine_similarity(vectors[i], vectors[j]) <= config.beta
