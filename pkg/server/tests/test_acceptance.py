"""Shipping gate for the sidecar: protocol conformance end to end."""

from __future__ import annotations

import random

import pytest

from patcher.backends.base import TEMPLATE_KINDS
from patcher.domain import Prompt, RepairStatus
from patcher.errors import ProtocolViolation, RemoteError
from patcher.orchestrator import patcher_repair

from conftest import remote_for

_JUNK = (None, True, 3.5, [], {}, "")


def _mutate(rng, payload):
    """One well-formed payload, knocked out of shape at random."""
    broken = dict(payload)
    keys = list(broken)
    roll = rng.random()
    if roll < 0.4 and keys:
        del broken[rng.choice(keys)]
    elif roll < 0.8 and keys:
        broken[rng.choice(keys)] = rng.choice(_JUNK)
    else:
        broken["extra"] = rng.choice(_JUNK)
    return broken


def test_criterion_10_model_server_conformance(app, raw):
    # schema validation holds up under fuzzed requests: every answer is
    # JSON, carries the contract fields on 200 and an error otherwise,
    # and nothing reaches a 5xx
    rng = random.Random(1010)
    known = raw.post(
        "/v1/generate", json={"prompt": "a cat and a dog", "seed": 0}
    ).json()["image_id"]
    wellformed = {
        "/v1/generate": lambda: {"prompt": "a cat and a dog",
                                 "seed": rng.randint(0, 2**31)},
        "/v1/similarity": lambda: {"image_id": rng.choice([known, "f" * 64]),
                                   "text": "cat"},
        "/v1/suggest": lambda: {"template": rng.choice(TEMPLATE_KINDS),
                                "object": "cat",
                                "prompt": rng.choice([None, "a cat"])},
        "/v1/embed": lambda: {"text": "cat"},
    }
    fuzzed = 0
    for _ in range(150):
        path = rng.choice(list(wellformed))
        payload = wellformed[path]()
        if rng.random() < 0.6:
            payload = _mutate(rng, payload)
        response = raw.post(path, json=payload)
        assert response.status_code in (200, 400, 404), (path, payload)
        body = response.json()
        if response.status_code != 200:
            assert isinstance(body.get("error"), str) and body["error"]
        fuzzed += 1

    # token/attention agreement on 50 prompts, through the validating
    # client (it raises ProtocolViolation on any length mismatch)
    backend = remote_for(app)
    words = ["a", "red", "cat", "dog", "car", "bench", "tiny", "blue",
             "apple", "near", "and", "bowl"]
    for case in range(50):
        text = " ".join(rng.choices(words, k=rng.randint(1, 9)))
        p = Prompt.from_text(f"acc10-{case}", text)
        record = backend.generate(p, seed=case)
        assert len(record.taps) == len(p.tokens)

    # deterministic image ids under a fixed seed
    p = Prompt.from_text("acc10-det", "a cat and a dog")
    first = backend.generate(p, seed=77).image_ref
    assert backend.generate(p, seed=77).image_ref == first

    # end-to-end smoke: one prompt repaired through the remote backend
    # with no protocol errors (repair quality itself is not asserted)
    try:
        outcome = patcher_repair(
            Prompt.from_text("acc10-smoke", "a car and a handbag"), backend
        )
    except (ProtocolViolation, RemoteError) as exc:  # pragma: no cover
        pytest.fail(f"protocol error during end-to-end repair: {exc}")
    assert isinstance(outcome.status, RepairStatus)
    assert outcome.attempts >= 1
    assert outcome.final_prompt.text
    print(f"PASS criterion 10: {fuzzed} fuzzed requests handled, 50 prompts "
          f"length-checked, deterministic ids, end-to-end repair "
          f"{outcome.status.value} in {outcome.attempts} attempts")
