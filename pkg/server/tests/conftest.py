"""Shared fixtures: the app driven in-process through the WSGI seam."""

from __future__ import annotations

import httpx
import pytest

from patcher_server import ModelServerApp, ServerConfig


@pytest.fixture(autouse=True)
def clean_endpoint(monkeypatch):
    # a configured endpoint in the environment must not leak into tests
    monkeypatch.delenv("PATCHER_ENDPOINT", raising=False)


@pytest.fixture
def store(tmp_path):
    return tmp_path / "images"


@pytest.fixture
def app(store):
    return ModelServerApp(config=ServerConfig(image_store=store))


@pytest.fixture
def raw(app):
    """Plain HTTP client, for malformed payloads the real client won't send."""
    transport = httpx.WSGITransport(app=app)
    with httpx.Client(transport=transport, base_url="http://sidecar") as client:
        yield client


def remote_for(app):
    """The real validating client, wired straight into the app."""
    from patcher.backends.remote import RemoteBackend

    return RemoteBackend(
        "http://sidecar", transport=httpx.WSGITransport(app=app)
    )
