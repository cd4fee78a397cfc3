"""Shared fixtures: scripted backends and corpus builders for offline tests."""
from __future__ import annotations

import threading

import pytest

from scivet.corpus import EvidenceAbstract, Label, NewsArticle, Origin
from scivet.gateway import ChatRequest, TransientError


class ScriptedBackend:
    """Answers by substring rules against the user message, in rule order.

    rules is a list of (marker, response); the first marker found in the
    user message wins.  A missing match raises unless a default is given.
    Thread-safe call counting for concurrency and call-contract tests.
    """

    def __init__(self, rules=(), default=None, backend_id="scripted"):
        self.rules = list(rules)
        self.default = default
        self.backend_id = backend_id
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.requests)

    def send(self, request: ChatRequest) -> str:
        with self._lock:
            self.requests.append(request)
        for marker, response in self.rules:
            if marker in request.user_message:
                return response
        if self.default is not None:
            return self.default
        raise AssertionError(
            f"no scripted rule matches user message: {request.user_message[:80]!r}")


class FlakyBackend:
    """Raises TransientError for the first ``failures`` sends, then succeeds."""

    def __init__(self, failures: int, response: str = "ok", backend_id="flaky"):
        self.failures = failures
        self.response = response
        self.backend_id = backend_id
        self.calls = 0

    def send(self, request: ChatRequest) -> str:
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientError(f"synthetic failure {self.calls}")
        return self.response


def make_article(article_id="a1", body="Scientists find water. It is wet.",
                 title="Water found", label=None, origin=None, **kwargs) -> NewsArticle:
    return NewsArticle(id=article_id, title=title, body=body,
                       label=label, origin=origin, **kwargs)


def make_abstract(abstract_id="x1",
                  text="We studied water. Water was observed to be wet. Wetness persisted.",
                  title="On the wetness of water") -> EvidenceAbstract:
    return EvidenceAbstract(id=abstract_id, title=title, abstract=text)


@pytest.fixture
def article():
    return make_article()


@pytest.fixture
def abstract():
    return make_abstract()


@pytest.fixture
def labeled_corpus():
    return [
        make_article("h1", label=Label.RELIABLE, origin=Origin.HUMAN),
        make_article("h2", label=Label.UNRELIABLE, origin=Origin.HUMAN),
        make_article("l1", label=Label.RELIABLE, origin=Origin.LLM),
        make_article("l2", label=Label.UNRELIABLE, origin=Origin.LLM),
    ]
