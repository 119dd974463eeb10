import json
import threading
import time

import httpx
import pytest

from storyloom.errors import (
    FixtureMissError,
    MissingSlotError,
    ProviderError,
    RetriesExhaustedError,
    ValidationFailure,
)
from storyloom.gateway import (
    ChatMessage,
    ChatTranscript,
    FifoSemaphore,
    Gateway,
    Journal,
    LiveTransport,
    PromptTemplate,
    QueueTransport,
    RecordTransport,
    ReplayTransport,
    fingerprint,
    gateway_from_env,
    render,
    request_payload,
)
from storyloom.patterns import fundamental_profiles
from storyloom.prompts import (
    EXEMPLAR_REQUEST,
    ROMANCE_NOTE,
    build_exemplar_prompt,
    count_word,
    definitions_block,
)


def transcript(content="hello", temperature=0.0, model="gpt-4-turbo"):
    return ChatTranscript(
        model=model,
        temperature=temperature,
        messages=(ChatMessage("user", content),),
    )


class TestMessages:
    def test_role_must_be_known(self):
        with pytest.raises(ValidationFailure):
            ChatMessage("tool", "hi")

    def test_content_must_be_non_empty(self):
        with pytest.raises(ValidationFailure):
            ChatMessage("user", "")

    def test_temperature_range(self):
        with pytest.raises(ValidationFailure):
            transcript(temperature=2.5)
        transcript(temperature=2.0)

    def test_completion_needs_trailing_user_message(self):
        t = ChatTranscript(
            model="m",
            temperature=0.0,
            messages=(ChatMessage("user", "q"), ChatMessage("assistant", "a")),
        )
        with pytest.raises(ValidationFailure):
            t.ready_for_completion()
        with pytest.raises(ValidationFailure):
            ChatTranscript("m", 0.0, ()).ready_for_completion()

    def test_request_payload_shape(self):
        t = transcript("q")
        assert request_payload(t) == {
            "model": "gpt-4-turbo",
            "temperature": 0.0,
            "messages": [{"role": "user", "content": "q"}],
        }


class TestTemplates:
    def test_placeholders_must_match_slots(self):
        with pytest.raises(ValidationFailure):
            PromptTemplate(id="t", slots=("a",), body="$a and $b")
        with pytest.raises(ValidationFailure):
            PromptTemplate(id="t", slots=("a", "b"), body="only $a")

    def test_render_substitutes(self):
        t = PromptTemplate(id="t", slots=("who",), body="hello $who!")
        assert render(t, {"who": "world"}) == "hello world!"

    def test_render_missing_slot(self):
        t = PromptTemplate(id="t", slots=("a", "b"), body="$a $b")
        with pytest.raises(MissingSlotError) as err:
            render(t, {"a": "x"})
        assert err.value.details["missing"] == ["b"]

    def test_render_empty_binding_allowed(self):
        t = PromptTemplate(id="t", slots=("a",), body="x${a}y")
        assert render(t, {"a": ""}) == "xy"

    def test_render_ignores_extra_bindings(self):
        t = PromptTemplate(id="t", slots=("a",), body="$a")
        assert render(t, {"a": "1", "b": "2"}) == "1"


class TestExemplarPrompt:
    def test_opening_line(self):
        text = build_exemplar_prompt(fundamental_profiles())
        assert text.startswith(
            "Please consider the following tentative genre definitions:"
        )

    def test_five_numbered_definitions_in_order(self):
        text = build_exemplar_prompt(fundamental_profiles())
        for i, name in enumerate(
            ["Comedy", "Romance", "Tragedy", "Satire", "Mystery"], start=1
        ):
            assert f"\n{i}. {name}: The world is " in text
        assert "each of these five genres" in text

    def test_definitions_precede_instructions(self):
        text = build_exemplar_prompt(fundamental_profiles())
        assert text.index("5. Mystery:") < text.index("Please indicate,")

    def test_romance_note_present_with_curly_quotes(self):
        text = build_exemplar_prompt(fundamental_profiles())
        assert ROMANCE_NOTE.strip() in text
        assert "“romance”" in text
        assert "“love story”" in text

    def test_romance_note_absent_without_romance(self):
        profiles = [
            p for p in fundamental_profiles() if p.genre.name != "romance"
        ]
        text = build_exemplar_prompt(profiles)
        assert "epic plots" not in text
        assert "each of these four genres" in text
        assert "1. Comedy:" in text and "4. Mystery:" in text

    def test_count_words(self):
        assert count_word(5) == "five"
        assert count_word(2) == "two"
        assert count_word(40) == "40"

    def test_definitions_block_numbering(self):
        block = definitions_block(fundamental_profiles())
        assert block.splitlines()[0].startswith("1. Comedy: ")
        assert len(block.splitlines()) == 5

    def test_template_is_in_slot_invariant(self):
        assert set(EXEMPLAR_REQUEST.slots) == {
            "definitions",
            "count",
            "romance_note",
        }


class TestFingerprint:
    def test_deterministic(self):
        assert fingerprint(transcript("a")) == fingerprint(transcript("a"))

    def test_temperature_matters(self):
        assert fingerprint(transcript("a", 0.0)) != fingerprint(
            transcript("a", 0.8)
        )

    def test_content_matters(self):
        assert fingerprint(transcript("a")) != fingerprint(transcript("b"))

    def test_model_matters(self):
        assert fingerprint(transcript("a", model="x")) != fingerprint(
            transcript("a", model="y")
        )

    def test_line_endings_normalized(self):
        assert fingerprint(transcript("a\r\nb")) == fingerprint(
            transcript("a\nb")
        )
        assert fingerprint(transcript("a\rb")) == fingerprint(
            transcript("a\nb")
        )

    def test_no_runtime_salt(self):
        # recompute from first principles; any hidden salt would break this
        import hashlib

        t = transcript("salt check")
        canonical = json.dumps(
            {
                "model": t.model,
                "temperature": t.temperature,
                "messages": [{"role": "user", "content": "salt check"}],
            },
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )
        assert fingerprint(t) == hashlib.sha256(
            canonical.encode("utf-8")
        ).hexdigest()

    def test_fixed_length_hex(self):
        token = fingerprint(transcript("x"))
        assert len(token) == 64
        assert set(token) <= set("0123456789abcdef")


class TestQueueTransport:
    def test_pops_in_order(self):
        q = QueueTransport(["one", "two"])
        assert q.complete(transcript("a")) == "one"
        assert q.complete(transcript("b")) == "two"
        assert [t.messages[-1].content for t in q.requests] == ["a", "b"]

    def test_exhausted(self):
        q = QueueTransport([])
        with pytest.raises(ProviderError):
            q.complete(transcript("a"))


class TestRecordReplay:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "fix.jsonl")
        recorder = RecordTransport(QueueTransport(["resp A", "resp B"]), path)
        assert recorder.complete(transcript("a")) == "resp A"
        assert recorder.complete(transcript("b")) == "resp B"

        replay = ReplayTransport(path)
        assert len(replay) == 2
        assert replay.complete(transcript("a")) == "resp A"
        assert replay.complete(transcript("b")) == "resp B"

    def test_record_dedupes_by_fingerprint(self, tmp_path):
        path = str(tmp_path / "fix.jsonl")
        recorder = RecordTransport(
            QueueTransport(["first", "second"]), path
        )
        recorder.complete(transcript("same"))
        recorder.complete(transcript("same"))
        with open(path, encoding="utf-8") as fh:
            lines = [line for line in fh if line.strip()]
        assert len(lines) == 1

    def test_record_appends_to_existing_file(self, tmp_path):
        path = str(tmp_path / "fix.jsonl")
        RecordTransport(QueueTransport(["one"]), path).complete(transcript("a"))
        RecordTransport(QueueTransport(["two"]), path).complete(transcript("b"))
        replay = ReplayTransport(path)
        assert len(replay) == 2

    def test_entry_shape(self, tmp_path):
        path = str(tmp_path / "fix.jsonl")
        t = transcript("shape")
        RecordTransport(QueueTransport(["ok"]), path).complete(t)
        with open(path, encoding="utf-8") as fh:
            entry = json.loads(fh.readline())
        assert entry["fingerprint"] == fingerprint(t)
        assert entry["request"] == request_payload(t)
        assert entry["response"] == "ok"

    def test_replay_miss(self, tmp_path):
        path = str(tmp_path / "fix.jsonl")
        RecordTransport(QueueTransport(["x"]), path).complete(transcript("a"))
        replay = ReplayTransport(path)
        with pytest.raises(FixtureMissError) as err:
            replay.complete(transcript("unrecorded"))
        assert err.value.details["fingerprint"] == fingerprint(
            transcript("unrecorded")
        )


def live_transport(handler, sleeps):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return LiveTransport(
        "https://llm.test/v1",
        "key",
        sleeper=sleeps.append,
        client=client,
    )


def completion_json(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


class TestLiveTransport:
    def test_success_first_try(self):
        sleeps = []

        def handler(request):
            assert request.url.path == "/v1/chat/completions"
            assert request.headers["authorization"] == "Bearer key"
            return httpx.Response(200, json=completion_json("hi"))

        assert live_transport(handler, sleeps).complete(transcript()) == "hi"
        assert sleeps == []

    def test_retries_on_server_errors_with_backoff(self):
        sleeps = []
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(500)
            return httpx.Response(200, json=completion_json("finally"))

        assert (
            live_transport(handler, sleeps).complete(transcript()) == "finally"
        )
        assert calls["n"] == 3
        assert sleeps == [1.0, 2.0]

    def test_retries_on_rate_limit(self):
        sleeps = []
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(429)
            return httpx.Response(200, json=completion_json("ok"))

        assert live_transport(handler, sleeps).complete(transcript()) == "ok"
        assert sleeps == [1.0]

    def test_retries_on_connection_failure(self):
        sleeps = []
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                raise httpx.ConnectError("refused")
            return httpx.Response(200, json=completion_json("ok"))

        assert live_transport(handler, sleeps).complete(transcript()) == "ok"

    def test_gives_up_after_three_attempts(self):
        sleeps = []
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(503)

        with pytest.raises(RetriesExhaustedError):
            live_transport(handler, sleeps).complete(transcript())
        assert calls["n"] == 3
        assert sleeps == [1.0, 2.0]

    def test_client_error_is_not_retried(self):
        sleeps = []
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(401, text="bad key")

        with pytest.raises(ProviderError) as err:
            live_transport(handler, sleeps).complete(transcript())
        assert calls["n"] == 1
        assert sleeps == []
        assert err.value.details["status"] == 401

    def test_malformed_body_is_provider_error(self):
        sleeps = []

        def handler(request):
            return httpx.Response(200, json={"choices": []})

        with pytest.raises(ProviderError):
            live_transport(handler, sleeps).complete(transcript())


class TestFifoSemaphore:
    def wait_for_queue(self, sem, n):
        deadline = time.monotonic() + 5.0
        while time.monotonic() < deadline:
            with sem._cond:
                if len(sem._queue) >= n:
                    return
            time.sleep(0.001)
        raise AssertionError("waiters never queued up")

    def test_fifo_order_under_cap_one(self):
        sem = FifoSemaphore(1)
        order = []
        sem.acquire()
        threads = []
        for i in range(5):
            t = threading.Thread(
                target=lambda i=i: (sem.acquire(), order.append(i), sem.release())
            )
            t.start()
            threads.append(t)
            self.wait_for_queue(sem, i + 1)
        sem.release()
        for t in threads:
            t.join(timeout=5)
        assert order == [0, 1, 2, 3, 4]

    def test_capacity_change_applies_to_waiters(self):
        sem = FifoSemaphore(1)
        sem.acquire()
        done = threading.Event()
        t = threading.Thread(target=lambda: (sem.acquire(), done.set()))
        t.start()
        self.wait_for_queue(sem, 1)
        assert not done.is_set()
        sem.set_capacity(2)
        assert done.wait(timeout=5)
        t.join(timeout=5)

    def test_capacity_must_be_positive(self):
        with pytest.raises(ValidationFailure):
            FifoSemaphore(0)
        sem = FifoSemaphore(1)
        with pytest.raises(ValidationFailure):
            sem.set_capacity(0)


class TestGateway:
    def test_complete_requires_user_tail(self):
        gw = Gateway(QueueTransport(["x"]))
        bad = ChatTranscript(
            "m", 0.0, (ChatMessage("user", "q"), ChatMessage("assistant", "a"))
        )
        with pytest.raises(ValidationFailure):
            gw.complete(bad)

    def test_journal_records_exchanges(self, tmp_path):
        path = str(tmp_path / "journal.jsonl")
        gw = Gateway(QueueTransport(["out"]), journal=Journal(path))
        t = transcript("in")
        gw.complete(t, kind="unit-test")
        with open(path, encoding="utf-8") as fh:
            entry = json.loads(fh.readline())
        assert entry["kind"] == "unit-test"
        assert entry["fingerprint"] == fingerprint(t)
        assert entry["response"] == "out"
        assert isinstance(entry["ts"], float)

    def test_journal_optional(self):
        gw = Gateway(QueueTransport(["out"]))
        assert gw.complete(transcript("in")) == "out"


class TestGatewayFromEnv:
    def test_unknown_transport_rejected(self, monkeypatch):
        monkeypatch.setenv("STORYLOOM_TRANSPORT", "telepathy")
        with pytest.raises(ValidationFailure):
            gateway_from_env()

    def test_live_requires_api_key(self, monkeypatch):
        monkeypatch.delenv("STORYLOOM_API_KEY", raising=False)
        monkeypatch.delenv("OPENAI_API_KEY", raising=False)
        with pytest.raises(ValidationFailure):
            gateway_from_env(transport="live")

    def test_replay_with_explicit_fixture(self, tmp_path, monkeypatch):
        monkeypatch.delenv("STORYLOOM_TRANSPORT", raising=False)
        path = str(tmp_path / "fix.jsonl")
        t = transcript("env test")
        RecordTransport(QueueTransport(["recorded"]), path).complete(t)
        gw = gateway_from_env(fixtures=path)
        assert gw.complete(t) == "recorded"

    def test_env_fixture_path(self, tmp_path, monkeypatch):
        path = str(tmp_path / "fix.jsonl")
        t = transcript("env var test")
        RecordTransport(QueueTransport(["from env"]), path).complete(t)
        monkeypatch.setenv("STORYLOOM_TRANSPORT", "replay")
        monkeypatch.setenv("STORYLOOM_FIXTURES", path)
        assert gateway_from_env().complete(t) == "from env"
