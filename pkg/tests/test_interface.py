import fcntl
import json
import time

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient
from hypothesis import given, settings, strategies as st

from karekurucu.clueforge import ProviderConfig, make_provider
from karekurucu.gridengine import GenConfig
from karekurucu.interface.cli import main as cli_main
from karekurucu.interface.errors import (
    AllProvidersFailed,
    Conflict,
    NoWordFitsError,
    SessionNotFound,
    UnknownCandidate,
    ValidationFailed,
)
from karekurucu.interface.service import ServiceConfig, create_app
from karekurucu.interface.sessions import (
    SessionStore,
    request_clues,
    select_and_generate,
)
from oracles import validate_layout

FIXTURE_CLUES = {
    "ATATÜRK": ["Cumhuriyetin kurucusu", "Selanik doğumlu lider", "İlk cumhurbaşkanı"],
    "ANKARA": ["Türkiye'nin başkenti", "İç Anadolu'daki büyük şehir", "Kızılay buranın meydanı"],
    "KALEM": ["Yazı yazma aracı", "Kutusu okul çantasında durur", "Ucu açılan araç"],
}


@pytest.fixture
def fixtures_dir(tmp_path):
    root = tmp_path / "fixtures"
    root.mkdir()
    for answer, clues in FIXTURE_CLUES.items():
        (root / f"{answer}.txt").write_text("\n".join(clues), encoding="utf-8")
    return root


@pytest.fixture
def provider(fixtures_dir):
    return make_provider(
        ProviderConfig(kind="remote", model_name="mock-model",
                       fixtures_dir=str(fixtures_dir), backoff=0.0)
    )


@pytest.fixture
def store(tmp_path):
    return SessionStore(tmp_path / "data")


def default_inputs():
    return [
        {"answer": "ATATÜRK"},
        {"answer": "ANKARA"},
        {"answer": "KALEM"},
    ]


def gen_cfg(**overrides):
    base = dict(width=9, height=9, min_words=2, target_fill_ratio=0.02,
                seed=7, time_budget=5.0)
    base.update(overrides)
    return GenConfig(**base)


class TestSessionStore:
    def test_create_and_get_roundtrip(self, store):
        session = store.create(default_inputs())
        assert session.status == "draft"
        assert session.candidates == []
        loaded = store.get(session.id)
        assert loaded.to_dict() == session.to_dict()

    def test_unknown_id(self, store):
        with pytest.raises(SessionNotFound):
            store.get("0" * 32)
        with pytest.raises(SessionNotFound):
            store.get("../escape")

    def test_survives_restart(self, store, tmp_path):
        session = store.create(default_inputs())
        reopened = SessionStore(tmp_path / "data")
        assert reopened.get(session.id).to_dict() == session.to_dict()

    def test_validation_failures(self, store):
        with pytest.raises(ValidationFailed):
            store.create([])
        with pytest.raises(ValidationFailed):
            store.create([{"answer": "x1"}])
        with pytest.raises(ValidationFailed):
            store.create([{"answer": "KEDİ"}, {"answer": "KEDİ"}])
        with pytest.raises(ValidationFailed):
            store.create([{"answer": "KEDİ", "n": 0}])

    def test_version_conflict(self, store):
        session = store.create(default_inputs())
        with pytest.raises(Conflict):
            store.update(session.id, lambda s: None,
                         expected_version=session.version + 5)

    def test_flock_conflict(self, store):
        session = store.create(default_inputs())
        lock_path = store._lock_path(session.id)
        with open(lock_path, "w") as holder:
            fcntl.flock(holder, fcntl.LOCK_EX)
            with pytest.raises(Conflict):
                store.update(session.id, lambda s: None)

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["KEDİ", "KALEM", "OKUL", "DENİZ", "ÇİÇEK"]),
                st.one_of(st.none(), st.just("kısa bir açıklama metni")),
                st.one_of(st.none(), st.sampled_from(["Tarih", "Bilim"])),
                st.integers(min_value=1, max_value=5),
            ),
            min_size=1,
            max_size=5,
            unique_by=lambda t: t[0],
        )
    )
    def test_roundtrip_fuzz_preserves_invariants(self, tmp_path_factory, raw):
        fuzz_store = SessionStore(tmp_path_factory.mktemp("fuzz"))
        inputs = [
            {"answer": answer, "text": text, "category": category, "n": n}
            for answer, text, category, n in raw
        ]
        session = fuzz_store.create(inputs)
        loaded = fuzz_store.get(session.id)
        assert loaded.to_dict() == session.to_dict()
        assert loaded.status == "draft"
        assert set(loaded.selections) <= {c["answer"] for c in loaded.candidates}
        assert all(item["n"] >= 1 for item in loaded.inputs)

    def test_failed_mutation_persists_nothing(self, store):
        session = store.create(default_inputs())

        def boom(s):
            s.status = "clues_ready"
            raise ValidationFailed("nope")

        with pytest.raises(ValidationFailed):
            store.update(session.id, boom)
        assert store.get(session.id).status == "draft"
        assert store.get(session.id).version == session.version


class TestCluesWorkflow:
    def test_nine_candidates_for_three_inputs(self, store, provider):
        session = store.create(default_inputs())
        updated = request_clues(store, session.id, provider)
        assert updated.status == "clues_ready"
        assert len(updated.candidates) == 9
        assert {c["answer"] for c in updated.candidates} == set(FIXTURE_CLUES)
        assert all(c["provider_id"] == "mock-model" for c in updated.candidates)

    def test_partial_failure_recorded(self, store, provider):
        session = store.create(default_inputs() + [{"answer": "ZÜRAFA"}])
        updated = request_clues(store, session.id, provider)
        assert len(updated.candidates) == 9
        assert len(updated.failures) == 1
        assert updated.failures[0]["answer"] == "ZÜRAFA"
        assert updated.status == "clues_ready"

    def test_second_call_rejected(self, store, provider):
        session = store.create(default_inputs())
        request_clues(store, session.id, provider)
        with pytest.raises(Conflict):
            request_clues(store, session.id, provider)

    def test_all_providers_failed(self, store, tmp_path):
        empty = tmp_path / "empty-fixtures"
        empty.mkdir()
        hopeless = make_provider(
            ProviderConfig(kind="remote", model_name="mock", max_retries=0,
                           fixtures_dir=str(empty), backoff=0.0)
        )
        session = store.create(default_inputs())
        with pytest.raises(AllProvidersFailed):
            request_clues(store, session.id, hopeless)
        assert store.get(session.id).status == "draft"


class TestGenerateWorkflow:
    def ready_session(self, store, provider):
        session = store.create(default_inputs())
        return request_clues(store, session.id, provider)

    def selections_for(self, session):
        chosen = {}
        for candidate in session.candidates:
            chosen.setdefault(candidate["answer"], candidate["id"])
        return chosen

    def test_generate_produces_valid_puzzle(self, store, provider):
        session = self.ready_session(store, provider)
        final = select_and_generate(
            store, session.id, self.selections_for(session), gen_cfg()
        )
        assert final.status == "generated"
        puzzle = final.puzzle
        assert set(FIXTURE_CLUES) >= {e["answer"] for e in puzzle["across"] + puzzle["down"]}
        assert final.generation["reason"]
        assert final.selections  # answer -> clue text
        for answer, clue in final.selections.items():
            assert clue in FIXTURE_CLUES[answer]

    def test_unknown_candidate(self, store, provider):
        session = self.ready_session(store, provider)
        with pytest.raises(UnknownCandidate):
            select_and_generate(store, session.id, {"ATATÜRK": "c999"}, gen_cfg())

    def test_candidate_answer_mismatch(self, store, provider):
        session = self.ready_session(store, provider)
        foreign = session.candidates[0]
        with pytest.raises(UnknownCandidate):
            select_and_generate(
                store, session.id, {"KALEM": foreign["id"]}, gen_cfg()
            )  # c1 belongs to ATATÜRK

    def test_no_word_fits(self, store, provider):
        session = self.ready_session(store, provider)
        with pytest.raises(NoWordFitsError):
            select_and_generate(
                store, session.id, self.selections_for(session),
                gen_cfg(width=3, height=3),
            )
        assert store.get(session.id).generation["state"] == "failed"

    def test_requires_clues_ready(self, store, provider):
        session = store.create(default_inputs())
        with pytest.raises(Conflict):
            select_and_generate(store, session.id, {"ATATÜRK": "c1"}, gen_cfg())


def service_client(tmp_path, fixtures_dir, **gen_overrides):
    config = ServiceConfig(
        data_dir=str(tmp_path / "service-data"),
        provider=ProviderConfig(kind="remote", model_name="mock-model",
                                fixtures_dir=str(fixtures_dir), backoff=0.0),
        gen=gen_cfg(**gen_overrides),
    )
    return TestClient(create_app(config))


def poll_generated(client, session_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        session = client.get(f"/sessions/{session_id}").json()
        if session["status"] == "generated":
            return session
        if session["generation"]["state"] == "failed":
            raise AssertionError(f"generation failed: {session['generation']}")
        time.sleep(0.02)
    raise AssertionError("generation did not finish in time")


class TestHttpService:
    def test_health(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        body = client.get("/health").json()
        assert body["status"] == "ok"

    def test_full_flow(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        created = client.post("/sessions", json={"inputs": default_inputs()})
        assert created.status_code == 201
        session = created.json()
        assert session["status"] == "draft"

        ready = client.post(f"/sessions/{session['id']}/clues")
        assert ready.status_code == 200
        assert len(ready.json()["candidates"]) == 9

        selections = {}
        for candidate in ready.json()["candidates"]:
            selections.setdefault(candidate["answer"], candidate["id"])
        accepted = client.post(
            f"/sessions/{session['id']}/puzzle", json={"selections": selections}
        )
        assert accepted.status_code == 202

        final = poll_generated(client, session["id"])
        puzzle = client.get(f"/sessions/{session['id']}/puzzle.json")
        assert puzzle.status_code == 200
        doc = puzzle.json()
        assert doc == final["puzzle"]
        assert doc["across"] or doc["down"]

        text = client.get(f"/sessions/{session['id']}/puzzle.txt")
        assert text.status_code == 200
        assert "Across:" in text.text

    def test_error_shape_and_codes(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        missing = client.get(f"/sessions/{'0' * 32}")
        assert missing.status_code == 404
        body = missing.json()
        assert set(body) == {"code", "message", "details"}
        assert body["code"] == "SessionNotFound"

        bad = client.post("/sessions", json={"inputs": [{"answer": "x1"}]})
        assert bad.status_code == 400
        assert bad.json()["code"] == "ValidationFailed"

    def test_clues_twice_conflicts(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        session = client.post("/sessions", json={"inputs": default_inputs()}).json()
        client.post(f"/sessions/{session['id']}/clues")
        again = client.post(f"/sessions/{session['id']}/clues")
        assert again.status_code == 409
        assert again.json()["code"] == "Conflict"

    def test_stale_version_conflicts(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        session = client.post("/sessions", json={"inputs": default_inputs()}).json()
        ready = client.post(f"/sessions/{session['id']}/clues").json()
        selections = {}
        for candidate in ready["candidates"]:
            selections.setdefault(candidate["answer"], candidate["id"])
        stale = client.post(
            f"/sessions/{session['id']}/puzzle",
            json={"selections": selections, "expected_version": session["version"]},
        )
        assert stale.status_code == 409
        fresh = client.post(
            f"/sessions/{session['id']}/puzzle",
            json={"selections": selections, "expected_version": ready["version"]},
        )
        assert fresh.status_code == 202
        poll_generated(client, session["id"])

    def test_no_word_fits_is_synchronous(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        session = client.post("/sessions", json={"inputs": default_inputs()}).json()
        ready = client.post(f"/sessions/{session['id']}/clues").json()
        selections = {}
        for candidate in ready["candidates"]:
            selections.setdefault(candidate["answer"], candidate["id"])
        response = client.post(
            f"/sessions/{session['id']}/puzzle",
            json={"selections": selections, "config": {"width": 3, "height": 3}},
        )
        assert response.status_code == 422
        assert response.json()["code"] == "NoWordFits"

    def test_puzzle_json_before_generation_404(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        session = client.post("/sessions", json={"inputs": default_inputs()}).json()
        assert client.get(f"/sessions/{session['id']}/puzzle.json").status_code == 404

    def test_eval_rouge_endpoint(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        response = client.post(
            "/eval/rouge",
            json={"pairs": [{"candidate": "kedi evde", "reference": "kedi evde"}]},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["formatted"]["rouge1"]["f1"] == "100.00"
        assert body["metrics"]["rougeL"]["f1"] == 1.0

    def test_input_limits(self, tmp_path, fixtures_dir):
        client = service_client(tmp_path, fixtures_dir)
        config_limited = ServiceConfig(
            data_dir=str(tmp_path / "limited"),
            provider=ProviderConfig(kind="remote", fixtures_dir=str(fixtures_dir)),
            max_inputs=1,
        )
        limited = TestClient(create_app(config_limited))
        response = limited.post("/sessions", json={"inputs": default_inputs()})
        assert response.status_code == 400


def write_pairs_tsv(path):
    rows = ["answer\tclue"]
    for answer, clues in FIXTURE_CLUES.items():
        rows.append(f"{answer}\t{clues[0]}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


class TestCli:
    def test_ingest_and_stats(self, tmp_path):
        src = tmp_path / "pairs.tsv"
        src.write_text(
            "answer\tclue\nkalem\tYazı aracı\nkalem\tYazı aracı\nev\tKonut\n",
            encoding="utf-8",
        )
        out = tmp_path / "clean.tsv"
        report = tmp_path / "report.json"
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["ingest", str(src), "-o", str(out), "--report", str(report)],
        )
        assert result.exit_code == 0, result.output
        assert "accepted 1 of 3" in result.output
        report_data = json.loads(report.read_text(encoding="utf-8"))
        assert report_data["rejected_by_rule"] == {"duplicate": 1, "too_short": 1}
        sidecar = tmp_path / "pairs.tsv.rejected.tsv"
        assert sidecar.exists()

        hist_out = tmp_path / "hist.csv"
        result = runner.invoke(
            cli_main, ["stats", "lengths", str(out), "-o", str(hist_out)]
        )
        assert result.exit_code == 0
        assert hist_out.read_text(encoding="utf-8").splitlines()[1] == "5,1,1,1"

    def test_missing_input_exit_code(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["ingest", str(tmp_path / "nope.tsv"), "-o", str(tmp_path / "o.tsv")],
        )
        assert result.exit_code == 1

    def test_clues_with_fixtures(self, tmp_path, fixtures_dir):
        out = tmp_path / "cands.json"
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            [
                "clues", "--answer", "ATATÜRK", "--answer", "ANKARA",
                "--provider", "remote", "--fixtures", str(fixtures_dir),
                "--model", "mock-model", "-o", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text(encoding="utf-8"))
        assert len(data) == 2
        assert len(data[0]["candidates"]) == 3

    def test_clues_invalid_answer_exit_code(self, tmp_path, fixtures_dir):
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["clues", "--answer", "x1", "--provider", "remote",
             "--fixtures", str(fixtures_dir), "-o", str(tmp_path / "c.json")],
        )
        assert result.exit_code == 1

    def test_puzzle_invalid_priority_exit_code(self, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs)
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["puzzle", str(pairs), "-o", str(tmp_path / "p.json"),
             "--priority", "bad#word"],
        )
        assert result.exit_code == 1

    def test_clues_provider_failure_exit_code(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            [
                "clues", "--answer", "ATATÜRK", "--provider", "remote",
                "--fixtures", str(empty), "--max-retries", "0",
                "-o", str(tmp_path / "cands.json"),
            ],
        )
        assert result.exit_code == 2

    def test_puzzle_command_and_validity(self, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs)
        out = tmp_path / "puzzle.json"
        text_out = tmp_path / "puzzle.txt"
        trace_out = tmp_path / "trace.ndjson"
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            [
                "puzzle", str(pairs), "-o", str(out), "--text-out", str(text_out),
                "--trace-out", str(trace_out), "--width", "9", "--height", "9",
                "--seed", "7", "--min-words", "2", "--target-fill", "0.02",
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["width"] == 9
        assert "Across:" in text_out.read_text(encoding="utf-8")
        assert trace_out.read_text(encoding="utf-8").strip()

    def test_puzzle_no_word_fits_exit_code(self, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs)
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["puzzle", str(pairs), "-o", str(tmp_path / "p.json"),
             "--width", "3", "--height", "3"],
        )
        assert result.exit_code == 3

    def test_eval_commands(self, tmp_path):
        rouge_src = tmp_path / "rouge.tsv"
        rouge_src.write_text(
            "candidate\treference\nkedi evde\tkedi evde\n", encoding="utf-8"
        )
        ratings_src = tmp_path / "ratings.tsv"
        ratings_src.write_text(
            "candidate_id\tmodel_id\taccepted\trater\n"
            "c1\tm1\ttrue\tr1\nc2\tm1\tfalse\tr2\n",
            encoding="utf-8",
        )
        runner = CliRunner()
        rouge_out = tmp_path / "rouge.csv"
        result = runner.invoke(
            cli_main, ["eval", "rouge", str(rouge_src), "-o", str(rouge_out)]
        )
        assert result.exit_code == 0, result.output
        assert "rouge1,100.00,100.00,100.00" in rouge_out.read_text(encoding="utf-8")

        ratings_out = tmp_path / "ratings.csv"
        result = runner.invoke(
            cli_main, ["eval", "ratings", str(ratings_src), "-o", str(ratings_out)]
        )
        assert result.exit_code == 0, result.output
        assert "overall,1,2,50.0%" in ratings_out.read_text(encoding="utf-8")


class TestCliHttpParity:
    def test_byte_identical_puzzle_json(self, tmp_path, fixtures_dir):
        # CLI path
        pairs = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs)
        cli_out = tmp_path / "cli-puzzle.json"
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            [
                "puzzle", str(pairs), "-o", str(cli_out), "--width", "9",
                "--height", "9", "--seed", "7", "--min-words", "2",
                "--target-fill", "0.02",
            ],
        )
        assert result.exit_code == 0, result.output

        # HTTP path with the same answers, clues, and generation config
        client = service_client(tmp_path, fixtures_dir)
        session = client.post("/sessions", json={"inputs": default_inputs()}).json()
        ready = client.post(f"/sessions/{session['id']}/clues").json()
        selections = {}
        for candidate in ready["candidates"]:
            # pick the first fixture clue, matching write_pairs_tsv
            if candidate["clue"] == FIXTURE_CLUES[candidate["answer"]][0]:
                selections.setdefault(candidate["answer"], candidate["id"])
        client.post(f"/sessions/{session['id']}/puzzle", json={"selections": selections})
        poll_generated(client, session["id"])
        http_bytes = client.get(f"/sessions/{session['id']}/puzzle.json").content
        assert cli_out.read_bytes() == http_bytes

    def test_generated_layout_passes_validator(self, store, provider):
        from karekurucu import gridengine

        session = store.create(default_inputs())
        ready = request_clues(store, session.id, provider)
        selections = {}
        for candidate in ready.candidates:
            selections.setdefault(candidate["answer"], candidate["id"])
        final = select_and_generate(store, session.id, selections, gen_cfg())
        result = gridengine.generate(list(final.selections.keys()), gen_cfg())
        assert validate_layout(result.layout) == []
