import json
import random
from pathlib import Path

import pytest

from lyricmelody import read_midi, serialize_lyrics, write_midi
from lyricmelody.cli import main
from lyricmelody.synthetic import random_lyrics, random_training_melody


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Corpus of training MIDI files plus a few lyric sheets."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus"
    corpus.mkdir()
    rng = random.Random(99)
    for i in range(6):
        melody = random_training_melody(rng, pitch_range=(60, 67))
        (corpus / f"train_{i:02d}.mid").write_bytes(write_midi(melody))
    lyrics_dir = root / "lyrics"
    lyrics_dir.mkdir()
    for i in range(3):
        lyr = random_lyrics(rng, sentences=2, repeat=(i % 2 == 0))
        (lyrics_dir / f"song_{i}.txt").write_text(serialize_lyrics(lyr), "utf-8")
    return root


@pytest.fixture(scope="module")
def model_path(workspace):
    out = workspace / "model.json"
    assert main(["train", str(workspace / "corpus"), "-o", str(out)]) == 0
    return out


class TestTrain:
    def test_deterministic_model_file(self, workspace, model_path, tmp_path):
        again = tmp_path / "model2.json"
        assert main(["train", str(workspace / "corpus"), "-o", str(again)]) == 0
        assert again.read_bytes() == model_path.read_bytes()

    def test_empty_dir_exit_one(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["train", str(empty), "-o", str(tmp_path / "m.json")]) == 1
        assert str(empty) in capsys.readouterr().err

    def test_prints_counts(self, workspace, tmp_path, capsys):
        main(["train", str(workspace / "corpus"), "-o", str(tmp_path / "m.json")])
        out = capsys.readouterr().out
        assert "tokens" in out and "vocabulary" in out


class TestGenerate:
    def test_writes_midi_tokens_manifest(self, workspace, model_path, tmp_path):
        out = tmp_path / "song.mid"
        code = main([
            "generate", str(workspace / "lyrics" / "song_0.txt"),
            "-m", str(model_path), "-o", str(out), "--seed", "3",
        ])
        assert code == 0
        assert out.is_file()
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["options"]["seed"] == 3
        assert manifest["outputs"]["midi"]["sha256"]
        melody = read_midi(out.read_bytes())
        assert melody.syllable_count > 0

    def test_byte_identical_across_runs(self, workspace, model_path, tmp_path):
        args = lambda name: [
            "generate", str(workspace / "lyrics" / "song_1.txt"),
            "-m", str(model_path), "-o", str(tmp_path / name),
            "--mode", "sample", "--seed", "42",
        ]
        assert main(args("a.mid")) == 0
        assert main(args("b.mid")) == 0
        assert (tmp_path / "a.mid").read_bytes() == (tmp_path / "b.mid").read_bytes()

    def test_rerank_one_candidate_equals_sample_under_off(
        self, workspace, model_path, tmp_path
    ):
        lyrics = str(workspace / "lyrics" / "song_2.txt")
        base = ["-m", str(model_path), "--preset", "off", "--seed", "5"]
        assert main(["generate", lyrics, "-o", str(tmp_path / "r.mid"),
                     "--mode", "rerank", "--candidates", "1"] + base) == 0
        assert main(["generate", lyrics, "-o", str(tmp_path / "s.mid"),
                     "--mode", "sample"] + base) == 0
        assert (tmp_path / "r.mid").read_bytes() == (tmp_path / "s.mid").read_bytes()

    def test_off_preset_matches_plain_beam(self, workspace, model_path, tmp_path):
        # lambda = 0 must decode exactly like the reward-free reference
        from lyricmelody import ModelBundle, parse_lyrics
        from reference import plain_beam_search

        lyrics_path = workspace / "lyrics" / "song_0.txt"
        out = tmp_path / "off.mid"
        assert main(["generate", str(lyrics_path), "-m", str(model_path),
                     "-o", str(out), "--preset", "off"]) == 0
        bundle = ModelBundle.from_json(model_path.read_text())
        lyr = parse_lyrics(lyrics_path.read_text())
        want = plain_beam_search(lyr, bundle.token_model, width=4)
        assert read_midi(out.read_bytes()).tokens == want

    def test_missing_lyrics_exit_one(self, model_path, tmp_path):
        assert main(["generate", str(tmp_path / "nope.txt"),
                     "-m", str(model_path), "-o", str(tmp_path / "x.mid")]) == 1

    def test_two_stage_pipeline(self, workspace, model_path, tmp_path):
        out = tmp_path / "two.mid"
        assert main(["generate", str(workspace / "lyrics" / "song_0.txt"),
                     "-m", str(model_path), "-o", str(out),
                     "--pipeline", "two-stage"]) == 0
        assert out.is_file()


@pytest.fixture(scope="module")
def generated(workspace, model_path, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("gen")
    for lp in sorted((workspace / "lyrics").iterdir()):
        main(["generate", str(lp), "-m", str(model_path),
              "-o", str(out_dir / (lp.stem + ".mid")), "--seed", "1"])
    return out_dir


class TestEvaluate:
    def test_single_pair(self, workspace, generated, capsys):
        code = main(["evaluate", str(workspace / "lyrics" / "song_0.txt"),
                     str(generated / "song_0.mid")])
        assert code == 0
        out = capsys.readouterr().out
        assert "transition" in out and "MD" in out

    def test_self_consistency_fields_in_range(self, workspace, generated, tmp_path):
        report_path = tmp_path / "report.json"
        main(["evaluate", str(workspace / "lyrics" / "song_0.txt"),
              str(generated / "song_0.mid"), "--json", str(report_path)])
        report = json.loads(report_path.read_text())
        manifest = report.pop("manifest")
        assert manifest["command"] == "evaluate"
        for values in report.values():
            for name, value in values.items():
                if value is not None and name != "md":
                    assert 0.0 <= value <= 1.0

    def test_batch_means_equal_mean_of_files(self, workspace, generated, tmp_path):
        report_path = tmp_path / "batch.json"
        code = main(["evaluate", str(workspace / "lyrics"), str(generated),
                     "--json", str(report_path)])
        assert code == 0
        report = json.loads(report_path.read_text())
        report.pop("manifest")
        means = report.pop("mean")
        for field, value in means.items():
            per_file = [v[field] for v in report.values() if v[field] is not None]
            if per_file:
                assert value == pytest.approx(sum(per_file) / len(per_file))
            else:
                assert value is None

    def test_alignment_mismatch_exit_one(self, workspace, generated, tmp_path, capsys):
        wrong = tmp_path / "wrong.txt"
        wrong.write_text("ni3|W .\n", "utf-8")
        assert main(["evaluate", str(wrong), str(generated / "song_0.mid")]) == 1
        assert "alignment" in capsys.readouterr().err.lower()


class TestCompare:
    def test_single_mode_single_row(self, workspace, model_path, capsys):
        code = main(["compare", str(workspace / "lyrics"), "-m", str(model_path),
                     "--modes", "off"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[2].startswith("off")

    def test_deterministic_tables(self, workspace, model_path, tmp_path):
        args = lambda name: ["compare", str(workspace / "lyrics"),
                             "-m", str(model_path), "--modes", "off,soft",
                             "--seed", "7", "--json", str(tmp_path / name)]
        assert main(args("t1.json")) == 0
        assert main(args("t2.json")) == 0
        assert (tmp_path / "t1.json").read_bytes() == (tmp_path / "t2.json").read_bytes()
        table = json.loads((tmp_path / "t1.json").read_text())
        assert table["soft"]["tone_transition"] >= table["off"]["tone_transition"]

    def test_unknown_mode_exit_one(self, workspace, model_path, capsys):
        assert main(["compare", str(workspace / "lyrics"), "-m", str(model_path),
                     "--modes", "off,quantum"]) == 1
        assert "quantum" in capsys.readouterr().err


class TestConfigHandling:
    def test_env_var_override(self, workspace, model_path, tmp_path, monkeypatch):
        from lyricmelody.rewards import default_reward_config, reward_config_to_dict

        cfg = reward_config_to_dict(default_reward_config())
        cfg["lambda"]["tone"] = 0.0
        cfg_path = tmp_path / "custom.json"
        cfg_path.write_text(json.dumps(cfg), "utf-8")
        monkeypatch.setenv("LYRICMELODY_CONFIG", str(cfg_path))
        out = tmp_path / "env.mid"
        assert main(["generate", str(workspace / "lyrics" / "song_0.txt"),
                     "-m", str(model_path), "-o", str(out)]) == 0
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["inputs"]["config"]["snapshot"]["lambda"]["tone"] == 0.0

    def test_bad_config_exit_one(self, workspace, model_path, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{не json", "utf-8")
        assert main(["generate", str(workspace / "lyrics" / "song_0.txt"),
                     "-m", str(model_path), "-o", str(tmp_path / "x.mid"),
                     "--config", str(bad)]) == 1

    def test_internal_invariant_violation_exit_two(
        self, workspace, model_path, tmp_path, monkeypatch, capsys
    ):
        from lyricmelody.errors import InternalError
        import lyricmelody.cli as cli

        def boom(*args, **kwargs):
            raise InternalError("score mismatch")

        monkeypatch.setattr(cli, "_run_decode", boom)
        assert main(["generate", str(workspace / "lyrics" / "song_0.txt"),
                     "-m", str(model_path), "-o", str(tmp_path / "x.mid")]) == 2
        assert "internal error" in capsys.readouterr().err
