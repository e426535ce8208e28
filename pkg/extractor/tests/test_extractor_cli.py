"""Command-line behaviour of skillgraph-extract."""

import pytest

from skillgraph_extractor.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main


def run(graph, out, *extra):
    return main(["--graph", str(graph), "--model", "stub:24", "--out", str(out), *extra])


class TestHappyPath:
    def test_writes_file_and_reports(self, graph_file, tmp_path, capsys):
        out = tmp_path / "emb.tsv"
        assert run(graph_file, out) == EXIT_OK
        stdout = capsys.readouterr().out
        assert "wrote" in stdout and "dim=24" in stdout
        assert out.read_text().startswith("dim=24\n")

    def test_exclude_special_tokens_flag(self, graph_file, tmp_path):
        kept = tmp_path / "kept.tsv"
        dropped = tmp_path / "dropped.tsv"
        assert run(graph_file, kept) == EXIT_OK
        assert run(graph_file, dropped, "--exclude-special-tokens") == EXIT_OK
        assert kept.read_bytes() != dropped.read_bytes()


class TestFailurePaths:
    def test_missing_graph_exits_two(self, tmp_path, capsys):
        assert run(tmp_path / "missing.json", tmp_path / "o.tsv") == EXIT_USAGE
        assert "file error" in capsys.readouterr().err

    def test_malformed_graph_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("nope")
        assert run(bad, tmp_path / "o.tsv") == EXIT_DOMAIN
        assert "malformed" in capsys.readouterr().err

    def test_bad_stub_width_exits_one(self, graph_file, tmp_path, capsys):
        rc = main(
            ["--graph", str(graph_file), "--model", "stub:wide", "--out", str(tmp_path / "o.tsv")]
        )
        assert rc == EXIT_DOMAIN
        assert "stub width" in capsys.readouterr().err

    def test_unknown_model_exits_one(self, graph_file, tmp_path, monkeypatch, capsys):
        pytest.importorskip("transformers")
        monkeypatch.setenv("HF_HUB_OFFLINE", "1")
        rc = main(
            ["--graph", str(graph_file), "--model", "no-such/model", "--out", str(tmp_path / "o.tsv")]
        )
        assert rc == EXIT_DOMAIN
        assert "could not load" in capsys.readouterr().err

    def test_bad_max_length_exits_two(self, graph_file, tmp_path, capsys):
        assert run(graph_file, tmp_path / "o.tsv", "--max-length", "0") == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_unknown_flag_exits_two(self, graph_file, tmp_path):
        assert run(graph_file, tmp_path / "o.tsv", "--frobnicate") == EXIT_USAGE

    def test_missing_required_flag_exits_two(self, tmp_path):
        assert main(["--graph", "g.json", "--out", str(tmp_path / "o.tsv")]) == EXIT_USAGE
