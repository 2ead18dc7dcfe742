import json
import time

import numpy as np
import pytest

from rumor_ts.cli import main
from rumor_ts.synthetic import generate_synthetic_corpus, write_corpus_tree


@pytest.fixture(scope="module")
def corpus_root(tmp_path_factory):
    raw = generate_synthetic_corpus(n_events=3, conversations_per_event=10, seed=31)
    root = tmp_path_factory.mktemp("cli_corpus")
    write_corpus_tree(raw, root)
    return raw, root


FAST_FLAGS = ["--interval-min", "2", "--svd-rank", "6", "--lr", "1e-3",
              "--epochs", "2", "--batch", "16", "--seed", "13"]


class TestInspect:
    def test_counts_table(self, corpus_root, tmp_path, capsys):
        raw, root = corpus_root
        assert main(["inspect", "--root", str(root), "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "Total" in out
        rumors = sum(1 for c in raw.conversations if c.label == 1)
        assert f"{rumors:>8}" in out
        summary = json.loads((tmp_path / "load_summary.json").read_text())
        assert set(summary["counts"]) == set(raw.events)

    def test_single_event_filter(self, corpus_root, tmp_path, capsys):
        raw, root = corpus_root
        code = main(["inspect", "--root", str(root), "--events", raw.events[0],
                     "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert raw.events[0] in out
        assert raw.events[1] not in out

    def test_empty_filter_is_data_error(self, corpus_root, tmp_path):
        _, root = corpus_root
        assert main(["inspect", "--root", str(root), "--events", ","]) == 2

    def test_env_var_root_fallback(self, corpus_root, tmp_path, monkeypatch, capsys):
        _, root = corpus_root
        monkeypatch.setenv("RUMOR_TS_DATA", str(root))
        assert main(["inspect", "--out", str(tmp_path)]) == 0

    def test_missing_root_is_config_error(self, monkeypatch):
        monkeypatch.delenv("RUMOR_TS_DATA", raising=False)
        assert main(["inspect"]) == 1


class TestVectorize:
    def test_writes_cache_and_csv(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        out = tmp_path / "vec"
        code = main(["vectorize", "--root", str(root), "--interval-min", "2",
                     "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "seq_len=" in text
        assert list(out.glob("counts_*.npz"))
        assert list(out.glob("counts_*.csv"))

    def test_sparsity_matches_direct_count(self, corpus_root, tmp_path, capsys):
        from rumor_ts.timeseries import IntervalConfig, build_matrix
        raw, root = corpus_root
        out = tmp_path / "vec2"
        main(["vectorize", "--root", str(root), "--interval-min", "10",
              "--out", str(out)])
        line = [l for l in capsys.readouterr().out.splitlines() if "sparsity" in l][0]
        reported = float(line.split("sparsity=")[1])
        ds = build_matrix(list(raw.conversations), IntervalConfig.from_minutes(10))
        assert abs(reported - float((ds.matrix == 0).mean())) < 5e-5

    def test_rerun_is_noop(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        out = tmp_path / "vec3"
        main(["vectorize", "--root", str(root), "--interval-min", "5",
              "--out", str(out)])
        cache = list(out.glob("counts_*.npz"))[0]
        stamp = cache.stat().st_mtime_ns
        time.sleep(0.01)
        main(["vectorize", "--root", str(root), "--interval-min", "5",
              "--out", str(out)])
        assert "up to date" in capsys.readouterr().out
        assert cache.stat().st_mtime_ns == stamp

    def test_wider_interval_never_longer(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        out = tmp_path / "vec4"
        main(["vectorize", "--root", str(root), "--all-intervals", "--out", str(out)])
        lines = [l for l in capsys.readouterr().out.splitlines() if "seq_len=" in l]
        lengths = [int(l.split("seq_len=")[1].split()[0]) for l in lines]
        assert lengths == sorted(lengths, reverse=True)  # T=2 first, T=60 last


class TestEvaluate:
    def test_writes_reports_and_echoes_means(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        out = tmp_path / "run"
        code = main(["evaluate", "--root", str(root), "--out", str(out)] + FAST_FLAGS)
        assert code == 0
        text = capsys.readouterr().out
        assert "mean micro-F1" in text
        report = json.loads((out / "report.json").read_text())
        assert report["settings"]["learning_rate"] == 1e-3
        assert (out / "report.csv").exists()
        cfg = json.loads((out / "run_config.json").read_text())
        assert cfg["seed"] == 13

    def test_byte_identical_reruns(self, corpus_root, tmp_path):
        _, root = corpus_root
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert main(["evaluate", "--root", str(root),
                         "--out", str(out)] + FAST_FLAGS) == 0
            outs.append((out / "report.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_invalid_interval_usage_error(self, corpus_root):
        _, root = corpus_root
        assert main(["evaluate", "--root", str(root), "--interval-min", "7"]) == 1

    def test_invalid_lr_usage_error(self, corpus_root):
        _, root = corpus_root
        assert main(["evaluate", "--root", str(root), "--lr", "-3"]) == 1

    def test_empty_root_data_error(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["evaluate", "--root", str(empty)] + FAST_FLAGS) == 2

    def test_divergence_training_error(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        code = main(["evaluate", "--root", str(root), "--out", str(tmp_path / "d"),
                     "--interval-min", "2", "--svd-rank", "6",
                     "--lr", "1e308", "--epochs", "3", "--seed", "13"])
        assert code == 3
        assert "diverged" in capsys.readouterr().err


class TestConfigFile:
    def test_precedence_flags_over_file_over_defaults(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        cfg_file = tmp_path / "run.toml"
        cfg_file.write_text(
            f'root = "{root}"\nepochs = 7\nlr = 1e-3\ninterval_min = 2\n'
            'svd_rank = 6\nseed = 13\n', encoding="utf-8")
        out = tmp_path / "cfgrun"
        code = main(["evaluate", "--config", str(cfg_file), "--epochs", "2",
                     "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["settings"]["epochs"] == 2        # flag wins
        assert report["settings"]["learning_rate"] == 1e-3  # file wins
        assert report["settings"]["batch_size"] == 32   # default

    def test_unknown_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "bad.toml"
        cfg_file.write_text("nonsense = 1\n", encoding="utf-8")
        assert main(["evaluate", "--config", str(cfg_file)]) == 1

    def test_malformed_file_rejected(self, tmp_path):
        cfg_file = tmp_path / "broken.toml"
        cfg_file.write_text("epochs = = 2\n", encoding="utf-8")
        assert main(["evaluate", "--config", str(cfg_file)]) == 1


class TestSweep:
    def test_single_axis_grid(self, corpus_root, tmp_path, capsys):
        _, root = corpus_root
        out = tmp_path / "sweep"
        code = main(["sweep", "--root", str(root), "--vary", "impl",
                     "--out", str(out)] + FAST_FLAGS)
        assert code == 0
        data = json.loads((out / "sweep.json").read_text())
        assert len(data["cells"]) == 3
        assert {c["impl"] for c in data["cells"]} == {"i1", "i2", "i3"}
        table = capsys.readouterr().out
        assert "i1" in table and "i3" in table

    def test_cell_count_is_axis_product(self, corpus_root, tmp_path):
        _, root = corpus_root
        out = tmp_path / "sweep2"
        code = main(["sweep", "--root", str(root), "--vary", "lr", "--vary", "impl",
                     "--out", str(out), "--interval-min", "2", "--svd-rank", "6",
                     "--epochs", "1", "--batch", "16", "--seed", "13"])
        assert code == 0
        data = json.loads((out / "sweep.json").read_text())
        assert len(data["cells"]) == 9

    def test_single_cell_matches_evaluate(self, corpus_root, tmp_path):
        _, root = corpus_root
        out_eval = tmp_path / "eval"
        main(["evaluate", "--root", str(root), "--impl", "i2",
              "--out", str(out_eval)] + FAST_FLAGS)
        report = json.loads((out_eval / "report.json").read_text())

        out_sweep = tmp_path / "sweep3"
        main(["sweep", "--root", str(root), "--vary", "impl",
              "--out", str(out_sweep)] + FAST_FLAGS)
        cells = json.loads((out_sweep / "sweep.json").read_text())["cells"]
        cell = next(c for c in cells if c["impl"] == "i2")
        assert cell["micro_f1"] == report["means"]["micro_f1"]

    def test_no_axes_rejected(self, corpus_root):
        _, root = corpus_root
        assert main(["sweep", "--root", str(root)]) == 1

    def test_failed_cell_marked_and_sweep_continues(self, tmp_path, capsys):
        # single-event corpus: every cell fails (cross-validation impossible)
        raw = generate_synthetic_corpus(n_events=1, conversations_per_event=6, seed=8)
        root = tmp_path / "one_event"
        write_corpus_tree(raw, root)
        out = tmp_path / "sweep4"
        code = main(["sweep", "--root", str(root), "--vary", "impl",
                     "--out", str(out)] + FAST_FLAGS)
        assert code == 0
        cells = json.loads((out / "sweep.json").read_text())["cells"]
        assert all("error" in c for c in cells)
        assert "FAILED" in capsys.readouterr().out


class TestSynth:
    def test_round_trip_through_inspect(self, tmp_path, capsys):
        out = tmp_path / "synthetic"
        code = main(["synth", "--n-events", "2", "--per-event", "6",
                     "--seed", "3", "--out", str(out)])
        assert code == 0
        assert main(["inspect", "--root", str(out),
                     "--out", str(tmp_path / "insp")]) == 0
        table = capsys.readouterr().out
        assert "event501" in table

    def test_deterministic_per_seed(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            main(["synth", "--n-events", "1", "--per-event", "4",
                  "--seed", "5", "--out", str(out)])
        files_a = sorted(p.relative_to(a) for p in a.rglob("*.json"))
        files_b = sorted(p.relative_to(b) for p in b.rglob("*.json"))
        assert files_a == files_b
        for rel in files_a:
            assert (a / rel).read_text() == (b / rel).read_text()


class TestReproduce:
    def test_prints_recipe_without_running(self, capsys):
        assert main(["reproduce"]) == 0
        out = capsys.readouterr().out
        assert "rumor-ts sweep" in out
        assert "--epochs 300" in out
        assert "--vary t --vary lr --vary impl" in out


class TestUsageErrors:
    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 1

    def test_unknown_flag(self):
        assert main(["inspect", "--frobnicate"]) == 1

    def test_error_goes_to_stderr(self, capsys):
        main(["evaluate", "--interval-min", "7"])
        assert "error:" in capsys.readouterr().err
