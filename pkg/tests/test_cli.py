import csv
import json

import pytest

from seqrec.cli import main

from conftest import synthetic_walk_corpus, write_csv_corpus


@pytest.fixture
def corpus_csv(tmp_path):
    corpus = synthetic_walk_corpus(n_users=24, n_items=18, seed=31)
    return write_csv_corpus(tmp_path / "corpus.csv", corpus)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestBaselineCommand:
    def test_markov_writes_aggregate_with_sps_column(self, corpus_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["baseline", "--method", "markov", "--data", str(corpus_csv),
                     "--seed", "1", "--k", "10", "--n-test", "4", "--n-validation", "3",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out / "aggregate.csv")
        assert rows[0][:3] == ["method", "k", "sps"]
        assert rows[1][0] == "markov"
        assert 0.0 <= float(rows[1][2]) <= 100.0
        assert (out / "per_user.csv").exists()
        assert (out / "manifest.txt").exists()

    def test_knn_with_fixed_neighbors(self, corpus_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["baseline", "--method", "knn", "--n-neighbors", "3",
                     "--data", str(corpus_csv), "--seed", "1", "--k", "5",
                     "--n-test", "4", "--n-validation", "3", "--out", str(out)])
        assert code == 0
        assert read_csv(out / "aggregate.csv")[1][0] == "knn"

    def test_idempotent_given_same_flags(self, corpus_csv, tmp_path):
        args = ["baseline", "--method", "markov", "--data", str(corpus_csv),
                "--seed", "7", "--k", "10", "--n-test", "4", "--n-validation", "3"]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        assert (out_a / "aggregate.csv").read_bytes() == (out_b / "aggregate.csv").read_bytes()
        assert (out_a / "per_user.csv").read_bytes() == (out_b / "per_user.csv").read_bytes()


class TestOracleCommand:
    def test_row_count_matches_cutoffs(self, corpus_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["oracle", "--data", str(corpus_csv), "--cutoffs", "1,5,10,18",
                     "--n-test", "5", "--n-validation", "2", "--seed", "1",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out / "oracle_curve.csv")
        assert rows[0] == ["t", "sps", "prec", "rec_normalized"]
        assert len(rows) == 1 + 4

    def test_bad_cutoff_fails_with_message(self, corpus_csv, tmp_path, capsys):
        code = main(["oracle", "--data", str(corpus_csv), "--cutoffs", "0,5",
                     "--n-test", "3", "--n-validation", "2", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "cutoff" in capsys.readouterr().err


class TestPrepareCommand:
    def test_writes_split_and_popularity(self, corpus_csv, tmp_path):
        out = tmp_path / "prep"
        code = main(["prepare", "--data", str(corpus_csv), "--n-test", "5",
                     "--n-validation", "5", "--seed", "3", "--out", str(out)])
        assert code == 0
        manifest = (out / "split.txt").read_text().splitlines()
        roles = [line.split("\t")[0] for line in manifest if line and not line.startswith("#")]
        assert roles.count("test") == 5
        assert roles.count("validation") == 5
        pop = read_csv(out / "popularity.csv")
        assert pop[0] == ["rank", "item_id", "original_id", "count", "bin"]
        assert len(pop) == 1 + 18

    def test_split_manifest_reusable_by_baseline(self, corpus_csv, tmp_path):
        prep = tmp_path / "prep"
        main(["prepare", "--data", str(corpus_csv), "--n-test", "4",
              "--n-validation", "3", "--seed", "3", "--out", str(prep)])
        out = tmp_path / "run"
        code = main(["baseline", "--method", "markov", "--data", str(corpus_csv),
                     "--split", str(prep / "split.txt"), "--out", str(out)])
        assert code == 0


class TestTrainEvaluateCommands:
    def test_train_then_evaluate(self, corpus_csv, tmp_path):
        run = tmp_path / "run"
        code = main(["train", "--data", str(corpus_csv), "--cell", "gru",
                     "--hidden", "4", "--optimizer", "adagrad", "--lr", "0.1",
                     "--loss", "xent", "--epochs", "2", "--validation-every", "10",
                     "--n-test", "4", "--n-validation", "3", "--seed", "5",
                     "--out", str(run)])
        assert code == 0
        log_rows = read_csv(run / "training_log.csv")
        assert log_rows[0] == ["sequences", "epoch", "seconds", "train_loss", "val_sps"]
        assert len(log_rows) > 1
        assert (run / "model.npz").exists()

        out = tmp_path / "eval"
        code = main(["evaluate", "--data", str(corpus_csv), "--model", str(run / "model.npz"),
                     "--split", str(run / "split.txt"), "--k", "10", "--out", str(out)])
        assert code == 0
        rows = read_csv(out / "aggregate.csv")
        assert rows[1][0] == "rnn"

    def test_wrong_catalog_rejected(self, corpus_csv, tmp_path):
        run = tmp_path / "run"
        main(["train", "--data", str(corpus_csv), "--hidden", "3", "--epochs", "1",
              "--n-test", "3", "--n-validation", "2", "--out", str(run)])
        other = write_csv_corpus(tmp_path / "other.csv",
                                 synthetic_walk_corpus(n_users=10, n_items=9, seed=1))
        code = main(["evaluate", "--data", str(other), "--model", str(run / "model.npz"),
                     "--n-test", "2", "--n-validation", "2", "--out", str(tmp_path / "e")])
        assert code == 1

    def test_bidirectional_two_layers_contradiction(self, corpus_csv, tmp_path, capsys):
        code = main(["train", "--data", str(corpus_csv), "--bidirectional",
                     "--layers", "2", "--epochs", "1", "--n-test", "2",
                     "--n-validation", "2", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "--bidirectional" in capsys.readouterr().err

    def test_delta_without_diversity_loss_fails(self, corpus_csv, tmp_path, capsys):
        code = main(["train", "--data", str(corpus_csv), "--delta", "0.2",
                     "--epochs", "1", "--n-test", "2", "--n-validation", "2",
                     "--out", str(tmp_path / "x")])
        assert code == 1
        assert "--loss diversity" in capsys.readouterr().err


class TestSweepCommand:
    def test_sweep_writes_summary_and_logs(self, corpus_csv, tmp_path):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps([
            {"cell": "gru", "hidden": 3, "epochs": 1},
            {"cell": "gru", "hidden": 5, "epochs": 1},
        ]))
        out = tmp_path / "sweep"
        code = main(["sweep", "--data", str(corpus_csv), "--grid", str(grid),
                     "--n-test", "3", "--n-validation", "3", "--seed", "2",
                     "--validation-every", "10", "--out", str(out)])
        assert code == 0
        rows = read_csv(out / "sweep_summary.csv")
        assert rows[0] == ["index", "config_digest", "val_sps"]
        assert len(rows) == 3
        assert (out / "training_log_0.csv").exists()
        assert (out / "training_log_1.csv").exists()
        assert (out / "best_model.npz").exists()


class TestErrors:
    def test_missing_data_flag(self, capsys, monkeypatch):
        monkeypatch.delenv("SEQREC_DATA", raising=False)
        code = main(["baseline", "--method", "markov"])
        assert code == 1
        assert "--data" in capsys.readouterr().err

    def test_nonexistent_file(self, tmp_path, capsys):
        code = main(["baseline", "--method", "markov", "--data", str(tmp_path / "nope.csv")])
        assert code == 1

    def test_unknown_flag_exits_nonzero(self, corpus_csv):
        with pytest.raises(SystemExit) as exc:
            main(["baseline", "--method", "markov", "--data", str(corpus_csv),
                  "--frobnicate"])
        assert exc.value.code != 0

    def test_data_env_var_fallback(self, corpus_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("SEQREC_DATA", str(corpus_csv))
        out = tmp_path / "env_run"
        code = main(["baseline", "--method", "markov", "--n-test", "3",
                     "--n-validation", "2", "--out", str(out)])
        assert code == 0
