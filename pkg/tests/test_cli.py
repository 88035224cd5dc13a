from __future__ import annotations

import csv
import json

import pytest

import src.cli.app as app
from conftest import FAST_CFG, FAST_RATE
from src.cli.app import EXIT_FAILURE, EXIT_NEGATIVE, EXIT_OK, main
from src.cli.manifest import read_manifest
from src.core.audio_io import Waveform, load_wav, save_wav
from src.core.errors import TopoprintError
from src.core.evaluation import LabeledPair, classify_batch
from src.core.fingerprint import expected_entry_count, fingerprint_track
from src.core.fpio import read_fingerprint
from src.core.models import FingerprintConfig
from src.core.obfuscate import obfuscate, parse_obfuscation
from src.core.synth import seeded_noise, synth_song

FAST_FLAGS = ["--nfft", "256", "--hop", "64", "--nmels", "32", "--betti-res", "64"]


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("TOPOPRINT_THREADS", "1")


@pytest.fixture
def song_wav(tmp_path):
    path = tmp_path / "song.wav"
    save_wav(synth_song(11, duration=6.0, sample_rate=FAST_RATE), path)
    return path


def _reversed(path, out):
    w = load_wav(path)
    save_wav(Waveform(w.samples[::-1], w.sample_rate), out)
    return out


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_fingerprint_writes_file(tmp_path, song_wav, capsys):
    out = tmp_path / "fp" / "song.fp.json"
    assert main(["fingerprint", str(song_wav), "-o", str(out), *FAST_FLAGS]) == EXIT_OK
    fp = read_fingerprint(out)
    assert len(fp) == expected_entry_count(6.0, FingerprintConfig())
    assert fp.config.betti_res == 64
    assert f"{len(fp)} entries" in capsys.readouterr().out


def test_fingerprint_default_output_name(song_wav):
    assert main(["fingerprint", str(song_wav), *FAST_FLAGS]) == EXIT_OK
    assert song_wav.with_suffix(".fp.json").exists()


def test_fingerprint_missing_input(tmp_path):
    assert main(["fingerprint", str(tmp_path / "nope.wav")]) == EXIT_FAILURE


def test_invalid_overlap_is_reported(song_wav, caplog):
    assert main(["fingerprint", str(song_wav), "--tau", "1.0"]) == EXIT_FAILURE
    assert "--tau" in caplog.text


def test_compare_same_file(song_wav, capsys):
    code = main(["compare", str(song_wav), str(song_wav), *FAST_FLAGS])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["error"] == 0.0
    assert summary["decision"] == "positive"
    assert summary["lambda"] == 0.5


def test_compare_fingerprint_files_and_dump_pairs(tmp_path, song_wav, capsys):
    fp_path = tmp_path / "song.fp.json"
    assert main(["fingerprint", str(song_wav), "-o", str(fp_path), *FAST_FLAGS]) == EXIT_OK
    dump = tmp_path / "pairs.csv"
    assert main(["compare", str(fp_path), str(song_wav), "--dump-pairs", str(dump), *FAST_FLAGS]) == EXIT_OK
    rows = _rows(dump)
    assert rows[0] == ["t_i", "t_j", "t_j_smoothed"]
    assert len(rows) == 1 + len(read_fingerprint(fp_path))


def test_compare_time_reversed_is_negative(tmp_path, song_wav, capsys):
    rev = _reversed(song_wav, tmp_path / "rev.wav")
    assert main(["compare", str(song_wav), str(rev), *FAST_FLAGS]) == EXIT_NEGATIVE
    assert json.loads(capsys.readouterr().out)["decision"] == "negative"


@pytest.mark.slow
def test_compare_unrelated_noise_is_negative(tmp_path, capsys):
    a, b = tmp_path / "noise1.wav", tmp_path / "noise2.wav"
    save_wav(seeded_noise(10.0, seed=1), a)
    save_wav(seeded_noise(10.0, seed=2), b)
    assert main(["compare", str(a), str(b)]) == EXIT_NEGATIVE
    summary = json.loads(capsys.readouterr().out)
    assert summary["decision"] == "negative"
    assert summary["error"] >= summary["kappa"]


def test_compare_rejects_bad_lambda(song_wav):
    assert main(["compare", str(song_wav), str(song_wav), "--lambda", "1.5", *FAST_FLAGS]) == EXIT_FAILURE


def test_obfuscate_unknown_kind(song_wav):
    assert main(["obfuscate", str(song_wav), "--kind", "bitcrush", "--degree", "3"]) == EXIT_FAILURE


def test_obfuscate_pitch_zero_self_matches(tmp_path, song_wav, capsys):
    out = tmp_path / "same.wav"
    assert main(["obfuscate", str(song_wav), "--kind", "pitch_shift", "--degree", "0", "-o", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert main(["compare", str(song_wav), str(out), *FAST_FLAGS]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["error"] < 0.05


def test_obfuscate_default_name(song_wav):
    assert main(["obfuscate", str(song_wav), "--kind", "reverb", "--degree", "50"]) == EXIT_OK
    assert (song_wav.parent / "song__reverb_50.wav").exists()


def test_seed_is_a_per_verb_flag(tmp_path, song_wav):
    assert issubclass(TopoprintError, ValueError)
    assert main(["--seed", "1", "compare", str(song_wav), str(song_wav), *FAST_FLAGS]) == EXIT_FAILURE
    assert main(["compare", str(song_wav), str(song_wav), "--seed", "1", *FAST_FLAGS]) == EXIT_FAILURE

    outs = []
    for i, seed in enumerate((4, 4, 5)):
        out = tmp_path / f"noisy_{i}.wav"
        args = ["obfuscate", str(song_wav), "--kind", "white_noise", "--degree", "0.05", "--seed", str(seed), "-o", str(out)]
        assert main(args) == EXIT_OK
        outs.append(load_wav(out))
    assert outs[0].same_as(outs[1])
    assert not outs[0].same_as(outs[2])


def _manifest(tmp_path):
    lines = ["path_a,path_b,label,obfuscation"]
    for i in range(4):
        song = synth_song(20 + i, duration=5.0, sample_rate=FAST_RATE)
        save_wav(song, tmp_path / f"s{i}.wav")
        spec = parse_obfuscation("white_noise:0.01")
        save_wav(obfuscate(song, spec, seed=i), tmp_path / f"s{i}_noisy.wav")
        _reversed(tmp_path / f"s{i}.wav", tmp_path / f"s{i}_rev.wav")
        lines.append(f"s{i}.wav,s{i}_noisy.wav,positive,{spec.descriptor}")
        lines.append(f"s{i}.wav,s{i}_rev.wav,negative,")
    path = tmp_path / "manifest.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_evaluate_manifest(tmp_path):
    manifest = _manifest(tmp_path)
    out = tmp_path / "eval"
    assert main(["evaluate", str(manifest), "--out-dir", str(out), *FAST_FLAGS]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["total"] == 8
    assert metrics["learned_accuracy"] == 1.0
    assert metrics["group_accuracy"]["white_noise:0.01"] == 1.0
    scores = _rows(out / "scores.csv")
    assert len(scores) == 9
    assert scores[0][:4] == ["index", "path_a", "path_b", "label"]
    assert _rows(out / "roc.csv")[0] == ["threshold", "fpr", "tpr"]
    assert len(_rows(out / "cdf.csv")) == 9


def test_evaluate_metrics_equal_direct_batch(tmp_path):
    manifest = _manifest(tmp_path)
    out = tmp_path / "eval"
    assert main(["evaluate", str(manifest), "--out-dir", str(out), "--seed", "3", *FAST_FLAGS]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())

    rows = read_manifest(manifest)
    fps = {p: fingerprint_track(load_wav(p), FAST_CFG) for r in rows for p in (r.path_a, r.path_b)}
    direct = classify_batch([LabeledPair(fps[r.path_a], fps[r.path_b], r.label, r.obfuscation) for r in rows], seed=3)

    for key in ("tp", "fp", "tn", "fn"):
        assert metrics[key] == getattr(direct, key)
    for key in ("kappa", "accuracy", "precision", "recall", "fpr", "auc", "learned_kappa", "learned_accuracy", "lam"):
        assert metrics[key] == pytest.approx(getattr(direct, key), abs=1e-12)
    assert metrics["total"] == direct.total
    errors = [float(r[5]) for r in _rows(out / "scores.csv")[1:]]
    assert errors == pytest.approx([rec.error for rec in direct.records], abs=1e-12)


def test_evaluate_self_matches_against_unrelated_songs(tmp_path):
    lines = ["path_a,path_b,label,obfuscation"]
    for i in range(4):
        save_wav(synth_song(40 + i, duration=5.0, sample_rate=FAST_RATE), tmp_path / f"s{i}.wav")
    for i in range(4):
        lines.append(f"s{i}.wav,s{i}.wav,positive,self")
        lines.append(f"s{i}.wav,s{(i + 1) % 4}.wav,negative,")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")

    out = tmp_path / "eval"
    assert main(["evaluate", str(manifest), "--out-dir", str(out), *FAST_FLAGS]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["total"] == 8
    assert metrics["learned_accuracy"] == 1.0
    assert metrics["group_accuracy"]["self"] == 1.0


def test_evaluate_with_lambda_grid(tmp_path):
    manifest = _manifest(tmp_path)
    out = tmp_path / "eval"
    code = main(["evaluate", str(manifest), "--out-dir", str(out), "--lambda-grid", "0.3,0.5", *FAST_FLAGS])
    assert code == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert set(metrics["lambda_sweep"]) == {"0.3", "0.5"}
    assert metrics["lam"] in (0.3, 0.5)


def test_evaluate_empty_manifest(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("path_a,path_b,label\n", encoding="utf-8")
    assert main(["evaluate", str(path), "--out-dir", str(tmp_path / "eval")]) == EXIT_FAILURE


def test_evaluate_bad_label(tmp_path, song_wav):
    path = tmp_path / "bad.csv"
    path.write_text(f"path_a,path_b,label\n{song_wav.name},{song_wav.name},maybe\n", encoding="utf-8")
    assert main(["evaluate", str(path)]) == EXIT_FAILURE


def test_dataset(tmp_path):
    out = tmp_path / "data"
    args = ["dataset", str(out), "--songs", "2", "--duration", "2", "--sample-rate", str(FAST_RATE), "--kinds", "white_noise"]
    assert main(args) == EXIT_OK
    rows = read_manifest(out / "manifest.csv")
    assert len(rows) == 2 * 4 + 2
    assert sum(r.label == "negative" for r in rows) == 2
    assert (out / "songs" / "song_001.wav").exists()
    assert (out / "obfuscated" / "song_000__white_noise_0.05.wav").exists()
    assert rows[0].obfuscation == "white_noise:0.05"


def test_dataset_rejects_unknown_kind(tmp_path, caplog):
    assert main(["dataset", str(tmp_path), "--songs", "2", "--kinds", "bitcrush"]) == EXIT_FAILURE
    assert "--kinds" in caplog.text


def test_dataset_walks_the_degree_grid(tmp_path, monkeypatch):
    monkeypatch.setattr(app, "degree_grid", lambda kind: (0.2,) if kind.endswith("noise") else (50.0,))
    out = tmp_path / "data"
    args = ["dataset", str(out), "--songs", "2", "--duration", "2", "--sample-rate", str(FAST_RATE)]
    assert main([*args, "--kinds", "white_noise,reverb"]) == EXIT_OK
    rows = read_manifest(out / "manifest.csv")
    assert [r.obfuscation for r in rows if r.label == "positive"] == ["white_noise:0.2", "reverb:50"] * 2
    assert (out / "obfuscated" / "song_001__reverb_50.wav").exists()


def test_inspect_outputs(tmp_path, song_wav):
    out = tmp_path / "plots"
    assert main(["inspect", str(song_wav), "--out-dir", str(out), *FAST_FLAGS]) == EXIT_OK
    n_windows = expected_entry_count(6.0, FingerprintConfig())
    mel = _rows(out / "mel.csv")
    assert len(mel) == 1 + 32
    barcodes = json.loads((out / "barcodes.json").read_text())
    assert len(barcodes) == n_windows
    assert any(d is None for _, d in barcodes[0]["dim0"])
    betti = _rows(out / "betti.csv")
    assert len(betti) == 1 + 2 * n_windows
    assert len(betti[0]) == 2 + 64


def test_no_command_and_help(capsys):
    assert main([]) == EXIT_FAILURE
    assert main(["--help"]) == EXIT_OK
