"""Command-line front-end: fingerprint, compare, obfuscate, evaluate, dataset, inspect."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from ..core.audio_io import load_wav, save_wav
from ..core.errors import ObfuscationError, TopoprintError
from ..core.evaluation import LabeledPair, classify_batch, cumulative_distribution, group_accuracy
from ..core.fingerprint import Fingerprint, fingerprint_track, fingerprint_windows
from ..core.fpio import read_fingerprint, write_fingerprint
from ..core.matching import compare
from ..core.models import (
    DEFAULT_KAPPA,
    DEFAULT_LAMBDA,
    DEFAULT_SAMPLE_RATE,
    DEFAULT_SMOOTH_K,
    FingerprintConfig,
    ManifestRow,
    MatchConfig,
    ObfuscationSpec,
    StftConfig,
)
from ..core.obfuscate import PUBLISHED_DEGREES, degree_grid, obfuscate
from ..core.spectral import mel_spectrogram
from ..core.synth import synth_song
from .manifest import read_manifest, write_manifest
from .output import dumps_json, write_csv, write_json


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_FAILURE = 2

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

# config field -> flag, for validation diagnostics
FLAG_NAMES = {
    "omega": "--omega",
    "tau": "--tau",
    "betti_res": "--betti-res",
    "n_mels": "--nmels",
    "n_fft": "--nfft",
    "hop": "--hop",
    "lam": "--lambda",
    "smooth_k": "--smooth-k",
    "kappa": "--kappa",
    "degree": "--degree",
    "kind": "--kind",
}


def _describe_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = [str(x) for x in err.get("loc", ())]
        field = loc[-1] if loc else ""
        parts.append(f"{FLAG_NAMES.get(field, field or 'value')}: {err.get('msg', 'invalid value')}")
    return "; ".join(parts) or str(exc)


def _configure_logging(args: argparse.Namespace) -> None:
    level_name = args.log_level or os.environ.get("TOPOPRINT_LOG_LEVEL", "WARNING")
    level = getattr(logging, str(level_name).upper(), logging.WARNING)
    if args.verbose:
        level = logging.DEBUG if args.verbose > 1 else min(level, logging.INFO)
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def fingerprint_config(args: argparse.Namespace) -> FingerprintConfig:
    stft = StftConfig(n_fft=args.nfft, hop=args.hop, n_mels=args.nmels)
    return FingerprintConfig(omega=args.omega, tau=args.tau, betti_res=args.betti_res, stft=stft)


def load_or_fingerprint(path: str, cfg: FingerprintConfig) -> Fingerprint:
    """A .json path is read as a fingerprint; anything else is decoded as WAV."""
    if Path(path).suffix.lower() == ".json":
        return read_fingerprint(path)
    return fingerprint_track(load_wav(path), cfg)


def _worker_count() -> int:
    raw = os.environ.get("TOPOPRINT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring TOPOPRINT_THREADS=%r (not an integer)", raw)
    return os.cpu_count() or 1


def fingerprint_many(paths: Sequence[str], cfg: FingerprintConfig) -> Dict[str, Fingerprint]:
    unique = list(dict.fromkeys(paths))
    workers = min(_worker_count(), len(unique))
    if workers <= 1:
        return {p: load_or_fingerprint(p, cfg) for p in unique}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        fps = list(pool.map(load_or_fingerprint, unique, [cfg] * len(unique)))
    return dict(zip(unique, fps))


# ------------------------------- verbs --------------------------------


def cmd_fingerprint(args: argparse.Namespace) -> int:
    cfg = fingerprint_config(args)
    fp = fingerprint_track(load_wav(args.input), cfg)
    out = args.output or str(Path(args.input).with_suffix(".fp.json"))
    write_fingerprint(fp, out)
    print(f"{len(fp)} entries -> {out}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    fcfg = fingerprint_config(args)
    mcfg = MatchConfig(lam=args.lam, smooth_k=args.smooth_k, kappa=args.kappa)
    a = load_or_fingerprint(args.a, fcfg)
    b = load_or_fingerprint(args.b, fcfg)
    result = compare(a, b, mcfg)
    if args.dump_pairs:
        write_csv(
            args.dump_pairs,
            ("t_i", "t_j", "t_j_smoothed"),
            ((p[0], p[1], s[1]) for p, s in zip(result.pairs, result.smoothed)),
        )
    print(dumps_json(result.summary()).decode("utf-8"))
    return EXIT_OK if result.decision == "positive" else EXIT_NEGATIVE


def cmd_obfuscate(args: argparse.Namespace) -> int:
    spec = ObfuscationSpec(kind=args.kind, degree=args.degree)
    w = load_wav(args.input)
    out = args.output or str(Path(args.input).with_name(f"{Path(args.input).stem}__{args.kind}_{args.degree:g}.wav"))
    save_wav(obfuscate(w, spec, seed=args.seed), out)
    print(f"{spec.descriptor} -> {out}")
    return EXIT_OK


def _metrics_json(metrics, groups: Dict[str, float]) -> dict:
    body = metrics.model_dump(exclude={"records", "roc"})
    body["total"] = metrics.total
    body["group_accuracy"] = groups
    return body


def cmd_evaluate(args: argparse.Namespace) -> int:
    rows = read_manifest(args.manifest)
    fcfg = fingerprint_config(args)
    mcfg = MatchConfig(lam=args.lam, smooth_k=args.smooth_k, kappa=args.kappa)
    grid = [float(x) for x in args.lambda_grid.split(",")] if args.lambda_grid else None

    fps = fingerprint_many([p for r in rows for p in (r.path_a, r.path_b)], fcfg)
    pairs = [LabeledPair(fps[r.path_a], fps[r.path_b], r.label, r.obfuscation) for r in rows]
    metrics = classify_batch(pairs, kappa=args.kappa, cfg=mcfg, lambda_grid=grid, seed=args.seed)

    out = Path(args.out_dir)
    write_csv(
        out / "scores.csv",
        ("index", "path_a", "path_b", "label", "group", "error", "rho", "n_pairs", "decision"),
        (
            (rec.index, row.path_a, row.path_b, rec.label, rec.group, rec.error, rec.rho, rec.n_pairs, rec.decision)
            for rec, row in zip(metrics.records, rows)
        ),
    )
    write_csv(out / "roc.csv", ("threshold", "fpr", "tpr"), ((p.threshold, p.fpr, p.tpr) for p in metrics.roc))
    cdf = cumulative_distribution(metrics.records)
    write_csv(out / "cdf.csv", ("group", "error", "cdf"), ((g, e, c) for g, steps in cdf.items() for e, c in steps))
    write_json(out / "metrics.json", _metrics_json(metrics, group_accuracy(metrics.records)))
    print(
        f"{metrics.total} pairs: accuracy {metrics.accuracy:.4f} at kappa {metrics.kappa:.4f}, "
        f"AUC {metrics.auc:.4f}, learned kappa {metrics.learned_kappa:.4f} -> {out}"
    )
    return EXIT_OK


def cmd_dataset(args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    kinds = args.kinds.split(",") if args.kinds else list(PUBLISHED_DEGREES)
    try:
        grids = {kind: degree_grid(kind) for kind in kinds}
    except ObfuscationError as exc:
        raise TopoprintError(f"--kinds: {exc}") from exc
    if args.songs < 2:
        raise TopoprintError("--songs: at least 2 songs are needed to build negative pairs")

    rows: List[ManifestRow] = []
    names = []
    for i in range(args.songs):
        song = synth_song(args.seed + i, duration=args.duration, sample_rate=args.sample_rate)
        name = f"songs/song_{i:03d}.wav"
        save_wav(song, out / name)
        names.append(name)
        for kind, degrees in grids.items():
            for degree in degrees:
                spec = ObfuscationSpec(kind=kind, degree=degree)  # type: ignore[arg-type]
                obf_name = f"obfuscated/song_{i:03d}__{kind}_{degree:g}.wav"
                save_wav(obfuscate(song, spec, seed=args.seed + i), out / obf_name)
                rows.append(ManifestRow(path_a=name, path_b=obf_name, label="positive", obfuscation=spec.descriptor))
        logger.info("song %d/%d written", i + 1, args.songs)
    for i, name in enumerate(names):
        rows.append(ManifestRow(path_a=name, path_b=names[(i + 1) % len(names)], label="negative"))
    write_manifest(rows, out / "manifest.csv")
    print(f"{args.songs} songs, {len(rows)} pairs -> {out / 'manifest.csv'}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    cfg = fingerprint_config(args)
    w = load_wav(args.input)
    out = Path(args.out_dir)
    mel = mel_spectrogram(w, cfg.stft)
    write_csv(
        out / "mel.csv",
        ["mel_bin"] + [f"{t:.6f}" for t in mel.frame_times],
        ([m] + list(mel.values[m]) for m in range(mel.n_mels)),
    )
    windows = fingerprint_windows(w, cfg)
    write_json(out / "barcodes.json", [{"t": x.t, **x.barcode.to_dict()} for x in windows])
    write_csv(
        out / "betti.csv",
        ["t", "dim"] + [f"{s:.6f}" for s in windows[0].entry.beta0.grid],
        (
            [x.t, dim] + list(getattr(x.entry, f"beta{dim}").samples)
            for x in windows
            for dim in (0, 1)
        ),
    )
    print(f"{mel.n_mels}x{mel.n_frames} spectrogram, {len(windows)} windows -> {out}")
    return EXIT_OK


# ------------------------------- parser -------------------------------


def _add_fingerprint_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("fingerprint")
    g.add_argument("--omega", type=float, default=1.0, help="Window length in seconds")
    g.add_argument("--tau", type=float, default=0.4, help="Window overlap fraction, 0 <= tau < 1")
    g.add_argument("--betti-res", dest="betti_res", type=int, default=256, help="Betti curve samples")
    g.add_argument("--nmels", type=int, default=128, help="Number of mel bins")
    g.add_argument("--nfft", type=int, default=1024, help="STFT window size")
    g.add_argument("--hop", type=int, default=256, help="STFT hop size")


def _add_match_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("matching")
    g.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA, help="Weight of the dim-0 distance")
    g.add_argument("--kappa", type=float, default=DEFAULT_KAPPA, help="Decision threshold on E")
    g.add_argument("--smooth-k", dest="smooth_k", type=int, default=DEFAULT_SMOOTH_K, help="Neighborhood median radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topoprint", description="Topological audio fingerprinting")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="cmd")

    p = sub.add_parser("fingerprint", help="Fingerprint a WAV file")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None, help="Fingerprint JSON path")
    _add_fingerprint_flags(p)
    p.set_defaults(handler=cmd_fingerprint)

    p = sub.add_parser("compare", help="Compare two WAV files or fingerprints")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--dump-pairs", default=None, help="CSV of matched (t_i, t_j, smoothed t_j)")
    _add_fingerprint_flags(p)
    _add_match_flags(p)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("obfuscate", help="Apply one obfuscation to a WAV file")
    p.add_argument("input")
    p.add_argument("--kind", required=True, choices=sorted(PUBLISHED_DEGREES))
    p.add_argument("--degree", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_obfuscate)

    p = sub.add_parser("evaluate", help="Score a manifest of labeled pairs")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default="evaluation")
    p.add_argument("--lambda-grid", default=None, help="Comma-separated lambdas to cross-validate")
    p.add_argument("--seed", type=int, default=0)
    _add_fingerprint_flags(p)
    _add_match_flags(p)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("dataset", help="Write synthetic songs, obfuscations and a manifest")
    p.add_argument("out_dir")
    p.add_argument("--songs", type=int, default=20)
    p.add_argument("--duration", type=float, default=15.0)
    p.add_argument("--sample-rate", type=int, default=DEFAULT_SAMPLE_RATE)
    p.add_argument("--kinds", default=None, help="Comma-separated obfuscation kinds (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_dataset)

    p = sub.add_parser("inspect", help="Export spectrogram, barcodes and Betti curves as plot data")
    p.add_argument("input")
    p.add_argument("--out-dir", default="inspect")
    _add_fingerprint_flags(p)
    p.set_defaults(handler=cmd_inspect)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_FAILURE
    _configure_logging(args)

    if not getattr(args, "handler", None):
        parser.print_help()
        return EXIT_FAILURE
    try:
        return args.handler(args)
    except ValidationError as exc:
        logger.error("%s: %s", args.cmd, _describe_validation(exc))
    except (TopoprintError, OSError) as exc:
        logger.error("%s: %s", args.cmd, exc)
    return EXIT_FAILURE
