"""Command-line entry point.

    spectral-evasion attack {word,phoneme,impulse,noise} [options] INPUT.wav ...
    spectral-evasion train --out model.json CORPUS_DIR
    spectral-evasion detect --oracle ... --benign a.wav ... --adversarial b.wav ...
    spectral-evasion transfer --out DIR [NAME=]records.jsonl ...
    spectral-evasion metrics --out DIR records.jsonl ...
    spectral-evasion synth --out DIR [--corpus keyword|speaker]

A ``--config FILE`` of ``key=value`` lines supplies defaults for any long
option; explicit flags win. Exit codes: 0 ok, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, synth
from .attack import (DEFAULT_BUDGET, impulse_attack, phoneme_attack, threshold_attack,
                     white_noise_baseline, word_attack)
from .audio_io import format_phoneme_annotations, load_wav, parse_phoneme_annotations, save_wav
from .oracles import (SPEAKER, CentroidOracle, OracleError, RemoteConfig, RemoteOracle,
                      train_keyword_oracle, train_speaker_oracle)

log = logging.getLogger("spectral_evasion")

ORACLES = ("mock-keyword", "mock-speaker", "remote")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Config file and parser
# --------------------------------------------------------------------------

def read_config(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _common(p, out_help="output directory"):
    p.add_argument("--config", help="key=value defaults file")
    p.add_argument("--out", help=out_help)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def _oracle_opts(p):
    p.add_argument("--oracle", choices=ORACLES)
    p.add_argument("--model", help="mock oracle model file (from `train`)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--url")
    p.add_argument("--request-encoding", choices=("wav", "json"), default="wav")
    p.add_argument("--field-path", default="transcript")
    p.add_argument("--retries", type=int, default=2)
    p.add_argument("--min-interval", type=float, default=0.0)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--token")


def build_parser():
    parser = argparse.ArgumentParser(prog="spectral-evasion", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    attack = sub.add_parser("attack", help="perturb audio and query an oracle")
    kinds = attack.add_subparsers(dest="kind", required=True)
    for kind in ("word", "phoneme", "impulse", "noise"):
        p = kinds.add_parser(kind)
        _common(p)
        _oracle_opts(p)
        p.add_argument("--method", choices=("dft", "ssa"), default="dft")
        p.add_argument("--window", type=int, help="SSA window length")
        if kind == "word":
            p.add_argument("--threshold", type=float,
                           help="single fixed discard threshold instead of the search")
        if kind in ("phoneme", "impulse"):
            p.add_argument("--phn", help="annotation file (default: INPUT with .phn suffix)")
            p.add_argument("--index", type=int, help="segment index (default: every segment)")
        if kind == "phoneme":
            p.add_argument("--factor", type=float, default=0.5,
                           help="share of components to discard")
        if kind == "impulse":
            p.add_argument("--fraction", type=float, default=1.0)
        if kind == "noise":
            p.add_argument("--snr", type=float, default=20.0, help="dB; 'inf' for no noise")
        p.add_argument("inputs", nargs="*")

    train = sub.add_parser("train", help="fit a nearest-centroid mock oracle")
    _common(train, "model file to write")
    train.add_argument("--speaker", action="store_true", help="train a speaker oracle")
    train.add_argument("--augment-threshold", type=float)
    train.add_argument("corpus", nargs="?", help="directory with one sub-directory per label")

    detect = sub.add_parser("detect", help="temporal-dependency detection")
    _common(detect)
    _oracle_opts(detect)
    detect.add_argument("--benign", nargs="*", default=[])
    detect.add_argument("--adversarial", nargs="*", default=[])
    detect.add_argument("--wer-threshold", type=float, default=0.5)
    detect.add_argument("--drop-zero-wer", action="store_true",
                        help="discard zero-WER adversarial verdicts before the AUC")
    detect.add_argument("inputs", nargs="*")

    transfer = sub.add_parser("transfer", help="pairwise transfer probabilities")
    _common(transfer)
    transfer.add_argument("inputs", nargs="*", help="[NAME=]records.jsonl")

    synth = sub.add_parser("synth", help="write a synthetic demo corpus")
    _common(synth)
    synth.add_argument("--corpus", choices=("keyword", "speaker"), default="keyword")
    synth.add_argument("--per-class", type=int, default=10)

    metrics = sub.add_parser("metrics", help="MSE / cosine / WER / phoneme tables")
    _common(metrics)
    metrics.add_argument("inputs", nargs="*", help="records.jsonl")
    return parser


def _leaf_parsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                yield from _leaf_parsers(sub)
            return
    yield parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        values = read_config(known.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    for leaf in _leaf_parsers(parser):
        dests = {a.dest: a for a in leaf._actions}
        defaults = {}
        for key, raw in values.items():
            action = dests.get(key)
            if action is None or key == "inputs":
                continue
            if action.nargs == 0:
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                defaults[key] = action.type(raw)
            else:
                defaults[key] = raw
        leaf.set_defaults(**defaults)


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------

def _load_inputs(paths):
    if not paths:
        raise UsageError("no input files given")
    clips = []
    for path in paths:
        try:
            clips.append(load_wav(path))
        except (OSError, ValueError) as exc:
            raise RuntimeError(f"{path}: {exc}") from exc
    return clips


def _make_oracle(args, required=True):
    """Build the oracle handle template; never sends a request."""
    if args.oracle is None:
        if required:
            raise UsageError("an oracle is required (--oracle mock-keyword|mock-speaker|remote)")
        return None
    if args.oracle in ("mock-keyword", "mock-speaker"):
        if not args.model:
            raise UsageError(f"--oracle {args.oracle} needs --model")
        try:
            model = CentroidOracle.load(args.model)
        except (OSError, ValueError, KeyError) as exc:
            raise RuntimeError(f"cannot load model {args.model}: {exc}") from exc
        if args.oracle == "mock-speaker":
            model.kind = SPEAKER
        return model
    if not args.url:
        raise UsageError("--oracle remote needs --url")
    try:
        cfg = RemoteConfig(args.url, args.request_encoding, args.field_path, args.retries,
                           args.min_interval, args.timeout, args.token)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return RemoteOracle(cfg)


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _out_dir(args):
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def write_jsonl(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps({k: _dump(v) for k, v in rec.items()}, sort_keys=True) + "\n")


def read_jsonl(path):
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except ValueError as exc:
                raise RuntimeError(f"{path}:{lineno}: malformed record ({exc})") from exc
            if not isinstance(rec, dict):
                raise RuntimeError(f"{path}:{lineno}: record is not an object")
            records.append(rec)
    return records


def _segments_for(args, path):
    phn = args.phn or next((str(Path(path).with_suffix(s)) for s in (".phn", ".PHN")
                            if Path(path).with_suffix(s).exists()), None)
    if phn is None:
        raise UsageError(f"no annotation file for {path} (use --phn)")
    try:
        with open(phn) as fh:
            segments = parse_phoneme_annotations(fh.read())
    except OSError as exc:
        raise RuntimeError(f"cannot read {phn}: {exc}") from exc
    except ValueError as exc:
        raise RuntimeError(f"{phn}: {exc}") from exc
    if args.index is not None:
        if not 0 <= args.index < len(segments):
            raise UsageError(f"--index {args.index} out of range for {phn} ({len(segments)} segments)")
        return [(args.index, segments[args.index])]
    return list(enumerate(segments))


def _summary(records):
    ok = [r for r in records if r.get("success")]
    queries = [r["queries_used"] for r in records if r.get("queries_used") is not None]
    mses = [r["mse"] for r in ok if r.get("mse") is not None]
    return {
        "n": len(records),
        "success_rate": len(ok) / len(records) if records else 0.0,
        "median_mse": statistics.median(mses) if mses else None,
        "mean_queries": statistics.fmean(queries) if queries else None,
    }


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_attack(args):
    kind = args.kind
    needs_oracle = kind in ("word", "phoneme")
    if args.budget < 2 and kind == "word":
        raise UsageError("--budget must be at least 2")
    if kind == "noise" and args.snr != float("inf") and not np.isfinite(args.snr):
        raise UsageError("--snr must be finite or inf")
    jobs = []
    clips = _load_inputs(args.inputs)
    for path, clip in zip(args.inputs, clips):
        if kind in ("phoneme", "impulse"):
            for idx, seg in _segments_for(args, path):
                jobs.append((path, clip, idx, seg))
        else:
            jobs.append((path, clip, None, None))
    template = _make_oracle(args, required=needs_oracle)
    out = _out_dir(args)

    def handle():
        if template is None:
            return None
        return template.with_budget(args.budget)

    def run(job_and_pos):
        pos, (path, clip, idx, seg) = job_and_pos
        stem = Path(path).stem
        name = f"{stem}.{kind}" + (f".{idx}" if idx is not None else "") + ".wav"
        rec = {"input": path, "budget": args.budget if template is not None else None,
               "method": None, "queries_used": 0, "success": None, "final_threshold": None,
               "retained_components": None, "mse": None, "baseline_label": None,
               "attack_label": None, "output_wav_path": str(out / name)}
        if idx is not None:
            rec["segment_index"] = idx
            rec["segment_label"] = seg.label
        oracle = handle()
        if kind == "word":
            if args.threshold is not None:
                res = threshold_attack(clip, oracle, args.method, args.threshold, args.window)
            else:
                res = word_attack(clip, oracle, args.method, args.budget, args.window)
            rec.update(res.record())
            perturbed = res.perturbed
        elif kind == "phoneme":
            res = phoneme_attack(clip, seg, oracle, args.method, args.factor, args.window)
            rec.update(res.record())
            perturbed = res.perturbed
        else:
            if kind == "impulse":
                perturbed = impulse_attack(clip, seg, args.fraction)
                rec["fraction"] = args.fraction
            else:
                perturbed = white_noise_baseline(clip, args.snr, seed=args.seed + pos)
                rec["snr_db"] = args.snr
                rec["seed"] = args.seed + pos
            rec["mse"] = analysis.mse(clip.samples, perturbed.samples)
            if oracle is not None:
                try:
                    base = oracle.query(clip)
                    adv = oracle.query(perturbed)
                    rec.update(baseline_label=base.text, attack_label=adv.text,
                               success=base != adv)
                except OracleError as exc:
                    rec["error"] = str(exc)
                rec["queries_used"] = oracle.budget.used
        save_wav(rec["output_wav_path"], perturbed)
        return rec

    records = _pmap(run, list(enumerate(jobs)), args.workers)
    write_jsonl(out / "records.jsonl", records)
    summary = _summary(records)
    print(json.dumps(summary, sort_keys=True))
    return 1 if any("error" in r for r in records) else 0


def _corpus_from_dir(root):
    root = Path(root)
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    corpus = []
    for label_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for wav in sorted(label_dir.glob("*.wav")):
            corpus.append((load_wav(wav), label_dir.name))
    return corpus


def cmd_train(args):
    if not args.corpus:
        raise UsageError("train needs a corpus directory")
    if not args.out:
        raise UsageError("train needs --out MODEL.json")
    corpus = _corpus_from_dir(args.corpus)
    labels = {lab for _, lab in corpus}
    if len(labels) < 2:
        raise RuntimeError(f"corpus {args.corpus} has {len(labels)} labels; need at least 2")
    if args.speaker:
        model = train_speaker_oracle(corpus)
    else:
        model = train_keyword_oracle(corpus, args.augment_threshold)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    model.save(args.out)
    print(json.dumps({"model": args.out, "labels": model.labels, "clips": len(corpus)}))
    return 0


def cmd_detect(args):
    groups = [("benign", p) for p in args.benign] + [("adversarial", p) for p in args.adversarial]
    groups += [("unlabeled", p) for p in args.inputs]
    if not groups:
        raise UsageError("detect needs --benign/--adversarial or positional inputs")
    clips = _load_inputs([p for _, p in groups])
    template = _make_oracle(args)
    out = _out_dir(args)

    def run(item):
        (group, path), clip = item
        oracle = template.with_budget(2)
        v = analysis.temporal_dependency_detect(clip, oracle, args.wer_threshold)
        return group, v, {"input": path, "set": group, "wer_score": v.wer_score,
                          "adversarial": v.adversarial, "full_transcript": v.full_transcript,
                          "half_transcript": v.half_transcript}

    results = _pmap(run, list(zip(groups, clips)), args.workers)
    write_jsonl(out / "detect.jsonl", [r for _, _, r in results])
    benign = [v for g, v, _ in results if g == "benign"]
    adversarial = [v for g, v, _ in results if g == "adversarial"]
    summary = {"benign": len(benign), "adversarial": len(adversarial)}
    if benign and adversarial:
        kept = analysis.filter_zero_wer(adversarial, args.drop_zero_wer)
        summary["adversarial_used"] = len(kept)
        summary["auc"] = analysis.roc_auc([v.wer_score for v in benign],
                                          [v.wer_score for v in kept]) if kept else None
    with open(out / "detect_summary.json", "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _write_matrix(path, names, matrix):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["from\\to"] + names)
        for name, row in zip(names, matrix):
            w.writerow([name] + [repr(float(v)) for v in row])


def cmd_transfer(args):
    if len(args.inputs) < 1:
        raise UsageError("transfer needs at least one records file")
    sets = []
    for spec in args.inputs:
        name, _, path = spec.rpartition("=")
        name = name or Path(path).stem
        recs = read_jsonl(path)
        try:
            values = [float(r["mse"]) for r in recs if r.get("success")]
            sets.append(analysis.TransferSet(name, values))
        except (KeyError, TypeError, ValueError) as exc:
            raise RuntimeError(f"{path}: malformed record ({exc})") from exc
        if not values:
            raise RuntimeError(f"{path}: no successful attacks to transfer from")
    out = _out_dir(args)
    names = [s.model for s in sets]
    _write_matrix(out / "transfer.csv", names, analysis.transfer_matrix(sets, True))
    _write_matrix(out / "transfer_literal.csv", names, analysis.transfer_matrix(sets, False))
    with open(out / "hardness.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "n", "mean_mse"])
        for s in sets:
            w.writerow([s.model, len(s.mse_values), repr(s.mean_mse)])
    print(json.dumps({s.model: s.mean_mse for s in sets}, sort_keys=True))
    return 0


METRIC_COLUMNS = ["input", "mse", "cosine", "wer", "phi", "phoneme_accuracy", "layer_change"]


def _metric_row(rec):
    row = {"input": rec.get("input")}
    if "original" in rec and "perturbed" in rec:
        row["mse"] = analysis.mse(load_wav(rec["original"]).samples,
                                  load_wav(rec["perturbed"]).samples)
    elif rec.get("mse") is not None:
        row["mse"] = float(rec["mse"])
    ref = rec.get("reference", rec.get("baseline_label"))
    hyp = rec.get("hypothesis", rec.get("attack_label"))
    if ref is not None and hyp is not None:
        row["cosine"] = analysis.cosine_similarity(ref, hyp)
        if analysis.normalize(ref):
            row["wer"] = analysis.wer(ref, hyp)
    if rec.get("ref_phonemes"):
        row["phi"], row["phoneme_accuracy"] = analysis.phoneme_edit_distance(
            rec["ref_phonemes"], rec.get("hyp_phonemes", []))
    if rec.get("baseline_activation") is not None:
        row["layer_change"] = analysis.per_layer_change(rec["baseline_activation"],
                                                        rec["perturbed_activation"])
    return row


def cmd_metrics(args):
    if not args.inputs:
        raise UsageError("metrics needs at least one records file")
    rows = []
    for path in args.inputs:
        for i, rec in enumerate(read_jsonl(path)):
            try:
                rows.append(_metric_row(rec))
            except (KeyError, TypeError, ValueError, OSError) as exc:
                raise RuntimeError(f"{path}: record {i + 1}: {exc}") from exc
    out = _out_dir(args)
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRIC_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    summary = {}
    for col in METRIC_COLUMNS[1:]:
        vals = [r[col] for r in rows if r.get(col) is not None]
        if vals:
            summary[col] = statistics.fmean(vals)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_synth(args):
    if args.per_class < 1:
        raise UsageError("--per-class must be >= 1")
    out = _out_dir(args)
    if args.corpus == "keyword":
        items = [(clip, label, None) for clip, label in
                 synth.keyword_corpus(args.per_class, seed=args.seed)]
    else:
        rng = np.random.default_rng(args.seed)
        items = [(*synth.breath_speaker_clip(name, rng), name)
                 for name in (synth.BREATHY, synth.CLEAR) for _ in range(args.per_class)]
        items = [(clip, name, segs) for clip, segs, name in items]
    counts = {}
    for clip, label, segs in items:
        i = counts[label] = counts.get(label, -1) + 1
        path = out / label / f"{label}_{i:03d}.wav"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_wav(path, clip)
        if segs is not None:
            path.with_suffix(".phn").write_text(format_phoneme_annotations(segs))
    print(json.dumps({"out": str(out), "clips": {k: v + 1 for k, v in counts.items()}},
                     sort_keys=True))
    return 0


COMMANDS = {"attack": cmd_attack, "synth": cmd_synth, "train": cmd_train, "detect": cmd_detect,
            "transfer": cmd_transfer, "metrics": cmd_metrics}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"spectral-evasion: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"spectral-evasion: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError, ValueError) as exc:
        print(f"spectral-evasion: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
