#!/usr/bin/python3
"""
Command line entry point
"""
import argparse
import contextlib
import csv
import json
import logging
import os
import sys
import typing as tp
from logging import error, info, warning
import humanfriendly
import yaml
from yaml import load, FullLoader
from hourglassdoc.common import ConfigError, HourglassError
from hourglassdoc.bench.macs import SCOPES, count_macs_graph, scale_lengths
from hourglassdoc.bench.redundancy import DEFAULT_THRESHOLD, attention_redundancy_stat, dump_attention, \
    write_redundancy_csv
from hourglassdoc.bench.timing import BLAS_THREADS, CSV_HEADER, MIN_REPEATS, run_benchmark
from hourglassdoc.bench.trainer import TASKS, evaluate, step_seed, train_loop
from hourglassdoc.features.config import DESK_PRESET, PRESETS, ModelConfig
from hourglassdoc.features.document import generate_corpus
from hourglassdoc.features.tokenizer import tokenize_and_pad
from hourglassdoc.heads.gtr import gtr_labels
from hourglassdoc.heads.pretrain import mvlm_task, sop_pairs, tia_task
from hourglassdoc.model import DocumentModel
from hourglassdoc.storage import load_checkpoint, read_corpus, save_checkpoint, write_corpus

MAC_HEADER = ['length', 'vanilla_macs', 'hourglass_macs', 'reduction', 'k']


def int_list(text: str) -> tp.List[int]:
    """
    Parse '512,1024' into [512, 1024]
    """
    try:
        values = [int(part) for part in text.split(',') if part.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{text}'") from err
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def page_size(text: str) -> tp.Tuple[int, int]:
    """
    Parse '600x800' into (600, 800)
    """
    try:
        width, height = (int(part) for part in text.lower().split('x'))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got '{text}'") from err
    return width, height


def humanfriendly_time_parser(humanfriendly_input: str) -> float:
    """
    Convert a duration like '90s', '5m' or '1h' to seconds
    """
    try:
        return humanfriendly.parse_timespan(humanfriendly_input)
    except humanfriendly.InvalidTimespan as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def read_config(file_name: tp.Optional[str], preset: str) -> ModelConfig:
    """
    Read a YAML or JSON config file, or take a named preset if no file is given
    :param file_name: name of the configuration file
    :param preset: preset name used without a file
    """
    if file_name is None:
        return PRESETS[preset]
    with open(file_name, 'r', encoding='utf-8') as conf_file:
        try:
            if file_name.endswith('.json'):
                content = json.load(conf_file)
            else:
                content = load(conf_file, Loader=FullLoader)
        except (json.JSONDecodeError, yaml.YAMLError) as err:
            raise ConfigError(f"{file_name} can't be parsed: {err}") from err
    if not isinstance(content, dict):
        raise ConfigError(f"{file_name} does not hold a mapping of parameters")
    return ModelConfig.from_dict(content)


def output(file_name: tp.Optional[str]) -> tp.ContextManager[tp.TextIO]:
    if file_name is None:
        return contextlib.nullcontext(sys.stdout)
    return open(file_name, 'w', encoding='utf-8', newline='')


def analyze_flops(args) -> int:
    cfg = read_config(args.config, args.preset)
    lengths = args.lengths or [cfg.L_t]
    with output(args.out) as stream:
        writer = csv.writer(stream)
        writer.writerow(MAC_HEADER)
        for k in args.k or [cfg.k]:
            for length in lengths:
                report = count_macs_graph(scale_lengths(cfg, length).replace(k=k), scope=args.scope)
                writer.writerow([length, report.vanilla_total, report.total, f"{report.reduction_vs_vanilla:.6f}", k])
                info(f"k={k} length {length}: {report.total / 1e9:.2f}G MACs, "
                     f"{report.reduction_vs_vanilla:.1%} below the vanilla stack")
    return 0


def bench(args) -> int:
    cfg = read_config(args.config, args.preset)
    results = run_benchmark(args.lengths or [cfg.L_t], cfg, args.repeats, args.time_budget, args.threads)
    with output(args.out) as stream:
        writer = csv.writer(stream)
        writer.writerow(CSV_HEADER)
        for result in results:
            writer.writerow(result.to_row())
    return 1 if any(result.failed for result in results) else 0


def train(args) -> int:
    corpus = read_corpus(args.corpus)
    model = load_checkpoint(args.init) if args.init else None
    cfg = model.cfg if model is not None else read_config(args.config, args.preset)
    with output(args.metric_log) as stream:
        model, history = train_loop(corpus, args.task, cfg, args.epochs, args.lr, seed=args.seed,
                                    momentum=args.momentum, model=model, metric_log=stream,
                                    eval_every=args.eval_every, target=args.target)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, model)
    if history.diverged:
        warning("Training diverged, the saved parameters are those of the last finite step.")
        return 1
    return 0


def evaluate_checkpoint(args) -> int:
    model = load_checkpoint(args.checkpoint)
    metrics = evaluate(model, read_corpus(args.corpus), args.task, args.workers)
    with output(args.out) as stream:
        stream.write(json.dumps(dict(metrics, task=args.task)) + "\n")
    return 0


def write_labels(args) -> int:
    """
    Spatial relations, sentence order pairs and mask sets per document,
    with the seeds the first training epoch uses
    """
    corpus = read_corpus(args.corpus)
    cfg = read_config(args.config, args.preset)
    os.makedirs(args.out, exist_ok=True)
    for index, doc in enumerate(corpus):
        seed = step_seed(args.seed, 0, index, len(corpus))
        prefix = os.path.join(args.out, f"doc{index:04d}")
        relations = gtr_labels([segment.box for segment in doc.segments], doc.page_w, doc.page_h)
        with open(f"{prefix}_gtr.csv", 'w', encoding='utf-8', newline='') as stream:
            csv.writer(stream).writerows(relations.tolist())
        with open(f"{prefix}_sop.csv", 'w', encoding='utf-8', newline='') as stream:
            writer = csv.writer(stream)
            writer.writerow(['i', 'j', 'label'])
            writer.writerows(sop_pairs(doc, seed))
        streams = tokenize_and_pad(doc, cfg)
        mvlm = mvlm_task(streams, args.mask_ratio, seed, cfg.vocab)
        tia = tia_task(streams, args.mask_ratio, seed + 1, mvlm)
        masks = {'seed': seed,
                 'mvlm_positions': mvlm.positions.tolist(),
                 'mvlm_targets': mvlm.targets.tolist(),
                 'masked_ids': mvlm.masked_ids.tolist(),
                 'tia_masked': [int(i) for i in tia.feature_mask.nonzero()[0]],
                 'tia_weights': tia.weights.tolist()}
        with open(f"{prefix}_masks.json", 'w', encoding='utf-8') as stream:
            json.dump(masks, stream)
    info(f"Wrote labels of {len(corpus)} documents to {args.out}")
    return 0


def attention_stats(args) -> int:
    corpus = read_corpus(args.corpus)
    model = load_checkpoint(args.checkpoint) if args.checkpoint else \
        DocumentModel(read_config(args.config, args.preset))
    records = []
    for doc in corpus:
        records.extend(model.encode(tokenize_and_pad(doc, model.cfg), record_attention=True).recorder)
    with output(args.out) as stream:
        write_redundancy_csv(attention_redundancy_stat(records, args.threshold), stream)
    if args.dump:
        with output(args.dump) as stream:
            written = dump_attention(records, args.threshold, stream)
        info(f"Dumped {written} attention weights above {args.threshold} to {args.dump}")
    return 0


def generate(args) -> int:
    page_w, page_h = args.page
    corpus = generate_corpus(args.documents, args.seed, tuple(args.segments), page_w, page_h, args.vocab)
    write_corpus(args.out, corpus)
    return 0


def write_config(args) -> int:
    with output(args.out) as stream:
        stream.write(yaml.dump(PRESETS[args.preset].to_dict(), Dumper=yaml.SafeDumper, sort_keys=False))
    return 0


def segment_range(text: str) -> tp.Tuple[int, int]:
    values = int_list(text)
    if len(values) != 2 or not 1 <= values[0] <= values[1]:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX with 1 <= MIN <= MAX, got '{text}'")
    return values[0], values[1]


def add_model_options(parser: argparse.ArgumentParser, preset: str):
    parser.add_argument('-c', '--config', help="YAML or JSON model configuration file")
    parser.add_argument('-p', '--preset', choices=sorted(PRESETS), default=preset,
                        help=f"Configuration used without --config (default {preset})")


PARSER = argparse.ArgumentParser(description='Hourglass document transformer: MAC analysis, benchmarks, '
                                             'training and evaluation on synthetic documents.')
PARSER.add_argument('-d', '--debug', help='Make process chatty.', action='store_true')
COMMANDS = PARSER.add_subparsers(dest='command', required=True)

FLOPS = COMMANDS.add_parser('analyze-flops', help="Count encoder MACs from shape-only dry runs")
add_model_options(FLOPS, 'base')
FLOPS.add_argument('--lengths', type=int_list, help="Text lengths, e.g. 512,1024,2048")
FLOPS.add_argument('--k', type=int_list, help="Merge factors to sweep, e.g. 1,2,4")
FLOPS.add_argument('--scope', choices=SCOPES, default='text', help="MACs of the text stream or of everything")
FLOPS.add_argument('-o', '--out', help="CSV file (default stdout)")
FLOPS.set_defaults(func=analyze_flops)

BENCH = COMMANDS.add_parser('bench', help="Time hourglass against vanilla forwards")
add_model_options(BENCH, 'desk')
BENCH.add_argument('--lengths', type=int_list, help="Text lengths, e.g. 512,1024")
BENCH.add_argument('--repeats', type=int, default=MIN_REPEATS, help="Timed forwards per length")
BENCH.add_argument('--time-budget', type=humanfriendly_time_parser, help="Stop the sweep after e.g. 10m")
BENCH.add_argument('--threads', type=int, default=BLAS_THREADS, help="BLAS threads while timing")
BENCH.add_argument('-o', '--out', help="CSV file (default stdout)")
BENCH.set_defaults(func=bench)

TRAIN = COMMANDS.add_parser('train', help="Train on a corpus file")
add_model_options(TRAIN, 'desk')
TRAIN.add_argument('--task', choices=TASKS, required=True)
TRAIN.add_argument('--corpus', required=True, help="JSON lines corpus")
TRAIN.add_argument('--epochs', type=int, default=10)
TRAIN.add_argument('--lr', type=float, default=0.01)
TRAIN.add_argument('--momentum', type=float, default=0.9)
TRAIN.add_argument('--seed', type=int, default=0)
TRAIN.add_argument('--eval-every', type=int, default=1)
TRAIN.add_argument('--target', type=float, help="Stop once the task metric reaches this value")
TRAIN.add_argument('--init', help="Start from this checkpoint instead of a fresh model")
TRAIN.add_argument('--checkpoint', help="Save the trained model here")
TRAIN.add_argument('--metric-log', help="JSON lines metric log (default stdout)")
TRAIN.set_defaults(func=train)

EVAL = COMMANDS.add_parser('eval', help="Evaluate a checkpoint on a corpus")
EVAL.add_argument('--checkpoint', required=True)
EVAL.add_argument('--corpus', required=True)
EVAL.add_argument('--task', choices=('labeling', 'linking'), default='labeling')
EVAL.add_argument('--workers', type=int, default=1, help="Evaluation threads")
EVAL.add_argument('-o', '--out', help="JSON file (default stdout)")
EVAL.set_defaults(func=evaluate_checkpoint)

LABELS = COMMANDS.add_parser('labels', help="Write pre-training labels of a corpus")
add_model_options(LABELS, 'desk')
LABELS.add_argument('--corpus', required=True)
LABELS.add_argument('--out', required=True, help="Output directory")
LABELS.add_argument('--seed', type=int, default=0)
LABELS.add_argument('--mask-ratio', type=float, default=0.15)
LABELS.set_defaults(func=write_labels)

ATTN = COMMANDS.add_parser('attn-stats', help="Cumulative count of concentrated attention rows per layer")
add_model_options(ATTN, 'desk')
ATTN.add_argument('--corpus', required=True)
ATTN.add_argument('--checkpoint', help="Model to inspect (default: untrained model of the configuration)")
ATTN.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD)
ATTN.add_argument('--dump', help="CSV file receiving every attention weight above the threshold")
ATTN.add_argument('-o', '--out', help="CSV file (default stdout)")
ATTN.set_defaults(func=attention_stats)

GENERATE = COMMANDS.add_parser('generate', help="Write a synthetic corpus")
GENERATE.add_argument('--out', required=True, help="JSON lines corpus file")
GENERATE.add_argument('--documents', type=int, default=64)
GENERATE.add_argument('--segments', type=segment_range, default=(4, 12), help="MIN,MAX segments per document")
GENERATE.add_argument('--seed', type=int, default=0)
GENERATE.add_argument('--page', type=page_size, default=(600, 800), help="Page size WIDTHxHEIGHT")
GENERATE.add_argument('--vocab', type=int, default=DESK_PRESET.vocab)
GENERATE.set_defaults(func=generate)

CONFIG = COMMANDS.add_parser('config', help="Write a preset configuration file")
CONFIG.add_argument('-p', '--preset', choices=sorted(PRESETS), default='desk')
CONFIG.add_argument('-o', '--out', help="YAML file (default stdout)")
CONFIG.set_defaults(func=write_config)


def main(argv: tp.Optional[tp.Sequence[str]] = None) -> int:
    args = PARSER.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.INFO)
    try:
        return args.func(args)
    except HourglassError as err:
        error(f"{args.command}: {err}")
    except OSError as err:
        if isinstance(err, FileNotFoundError):
            error(f"File {err.filename} can't be found.")
        elif isinstance(err, PermissionError):
            error(f"Not allowed to access {err.filename}.")
        else:
            error(f"Error occurred when accessing {err.filename}: {err}")
    return 1


if __name__ == '__main__':
    sys.exit(main())
