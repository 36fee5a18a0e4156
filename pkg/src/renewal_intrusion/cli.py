"""Command-line interface.

Exit codes: 0 success, 1 data or runtime error, 2 usage error.
"""

import argparse
import json
import sys

import numpy as np

from . import dataio
from .estimation import default_p_grid, fit_from_history, tune_p_epsilon
from .evalkit import ScorerConfig, entry_labels, evaluate_dataset, score_dataset
from .exceptions import IntrusionError, ParameterError
from .intervals import Family, IntervalModel
from .model import MarkModel
from .synth import GenSpec, gen_dataset


DEFAULT_MIN_SHAPE = 0.55


def _open_probability(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in the open interval (0, 1), got {text}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _family(text):
    try:
        return Family.parse(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _p_list(text):
    return [_open_probability(part) for part in text.split(",") if part.strip()]


def _add_scorer_flags(p, require_p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--params", help="parameter file written by 'fit'")
    src.add_argument("--em", action="store_true", help="fit parameters per entry by EM")
    p.add_argument("--p-epsilon", type=_open_probability, required=require_p,
                   help="prior probability that an event is an intrusion")
    p.add_argument("--family", type=_family, default=Family.GAMMA,
                   help="interval family for --em (default: gamma)")
    p.add_argument("--use-marks", action="store_true", help="score marks together with intervals")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--intervals-only", action="store_true", help="ignore marks")
    mode.add_argument("--marks-only", action="store_true", help="marks baseline")
    p.add_argument("--n-iter-max", type=_positive_int, default=10)
    p.add_argument("--k-max-fraction", type=float, default=0.5)
    p.add_argument("--min-shape", type=float, default=DEFAULT_MIN_SHAPE,
                   help="lower bound on EM-fitted gamma shapes, must exceed 0.5 "
                        f"(default {DEFAULT_MIN_SHAPE}); short entries often fit heavier "
                        "shapes than the model admits")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="renewal-intrusion",
        description="Intrusion detection in renewal-process event sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic labeled dataset")
    g.add_argument("--family", type=_family, default=Family.GAMMA)
    g.add_argument("--shape", type=float, default=None)
    g.add_argument("--rate", type=float, default=1.0)
    g.add_argument("--n-events", type=_positive_int, default=20)
    g.add_argument("--n-entries", type=_positive_int, default=1000)
    g.add_argument("--injection-rate", type=_open_probability, default=0.1)
    g.add_argument("--positive-fraction", type=float, default=0.5)
    g.add_argument("--mark-mu", type=float, default=None, help="process mark log-mean")
    g.add_argument("--mark-sigma", type=float, default=None, help="process mark log-sd")
    g.add_argument("--intrusion-mark-mu", type=float, default=None)
    g.add_argument("--intrusion-mark-sigma", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output path ('-' for stdout)")

    f = sub.add_parser("fit", help="fit process parameters from intrusion-free history")
    f.add_argument("--in", dest="in_path", required=True)
    f.add_argument("--family", type=_family, default=Family.GAMMA)
    f.add_argument("--use-marks", action="store_true")
    f.add_argument("--out", required=True)

    s = sub.add_parser("score", help="score every entry of a dataset")
    s.add_argument("--in", dest="in_path", required=True)
    _add_scorer_flags(s, require_p=True)
    s.add_argument("--out", required=True)

    e = sub.add_parser("evaluate", help="evaluate detection on a labeled dataset")
    e.add_argument("--in", dest="in_path", required=True)
    _add_scorer_flags(e, require_p=False)
    e.add_argument("--tune-split", type=_open_probability, default=None,
                   help="fraction of entries used to tune p-epsilon")
    e.add_argument("--p-grid", type=_p_list, default=None,
                   help="comma-separated candidate priors for tuning")
    e.add_argument("--split-seed", type=int, default=0)
    e.add_argument("--roc-out", default=None, help="ROC table (CSV)")
    e.add_argument("--out", default="-", help="report path (default stdout)")
    return parser


def _mode(args):
    if args.marks_only:
        return "marks"
    if args.intervals_only:
        return "intervals"
    return "combined" if args.use_marks else "intervals"


def _scorer(args, parser, p_epsilon):
    mode = _mode(args)
    interval_model = mark_model = None
    if args.params:
        interval_model, mark_model = dataio.read_params(args.params)
        if mode != "intervals" and mark_model is None:
            parser.error("the parameter file has no mark model; refit with --use-marks")
    try:
        return ScorerConfig(
            p_epsilon=p_epsilon,
            mode=mode,
            em=args.em,
            family=args.family,
            interval_model=interval_model,
            mark_model=mark_model,
            n_iter_max=args.n_iter_max,
            k_max_fraction=args.k_max_fraction,
            min_shape=args.min_shape,
        )
    except ParameterError as exc:
        parser.error(str(exc))


def cmd_generate(args, parser):
    shape = args.shape
    if shape is None:
        shape = 1.0
    try:
        model = IntervalModel(args.family, shape, args.rate)
        marks = None
        mark_flags = (args.mark_mu, args.mark_sigma, args.intrusion_mark_mu, args.intrusion_mark_sigma)
        if any(v is not None for v in mark_flags):
            if any(v is None for v in mark_flags):
                parser.error("mark generation needs all four mark flags")
            marks = (MarkModel(args.mark_mu, args.mark_sigma),
                     MarkModel(args.intrusion_mark_mu, args.intrusion_mark_sigma))
        spec = GenSpec(model, args.injection_rate, args.n_events, args.positive_fraction,
                       marks, args.seed)
    except ParameterError as exc:
        parser.error(str(exc))
    if args.n_entries < 2:
        parser.error("--n-entries must be at least 2")
    data = gen_dataset(spec, args.n_entries)
    dataio.write_dataset(args.out, data)
    n_pos = sum(seq.is_positive for seq in data)
    print(f"generated {len(data)} entries: {n_pos} positive, {len(data) - n_pos} negative",
          file=sys.stdout if args.out != "-" else sys.stderr)
    return 0


def cmd_fit(args, parser):
    data = dataio.read_dataset(args.in_path)
    model, marks = fit_from_history(args.family, data, fit_marks=args.use_marks)
    dataio.write_params(args.out, model, marks)
    return 0


def cmd_score(args, parser):
    scorer = _scorer(args, parser, args.p_epsilon)
    data = dataio.read_dataset(args.in_path)
    results = score_dataset([seq.without_labels() for seq in data], scorer)
    dataio.write_scores(args.out, data, results)
    return 0


def _split(n, fraction, seed):
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fraction * n))
    return sorted(order[:n_train].tolist()), sorted(order[n_train:].tolist())


def cmd_evaluate(args, parser):
    if args.tune_split is None and args.p_epsilon is None:
        parser.error("either --p-epsilon or --tune-split is required")
    data = dataio.read_dataset(args.in_path)
    entry_labels(data)
    template = _scorer(args, parser, args.p_epsilon or 0.5)
    test = data
    if args.tune_split is not None:
        train_idx, test_idx = _split(len(data), args.tune_split, args.split_seed)
        train = [data[i] for i in train_idx]
        test = [data[i] for i in test_idx]
        grid = args.p_grid or ([args.p_epsilon] if args.p_epsilon else default_p_grid())
        best = tune_p_epsilon(train, grid, scorer=template)
        template = template.with_p(best)
    report = evaluate_dataset(test, template)
    payload = report.to_dict()
    if args.tune_split is not None:
        payload["tune_split"] = args.tune_split
    with dataio._open(args.out, "w") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")
    if args.roc_out:
        dataio.write_roc_csv(args.roc_out, report)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "score": cmd_score,
    "evaluate": cmd_evaluate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except (IntrusionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
