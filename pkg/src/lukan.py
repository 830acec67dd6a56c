"""
Command-line entry point: synth | train | eval | predict | gradcheck | ablate | info
"""
import argparse
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence
from motion.sequence import MotionSequence, load_dataset_dir, load_motion_file, save_motion_file
from motion.synth import DEFAULT_FPS, SynthMode, synth_dataset
from motion.windows import WindowDataset, split_by_name
from network.artifact import load_model, save_model
from network.basis_registry import BasisKind
from network.config import MODEL_PRESETS
from network.model import ModelParams, complexity_report, init_model, predict
from network.transform import EncoderKind
from training.ablation import run_ablation
from training.gradcheck import DEFAULT_TOLERANCE, grad_check
from training.trainer import baseline_mpjpe, evaluate, evaluate_by_source, train
from utils.errors import (
    ArtifactError, ConfigError, DataError, EmptyDatasetError, MotionShapeError, NumericalError,
    ShapeMismatchError, BasisDomainError,
)
from utils.log import configure_logging
from utils.reporting import ReportBuilder, horizon_frame, markdown_table, write_csv
from utils.run_config import RunConfig, load_run_config, write_resolved_config

# Exit codes
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_GRADCHECK = 5
EXIT_ARTIFACT = 6

MODEL_FILE = 'model.bin'
HISTORY_FILE = 'history.csv'
EVAL_FILE = 'eval.csv'
EVAL_BY_SOURCE_FILE = 'eval_by_source.csv'
ABLATION_CSV = 'ablation.csv'
ABLATION_EMBED_CSV = 'ablation_embed.csv'
ABLATION_SOURCE_CSV = 'ablation_by_source.csv'
ABLATION_REPORT = 'ablation.md'

logger = logging.getLogger('lukan')


# -- shared plumbing --------------------------------------------------------

def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def resolve_run(args) -> RunConfig:
    """Config file (or preset) first, then command-line flags"""
    run = load_run_config(getattr(args, 'config', None), getattr(args, 'preset', None))
    seed = getattr(args, 'seed', None)
    model = {
        'seed': seed,
        'basis': getattr(args, 'basis', None),
        'temporal_encoder': getattr(args, 'encoder', None),
        'embed_dim': getattr(args, 'embed_dim', None),
        'blocks': getattr(args, 'blocks', None),
        'degree': getattr(args, 'degree', None),
        'lookback': getattr(args, 'lookback', None),
        'horizon': getattr(args, 'horizon', None),
    }
    train_overrides = {
        'seed': seed,
        'total_steps': getattr(args, 'steps', None),
        'batch_size': getattr(args, 'batch_size', None),
        'threads': getattr(args, 'threads', None),
    }
    data = {'data_dir': getattr(args, 'data', None)}
    return run.with_overrides(model=model, train=train_overrides, data=data)


def load_sequences(run: RunConfig) -> List[MotionSequence]:
    seqs = load_dataset_dir(run.data.data_dir)
    if not seqs:
        raise EmptyDatasetError(f"No motion files in {run.data.data_dir}")
    return seqs


def fit_joints(run: RunConfig, seqs: Sequence[MotionSequence]) -> RunConfig:
    """Model joint count follows the data"""
    joints = {seq.joints for seq in seqs}
    if len(joints) > 1:
        raise MotionShapeError(f"Sequences disagree on joint count: {sorted(joints)}")
    data_joints = joints.pop()
    if data_joints != run.model.joints:
        logger.info(f"Using {data_joints} joints from the data (config had {run.model.joints})")
        run = run.with_overrides(model={'joints': data_joints})
    return run


def build_splits(run: RunConfig, seqs: Sequence[MotionSequence]):
    train_seqs, val_seqs = split_by_name(seqs, run.data.val_fraction)
    cfg = run.model
    train_set = WindowDataset.from_sequences(train_seqs, cfg.lookback, cfg.horizon, run.data.stride)
    val_set = WindowDataset.from_sequences(val_seqs, cfg.lookback, cfg.horizon, run.data.stride)
    logger.info(f"{len(train_seqs)} training sequences ({len(train_set)} windows), "
                f"{len(val_seqs)} validation sequences ({len(val_set)} windows)")
    return train_set, val_set


def print_horizons(values: Dict[int, float], baseline: Dict[int, float], fps: float):
    print(markdown_table(horizon_frame(values, fps, baseline)))


# -- commands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    seqs = synth_dataset(args.joints, args.frames, args.count, args.fps, args.seed, args.mode)
    try:
        for seq in seqs:
            save_motion_file(seq, os.path.join(args.out, f"{seq.name}.json"))
    except OSError as e:
        raise DataError(f"Cannot write motion files to {args.out}: {e}") from e
    print(f"Wrote {len(seqs)} sequences ({args.joints} joints, {args.frames} frames, "
          f"mode {SynthMode.parse(args.mode).value}) to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    run = resolve_run(args)
    seqs = load_sequences(run)
    run = fit_joints(run, seqs).validate()
    train_set, val_set = build_splits(run, seqs)

    result = train(run.model, run.train, train_set, val_set)
    run = run.with_overrides(model={'input_scale': result.params.config.input_scale})

    os.makedirs(args.out, exist_ok=True)
    write_resolved_config(run, args.out)
    save_model(result.params, os.path.join(args.out, MODEL_FILE))
    write_csv(result.history_frame(), os.path.join(args.out, HISTORY_FILE))

    scored = val_set if len(val_set) else train_set
    horizons = run.train.resolved_horizons(run.model.horizon)
    values = evaluate(result.params, scored, horizons)
    baseline = baseline_mpjpe(scored, horizons)
    fps = seqs[0].fps
    write_csv(horizon_frame(values, fps, baseline), os.path.join(args.out, EVAL_FILE))

    print(f"Trained {run.train.total_steps} steps, model saved to {os.path.join(args.out, MODEL_FILE)}")
    print_horizons(values, baseline, fps)
    return EXIT_OK


def cmd_eval(args) -> int:
    run = resolve_run(args)
    seqs = load_sequences(run)
    if args.model:
        params = load_model(args.model)
        run = run.with_overrides(model=params.config.to_dict())
    else:
        run = fit_joints(run, seqs)
        params = init_model(run.model.validate())
    run.validate()

    _, val_set = build_splits(run, seqs)
    dataset = val_set
    if args.split == 'all' or len(val_set) == 0:
        if args.split != 'all':
            logger.warning("Validation split is empty, evaluating on all windows")
        dataset = WindowDataset.from_sequences(seqs, run.model.lookback, run.model.horizon,
                                               run.data.stride, feature_dim=run.model.feature_dim)
    if len(dataset) == 0:
        raise EmptyDatasetError(
            f"No windows of {run.model.lookback}+{run.model.horizon} frames in {run.data.data_dir}"
        )

    horizons = run.train.resolved_horizons(run.model.horizon)
    values = evaluate(params, dataset, horizons)
    baseline = baseline_mpjpe(dataset, horizons)
    by_source = evaluate_by_source(params, dataset, horizons)
    fps = seqs[0].fps
    if args.out:
        write_csv(horizon_frame(values, fps, baseline), os.path.join(args.out, EVAL_FILE))
        write_csv(by_source, os.path.join(args.out, EVAL_BY_SOURCE_FILE))
    print(f"Evaluated {len(dataset)} windows from {len(by_source)} sequences")
    print_horizons(values, baseline, fps)
    print()
    print(markdown_table(by_source))
    return EXIT_OK


def cmd_predict(args) -> int:
    params: ModelParams = load_model(args.model)
    cfg = params.config
    seq = load_motion_file(args.input)
    if seq.frames < cfg.lookback:
        raise MotionShapeError(f"{seq.name}: {seq.frames} frames, model needs {cfg.lookback}")
    if seq.joints != cfg.joints:
        raise ShapeMismatchError(f"{seq.name}: {seq.joints} joints, model expects {cfg.joints}")

    prediction = predict(params, seq.data[-cfg.lookback:])
    out = MotionSequence(fps=seq.fps, joints=seq.joints, data=prediction.frames,
                         name=f"{seq.name}_pred")
    save_motion_file(out, args.out)
    print(f"Predicted {cfg.horizon} frames from the last {cfg.lookback} of {seq.name}, "
          f"written to {args.out}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    run = resolve_run(args)
    report = grad_check(run.model.validate(), run.model.seed, tolerance=args.tolerance)
    print(markdown_table(report.to_frame()))
    print(f"max relative error: {report.worst:.3e} (tolerance {report.tolerance:.0e})")
    return EXIT_OK if report.passed else EXIT_GRADCHECK


def cmd_ablate(args) -> int:
    run = resolve_run(args)
    seqs = load_sequences(run)
    run = fit_joints(run, seqs).validate()
    train_set, val_set = build_splits(run, seqs)
    if len(train_set) == 0:
        raise EmptyDatasetError("Training split has no windows")
    if len(val_set) == 0:
        logger.warning("Validation split is empty, scoring on training windows")
        val_set = train_set

    result = run_ablation(run.model, run.train, train_set, val_set, embed_dims=args.embed_dims)

    os.makedirs(args.out, exist_ok=True)
    write_resolved_config(run, args.out)
    write_csv(result.table(), os.path.join(args.out, ABLATION_CSV))
    write_csv(result.source_table(), os.path.join(args.out, ABLATION_SOURCE_CSV))
    if result.embed_runs:
        write_csv(result.embed_table(), os.path.join(args.out, ABLATION_EMBED_CSV))
    settings = {
        'steps': run.train.total_steps,
        'batch_size': run.train.batch_size,
        'seed': run.train.seed,
        'embed_dim': run.model.embed_dim,
        'blocks': run.model.blocks,
        'degree': run.model.degree,
    }
    report = ReportBuilder().write_ablation(
        os.path.join(args.out, ABLATION_REPORT), result.table(), result.horizons, seqs[0].fps,
        result.baseline, result.embed_table() if result.embed_runs else None, settings,
        source_table=result.source_table(),
    )
    print(report)
    return EXIT_OK


def cmd_info(args) -> int:
    run = resolve_run(args)
    report = complexity_report(run.model.validate())
    print(f"config: {run.model.to_dict()}")
    for key, value in report.to_dict().items():
        print(f"{key:>18}: {value}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _model_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--config', help='JSON run config (e.g. a resolved_config.json)')
    parser.add_argument('--preset', choices=sorted(MODEL_PRESETS), help='base model preset')
    parser.add_argument('--seed', type=int, help='model and training seed')
    parser.add_argument('--basis', choices=[k.value for k in BasisKind])
    parser.add_argument('--encoder', choices=[k.value for k in EncoderKind])
    parser.add_argument('--embed-dim', type=int)
    parser.add_argument('--blocks', type=int)
    parser.add_argument('--degree', type=int)
    parser.add_argument('--lookback', type=int)
    parser.add_argument('--horizon', type=int)


def _train_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--data', help='directory of motion JSON files')
    parser.add_argument('--steps', type=int, help='optimizer steps')
    parser.add_argument('--batch-size', type=int)
    parser.add_argument('--threads', type=int, help='gradient worker threads')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='lukan', description='Polynomial-KAN human motion prediction')
    sub = parser.add_subparsers(dest='command', required=True)

    synth = sub.add_parser('synth', help='write synthetic motion files')
    synth.add_argument('--joints', type=int, default=4)
    synth.add_argument('--frames', type=int, default=300)
    synth.add_argument('--count', type=int, default=32)
    synth.add_argument('--fps', type=float, default=DEFAULT_FPS)
    synth.add_argument('--mode', choices=[m.value for m in SynthMode], default='smooth')
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--out', default='data')
    synth.set_defaults(handler=cmd_synth)

    train_cmd = sub.add_parser('train', help='train a model and save it')
    _model_flags(train_cmd)
    _train_flags(train_cmd)
    train_cmd.add_argument('--out', default='runs/latest')
    train_cmd.set_defaults(handler=cmd_train)

    eval_cmd = sub.add_parser('eval', help='MPJPE at the horizon grid')
    _model_flags(eval_cmd)
    _train_flags(eval_cmd)
    eval_cmd.add_argument('--model', help='model artifact; a fresh model when omitted')
    eval_cmd.add_argument('--split', choices=['val', 'all'], default='val')
    eval_cmd.add_argument('--out', help='directory for eval.csv')
    eval_cmd.set_defaults(handler=cmd_eval)

    predict_cmd = sub.add_parser('predict', help='predict the frames following a motion file')
    predict_cmd.add_argument('--model', required=True)
    predict_cmd.add_argument('--input', required=True)
    predict_cmd.add_argument('--out', required=True, help='output motion JSON path')
    predict_cmd.set_defaults(handler=cmd_predict)

    gradcheck = sub.add_parser('gradcheck', help='compare gradients with finite differences')
    _model_flags(gradcheck)
    gradcheck.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE)
    gradcheck.set_defaults(handler=cmd_gradcheck, preset='gradcheck')

    ablate = sub.add_parser('ablate', help='encoder x basis comparison')
    _model_flags(ablate)
    _train_flags(ablate)
    ablate.add_argument('--embed-dims', type=_int_list, help='extra embed_dim sweep, e.g. 16,32,64')
    ablate.add_argument('--out', default='runs/ablation')
    ablate.set_defaults(handler=cmd_ablate)

    info = sub.add_parser('info', help='parameter count and cost estimates')
    _model_flags(info)
    info.set_defaults(handler=cmd_info)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (DataError, ShapeMismatchError) as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
    except (NumericalError, BasisDomainError) as e:
        logger.error(f"Numerical error: {e}")
        return EXIT_NUMERIC
    except ArtifactError as e:
        logger.error(f"Model artifact error: {e}")
        return EXIT_ARTIFACT


if __name__ == "__main__":
    sys.exit(main())
