"""The `yoloscenes` command-line interface.

Commands:

- `validate`: check the recorded results against the experiment layouts,
- `rates`: success rates of one experiment,
- `figure6`: success rates of experiments 3 and 4 with their discrepancy notes,
- `simulate`: project the trials of one experiment and distance and run them through the
  encode → detect pipeline,
- `selfcheck`: compare the loss gradient, NMS, and IOU with their oracles.

Exit status is 0 on success, 1 if a check fails, and 2 for usage errors.
"""

import argparse
from collections.abc import Callable, Sequence
from dataclasses import replace
import json
from pathlib import Path
import sys
import warnings
import pandas as pd
from .config import CliConfig, load_config, OUTPUT_FORMATS
from .evaldata import (TrialRecord, SuccessRateReport, embedded_dataset, experiment_report,
                       figure6_report, figure6_dataset, validate_dataset)
from .geometry import iou
from .gridcodec import GroundTruthObject, VOC_CLASSES, encode
from .postprocess import detect
from .scenegen import EXPERIMENT_DISTANCES, KINDS, build_layout, overlap_flag, project
from .selfcheck import run_selfcheck
from .utils import EncodingConflictError

CATEGORY = {'car': VOC_CLASSES.index('car'), 'person': VOC_CLASSES.index('person')}
"""Category index of each scene object kind."""

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _emit(text: str, config: CliConfig):
    if config.output_path is None:
        sys.stdout.write(text)
    else:
        Path(config.output_path).write_text(text, encoding='utf-8')


def _to_csv(df: pd.DataFrame, **kwargs) -> str:
    return df.to_csv(index=False, lineterminator='\n', **kwargs)


def _to_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + '\n'


def cmd_validate(config: CliConfig = CliConfig(),
                 records: Sequence[TrialRecord] | None = None,
                 reports: Sequence[SuccessRateReport] | None = None) -> int:
    """Run the dataset checks and report the outcome.

    Parameters
    ----------
    config :
        Output settings.
    records :
        The records to check; the recorded results if `None`.
    reports :
        Success-rate reports to bound-check; computed from `records` if `None`.

    Returns
    -------
    :
        0 if every check passes, otherwise 1. The first failing check is named on standard
        error.
    """
    records = embedded_dataset() if records is None else records
    checks = validate_dataset(records, reports)

    if config.output_format == 'json':
        _emit(_to_json([{'name': c.name, 'passed': c.passed, 'detail': c.detail}
                        for c in checks]), config)
    else:
        _emit(''.join(f'{"PASS" if c.passed else "FAIL"} {c.name}: {c.detail}\n'
                      for c in checks), config)

    failed = [c for c in checks if not c.passed]
    if failed:
        print(f'validation failed: {failed[0].name} ({failed[0].detail})', file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _rates_frame(reports: Sequence[SuccessRateReport]) -> pd.DataFrame:
    rows = [{'experiment': r.experiment_id, **row} for r in reports
            for row in r.to_json()['rows']]
    return pd.DataFrame(rows, columns=['experiment', 'distance_ft', 'passes', 'total',
                                       'rate_pct'])


def cmd_rates(config: CliConfig, experiment_id: int,
              records: Sequence[TrialRecord] | None = None) -> int:
    """Emit the per-distance success rates of one experiment.

    Raises
    ------
    ValueError
        If `experiment_id` is not 1, 2, 3, or 4.
    """
    if experiment_id not in EXPERIMENT_DISTANCES:
        raise ValueError(f'Unknown experiment {experiment_id}; experiments are 1 to 4.')
    records = embedded_dataset() if records is None else records
    report = experiment_report(records, experiment_id)

    if config.output_format == 'json':
        _emit(_to_json(report.to_json()), config)
    else:
        _emit(_to_csv(_rates_frame([report]), float_format='%.2f'), config)
    return EXIT_OK


def cmd_figure6(config: CliConfig, records: Sequence[TrialRecord] | None = None) -> int:
    """Emit the success rates of experiments 3 and 4 and the discrepancy notes.

    In CSV mode the notes go to standard error; in JSON mode they are part of each report.
    """
    records = embedded_dataset() if records is None else records
    reports = figure6_report(records)

    if config.output_format == 'json':
        _emit(_to_json([r.to_json() for r in reports]), config)
    else:
        df = figure6_dataset(reports).to_dataframe().reset_index().dropna()
        df = df.astype({'experiment': int, 'distance_ft': int, 'passes': int, 'total': int})
        _emit(_to_csv(df[['experiment', 'distance_ft', 'passes', 'total', 'rate_pct']],
                      float_format='%.2f'), config)
        for r in reports:
            for note in r.notes:
                print(f'note: {note}', file=sys.stderr)
    return EXIT_OK


def simulate_trials(config: CliConfig, experiment_id: int, camera_distance_ft: float) \
        -> list[dict]:
    """Project the trials at one distance and run each through encode → detect.

    Parameters
    ----------
    config :
        Scene constants, object sizes, grid, and thresholds.
    experiment_id :
        The experiment.
    camera_distance_ft :
        A camera distance used by that experiment [ft].

    Returns
    -------
    :
        One dict per trial with the placements, the projected boxes, the overlap flag, the
        number of objects encoded, whether the encoding conflicted, the number of detections,
        and whether every encoded object was recovered.

    Raises
    ------
    ValueError
        If the experiment does not use that distance, or the grid has too few categories for
        the car and person categories.

    Notes
    -----
    The prediction tensor is the encoded ground truth itself, so each encoded object should
    come back with a score of 1. Objects projected entirely out of frame are not encoded, and
    the overlap flag of a trial with such an object is `None`.
    """
    distances = EXPERIMENT_DISTANCES.get(experiment_id)
    if distances is None:
        raise ValueError(f'Unknown experiment {experiment_id}; experiments are 1 to 4.')
    if camera_distance_ft not in distances:
        raise ValueError(f'Experiment {experiment_id} does not use a camera distance of '
                         f'{camera_distance_ft} ft; use one of {", ".join(map(str, distances))}.')
    if config.grid.C <= max(CATEGORY.values()):
        raise ValueError(f'The grid needs at least {max(CATEGORY.values()) + 1} categories '
                         f'to hold cars and persons, not {config.grid.C}.')

    camera_distance_ft = distances[distances.index(camera_distance_ft)]
    scene = config.scene_config(camera_distance_ft)
    rows = []
    for trial in build_layout(experiment_id, config.sizes).at_distance(camera_distance_ft):
        row = {'experiment': experiment_id, 'camera_distance_ft': camera_distance_ft}
        truth = []
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')  # out-of-frame objects are reported in the row
            boxes = {o.kind: project(o, scene) for o in trial.objects}
        for kind in KINDS:
            obj = trial.find(kind)
            row[f'{kind}_lane'] = obj.lane if obj else None
            row[f'{kind}_offset_ft'] = obj.offset_ft if obj else None
            for attr in 'xywh':
                row[f'{kind}_{attr}'] = getattr(boxes[kind], attr) if obj else None
            row[f'{kind}_in_frame'] = (boxes[kind].area > 0.0) if obj else None
            if obj and boxes[kind].area > 0.0:
                truth.append(GroundTruthObject(boxes[kind], CATEGORY[kind]))

        car, person = trial.find('car'), trial.find('person')
        both_in_frame = car and person and row['car_in_frame'] and row['person_in_frame']
        row['overlap'] = overlap_flag(car, person, scene) if both_in_frame else None

        try:
            tensor = encode(truth, config.grid)
        except EncodingConflictError:
            row.update(encoded=0, conflict=True, detected=0, recovered=False)
            rows.append(row)
            continue

        detections = detect(tensor, config.thresholds)
        recovered = all(any(d.category == t.category and iou(d.box, t.box) > 1.0 - 1e-9
                            for d in detections) for t in truth)
        row.update(encoded=len(truth), conflict=False, detected=len(detections),
                   recovered=recovered)
        rows.append(row)
    return rows


def cmd_simulate(config: CliConfig, experiment_id: int, camera_distance_ft: float) -> int:
    """Emit the simulated trials of one experiment at one camera distance."""
    rows = simulate_trials(config, experiment_id, camera_distance_ft)
    if config.output_format == 'json':
        _emit(_to_json(rows), config)
    else:
        df = pd.DataFrame(rows)
        for c in df.columns:
            if df[c].map(lambda v: isinstance(v, bool)).any():
                df[c] = df[c].astype('boolean').astype('Int64')
            elif c.endswith('_offset_ft'):
                df[c] = df[c].astype('Int64')
        _emit(_to_csv(df, float_format='%.6f'), config)
    return EXIT_OK


def cmd_selfcheck(config: CliConfig = CliConfig(), seed: int = 0, progress: bool = False,
                  runner: Callable = run_selfcheck) -> int:
    """Run the self-check suites.

    Parameters
    ----------
    config :
        Output settings.
    seed :
        Random seed for the suites.
    progress :
        If `True`, show a progress bar for each suite.
    runner :
        Called as `runner(seed=seed, progress=progress)` to run the suites.

    Returns
    -------
    :
        0 if every suite passes, otherwise 1. Failing suites are named on standard error.
    """
    results = runner(seed=seed, progress=progress)
    if config.output_format == 'json':
        _emit(_to_json([{'suite': r.name, 'passed': r.passed, 'instances': r.instances,
                         'detail': r.detail} for r in results]), config)
    else:
        _emit(''.join(f'{"PASS" if r.passed else "FAIL"} {r.name} ({r.instances} instances): '
                      f'{r.detail}\n' for r in results), config)

    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f'self-check failed: {", ".join(failed)}', file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=OUTPUT_FORMATS, help='output format')
    common.add_argument('--output', type=Path, help='output file (default: standard output)')
    common.add_argument('--config', type=Path, help='flat TOML configuration file')

    parser = argparse.ArgumentParser(
        prog='yoloscenes',
        description='Grid-cell detector core and traffic-scene evaluation harness.')
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('validate', parents=[common], help='check the recorded results')
    p = sub.add_parser('rates', parents=[common], help='success rates of one experiment')
    p.add_argument('--experiment', type=int, required=True, choices=sorted(EXPERIMENT_DISTANCES))
    sub.add_parser('figure6', parents=[common], help='success rates of experiments 3 and 4')
    p = sub.add_parser('simulate', parents=[common], help='project and detect synthetic scenes')
    p.add_argument('--experiment', type=int, required=True, choices=sorted(EXPERIMENT_DISTANCES))
    p.add_argument('--distance', type=float, required=True, help='camera distance [ft]')
    p = sub.add_parser('selfcheck', parents=[common], help='check the core against oracles')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--progress', action='store_true', help='show progress bars')

    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    """Run the command line and return the exit status."""
    try:
        args = _parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        config = load_config(args.config)
        overrides = {}
        if args.format:
            overrides['output_format'] = args.format
        if args.output:
            overrides['output_path'] = args.output
        config = replace(config, **overrides)

        match args.command:
            case 'validate':
                return cmd_validate(config)
            case 'rates':
                return cmd_rates(config, args.experiment)
            case 'figure6':
                return cmd_figure6(config)
            case 'simulate':
                return cmd_simulate(config, args.experiment, args.distance)
            case 'selfcheck':
                return cmd_selfcheck(config, args.seed, args.progress)
    except (ValueError, KeyError, SyntaxError, OSError) as e:
        print(f'yoloscenes: error: {e}', file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    raise SystemExit(main())
