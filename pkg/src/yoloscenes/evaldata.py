"""The recorded traffic-scene detection results, final-result aggregation, and success rates."""

from dataclasses import dataclass, field
from collections import Counter
from collections.abc import Sequence
from pathlib import Path
from typing import NamedTuple
import numpy as np
import pandas as pd
import xarray as xr
from .scenegen import (LANES, MATRIX_OFFSETS, PHOTOS_PER_TRIAL, EXPERIMENT_DISTANCES,
                       EXPERIMENT_NAMES, SceneConfig, ObjectSizes, build_layout, make_object,
                       overlap_flag)
from .utils import present_and_in

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

SUCCESS_MARKS = ('√', '✓')
FAILURE_MARK = '×'
NOT_MEASURED_MARK = '—'

PROSE_CLAIMS = {(3, 40): 81.48, (3, 50): 77.78, (3, 60): 44.4, (4, 40): 100.0, (4, 50): 33.33}
"""Success rates [%] quoted in the discussion of the results, keyed by (experiment, distance)."""

PROSE_TOLERANCE_PCT = 0.05
"""Largest difference [percentage points] between a table-derived and a quoted rate that is
treated as rounding."""

UNMEASURED_PLACEMENTS = {1: ((10.0, None, ('Left', 0.0)), (10.0, None, ('Right', 0.0)))}
"""Placement keys of the recorded positions that were not measured, by experiment."""

CSV_COLUMNS = ['experiment', 'camera_distance_ft', 'car_lane', 'car_offset_ft', 'person_lane',
               'person_offset_ft', 'photo_index', 'detected_person', 'detected_car', 'success',
               'pre_aggregated']


@dataclass(frozen=True)
class PhotoOutcome:
    """Detection outcome of one photo, or the published final result of a position pair.

    Attributes
    ----------
    success :
        True if every target in the photo was detected.
    detected_person :
        Whether the person was detected; `None` if there is no person or it was not recorded.
    detected_car :
        Whether the car was detected; `None` if there is no car or it was not recorded.

    Raises
    ------
    ValueError
        If `success` is not the conjunction of the recorded detections.
    """

    success: bool
    detected_person: bool | None = None
    detected_car: bool | None = None

    def __post_init__(self):
        known = [d for d in (self.detected_person, self.detected_car) if d is not None]
        if known and self.success != all(known):
            raise ValueError('A photo is a success only if every target in it is detected.')


@dataclass(frozen=True)
class Placement:
    """Where an object stood: its lane and its offset [ft] from the baseline."""

    lane: str
    offset_ft: float

    def __post_init__(self):
        present_and_in(vars(self), ['lane'], LANES)
        present_and_in(vars(self), ['offset_ft'], MATRIX_OFFSETS)


@dataclass(frozen=True)
class TrialRecord:
    """The recorded result of one trial.

    Attributes
    ----------
    experiment_id :
        1, 2, 3, or 4.
    camera_distance_ft :
        Camera distance [ft].
    car :
        Placement of the car, or `None` if there was no car.
    person :
        Placement of the person, or `None` if there was no person.
    photos :
        Per-photo outcomes, or, for pre-aggregated records, the single published final result.
    measured :
        False for positions that were not measured. These have no photos.
    pre_aggregated :
        True if only the final result was published.

    Raises
    ------
    ValueError
        If an unmeasured record has photos or a pre-aggregated record does not have exactly one
        outcome.
    """

    experiment_id: int
    camera_distance_ft: float
    car: Placement | None
    person: Placement | None
    photos: tuple[PhotoOutcome, ...] = ()
    measured: bool = True
    pre_aggregated: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'photos', tuple(self.photos))
        if not self.measured and self.photos:
            raise ValueError('An unmeasured trial cannot have photos.')
        if self.pre_aggregated and len(self.photos) != 1:
            raise ValueError('A pre-aggregated trial holds exactly one outcome.')

    @property
    def photos_taken(self) -> int:
        """Number of photos taken for this trial."""
        if not self.measured:
            return 0
        return PHOTOS_PER_TRIAL if self.pre_aggregated else len(self.photos)

    def final_result(self) -> bool | None:
        """The final result: the majority or published value, or `None` if not measured."""
        if not self.measured:
            return None
        if self.pre_aggregated:
            return self.photos[0].success
        return majority_final_result(self.photos)

    def placement_key(self) -> tuple:
        """(camera distance, car placement, person placement), with `None` for absent objects."""
        def key(p):
            return None if p is None else (p.lane, float(p.offset_ft))
        return (float(self.camera_distance_ft), key(self.car), key(self.person))


class RateRow(NamedTuple):
    """Success rate at one camera distance."""

    distance_ft: float
    passes: int
    total: int
    rate_pct: float


@dataclass(frozen=True)
class SuccessRateReport:
    """Per-distance success rates of one experiment.

    Attributes
    ----------
    experiment_id :
        The experiment.
    rows :
        One row per camera distance, in ascending distance order.
    aggregation :
        How trial outcomes were obtained (majority of photos or the published final result).
    notes :
        Discrepancies between the rates and the rates quoted in the discussion of the results.
    """

    experiment_id: int
    rows: tuple[RateRow, ...]
    aggregation: str = ''
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        """The report as `{"experiment", "rows": [{"distance_ft", ...}], "notes"}`."""
        return {'experiment': self.experiment_id,
                'rows': [{'distance_ft': int(r.distance_ft), 'passes': int(r.passes),
                          'total': int(r.total), 'rate_pct': round(float(r.rate_pct), 2)}
                         for r in self.rows],
                'notes': list(self.notes)}


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one dataset check."""

    name: str
    passed: bool
    detail: str = ''


def majority_final_result(photos: Sequence[PhotoOutcome]) -> bool:
    """The final result of a position pair from its three photos.

    Parameters
    ----------
    photos :
        The outcomes of the three photos.

    Returns
    -------
    :
        True if at least two of the photos are a success.

    Raises
    ------
    ValueError
        If there are not exactly three photos.
    """
    if len(photos) != PHOTOS_PER_TRIAL:
        raise ValueError(f'The final result needs exactly {PHOTOS_PER_TRIAL} photos, '
                         f'not {len(photos)}.')
    return sum(bool(p.success) for p in photos) >= 2


def _mark(m: str) -> bool:
    if m in SUCCESS_MARKS:
        return True
    if m == FAILURE_MARK:
        return False
    raise ValueError(f'Unknown result mark "{m}".')


class TrafficSceneData:
    """The detection results of the four traffic-scene experiments.

    Experiments 1 and 2 hold three per-photo outcomes for each measured position. Experiments 3
    and 4 hold only the published final result of each position pair.
    """

    def __init__(self):
        self.file = Path(__file__).parent/Path('resources')/Path('traffic_scene_results.toml')
        with open(self.file, 'rb') as f:
            try:
                tables = tomllib.load(f)
            except tomllib.TOMLDecodeError as e:
                raise SyntaxError(f'Error while parsing file "{self.file.name}"') from e

        records = []
        for t in tables['table']:
            for row in t['rows']:
                car = (Placement(row['car_lane'], row['car_offset'])
                       if 'car_lane' in row else None)
                person = (Placement(row['person_lane'], row['person_offset'])
                          if 'person_lane' in row else None)
                for d, marks in zip(t['distances'], row['marks'], strict=True):
                    records.append(self._record(t['experiment'], d, car, person, marks))

        # stable sort keeps the table row order within each slice
        self.records = sorted(records, key=lambda r: (r.experiment_id, r.camera_distance_ft))

    @staticmethod
    def _record(experiment_id, d, car, person, marks) -> TrialRecord:
        if marks == NOT_MEASURED_MARK:
            return TrialRecord(experiment_id, d, car, person, measured=False)
        if len(marks) == 1:
            return TrialRecord(experiment_id, d, car, person, (PhotoOutcome(_mark(marks)),),
                               pre_aggregated=True)
        photos = [PhotoOutcome(_mark(m),
                               detected_person=_mark(m) if person else None,
                               detected_car=_mark(m) if car else None) for m in marks]
        return TrialRecord(experiment_id, d, car, person, photos)

    def experiments(self) -> list[int]:
        """Experiment ids in the dataset."""
        return sorted({r.experiment_id for r in self.records})

    def as_dataframe(self) -> pd.DataFrame:
        """The records in the record CSV layout (see `records_as_dataframe()`)."""
        return records_as_dataframe(self.records)


def embedded_dataset() -> list[TrialRecord]:
    """All recorded trials.

    Returns
    -------
    :
        18 records for experiment 1 (two of them not measured), 18 for experiment 2, 81 for
        experiment 3, and 54 for experiment 4, ordered by experiment then camera distance.
    """
    return list(TrafficSceneData().records)


def records_as_dataframe(records: Sequence[TrialRecord]) -> pd.DataFrame:
    """One row per photo, or per trial for pre-aggregated records.

    Unmeasured records give no rows. Absent objects and unrecorded detections are missing
    values; booleans are 0/1.
    """
    rows = []
    for r in records:
        if not r.measured:
            continue
        for i, p in enumerate(r.photos):
            rows.append({'experiment': r.experiment_id,
                         'camera_distance_ft': r.camera_distance_ft,
                         'car_lane': r.car.lane if r.car else None,
                         'car_offset_ft': r.car.offset_ft if r.car else None,
                         'person_lane': r.person.lane if r.person else None,
                         'person_offset_ft': r.person.offset_ft if r.person else None,
                         'photo_index': None if r.pre_aggregated else i,
                         'detected_person': p.detected_person,
                         'detected_car': p.detected_car,
                         'success': p.success,
                         'pre_aggregated': r.pre_aggregated})

    df = pd.DataFrame(rows, columns=CSV_COLUMNS)
    for c in ['experiment', 'camera_distance_ft', 'car_offset_ft', 'person_offset_ft',
              'photo_index']:
        df[c] = df[c].astype('Int64')
    for c in ['detected_person', 'detected_car', 'success', 'pre_aggregated']:
        df[c] = df[c].astype('boolean').astype('Int64')
    return df


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    """The records as CSV text with a header row."""
    return records_as_dataframe(records).to_csv(index=False, na_rep='', lineterminator='\n')


def success_rate(records: Sequence[TrialRecord], experiment_id: int,
                 camera_distance_ft: float) -> RateRow:
    """Success rate of one experiment at one camera distance.

    Parameters
    ----------
    records :
        The trial records.
    experiment_id :
        The experiment.
    camera_distance_ft :
        The camera distance [ft].

    Returns
    -------
    :
        The number of trials whose final result is a success, the number of measured trials,
        and their ratio as a percentage.

    Raises
    ------
    ValueError
        If there are no measured trials for that experiment and distance.
    """
    results = [r.final_result() for r in records
               if r.experiment_id == experiment_id and r.camera_distance_ft == camera_distance_ft
               and r.measured]
    if not results:
        raise ValueError(f'No measured trials for experiment {experiment_id} at '
                         f'{camera_distance_ft} ft.')
    passes, total = sum(results), len(results)
    return RateRow(camera_distance_ft, passes, total, 100.0 * passes / total)


def _aggregation(records: Sequence[TrialRecord]) -> str:
    if all(r.pre_aggregated for r in records):
        return 'published final result per position pair'
    if not any(r.pre_aggregated for r in records):
        return f'majority of {PHOTOS_PER_TRIAL} photos per position pair'
    return 'mixed'


def experiment_report(records: Sequence[TrialRecord], experiment_id: int) -> SuccessRateReport:
    """Success rates of one experiment at each of its measured camera distances.

    Raises
    ------
    ValueError
        If the experiment has no measured trials.
    """
    measured = [r for r in records if r.experiment_id == experiment_id and r.measured]
    if not measured:
        raise ValueError(f'No measured trials for experiment {experiment_id}.')
    distances = sorted({r.camera_distance_ft for r in measured})
    rows = tuple(success_rate(measured, experiment_id, d) for d in distances)
    return SuccessRateReport(experiment_id, rows, _aggregation(measured))


def _prose_notes(report: SuccessRateReport) -> tuple[str, ...]:
    notes = []
    for row in report.rows:
        claim = PROSE_CLAIMS.get((report.experiment_id, row.distance_ft))
        if claim is not None and abs(row.rate_pct - claim) > PROSE_TOLERANCE_PCT:
            notes.append(f'Experiment {report.experiment_id} at {row.distance_ft:g} ft: the '
                         f'result tables give {row.passes}/{row.total} = {row.rate_pct:.2f}% '
                         f'but the discussion of the results quotes {claim:.2f}%.')
    return tuple(notes)


def figure6_report(records: Sequence[TrialRecord]) \
        -> tuple[SuccessRateReport, SuccessRateReport]:
    """Success rates of experiments 3 and 4 with their discrepancy notes.

    Parameters
    ----------
    records :
        The trial records.

    Returns
    -------
    :
        Reports for experiments 3 and 4. Each report's notes list every distance where the
        table-derived rate differs from the quoted rate by more than `PROSE_TOLERANCE_PCT`.
        Neither source is adjusted towards the other.
    """
    out = []
    for e in (3, 4):
        r = experiment_report(records, e)
        out.append(SuccessRateReport(r.experiment_id, r.rows, r.aggregation, _prose_notes(r)))
    return tuple(out)


def figure6_dataset(reports: Sequence[SuccessRateReport]) -> xr.Dataset:
    """Success rates as a labelled dataset.

    Returns
    -------
    :
        A dataset with `passes`, `total`, and `rate_pct` variables over the `experiment` and
        `distance_ft` dimensions. Distances an experiment did not use are NaN.
    """
    experiments = [r.experiment_id for r in reports]
    distances = sorted({row.distance_ft for r in reports for row in r.rows})
    shape = (len(experiments), len(distances))
    data = {v: np.full(shape, np.nan) for v in ('passes', 'total', 'rate_pct')}
    for i, r in enumerate(reports):
        for row in r.rows:
            j = distances.index(row.distance_ft)
            data['passes'][i, j], data['total'][i, j] = row.passes, row.total
            data['rate_pct'][i, j] = row.rate_pct

    ds = xr.Dataset({v: (['experiment', 'distance_ft'], a) for v, a in data.items()},
                    coords={'experiment': experiments, 'distance_ft': distances})
    ds['rate_pct'].attrs['units'] = '%'
    ds['distance_ft'].attrs['units'] = 'ft'
    ds.attrs['names'] = ', '.join(f'{e}: {EXPERIMENT_NAMES[e]}' for e in experiments)
    return ds


def _scene_object(kind, placement, sizes):
    return make_object(kind, placement.lane, placement.offset_ft, sizes)


def same_lane_overlap_pairs(records: Sequence[TrialRecord], sizes: ObjectSizes = ObjectSizes(),
                            scene_kwargs: dict | None = None) -> list[TrialRecord]:
    """Experiment 3 trials with the person and car side by side on the baseline and overlapping.

    Parameters
    ----------
    records :
        The trial records.
    sizes :
        Object sizes used for the projection.
    scene_kwargs :
        Extra [SceneConfig][yoloscenes.scenegen.SceneConfig] arguments.

    Returns
    -------
    :
        The measured experiment 3 trials where both objects are in the same lane at offset 0
        and their projected boxes overlap.
    """
    scene_kwargs = scene_kwargs or {}
    out = []
    for r in records:
        if (r.experiment_id != 3 or not r.measured or r.car is None or r.person is None
                or r.car.lane != r.person.lane or r.car.offset_ft != 0
                or r.person.offset_ft != 0):
            continue
        scene = SceneConfig(r.camera_distance_ft, **scene_kwargs)
        car = _scene_object('car', r.car, sizes)
        person = _scene_object('person', r.person, sizes)
        if overlap_flag(car, person, scene):
            out.append(r)
    return out


def _layout_keys(experiment_id: int) -> Counter:
    keys = Counter()
    for t in build_layout(experiment_id).trials:
        car, person = t.find('car'), t.find('person')
        keys[(float(t.camera_distance_ft),
              None if car is None else (car.lane, float(car.offset_ft)),
              None if person is None else (person.lane, float(person.offset_ft)))] += 1
    return keys


def _record_keys(experiment_id: int) -> Counter:
    return _layout_keys(experiment_id) + Counter(UNMEASURED_PLACEMENTS.get(experiment_id, ()))


def validate_dataset(records: Sequence[TrialRecord],
                     reports: Sequence[SuccessRateReport] | None = None) -> list[CheckResult]:
    """Check the dataset against the experiment layouts.

    Parameters
    ----------
    records :
        The trial records.
    reports :
        Success-rate reports to bound-check. If `None`, they are computed from `records` for
        every experiment present.

    Returns
    -------
    :
        The check results, in the order: photo cardinality, record cardinality, trial
        cardinality, slice cardinality, placement consistency, outcome shape, rate bounds,
        overlap failure.

    Notes
    -----
    The record cardinality and placement checks cover measured and unmeasured records
    together, so a missing unmeasured position is found as well as a missing trial.
    """
    expected_photos = sum(PHOTOS_PER_TRIAL * len(build_layout(e).trials)
                          for e in EXPERIMENT_DISTANCES)
    photos = sum(r.photos_taken for r in records)
    checks = [CheckResult('photo_cardinality', photos == expected_photos,
                          f'photos={photos} (expected {expected_photos})')]

    record_detail = []
    records_ok = True
    for e in EXPERIMENT_DISTANCES:
        n = sum(r.experiment_id == e for r in records)
        expected = sum(_record_keys(e).values())
        records_ok &= n == expected
        record_detail.append(f'{e}:{n}/{expected}')
    unmeasured = Counter((r.experiment_id, r.placement_key()) for r in records if not r.measured)
    expected_unmeasured = Counter((e, k) for e, keys in UNMEASURED_PLACEMENTS.items()
                                  for k in keys)
    records_ok &= unmeasured == expected_unmeasured
    record_detail.append(f'unmeasured {sum(unmeasured.values())}/'
                         f'{sum(expected_unmeasured.values())}')
    checks.append(CheckResult('record_cardinality', records_ok,
                              'records ' + ' '.join(record_detail)))

    measured = [r for r in records if r.measured]
    trial_detail, slice_problems, placement_problems = [], [], []
    trials_ok = True
    for e in EXPERIMENT_DISTANCES:
        layout = build_layout(e)
        n = sum(r.experiment_id == e for r in measured)
        trials_ok &= n == len(layout.trials)
        trial_detail.append(f'{e}:{n}/{len(layout.trials)}')
        for d in EXPERIMENT_DISTANCES[e]:
            n_d = sum(r.experiment_id == e and r.camera_distance_ft == d for r in measured)
            if n_d != len(layout.at_distance(d)):
                slice_problems.append(f'experiment {e} at {d} ft has {n_d} trials, expected '
                                      f'{len(layout.at_distance(d))}')
        found = Counter(r.placement_key() for r in records if r.experiment_id == e)
        if found != _record_keys(e):
            placement_problems.append(f'experiment {e}')

    checks.append(CheckResult('trial_cardinality', trials_ok, 'trials ' + ' '.join(trial_detail)))
    checks.append(CheckResult('slice_cardinality', not slice_problems,
                              '; '.join(slice_problems) or 'all slices complete'))
    checks.append(CheckResult('placement_consistency', not placement_problems,
                              ('placements differ from the layout in '
                               + ', '.join(placement_problems)) if placement_problems
                              else 'placements match the layouts'))

    shape_problems = []
    for r in measured:
        if r.experiment_id in (1, 2) and (r.pre_aggregated or len(r.photos) != PHOTOS_PER_TRIAL):
            shape_problems.append(f'experiment {r.experiment_id} at {r.camera_distance_ft} ft '
                                  f'needs {PHOTOS_PER_TRIAL} photos')
        elif r.experiment_id in (3, 4) and not r.pre_aggregated:
            shape_problems.append(f'experiment {r.experiment_id} at {r.camera_distance_ft} ft '
                                  'should hold the published final result')
    checks.append(CheckResult('outcome_shape', not shape_problems,
                              '; '.join(shape_problems[:3]) or 'outcomes well formed'))

    if reports is None:
        present = sorted({r.experiment_id for r in measured})
        reports = [experiment_report(measured, e) for e in present]
    bad = [f'experiment {rep.experiment_id} at {row.distance_ft:g} ft'
           for rep in reports for row in rep.rows
           if not (0 <= row.passes <= row.total and row.total > 0
                   and 0.0 <= row.rate_pct <= 100.0
                   and np.isclose(row.rate_pct, 100.0 * row.passes / row.total))]
    checks.append(CheckResult('rate_bounds', not bad,
                              'rates out of bounds for ' + ', '.join(bad) if bad
                              else 'all rates within [0, 100]'))

    pairs = same_lane_overlap_pairs(records)
    not_failed = [p for p in pairs if p.final_result()]
    expected_pairs = len(LANES) * len(EXPERIMENT_DISTANCES[3])
    checks.append(CheckResult('overlap_failure', len(pairs) == expected_pairs and not not_failed,
                              f'{len(pairs)} overlapping same-lane pairs, '
                              f'{len(not_failed)} not recorded as failures'))
    return checks
