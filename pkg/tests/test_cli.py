"""Tests of the command-line interface."""
import io
import json
import pytest
import pandas as pd
from yoloscenes import (embedded_dataset, RateRow, SuccessRateReport, CliConfig, GridConfig,
                        LossBreakdown, yolo_loss)
from yoloscenes.cli import main, cmd_validate, cmd_selfcheck, simulate_trials
from yoloscenes.selfcheck import gradient_suite


@pytest.fixture(scope='module')
def records():
    """The recorded trials."""
    return embedded_dataset()


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_validate(capsys):
    status, out, _ = run(capsys, 'validate')
    assert status == 0
    assert 'photos=507' in out
    assert 'FAIL' not in out


def test_validate_json(capsys):
    status, out, _ = run(capsys, 'validate', '--format', 'json')
    assert status == 0
    assert all(c['passed'] for c in json.loads(out))


def test_validate_missing_record(capsys, records):
    assert cmd_validate(CliConfig(), records=records[1:]) == 1
    _, err = capsys.readouterr()
    assert 'cardinality' in err


def test_validate_missing_measured_record(capsys, records):
    i = next(k for k, r in enumerate(records) if r.experiment_id == 2)
    assert cmd_validate(CliConfig(), records=records[:i] + records[i+1:]) == 1
    _, err = capsys.readouterr()
    assert 'validation failed: photo_cardinality' in err


def test_validate_bad_rate(capsys, records):
    bad = [SuccessRateReport(3, (RateRow(40, 22, 27, 181.48),))]
    assert cmd_validate(CliConfig(), records=records, reports=bad) == 1
    _, err = capsys.readouterr()
    assert 'rate_bounds' in err


def test_rates(capsys):
    status, out, _ = run(capsys, 'rates', '--experiment', '3')
    assert status == 0
    df = pd.read_csv(io.StringIO(out))
    assert list(df.columns) == ['experiment', 'distance_ft', 'passes', 'total', 'rate_pct']
    assert df[['distance_ft', 'passes', 'total']].values.tolist() == \
        [[40, 22, 27], [50, 21, 27], [60, 12, 27]]
    assert df['rate_pct'].tolist() == [81.48, 77.78, 44.44]


def test_rates_small_experiments(capsys):
    _, out, _ = run(capsys, 'rates', '--experiment', '2', '--format', 'json')
    rows = json.loads(out)['rows']
    assert rows[-1] == {'distance_ft': 60, 'passes': 3, 'total': 3, 'rate_pct': 100.0}

    _, out, _ = run(capsys, 'rates', '--experiment', '1', '--format', 'json')
    assert json.loads(out)['rows'][0]['total'] == 1


def test_rates_bad_experiment(capsys):
    status, _, _ = run(capsys, 'rates', '--experiment', '7')
    assert status == 2
    status, _, _ = run(capsys, 'rates')
    assert status == 2


def test_figure6(capsys):
    status, out, err = run(capsys, 'figure6')
    assert status == 0
    df = pd.read_csv(io.StringIO(out))
    assert df.loc[df['experiment'] == 3, 'rate_pct'].tolist() == [81.48, 77.78, 44.44]
    assert df.loc[df['experiment'] == 4, 'rate_pct'].tolist() == [94.44, 38.89, 16.67]
    assert err.count('note:') == 2

    assert run(capsys, 'figure6')[1] == out


def test_figure6_json(capsys, tmp_path):
    path = tmp_path / 'figure6.json'
    status, out, _ = run(capsys, 'figure6', '--format', 'json', '--output', str(path))
    assert status == 0
    assert out == ''
    reports = json.loads(path.read_text(encoding='utf-8'))
    assert [r['experiment'] for r in reports] == [3, 4]
    assert reports[0]['notes'] == []
    assert len(reports[1]['notes']) == 2


def test_simulate(capsys):
    status, out, _ = run(capsys, 'simulate', '--experiment', '3', '--distance', '40')
    assert status == 0
    df = pd.read_csv(io.StringIO(out))
    assert len(df) == 27
    assert {'person_x', 'car_w', 'overlap', 'encoded', 'detected', 'recovered'} <= set(df.columns)


def test_simulate_recovers_objects():
    rows = simulate_trials(CliConfig(), 3, 40)
    assert len(rows) == 27
    for row in rows:
        if not row['overlap'] and not row['conflict']:
            assert row['recovered']
            assert row['detected'] == row['encoded']


def test_simulate_middle_lane():
    for experiment in (1, 2):
        for row in simulate_trials(CliConfig(), experiment, 30):
            for kind in ('person', 'car'):
                if row[f'{kind}_lane'] == 'Middle':
                    assert row[f'{kind}_x'] == 0.5


def test_simulate_bad_distance(capsys):
    status, _, err = run(capsys, 'simulate', '--experiment', '3', '--distance', '10')
    assert status == 2
    assert 'distance' in err


def test_simulate_small_grid():
    with pytest.raises(ValueError):
        simulate_trials(CliConfig(grid=GridConfig(7, 2, 10)), 3, 40)


def test_config_flag(capsys, tmp_path):
    path = tmp_path / 'bad.toml'
    path.write_text('unknown_key = 1\n', encoding='utf-8')
    status, _, err = run(capsys, 'validate', '--config', str(path))
    assert status == 2
    assert 'unknown_key' in err


def test_selfcheck(capsys):
    status, out, _ = run(capsys, 'selfcheck', '--seed', '0')
    assert status == 0
    assert out.count('PASS') == 3


def test_selfcheck_failure(capsys):
    def perturbed(prediction, target, weights, assignment=None):
        loss = yolo_loss(prediction, target, weights, assignment)
        return LossBreakdown.from_parts(loss.coord_xy * 1.01, loss.coord_wh, loss.conf_obj,
                                        loss.conf_noobj, loss.classification)

    def runner(seed, progress):
        return [gradient_suite(loss_fn=perturbed, seed=seed, instances=5, progress=progress)]

    assert cmd_selfcheck(CliConfig(), runner=runner) == 1
    _, err = capsys.readouterr()
    assert 'gradient' in err


def test_zero_lane_spacing(capsys, tmp_path):
    path = tmp_path / 'scene.toml'
    path.write_text('lane_spacing_ft = 0\n', encoding='utf-8')
    status, _, err = run(capsys, 'validate', '--config', str(path))
    assert status == 2
    assert 'lane_spacing_ft' in err


def test_simulate_out_of_frame():
    rows = simulate_trials(CliConfig(), 3, 40)
    out = [r for r in rows if not r['person_in_frame']]
    assert len(out) == 12
    assert all(r['overlap'] is None and r['encoded'] == 1 for r in out)


def test_simulate_all_in_frame():
    rows = simulate_trials(CliConfig(scene={'focal_scale': 0.38}), 3, 40)
    assert all(r['person_in_frame'] and r['car_in_frame'] for r in rows)
    assert all(r['overlap'] is not None for r in rows)
    for row in rows:
        if not row['overlap'] and not row['conflict']:
            assert row['recovered']
            assert row['encoded'] == 2
