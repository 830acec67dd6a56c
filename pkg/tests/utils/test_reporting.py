import re
import pandas as pd
import pytest
from utils.reporting import ReportBuilder, format_cell, horizon_frame, markdown_table, write_csv


@pytest.fixture
def ablation_table():
    return pd.DataFrame([
        {'encoder': 'dwt', 'basis': 'lucas', 'params': 1200, 'mpjpe@2': 10.123, 'converged': True},
        {'encoder': 'dct', 'basis': 'hermite', 'params': 1100, 'mpjpe@2': 11.0, 'converged': False},
    ])


def test_format_cell():
    assert format_cell(True) == 'yes'
    assert format_cell(False) == 'no'
    assert format_cell(3.14159) == '3.14'
    assert format_cell(0.0) == '0.00'
    assert format_cell(2.5e-7) == '2.50e-07'
    assert format_cell(42) == '42'
    assert format_cell('dwt') == 'dwt'


def test_horizon_frame():
    frame = horizon_frame({2: 10.0, 10: 30.0}, fps=25.0, baseline={2: 12.0, 10: 40.0})
    assert frame.columns.tolist() == ['frames', 'ms', 'mpjpe', 'baseline_mpjpe']
    assert frame['ms'].tolist() == [80.0, 400.0]
    assert frame['baseline_mpjpe'].tolist() == [12.0, 40.0]
    assert 'baseline_mpjpe' not in horizon_frame({2: 1.0}, fps=25.0).columns


def test_write_csv_uses_unix_newlines(tmp_path):
    path = tmp_path / 'nested' / 'eval.csv'
    write_csv(horizon_frame({2: 10.0}, fps=25.0), str(path))
    assert path.read_bytes() == b'frames,ms,mpjpe\n2,80.0,10.0\n'


def cells(line):
    assert line.startswith('|') and line.endswith('|')
    return [cell.strip() for cell in line[1:-1].split('|')]


def table_rows(text):
    return [cells(line) for line in text.splitlines() if line.startswith('|')]


def test_markdown_table(ablation_table):
    lines = markdown_table(ablation_table).splitlines()
    assert len(lines) == 4
    assert cells(lines[0]) == ['encoder', 'basis', 'params', 'mpjpe@2', 'converged']
    assert all(re.fullmatch(r':?-+:?', cell) for cell in cells(lines[1]))
    assert cells(lines[2]) == ['dwt', 'lucas', '1200', '10.12', 'yes']
    assert cells(lines[3]) == ['dct', 'hermite', '1100', '11.00', 'no']
    # columns line up
    assert len({len(line) for line in lines}) == 1


def test_render_ablation(ablation_table):
    text = ReportBuilder().render_ablation(
        ablation_table, horizons=[2], fps=25.0, baseline={2: 15.5},
        settings={'steps': 100},
    )
    assert text.startswith('# Ablation')
    assert '2 frames (80 ms)' in text
    assert 'steps=100' in text
    assert '@2=15.50' in text
    rows = table_rows(text)
    assert ['dwt', 'lucas', '1200', '10.12', 'yes'] in rows
    assert ['dct', 'hermite', '1100', '11.00', 'no'] in rows
    assert '## Embedding dimension' not in text
    assert '## Per sequence' not in text


def test_write_ablation_with_embedding_table(ablation_table, tmp_path):
    embed = pd.DataFrame([{'embed_dim': 16, 'mpjpe@2': 9.0}])
    path = tmp_path / 'ablation.md'
    content = ReportBuilder().write_ablation(str(path), ablation_table, [2], 25.0, {2: 15.5},
                                             embed_table=embed)
    assert path.read_text() == content
    assert '## Embedding dimension' in content
    assert ['16', '9.00'] in table_rows(content)


def test_render_ablation_with_source_table(ablation_table):
    by_source = pd.DataFrame([
        {'encoder': 'dwt', 'basis': 'lucas', 'seq_003': 21.5, 'seq_007': 30.25},
    ])
    text = ReportBuilder().render_ablation(ablation_table, [2, 10], 25.0, {2: 15.5, 10: 40.0},
                                           source_table=by_source)
    assert '## Per sequence (MPJPE at 10 frames)' in text
    rows = table_rows(text.split('## Per sequence')[1])
    assert rows[0] == ['encoder', 'basis', 'seq_003', 'seq_007']
    assert rows[2] == ['dwt', 'lucas', '21.50', '30.25']


def test_markdown_table_keeps_small_errors_readable():
    frame = pd.DataFrame({'tensor': ['w1.weight'], 'max_rel_error': [1.5e-9], 'ok': [True]})
    assert table_rows(markdown_table(frame))[2] == ['w1.weight', '1.50e-09', 'yes']
