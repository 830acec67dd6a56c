"""
CSV and Markdown output for training histories, evaluations and ablations
"""
import os
from typing import Dict, Optional, Sequence
import pandas as pd
from jinja2 import Environment, FileSystemLoader
from tabulate import tabulate
from training.config import frames_to_ms

TEMPLATES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..', 'templates')
ABLATION_TEMPLATE = 'ablation.md.j2'


def write_csv(frame: pd.DataFrame, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n')


def horizon_frame(values: Dict[int, float], fps: float,
                  baseline: Optional[Dict[int, float]] = None) -> pd.DataFrame:
    """One row per horizon: frames, milliseconds and MPJPE (plus the baseline when given)"""
    data = {
        'frames': list(values),
        'ms': [frames_to_ms(h, fps) for h in values],
        'mpjpe': list(values.values()),
    }
    if baseline is not None:
        data['baseline_mpjpe'] = [baseline[h] for h in values]
    return pd.DataFrame(data)


class ReportBuilder:
    def __init__(self, templates_dir: str = TEMPLATES_DIR):
        self.templates_dir = templates_dir

        # Setup Jinja2 environment
        self.env = Environment(
            loader=FileSystemLoader(self.templates_dir),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters['cell'] = format_cell

    def render_ablation(self, table: pd.DataFrame, horizons: Sequence[int], fps: float,
                        baseline: Dict[int, float], embed_table: Optional[pd.DataFrame] = None,
                        settings: Optional[Dict] = None,
                        source_table: Optional[pd.DataFrame] = None) -> str:
        context = {
            'horizons': [{'frames': h, 'ms': frames_to_ms(h, fps)} for h in horizons],
            'baseline': baseline,
            'main': markdown_table(table),
            'embed': _optional_table(embed_table),
            'by_source': _optional_table(source_table),
            'longest': max(horizons),
            'settings': settings or {},
        }
        template = self.env.get_template(ABLATION_TEMPLATE)
        return template.render(**context)

    def write_ablation(self, path: str, *args, **kwargs) -> str:
        content = self.render_ablation(*args, **kwargs)
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(content)
        return content


def format_cell(value) -> str:
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, float):
        if value and abs(value) < 1e-2:
            return f'{value:.2e}'
        return f'{value:.2f}'
    return str(value)


def markdown_table(frame: pd.DataFrame) -> str:
    """Pipe-style Markdown table with cells rendered by format_cell"""
    rows = [[format_cell(value) for value in record.values()]
            for record in frame.to_dict(orient='records')]
    return tabulate(rows, headers=[str(c) for c in frame.columns], tablefmt='pipe',
                    disable_numparse=True)


def _optional_table(frame: Optional[pd.DataFrame]) -> Optional[str]:
    return markdown_table(frame) if frame is not None and len(frame) else None
