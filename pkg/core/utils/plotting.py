"""
Детерминированные SVG-графики по CSV исследований.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from core.exceptions import InvalidInputError
from core.utils.export import read_study_csv


# Цвета серий фиксированы по порядку возрастания N
SERIES_COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b', '#17becf']
FIGURE_SIZE = (5.0, 4.0)


@dataclass(frozen=True)
class PanelSpec:
    study_id: str
    x: str
    y: str
    xscale: str = 'log'
    yscale: str = 'log'
    title: str = ''
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None


@dataclass(frozen=True)
class PlotSpec:
    panels: Tuple[PanelSpec, ...]


def _configure_determinism() -> None:
    matplotlib.rcParams['svg.hashsalt'] = 'magnus-sim'
    matplotlib.rcParams['svg.fonttype'] = 'path'


def emit_plot(csv_path: Path, spec: PlotSpec, svg_path: Optional[Path] = None) -> Path:
    """Рисует панели spec по данным CSV; серии группируются по N."""
    df = read_study_csv(csv_path)
    required = {'study_id', 'N'} | {p.x for p in spec.panels} | {p.y for p in spec.panels}
    missing = required - set(df.columns)
    if missing:
        raise InvalidInputError(f"CSV {csv_path} is missing columns: {', '.join(sorted(missing))}")

    _configure_determinism()
    fig, axes = plt.subplots(1, len(spec.panels), figsize=(FIGURE_SIZE[0] * len(spec.panels), FIGURE_SIZE[1]),
                             squeeze=False)
    for ax, panel in zip(axes[0], spec.panels):
        data = df[df['study_id'] == panel.study_id].dropna(subset=[panel.x, panel.y])
        if panel.yscale == 'log':
            data = data[data[panel.y] > 0]
        groups = sorted(data['N'].dropna().unique())
        series = [(n, data[data['N'] == n]) for n in groups] or [(None, data)]
        for idx, (n, part) in enumerate(series):
            part = part.sort_values(panel.x, kind='mergesort')
            ax.plot(part[panel.x], part[panel.y], marker='o', markersize=3, linewidth=1,
                    color=SERIES_COLORS[idx % len(SERIES_COLORS)],
                    label=f'N={int(n)}' if n is not None else panel.study_id)
        ax.set_xscale(panel.xscale)
        ax.set_yscale(panel.yscale)
        ax.set_xlabel(panel.xlabel or panel.x)
        ax.set_ylabel(panel.ylabel or panel.y)
        if panel.title:
            ax.set_title(panel.title)
        if len(data):
            ax.legend(loc='best', fontsize='small')
    svg_path = Path(svg_path) if svg_path else Path(csv_path).with_suffix('.svg')
    fig.tight_layout()
    fig.savefig(svg_path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return svg_path
