"""
Запись результатов исследований: CSV с фиксированной схемой и JSON-документы.
"""
import io
import json
from pathlib import Path
from typing import Any, Iterable, List, Mapping

import pandas as pd
from django.conf import settings


CSV_COLUMNS = ['study_id', 'N', 'h', 'M', 'L', 'T', 'error', 'slope', 'constant', 'deviation', 'notes']
INT_COLUMNS = ['N', 'M', 'L']
FLOAT_COLUMNS = ['h', 'T', 'error', 'slope', 'constant', 'deviation']
SORT_COLUMNS = ['N', 'h', 'M', 'L']


def rows_to_frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """Строки -> DataFrame со всеми колонками схемы; неиспользуемые остаются пустыми."""
    unknown = {key for row in rows for key in row} - set(CSV_COLUMNS)
    if unknown:
        raise ValueError(f"unknown CSV columns: {sorted(unknown)}")
    df = pd.DataFrame(list(rows), columns=CSV_COLUMNS)
    for col in INT_COLUMNS:
        df[col] = pd.array(df[col], dtype='Int64')
    for col in FLOAT_COLUMNS:
        df[col] = pd.to_numeric(df[col], errors='coerce').astype(float)
    df['study_id'] = df['study_id'].fillna('').astype(str)
    df['notes'] = df['notes'].fillna('').astype(str)
    # устойчивая сортировка: порядок вычисления точек не влияет на вывод
    return df.sort_values(SORT_COLUMNS, kind='mergesort', na_position='last').reset_index(drop=True)


def header_line(study: str, config_hash: str) -> str:
    return f"# magnus-sim {settings.MAGNUS_ARTIFACT_VERSION} study={study} config_sha256={config_hash}\n"


def export_rows_to_csv(rows: List[Mapping[str, Any]], study: str, config_hash: str) -> io.StringIO:
    output = io.StringIO()
    output.write(header_line(study, config_hash))
    rows_to_frame(rows).to_csv(output, index=False, float_format=settings.MAGNUS_CSV_FLOAT_FORMAT,
                               lineterminator='\n')
    output.seek(0)
    return output


def write_study_csv(path: Path, rows: List[Mapping[str, Any]], study: str, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(export_rows_to_csv(rows, study, config_hash).getvalue(), encoding='utf-8')
    return path


def read_study_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, sort_keys=True)
    path.write_text(text + '\n', encoding='utf-8')
    return path
