"""
Проверка JSON-конфигурации исследования.

Документ может быть плоским ({"h_list": [...]}) или разбитым на секции
system / sweeps / tolerances / output; ошибки возвращаются с путём поля.
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from django import forms
from django.conf import settings

from core.exceptions import ConfigError
from core.physics.operators import POTENTIALS, TWO_LEVEL_FAMILIES


STUDY_CHOICES = [
    ('superconvergence', 'Superconvergence in the interaction picture'),
    ('qhop_baseline', 'First-order Magnus baseline'),
    ('general_order', 'Truncation order for general H(t)'),
    ('quadrature', 'Riemann quadrature error'),
    ('commutators_fig1', 'Taylor term and key commutator norms'),
    ('block_encoding', 'Block encoding and LCU circuit'),
    ('resources', 'Resource calculator'),
]

POTENTIAL_CHOICES = [(name, name) for name in sorted(POTENTIALS)]
FAMILY_CHOICES = [(name, name) for name in sorted(TWO_LEVEL_FAMILIES)]

SECTIONS: Dict[str, Tuple[str, ...]] = {
    'system': ('n_points', 'potential', 'domain_length', 'family', 'n_s'),
    'sweeps': ('h_list', 'm_list', 'n_list', 'l_list', 't_total', 't_step'),
    'tolerances': ('fit_residual', 'reference_tol'),
    'output': ('out_dir', 'plot'),
}
FIELD_PATHS = {name: f'{section}.{name}' for section, names in SECTIONS.items() for name in names}


class NumberListField(forms.Field):
    """Непустой строго монотонный список положительных чисел (JSON-список или строка через запятую)."""

    def __init__(self, *, number_type=float, **kwargs):
        self.number_type = number_type
        kwargs.setdefault('required', False)
        super().__init__(**kwargs)

    def to_python(self, value):
        if value is None:
            return None
        if isinstance(value, str):
            value = [part for part in (p.strip() for p in value.split(',')) if part]
        if not isinstance(value, (list, tuple)):
            raise forms.ValidationError('must be a list of numbers')
        if len(value) == 0:
            raise forms.ValidationError('must be a nonempty list')
        try:
            numbers = [self.number_type(v) for v in value]
        except (TypeError, ValueError):
            raise forms.ValidationError(f'entries must be {self.number_type.__name__} values')
        if self.number_type is int and any(float(v) != int(float(v)) for v in value):
            raise forms.ValidationError('entries must be integers')
        return numbers

    def validate(self, value):
        if value is None:
            return
        if any(v <= 0 for v in value):
            raise forms.ValidationError('entries must be positive')
        if len(value) > 1:
            steps = [b - a for a, b in zip(value, value[1:])]
            if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
                raise forms.ValidationError('entries must be strictly monotone')


class StudyConfigForm(forms.Form):
    study = forms.ChoiceField(choices=STUDY_CHOICES)

    n_points = forms.IntegerField(required=False, min_value=2)
    potential = forms.ChoiceField(required=False, choices=POTENTIAL_CHOICES)
    domain_length = forms.FloatField(required=False, min_value=1e-12)
    family = forms.ChoiceField(required=False, choices=FAMILY_CHOICES)
    n_s = forms.IntegerField(required=False, min_value=1, max_value=3)

    h_list = NumberListField()
    m_list = NumberListField(number_type=int)
    n_list = NumberListField(number_type=int)
    l_list = NumberListField(number_type=int)
    t_total = forms.FloatField(required=False, min_value=1e-12)
    t_step = forms.FloatField(required=False, min_value=1e-6)

    fit_residual = forms.FloatField(required=False, min_value=1e-6)
    reference_tol = forms.FloatField(required=False, min_value=1e-18)

    seed = forms.IntegerField(required=False, min_value=0)
    n_jobs = forms.IntegerField(required=False)
    out_dir = forms.CharField(required=False)
    plot = forms.NullBooleanField(required=False)

    def clean_m_list(self):
        m_list = self.cleaned_data.get('m_list')
        if m_list and self.data.get('study') == 'block_encoding':
            bad = [m for m in m_list if m < 2 or m & (m - 1)]
            if bad:
                raise forms.ValidationError(f'M must be a power of two >= 2, got {bad}')
        return m_list

    def clean(self):
        cleaned = super().clean()
        n_list = cleaned.get('n_list')
        if n_list and any(n < 2 for n in n_list):
            self.add_error('n_list', 'grid sizes must be >= 2')
        return cleaned


def flatten_config(document: Dict[str, Any]) -> Tuple[Dict[str, Any], Dict[str, List[str]]]:
    """Разворачивает секции; неизвестные ключи попадают в ошибки."""
    flat: Dict[str, Any] = {}
    errors: Dict[str, List[str]] = {}
    known = set(StudyConfigForm.base_fields)
    for key, value in document.items():
        if key in SECTIONS:
            if not isinstance(value, dict):
                errors[key] = ['must be an object']
                continue
            for inner, inner_value in value.items():
                if inner not in SECTIONS[key]:
                    errors[f'{key}.{inner}'] = ['unknown field']
                else:
                    flat[inner] = inner_value
        elif key in known:
            flat[key] = value
        else:
            errors[key] = ['unknown field']
    return flat, errors


@dataclass(frozen=True)
class StudyConfig:
    study: str
    n_points: int = 128
    potential: str = 'cos'
    domain_length: float = 6.283185307179586
    family: str = 'bloch_cos'
    n_s: int = 1
    h_list: Tuple[float, ...] = ()
    m_list: Tuple[int, ...] = ()
    n_list: Tuple[int, ...] = ()
    l_list: Tuple[int, ...] = ()
    t_total: float = 1.0
    t_step: float = 0.01
    fit_residual: float = 0.1
    reference_tol: Optional[float] = None
    seed: int = field(default_factory=lambda: settings.MAGNUS_SEED)
    n_jobs: Optional[int] = None
    out_dir: str = ''
    plot: bool = True

    def canonical(self) -> Dict[str, Any]:
        data = asdict(self)
        # путь вывода и флаги исполнения не влияют на содержимое артефактов
        for key in ('out_dir', 'plot', 'n_jobs'):
            data.pop(key)
        return data

    def config_hash(self) -> str:
        payload = json.dumps(self.canonical(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()


def load_study_config(document: Dict[str, Any], defaults: Optional[Dict[str, Any]] = None) -> StudyConfig:
    """Проверяет документ формой и накладывает значения по умолчанию исследования."""
    flat, errors = flatten_config(document)
    form = StudyConfigForm(data=flat)
    if not form.is_valid():
        for name, messages in form.errors.items():
            errors[FIELD_PATHS.get(name, name)] = list(messages)
    if errors:
        raise ConfigError(errors)

    values = dict(defaults or {})
    for name, value in form.cleaned_data.items():
        if name in flat and value is not None and value != '':
            values[name] = tuple(value) if isinstance(value, list) else value
    values['study'] = form.cleaned_data['study']
    if not values.get('out_dir'):
        values['out_dir'] = str(settings.MAGNUS_OUTPUT_DIR)
    return replace(StudyConfig(study=values.pop('study')), **values)
