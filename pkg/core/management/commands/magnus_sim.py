"""
python manage.py magnus_sim <study> [--config path.json] [--out dir] [флаги]

Флаги командной строки перекрывают значения из JSON-конфигурации.
Коды выхода: 0 успех, 1 провалена проверка или ошибка вычислений, 2 ошибка конфигурации,
3 неубедительный результат.
"""
import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConfigError, InvalidInputError, MagnusError
from core.forms import STUDY_CHOICES
from core.studies import EXIT_CONFIG, EXIT_FAILED, EXIT_PASS, build_config, run


VERBOSITY_LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.INFO, 3: logging.DEBUG}

# флаг -> поле конфигурации
FLAG_FIELDS = {
    'n': 'n_points',
    'ns': 'n_s',
    'h_list': 'h_list',
    'm_list': 'm_list',
    'n_list': 'n_list',
    'l_list': 'l_list',
    't_total': 't_total',
    'potential': 'potential',
    'family': 'family',
    'seed': 'seed',
    'n_jobs': 'n_jobs',
    'out': 'out_dir',
}


class Command(BaseCommand):
    help = 'Run a named Magnus-expansion study and write CSV / SVG / JSON artifacts'

    def add_arguments(self, parser):
        parser.add_argument('study', choices=[name for name, _ in STUDY_CHOICES])
        parser.add_argument('--config', type=str, help='JSON config (flat or with system/sweeps/tolerances/output)')
        parser.add_argument('--out', type=str, help='Output directory')
        parser.add_argument('--n', type=int, help='Grid size N')
        parser.add_argument('--ns', type=int, help='System qubits for block-encoding studies')
        parser.add_argument('--m', type=int, help='Single quadrature point count M')
        parser.add_argument('--h-list', dest='h_list', type=str, help='Comma-separated step sizes')
        parser.add_argument('--m-list', dest='m_list', type=str, help='Comma-separated M values')
        parser.add_argument('--n-list', dest='n_list', type=str, help='Comma-separated grid sizes')
        parser.add_argument('--l-list', dest='l_list', type=str, help='Comma-separated step counts L')
        parser.add_argument('--t-total', dest='t_total', type=float, help='Total time T')
        parser.add_argument('--potential', type=str)
        parser.add_argument('--family', type=str, help='Two-level H(t) family')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--n-jobs', dest='n_jobs', type=int, help='joblib workers (threads)')
        parser.add_argument('--no-plot', action='store_true', help='Skip SVG output')

    def handle(self, *args, **options):
        logging.getLogger('core').setLevel(VERBOSITY_LEVELS.get(options['verbosity'], logging.INFO))

        document = self._load_document(options.get('config'))
        document['study'] = options['study']
        for flag, name in FLAG_FIELDS.items():
            if options.get(flag) is not None:
                document[name] = options[flag]
        if options.get('m') is not None:
            document['m_list'] = [options['m']]
        if options.get('no_plot'):
            document['plot'] = False

        try:
            config = build_config(document)
        except ConfigError as exc:
            for path, messages in sorted(exc.errors.items()):
                self.stderr.write(f"config error at {path}: {'; '.join(str(m) for m in messages)}")
            raise CommandError(str(exc), returncode=EXIT_CONFIG)

        try:
            result = run(config)
        except InvalidInputError as exc:
            # конфигурация уже прошла проверку: это ошибка входных данных самих вычислений
            raise CommandError(f"study {config.study}: invalid numerical input: {exc}", returncode=EXIT_FAILED)
        except MagnusError as exc:
            raise CommandError(f"study {config.study} aborted: {exc}", returncode=EXIT_FAILED)

        for check in result.checks:
            status = 'ok' if check.passed and check.conclusive else (
                'INCONCLUSIVE' if not check.conclusive else 'FAILED')
            self.stdout.write(f"[{status}] {check.name} {check.detail}".rstrip())
        for kind, path in result.paths.items():
            self.stdout.write(f"wrote {kind}: {path}")

        if result.exit_code != EXIT_PASS:
            raise CommandError(f"study {config.study} finished with exit code {result.exit_code}",
                               returncode=result.exit_code)
        self.stdout.write(self.style.SUCCESS(f"study {config.study}: all checks passed"))

    def _load_document(self, path):
        if not path:
            return {}
        try:
            document = json.loads(Path(path).read_text(encoding='utf-8'))
        except (OSError, json.JSONDecodeError) as exc:
            raise CommandError(f"cannot read config {path}: {exc}", returncode=EXIT_CONFIG)
        if not isinstance(document, dict):
            raise CommandError(f"config {path} must be a JSON object", returncode=EXIT_CONFIG)
        return document
