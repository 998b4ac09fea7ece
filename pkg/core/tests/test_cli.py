import io
import json
import logging
import tempfile
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from core.exceptions import ConfigError, InvalidInputError
from core.forms import load_study_config
from core.management.commands.magnus_sim import VERBOSITY_LEVELS
from core.studies import EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_PASS, Check, StudyResult, build_config
from core.utils.export import export_rows_to_csv, read_study_csv, rows_to_frame, write_study_csv
from core.utils.plotting import PanelSpec, PlotSpec, emit_plot


class StudyConfigTests(SimpleTestCase):
    def test_sectioned_document(self):
        cfg = load_study_config({
            'study': 'superconvergence',
            'system': {'n_points': 64, 'potential': 'gaussian_bump'},
            'sweeps': {'h_list': [0.2, 0.1, 0.05, 0.025]},
            'output': {'out_dir': '/tmp/x', 'plot': False},
        })
        self.assertEqual(cfg.n_points, 64)
        self.assertEqual(cfg.potential, 'gaussian_bump')
        self.assertEqual(cfg.h_list, (0.2, 0.1, 0.05, 0.025))
        self.assertFalse(cfg.plot)

    def test_errors_carry_field_paths(self):
        with self.assertRaises(ConfigError) as ctx:
            load_study_config({
                'study': 'superconvergence',
                'sweeps': {'h_list': [0.1, 0.2, 0.15], 'bogus': 1},
                'system': {'n_points': 1},
            })
        errors = ctx.exception.errors
        self.assertIn('sweeps.h_list', errors)
        self.assertIn('sweeps.bogus', errors)
        self.assertIn('system.n_points', errors)
        self.assertIsInstance(ctx.exception, InvalidInputError)

    def test_block_encoding_needs_power_of_two(self):
        with self.assertRaises(ConfigError) as ctx:
            load_study_config({'study': 'block_encoding', 'm_list': [2, 3]})
        self.assertIn('sweeps.m_list', ctx.exception.errors)
        cfg = load_study_config({'study': 'quadrature', 'm_list': '3,5,7,9'})
        self.assertEqual(cfg.m_list, (3, 5, 7, 9))

    def test_unknown_study(self):
        with self.assertRaises(ConfigError) as ctx:
            load_study_config({'study': 'lindblad'})
        self.assertIn('study', ctx.exception.errors)

    def test_study_defaults_and_hash(self):
        cfg = build_config({'study': 'general_order'})
        self.assertEqual(cfg.h_list, (0.4, 0.2, 0.1, 0.05, 0.025))
        self.assertEqual(cfg.family, 'bloch_cos')
        moved = build_config({'study': 'general_order', 'out_dir': '/elsewhere', 'n_jobs': 4})
        self.assertEqual(cfg.config_hash(), moved.config_hash())
        changed = build_config({'study': 'general_order', 't_total': 2.0})
        self.assertNotEqual(cfg.config_hash(), changed.config_hash())
        self.assertEqual(len(cfg.config_hash()), 64)


class ExportTests(SimpleTestCase):
    ROWS = [
        {'study_id': 's', 'N': 128, 'h': 0.1, 'error': 1e-6},
        {'study_id': 's', 'N': 64, 'h': 0.2, 'error': 2e-5},
        {'study_id': 's', 'N': 64, 'h': 0.1, 'error': 3e-6, 'notes': 'x'},
    ]

    def test_rows_sorted_and_typed(self):
        df = rows_to_frame(self.ROWS)
        self.assertEqual(list(df['N']), [64, 64, 128])
        self.assertEqual(list(df['h']), [0.1, 0.2, 0.1])
        self.assertEqual(str(df['M'].dtype), 'Int64')

    def test_unknown_column(self):
        with self.assertRaises(ValueError):
            rows_to_frame([{'study_id': 's', 'speed': 1.0}])

    def test_header_and_float_format(self):
        text = export_rows_to_csv(self.ROWS, 'demo', 'abc123').getvalue()
        lines = text.splitlines()
        self.assertTrue(lines[0].startswith('# magnus-sim '))
        self.assertIn('study=demo', lines[0])
        self.assertIn('config_sha256=abc123', lines[0])
        self.assertEqual(lines[1], 'study_id,N,h,M,L,T,error,slope,constant,deviation,notes')
        self.assertIn('3.0000000000e-06', lines[2])

    def test_round_trip_through_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_study_csv(Path(tmp) / 'nested' / 'demo.csv', self.ROWS, 'demo', 'abc')
            df = read_study_csv(path)
        self.assertEqual(len(df), 3)
        self.assertAlmostEqual(df['error'].iloc[0], 3e-6)


class PlottingTests(SimpleTestCase):
    def test_svg_is_reproducible(self):
        spec = PlotSpec((PanelSpec('s', 'h', 'error'),))
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = write_study_csv(Path(tmp) / 'demo.csv', ExportTests.ROWS, 'demo', 'abc')
            first = emit_plot(csv_path, spec, Path(tmp) / 'a.svg').read_bytes()
            second = emit_plot(csv_path, spec, Path(tmp) / 'b.svg').read_bytes()
        self.assertEqual(first, second)
        self.assertIn(b'<svg', first)

    def test_missing_column(self):
        spec = PlotSpec((PanelSpec('s', 'h', 'speed'),))
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = write_study_csv(Path(tmp) / 'demo.csv', ExportTests.ROWS, 'demo', 'abc')
            with self.assertRaises(InvalidInputError):
                emit_plot(csv_path, spec)


class ExitCodeTests(SimpleTestCase):
    def test_exit_code_precedence(self):
        result = StudyResult('demo', checks=[Check('a', True)])
        self.assertEqual(result.exit_code, EXIT_PASS)
        result.checks.append(Check('b', False, conclusive=False))
        self.assertEqual(result.exit_code, EXIT_INCONCLUSIVE)
        result.checks.append(Check('c', False))
        self.assertEqual(result.exit_code, EXIT_FAILED)


class CommandTests(SimpleTestCase):
    def run_command(self, *args, **options):
        out = io.StringIO()
        call_command('magnus_sim', *args, stdout=out, stderr=io.StringIO(), verbosity=0, **options)
        return out.getvalue()

    def test_resources_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('resources', out=tmp)
            df = read_study_csv(Path(tmp) / 'resources.csv')
            header = (Path(tmp) / 'resources.csv').read_text().splitlines()[0]
        self.assertIn('all checks passed', output)
        self.assertEqual(int((df['study_id'] == 'resources').sum()), 100)
        self.assertEqual(int((df['study_id'] == 'table1').sum()), 3)
        self.assertIn('study=resources', header)

    def test_verbosity_levels(self):
        self.assertEqual(VERBOSITY_LEVELS[0], logging.WARNING)
        self.assertEqual(VERBOSITY_LEVELS[2], logging.INFO)
        self.assertEqual(VERBOSITY_LEVELS[3], logging.DEBUG)

    def test_config_error_exit_code(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.run_command('block_encoding', out=tmp, m_list='3,5')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unreadable_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            bad = Path(tmp) / 'bad.json'
            bad.write_text('{not json')
            with self.assertRaises(CommandError) as ctx:
                self.run_command('resources', config=str(bad), out=tmp)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_short_m_list_is_input_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg_path = Path(tmp) / 'cfg.json'
            cfg_path.write_text(json.dumps({'sweeps': {'h_list': [0.1]}, 'system': {'family': 'bloch_linear'}}))
            with self.assertRaises(CommandError) as ctx:
                self.run_command('quadrature', config=str(cfg_path), out=tmp, m_list='4,8')
        # флаг перекрывает файл; двух точек M мало для аппроксимации
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('invalid numerical input', str(ctx.exception))

    @tag('slow')
    def test_block_encoding_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('block_encoding', out=tmp, no_plot=True)
            gates = json.loads((Path(tmp) / 'block_encoding_gates.json').read_text())
            df = read_study_csv(Path(tmp) / 'block_encoding.csv')
        self.assertIn('all checks passed', output)
        self.assertIn('registers', gates)
        self.assertEqual(sorted(df[df['study_id'] == 'block_encoding']['M'].tolist()), [2, 4])

    @tag('slow')
    def test_superconvergence_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('superconvergence', out=tmp, no_plot=True)
            df = read_study_csv(Path(tmp) / 'superconvergence.csv')
        self.assertIn('all checks passed', output)
        local = df[df['study_id'] == 'superconvergence_local']
        glob = df[df['study_id'] == 'superconvergence_global']
        self.assertEqual(set(local['N']), {128})
        self.assertTrue(4.7 <= local['slope'].iloc[0] <= 5.3)
        self.assertTrue(3.7 <= glob['slope'].iloc[0] <= 4.3)
        grid = df[df['study_id'] == 'superconvergence_preconstant']
        self.assertEqual(sorted(grid['N'].tolist()), [64, 128, 256])
        self.assertLessEqual(grid['constant'].max(), 2 * grid['constant'].min())

    @tag('slow')
    def test_qhop_baseline_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('qhop_baseline', out=tmp, no_plot=True)
            df = read_study_csv(Path(tmp) / 'qhop_baseline.csv')
        self.assertIn('all checks passed', output)
        self.assertTrue(2.7 <= df[df['study_id'] == 'qhop_baseline_local']['slope'].iloc[0] <= 3.3)
        self.assertTrue(1.7 <= df[df['study_id'] == 'qhop_baseline_global']['slope'].iloc[0] <= 2.3)
        self.assertFalse((df['study_id'] == 'qhop_baseline_preconstant').any())

    @tag('slow')
    def test_general_order_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('general_order', out=tmp, no_plot=True)
            df = read_study_csv(Path(tmp) / 'general_order.csv')
        self.assertIn('all checks passed', output)
        self.assertEqual(set(df['study_id']), {'general_local', 'switching_local', 'general_global'})
        self.assertTrue(4.7 <= df[df['study_id'] == 'general_local']['slope'].iloc[0] <= 5.3)

    @tag('slow')
    def test_quadrature_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('quadrature', out=tmp, no_plot=True)
            df = read_study_csv(Path(tmp) / 'quadrature.csv')
        self.assertIn('all checks passed', output)
        interaction = df[df['study_id'] == 'quadrature_interaction']
        self.assertEqual(sorted(interaction['M'].tolist()), [4, 8, 16, 32, 64])
        self.assertTrue(interaction['notes'].str.startswith('bound=').all())

    @tag('slow')
    def test_commutators_fig1_study(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_command('commutators_fig1', out=tmp, no_plot=True)
            df = read_study_csv(Path(tmp) / 'commutators_fig1.csv')
        self.assertIn('all checks passed', output)
        key = df[df['study_id'] == 'fig1b_key_commutator']
        self.assertEqual(sorted(set(key['N'])), [64, 128, 256])
        self.assertTrue((key['error'] > 1e-8).all())
        taylor = df[(df['study_id'] == 'fig1a_taylor') & (df['T'] == 1.0)].sort_values('N')
        self.assertGreaterEqual(taylor['error'].iloc[-1], 2 * taylor['error'].iloc[0])
