from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = 'magnus-sim-local-only'
DEBUG = False

ALLOWED_HOSTS: list = []

INSTALLED_APPS = [
    'core',
]

# Лаборатория не хранит состояние в БД: все результаты пишутся в CSV/SVG/JSON.
DATABASES: dict = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# ============================================================================
# НАСТРОЙКИ ЛАБОРАТОРИИ (MAGNUS)
# ============================================================================
# Все параметры численных экспериментов по умолчанию.
# Конфигурация конкретного исследования задаётся JSON-документом
# (см. core/forms.py), флаги командной строки переопределяют его поля.
# Переменные окружения для настройки исследований не используются.
# ============================================================================
MAGNUS_ARTIFACT_VERSION = '1.0.0'
MAGNUS_OUTPUT_DIR = BASE_DIR / 'results'

# Число процессов joblib для независимых точек развёртки (1 = последовательно)
MAGNUS_N_JOBS = 1

# Допуски на эрмитовость / антиэрмитовость / унитарность
MAGNUS_HERMITIAN_RTOL = 1e-12
MAGNUS_SKEW_RTOL = 1e-11
MAGNUS_UNITARY_RTOL = 1e-10

# Бюджеты измельчения: уровни удвоения M для omega2_exact и числа подшагов
# для reference_general
MAGNUS_QUADRATURE_MAX_LEVEL = 14
MAGNUS_REFERENCE_MAX_LEVEL = 16

# Плотная эмуляция схем: максимум кубитов (2^14 = 16384)
MAGNUS_MAX_QUBITS = 14

# Максимальное отклонение log(error) от прямой, при котором наклон принимается
MAGNUS_FIT_RESIDUAL_TOL = 0.1

MAGNUS_SEED = 20240607
MAGNUS_CSV_FLOAT_FORMAT = '%.10e'

# ============================================================================
# ЛОГИРОВАНИЕ
# ============================================================================
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}
