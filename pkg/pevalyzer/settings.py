"""
Django settings for pevalyzer project.

Generated by 'django-admin startproject' using Django 5.2.6.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""
import os
from pathlib import Path

import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


env = environ.Env(
    DEBUG=(bool, False),
    PEVAL_SOLVER=(str, 'z3'),
    PEVAL_SOLVER_ARGS=(str, '-in -smt2'),
    PEVAL_SOLVER_TIMEOUT=(float, 10.0),
    PEVAL_OPTIMIZE=(str, 'alternating'),
    PEVAL_BISECT_STEPS=(int, 16),
    PEVAL_TEMPLATE_KIND=(str, 'auto'),
    PEVAL_TEMPLATE_LOGICALS=(int, 1),
    PEVAL_TEMPLATE_GUARDED=(bool, True),
    PEVAL_INSTANTIATE_LOCALS=(bool, False),
    PEVAL_HANDELMAN_DEGREE=(int, None),
    PEVAL_CHECK_TRIALS=(int, 2000),
    PEVAL_SEED=(int, 0),
    PEVAL_ORACLE_DEPTH=(int, 12),
    PEVAL_ORACLE_UNROLL=(int, 200),
    PEVAL_ORACLE_STATE_CAP=(int, 200000),
    PEVAL_MC_SAMPLES=(int, 100000),
    PEVAL_MC_MAXDEPTH=(int, 1000),
    PEVAL_MC_MAXSTEPS=(int, 100000),
    PEVAL_MC_CHUNK=(int, 1000),
    PEVAL_MC_NONDET_SUBSAMPLES=(int, 8),
    PEVAL_WORKERS=(int, 1),
    PEVAL_LOG_LEVEL=(str, 'WARNING'),
)
# Variáveis locais de desenvolvimento (opcional)
dev_env = os.path.join(BASE_DIR, 'pevalyzer/.env')
if os.path.exists(dev_env):
    env.read_env(dev_env)

DEBUG = env('DEBUG')

# Não há superfície web: a chave só existe porque o Django exige.
SECRET_KEY = 'django-insecure-pevalyzer-offline-analysis-only'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'common',
    'frontend',
    'terms',
    'templating',
    'transformer',
    'constraints',
    'oracle',
    'analysis',
]

MIDDLEWARE = []


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases
# Nenhum model é persistido; os testes usam SimpleTestCase.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': Path(__file__).resolve().parent.parent / 'db.sqlite3',
    }
}


CACHES = {
    "default": {
        "BACKEND": "django.core.cache.backends.dummy.DummyCache",
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'pt-br'

TIME_ZONE = 'America/Sao_Paulo'
USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# REST Framework settings (apenas serializers e renderers para os relatórios JSON)
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
}


# Analisador
PEVALYZER = {
    'SOLVER': env('PEVAL_SOLVER'),
    'SOLVER_ARGS': env('PEVAL_SOLVER_ARGS').split(),
    'SOLVER_TIMEOUT': env('PEVAL_SOLVER_TIMEOUT'),
    'OPTIMIZE': env('PEVAL_OPTIMIZE'),
    'BISECT_STEPS': env('PEVAL_BISECT_STEPS'),
    'TEMPLATE_KIND': env('PEVAL_TEMPLATE_KIND'),
    'TEMPLATE_LOGICALS': env('PEVAL_TEMPLATE_LOGICALS'),
    'TEMPLATE_GUARDED': env('PEVAL_TEMPLATE_GUARDED'),
    'INSTANTIATE_LOCALS': env('PEVAL_INSTANTIATE_LOCALS'),
    'HANDELMAN_DEGREE': env('PEVAL_HANDELMAN_DEGREE'),
    'CHECK_TRIALS': env('PEVAL_CHECK_TRIALS'),
    'SEED': env('PEVAL_SEED'),
    'ORACLE_DEPTH': env('PEVAL_ORACLE_DEPTH'),
    'ORACLE_UNROLL': env('PEVAL_ORACLE_UNROLL'),
    'ORACLE_STATE_CAP': env('PEVAL_ORACLE_STATE_CAP'),
    'MC_SAMPLES': env('PEVAL_MC_SAMPLES'),
    'MC_MAXDEPTH': env('PEVAL_MC_MAXDEPTH'),
    'MC_MAXSTEPS': env('PEVAL_MC_MAXSTEPS'),
    'MC_CHUNK': env('PEVAL_MC_CHUNK'),
    'MC_NONDET_SUBSAMPLES': env('PEVAL_MC_NONDET_SUBSAMPLES'),
    'WORKERS': env('PEVAL_WORKERS'),
}

BENCHMARKS_DIR = os.path.join(BASE_DIR, 'benchmarks')


# Logging configuration

PEVAL_LOG_LEVEL = env('PEVAL_LOG_LEVEL').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': PEVAL_LOG_LEVEL,
            'propagate': False,
        }
        for app in ('common', 'frontend', 'terms', 'templating', 'transformer',
                    'constraints', 'oracle', 'analysis', 'pevalyzer')
    },
}
