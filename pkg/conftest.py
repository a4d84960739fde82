import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'pevalyzer.settings')
django.setup()
