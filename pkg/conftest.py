import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'magnus_sim.settings')
django.setup()
