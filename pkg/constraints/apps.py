from django.apps import AppConfig


class ConstraintsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'constraints'
    verbose_name = 'Restrições e solver'
