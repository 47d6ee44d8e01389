from django.apps import AppConfig


class IsingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ising'
