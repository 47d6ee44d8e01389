from django.apps import AppConfig


class ParameterizeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'parameterize'
