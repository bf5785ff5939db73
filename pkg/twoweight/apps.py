from django.apps import AppConfig


class TwoweightConfig(AppConfig):
    name = 'twoweight'
    verbose_name = 'Two-weight bounds for the multilinear maximal operator'
