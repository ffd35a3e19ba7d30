"""Trimbary app configuration."""

from django.apps import AppConfig


class TrimbaryConfig(AppConfig):
    """Trimmed k-barycenters of distributions in Wasserstein space."""

    name = "trimbary"
    verbose_name = "Trimmed Wasserstein barycenters"
