"""newspod: automatically generated, interactive news podcasts."""

__version__ = "0.1.0"
