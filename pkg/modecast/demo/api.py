# flake8: noqa
from .synthetic import (
    load_synthetic_panel,
    make_multiscale_instance,
    write_synthetic_dataset
)
