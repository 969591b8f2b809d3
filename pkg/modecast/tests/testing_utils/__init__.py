# flake8: noqa
from .panel_utils import (
    make_panel,
    random_graph,
    simulate_arma
)
from .rank_utils import permutation_p_values
