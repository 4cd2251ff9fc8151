from .metrics import (
    CvResult, GridResult, PRESET_GRID, RULES, accuracy, cross_validate, cross_validate_wltsvm,
    expand_grid, grid_search, params_for,
)
from .stats import Q_ALPHA_005, RankTable, average_ranks, friedman_p_value, friedman_statistic, nemenyi_cd

__all__ = [
    "CvResult", "GridResult", "PRESET_GRID", "RULES", "accuracy", "cross_validate", "cross_validate_wltsvm",
    "expand_grid", "grid_search", "params_for", "Q_ALPHA_005", "RankTable", "average_ranks",
    "friedman_p_value", "friedman_statistic", "nemenyi_cd",
]
