"""Discrete Bayesian network structure learning with exact log-BDe scoring
and a kriging proxy trained on sampled DAGs."""

from .counts import CountCache, Family, FamilyCounts, cached_family_counts, family_counts
from .dataset import Dataset, DatasetError, column_marginal, load_csv, write_csv
from .graph import Dag, Move, creates_cycle, edge_indicator, enumerate_moves, sample_random_dag
from .proxy import GpModel, ProxyScorer, fit, kernel_eval, predict, tune_weights
from .scoring import BdeParams, ExactScorer, ScoreLedger, delta_log_bde, family_log_bde, log_bde, log_bic
from .search import SearchTrajectory, greedy_search

__version__ = "0.1.0"
