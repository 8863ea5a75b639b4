"""Face-to-face dynamic interaction networks and DeceptionRank."""
from .behavior import BehaviorFeatures, extract_gaze_periods, gaze_entropy, participant_features
from .datio import export, ingest
from .evaluation import (
    ExperimentConfig,
    make_folds,
    run_length_sweep,
    run_main_experiment,
    run_outcome_split,
    sample_segments,
    segment_all,
)
from .features import DeceptionRankFeaturizer
from .learn import LogisticRegressionGD, auroc, bootstrap_ci
from .netcore import GameRecord, Layer, LayeredSequence, Outcome, Role, build_negative, slice_game
from .rank import RankConfig, deception_rank, init_prior, rank_scores_for_unit
from .synthetic import BehaviorConfig, generate_synthetic_dataset, generate_synthetic_game

__version__ = "0.1.0"
