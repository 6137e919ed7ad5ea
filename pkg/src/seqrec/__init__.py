"""Sequence-based collaborative filtering.

Rating histories become per-user item sequences; gated recurrent networks
(plus Markov-chain and nearest-neighbor baselines) are trained for
next-item recommendation and judged on short-term (sps@k) and long-term
(recall/precision@k) metrics with user and item coverage.
"""

from .baselines import KnnRecommender, MarkovRecommender, cosine_similarity, oracle_curve
from .dataset import (DatasetSplit, Interaction, InteractionLog, PopularityTable,
                      SideFeatures, UserSequence, build_popularity, half_split,
                      load_ratings, load_side_features, split_users)
from .gradcheck import gradient_check
from .harness import InputEncoder, RnnRecommender, TrainConfig, TrainingLog, evaluate, grid_search, train
from .metrics import EvaluationReport, aggregate, precision_at_k, recall_at_k, sps_at_k
from .model_io import load_model, save_model
from .network import (Network, NetworkConfig, NumericFault, diversity_loss,
                      softmax, xent_loss)
from .optimize import Optimizer, OptimizerConfig

__version__ = "0.1.0"
